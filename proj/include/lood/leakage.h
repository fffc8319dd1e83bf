/*
 * Copyright 2026 The LOOD Toolkit Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#ifndef LOOD_LEAKAGE_H_
#define LOOD_LEAKAGE_H_

#include <cstdint>
#include <optional>
#include <vector>

#include "lood/gp.h"
#include "lood/kernels.h"
#include "lood/query_opt.h"

namespace lood {

struct MiaResult {
  double auc = 0.5;
  int n_samples = 0;
  std::uint64_t seed = 0;
};

// Draws n_samples from each posterior (D' is the positive class), scores
// them by log N(x; mu', Sigma') - log N(x; mu, Sigma) and returns the
// Mann-Whitney AUC with ties counted as one half.
MiaResult MiaAuc(const PosteriorSummary& post_d_at_s,
                 const PosteriorSummary& post_dp_at_s, int n_samples,
                 std::uint64_t seed);

// Mann-Whitney AUC of positives over negatives.
double RankAuc(const std::vector<double>& positives,
               const std::vector<double>& negatives);

// Average ranks (1-based), ties sharing the mean rank.
std::vector<double> AverageRanks(const std::vector<double>& values);

// Pearson correlation; empty when either side has zero variance.
std::optional<double> Pearson(const std::vector<double>& a,
                              const std::vector<double>& b);
std::optional<double> Spearman(const std::vector<double>& a,
                               const std::vector<double>& b);

struct CorrelationRow {
  int index = 0;
  double kl = 0.0;
  double log_kl = 0.0;
  double auc = 0.5;
};

struct CorrelationReport {
  std::vector<CorrelationRow> rows;
  std::optional<double> pearson;
  std::optional<double> spearman;
  // |top-k by kl intersect top-k by auc| with k = min(10, rows).
  int top_k = 0;
  int top_k_overlap = 0;
};

// One candidate per row of candidate_features.
CorrelationReport LoodAucCorrelation(const KernelSpec& spec,
                                     const Dataset& data,
                                     const Matrix& candidate_features,
                                     const Vector& candidate_labels,
                                     int n_samples, std::uint64_t seed);

// Leakage bound for a kernel close to the constant alpha on D'.
//
// With n = |D|, t = Sigma_D(S), e = y_S - mu_D(S) and v = t + sigma^2, the
// single-record KL at any query is at most its value at Q = S,
//   KL(S) = 1/2 [t/sigma^2 - log(1 + t/sigma^2) + e^2 t / (sigma^2 v)]
//         <= t (t/2 + e^2) / (2 sigma^4).
// For the constant kernel alpha 11^T, t0 = alpha sigma^2 / (sigma^2 + n alpha)
// <= sigma^2 / n and |e| <= 2 zeta, which gives B / n with
//   B = 1/4 + 2 zeta^2 / sigma^2.
// Entries within h of alpha perturb t and e by
//   |t - t0| <= c1 h,  c1 = 1 + n (3 alpha + h) / sigma^2,
//   |e| <= e_bar = 2 zeta (1 + n h / sigma^2),  t <= t_bar,
// using ||M^{-1}|| <= 1/sigma^2, ||K_DD - alpha 11^T|| <= n h and
// ||(alpha 11^T + sigma^2 I)^{-1} alpha 1|| <= 1/sqrt(n). Collecting terms,
//   A_n = c1 (t_bar + e_bar^2) / (2 sigma^4)
//       + t0 4 zeta^2 n (2 + n h / sigma^2) / (2 sigma^6),
// with t_bar = min(t0 + c1 h, alpha + h), and KL <= A_n h + B / n.
struct LowRankReport {
  double alpha_min = 0.0;
  double h_alpha_min = 0.0;
  int n = 0;
  double zeta = 0.0;
  double noise_variance = 0.0;
  double a_n = 0.0;
  double b = 0.0;
  double bound = 0.0;
  double observed_max_lood = 0.0;
  int observed_argmax = 0;
};

// Requires s = 1 and n >= 1. Throws kAlphaNonpositive when the midpoint of
// the kernel entries over D' is <= 0.
LowRankReport LowRankAnalysis(const KernelSpec& spec,
                              const LeaveOneOutPair& pair,
                              const Matrix& query_grid);

struct ActivationScanResult {
  Activation activation = Activation::kRelu;
  std::vector<int> depths;
  std::vector<double> kernel_values;
  std::vector<double> distances;
  double alpha = 0.0;
  int rate_hypothesis = 0;  // p in K^L - alpha ~ L^{-p}
  double fitted_slope = 0.0;
  bool degenerate = false;
  // Depth at which successive extrapolated limits agreed.
  int limit_depth = 0;
};

struct ActivationScanOptions {
  double limit_tol = 1e-6;
  int max_limit_depth = 1 << 16;
};

// Runs the depth recursion on the pair (x, xp), estimates the depth limit
// alpha by Richardson extrapolation of K at doubled depths starting from the
// two largest scanned ones (rate p in {1, 2}, the p whose fitted slope is
// closest to -p wins) and fits log|K^L - alpha| against log L.
ActivationScanResult ActivationScan(const NngpFcSpec& tmpl,
                                    const std::vector<int>& depths,
                                    const Vector& x, const Vector& xp,
                                    const ActivationScanOptions& options = {});

struct MemberRecovery {
  int index = 0;
  double kl_at_member = 0.0;
  int recovered = 0;
  double frequency = 0.0;
};

struct RunOutcome {
  int run = 0;
  bool converged = false;
  Vector final_query;
  int nearest_member = -1;  // -1 when not converged
  double distance = 0.0;
};

struct ReconstructionTable {
  std::vector<MemberRecovery> members;
  int non_converged = 0;
  int runs = 0;
  std::vector<RunOutcome> outcomes;
};

// `runs` single-query KL optimizations on the group pair, run r seeded with
// DeriveSeed(config.seed, r); converged finals go to the nearest member.
ReconstructionTable GroupReconstructionStudy(const KernelSpec& spec,
                                             const Dataset& data,
                                             const Matrix& group_features,
                                             const Vector& group_labels,
                                             int runs, const OptConfig& config);

}  // namespace lood

#endif  // LOOD_LEAKAGE_H_
