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
#ifndef LOOD_METRICS_H_
#define LOOD_METRICS_H_

#include <optional>
#include <vector>

#include "lood/gp.h"
#include "lood/kernels.h"

namespace lood {

// Predictive variances below this are raised to it before division or log.
inline constexpr double kVarianceFloor = 1e-14;

struct LoodReport {
  double kl = 0.0;
  double mean_distance = 0.0;
  std::optional<double> variance_ratio;  // single query only
  Eigen::Index query_count = 0;
  bool variance_floored = false;
};

// M(Q) = 0.5 ||mu - mu'||^2.
double MeanDistanceLood(const PosteriorSummary& post_d,
                        const PosteriorSummary& post_dp);

struct KlValue {
  double value = 0.0;
  bool floored = false;
};

// KL(N(mu, Sigma) || N(mu', Sigma')), the D' posterior being the base.
KlValue KlDivergence(const PosteriorSummary& post_d,
                     const PosteriorSummary& post_dp);

inline double KlLood(const PosteriorSummary& post_d,
                     const PosteriorSummary& post_dp) {
  return KlDivergence(post_d, post_dp).value;
}

// KL(N(mu', Sigma') || N(mu, Sigma)).
inline double ReverseKlLood(const PosteriorSummary& post_d,
                            const PosteriorSummary& post_dp) {
  return KlDivergence(post_dp, post_d).value;
}

// Sigma(Q) / Sigma'(Q); throws kMultiQueryUnsupported for q > 1.
double VarianceRatio(const PosteriorSummary& post_d,
                     const PosteriorSummary& post_dp);

LoodReport ReportFromPosteriors(const PosteriorSummary& post_d,
                                const PosteriorSummary& post_dp);

LoodReport ComputeLoodReport(const KernelSpec& spec, const LeaveOneOutPair& pair,
                             const Matrix& queries);
LoodReport ComputeLoodReport(const LooModel& model, const Matrix& queries);

// Degree alpha with K(l x, x') = l^alpha K(x, x'), if the spec has one.
std::optional<double> HomogeneityDegree(const KernelSpec& spec);

struct ScaleInvarianceEntry {
  double lambda = 1.0;
  double kl = 0.0;
  double kl_rel_deviation = 0.0;
  // ||mu(l Q) - l^alpha mu(Q)|| / ||l^alpha mu(Q)||.
  double mean_rel_deviation = 0.0;
  // log(||mu(l Q)|| / ||mu(Q)||) / log l and the same for M; NaN at l = 1.
  double mean_exponent = 0.0;
  double mean_distance_exponent = 0.0;
};

struct ScaleInvarianceReport {
  double degree = 1.0;
  double base_kl = 0.0;
  std::vector<ScaleInvarianceEntry> entries;
  // Least-squares slope of log||mu(l Q)|| - log||mu(Q)|| against log l.
  double fitted_mean_exponent = 0.0;
  double fitted_mean_distance_exponent = 0.0;
};

// Throws kNonHomogeneousKernel unless the spec is Linear or an
// unnormalized bias-free ReLU NNGP.
ScaleInvarianceReport ScaleInvarianceCheck(const KernelSpec& spec,
                                           const LeaveOneOutPair& pair,
                                           const Matrix& queries,
                                           const std::vector<double>& lambdas);

}  // namespace lood

#endif  // LOOD_METRICS_H_
