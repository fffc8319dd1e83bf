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
#include "lood/leakage.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <string>

#include "lood/error.h"
#include "lood/metrics.h"
#include "lood/random.h"

namespace lood {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;

struct GaussianSampler {
  explicit GaussianSampler(const PosteriorSummary& s)
      : mean(s.mean), factor(CholeskyPsd(s.covariance)) {
    log_norm = 0.5 * LogdetPsd(factor) + 0.5 * kLog2Pi * mean.size();
  }

  Vector Draw(std::mt19937_64& rng, std::normal_distribution<double>& normal) const {
    Vector z(mean.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = normal(rng);
    return mean + factor.lower * z;
  }

  double LogDensity(const Vector& x) const {
    const Vector z =
        factor.lower.triangularView<Eigen::Lower>().solve(Vector(x - mean));
    return -0.5 * z.squaredNorm() - log_norm;
  }

  Vector mean;
  CholeskyFactor factor;
  double log_norm = 0.0;
};

std::vector<int> TopK(const std::vector<double>& values, int k) {
  std::vector<int> idx(values.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](int a, int b) { return values[a] > values[b]; });
  idx.resize(k);
  return idx;
}

double FitSlope(const std::vector<int>& depths,
                const std::vector<double>& distances) {
  const std::size_t n = depths.size();
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += std::log(static_cast<double>(depths[i]));
    my += std::log(distances[i]);
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = std::log(static_cast<double>(depths[i])) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(distances[i]) - my);
  }
  return sxy / sxx;
}

}  // namespace

double RankAuc(const std::vector<double>& positives,
               const std::vector<double>& negatives) {
  if (positives.empty() || negatives.empty()) {
    Fail(ErrorCode::kInvalidArgument, "AUC needs both classes");
  }
  std::vector<double> all(positives);
  all.insert(all.end(), negatives.begin(), negatives.end());
  const std::vector<double> ranks = AverageRanks(all);
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < positives.size(); ++i) rank_sum += ranks[i];
  const double np = static_cast<double>(positives.size());
  const double nn = static_cast<double>(negatives.size());
  return (rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

std::vector<double> AverageRanks(const std::vector<double>& values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values[a] < values[b];
  });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double avg = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

std::optional<double> Pearson(const std::vector<double>& a,
                              const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2) return std::nullopt;
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double saa = 0.0;
  double sbb = 0.0;
  double sab = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
    sab += (a[i] - ma) * (b[i] - mb);
  }
  if (!(saa > 0.0) || !(sbb > 0.0)) return std::nullopt;
  return sab / std::sqrt(saa * sbb);
}

std::optional<double> Spearman(const std::vector<double>& a,
                               const std::vector<double>& b) {
  if (a.size() != b.size()) return std::nullopt;
  return Pearson(AverageRanks(a), AverageRanks(b));
}

MiaResult MiaAuc(const PosteriorSummary& post_d_at_s,
                 const PosteriorSummary& post_dp_at_s, int n_samples,
                 std::uint64_t seed) {
  if (n_samples < 1) Fail(ErrorCode::kInvalidArgument, "n_samples must be >= 1");
  if (post_d_at_s.query_count() != post_dp_at_s.query_count()) {
    Fail(ErrorCode::kDimensionMismatch, "posteriors over different query sets");
  }
  const GaussianSampler out_dist(post_d_at_s);
  const GaussianSampler in_dist(post_dp_at_s);
  auto score = [&](const Vector& x) {
    return in_dist.LogDensity(x) - out_dist.LogDensity(x);
  };
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> positives(n_samples);
  std::vector<double> negatives(n_samples);
  std::mt19937_64 rng_in(DeriveSeed(seed, 1));
  for (double& s : positives) s = score(in_dist.Draw(rng_in, normal));
  normal.reset();
  std::mt19937_64 rng_out(DeriveSeed(seed, 0));
  for (double& s : negatives) s = score(out_dist.Draw(rng_out, normal));
  return {RankAuc(positives, negatives), n_samples, seed};
}

CorrelationReport LoodAucCorrelation(const KernelSpec& spec,
                                     const Dataset& data,
                                     const Matrix& candidate_features,
                                     const Vector& candidate_labels,
                                     int n_samples, std::uint64_t seed) {
  if (candidate_features.rows() == 0) {
    Fail(ErrorCode::kInvalidArgument, "no candidate differing records");
  }
  if (candidate_labels.size() != candidate_features.rows()) {
    Fail(ErrorCode::kDimensionMismatch, "candidate labels/features mismatch");
  }
  CorrelationReport report;
  std::vector<double> log_kl;
  std::vector<double> auc;
  for (Eigen::Index i = 0; i < candidate_features.rows(); ++i) {
    const Vector s = candidate_features.row(i).transpose();
    const LooModel model(spec, MakePair(data, s, candidate_labels(i)));
    const auto [post_d, post_dp] = model.Posteriors(s.transpose());
    CorrelationRow row;
    row.index = static_cast<int>(i);
    row.kl = KlLood(post_d, post_dp);
    row.log_kl = std::log(std::max(row.kl, std::numeric_limits<double>::min()));
    row.auc = MiaAuc(post_d, post_dp, n_samples, DeriveSeed(seed, i)).auc;
    log_kl.push_back(row.log_kl);
    auc.push_back(row.auc);
    report.rows.push_back(row);
  }
  report.pearson = Pearson(log_kl, auc);
  report.spearman = Spearman(log_kl, auc);
  report.top_k = std::min<int>(10, static_cast<int>(report.rows.size()));
  const std::vector<int> top_kl = TopK(log_kl, report.top_k);
  const std::vector<int> top_auc = TopK(auc, report.top_k);
  for (int a : top_kl) {
    report.top_k_overlap += static_cast<int>(
        std::count(top_auc.begin(), top_auc.end(), a));
  }
  return report;
}

LowRankReport LowRankAnalysis(const KernelSpec& spec,
                              const LeaveOneOutPair& pair,
                              const Matrix& query_grid) {
  ValidatePair(pair);
  if (pair.group_size() != 1) {
    Fail(ErrorCode::kInvalidArgument, "low-rank bound needs s = 1");
  }
  if (pair.base.size() < 1) {
    Fail(ErrorCode::kInvalidArgument, "low-rank bound needs n >= 1");
  }
  const Dataset augmented = Augmented(pair);
  const Matrix k = KernelMatrix(spec, augmented.features, augmented.features);
  const double kmax = k.maxCoeff();
  const double kmin = k.minCoeff();

  LowRankReport r;
  r.alpha_min = 0.5 * (kmax + kmin);
  r.h_alpha_min = 0.5 * (kmax - kmin);
  if (!(r.alpha_min > 0.0)) {
    Fail(ErrorCode::kAlphaNonpositive,
         "kernel midpoint " + std::to_string(r.alpha_min) + " is not positive");
  }
  r.n = static_cast<int>(pair.base.size());
  r.zeta = augmented.labels.cwiseAbs().maxCoeff();
  r.noise_variance = pair.base.noise_variance;

  const double n = r.n;
  const double a = r.alpha_min;
  const double h = r.h_alpha_min;
  const double s2 = r.noise_variance;
  const double z2 = r.zeta * r.zeta;
  const double t0 = a * s2 / (s2 + n * a);
  const double c1 = 1.0 + n * (3.0 * a + h) / s2;
  const double t_bar = std::min(t0 + c1 * h, a + h);
  const double e_bar = 2.0 * r.zeta * (1.0 + n * h / s2);
  r.b = 0.25 + 2.0 * z2 / s2;
  r.a_n = c1 * (t_bar + e_bar * e_bar) / (2.0 * s2 * s2) +
          t0 * 4.0 * z2 * n * (2.0 + n * h / s2) / (2.0 * s2 * s2 * s2);
  r.bound = r.a_n * h + r.b / n;

  const LooModel model(spec, pair);
  r.observed_max_lood = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < query_grid.rows(); ++i) {
    const double kl = ComputeLoodReport(model, query_grid.row(i)).kl;
    if (kl > r.observed_max_lood) {
      r.observed_max_lood = kl;
      r.observed_argmax = static_cast<int>(i);
    }
  }
  return r;
}

ActivationScanResult ActivationScan(const NngpFcSpec& tmpl,
                                    const std::vector<int>& depths,
                                    const Vector& x, const Vector& xp,
                                    const ActivationScanOptions& options) {
  if (depths.size() < 2 || !std::is_sorted(depths.begin(), depths.end()) ||
      depths.front() < 1 ||
      std::adjacent_find(depths.begin(), depths.end()) != depths.end()) {
    Fail(ErrorCode::kInvalidArgument,
         "activation scan needs >= 2 increasing positive depths");
  }
  NngpFcSpec spec = tmpl;
  spec.depth = 1;
  ValidateKernel(spec);

  ActivationScanResult result;
  result.activation = spec.activation;
  result.depths = depths;
  KernelTriple t = NngpBaseTriple(spec, x, xp);
  const double c0 = t.k_qx / std::sqrt(t.k_qq * t.k_xx);
  if (c0 >= 1.0 - 1e-12) {
    result.degenerate = true;
    result.distances.assign(depths.size(), 0.0);
    result.fitted_slope = std::numeric_limits<double>::quiet_NaN();
    for (int depth : depths) {
      spec.depth = depth;
      result.kernel_values.push_back(
          NngpDepthRecursion(spec, NngpBaseTriple(spec, x, xp)).k_qx);
    }
    result.alpha = result.kernel_values.back();
    return result;
  }

  // Kernel values at scanned depths and at doublings of the largest one.
  const int largest = depths.back();
  const int second = depths[depths.size() - 2];
  std::map<int, double> at_depth;
  int layer = 0;
  auto advance_to = [&](int depth) {
    while (layer < depth) {
      t = NngpLayer(spec, t);
      ++layer;
    }
    at_depth[depth] = t.k_qx;
  };
  for (int depth : depths) advance_to(depth);

  struct Hypothesis {
    int p;
    double prev;
    bool settled = false;
    double alpha = 0.0;
    int depth = 0;
  };
  auto extrapolate = [](int p, double ratio, double k_lo, double k_hi) {
    const double w = std::pow(ratio, p);
    return (w * k_hi - k_lo) / (w - 1.0);
  };
  const double first_ratio = static_cast<double>(largest) / second;
  std::vector<Hypothesis> hyps;
  for (int p : {1, 2}) {
    hyps.push_back({p, extrapolate(p, first_ratio, at_depth[second],
                                   at_depth[largest])});
  }
  int lo = largest;
  while (std::any_of(hyps.begin(), hyps.end(),
                     [](const Hypothesis& h) { return !h.settled; })) {
    const long next = 2L * lo;
    if (next > options.max_limit_depth) break;
    advance_to(static_cast<int>(next));
    for (Hypothesis& h : hyps) {
      if (h.settled) continue;
      const double est = extrapolate(h.p, 2.0, at_depth[lo], at_depth[next]);
      if (std::abs(est - h.prev) <= options.limit_tol) {
        h.settled = true;
        h.alpha = est;
        h.depth = static_cast<int>(next);
      }
      h.prev = est;
    }
    lo = static_cast<int>(next);
  }

  bool any = false;
  double best_gap = std::numeric_limits<double>::infinity();
  for (const Hypothesis& h : hyps) {
    if (!h.settled) continue;
    std::vector<double> dist;
    for (int depth : depths) dist.push_back(std::abs(at_depth[depth] - h.alpha));
    if (std::any_of(dist.begin(), dist.end(), [](double v) { return !(v > 0.0); })) {
      continue;
    }
    const double slope = FitSlope(depths, dist);
    const double gap = std::abs(slope + h.p);
    if (gap < best_gap) {
      any = true;
      best_gap = gap;
      result.alpha = h.alpha;
      result.rate_hypothesis = h.p;
      result.fitted_slope = slope;
      result.distances = dist;
      result.limit_depth = h.depth;
    }
  }
  if (!any) {
    Fail(ErrorCode::kLimitEstimationUnstable,
         "depth limit for " + ActivationName(spec.activation) +
             " did not settle to " + std::to_string(options.limit_tol) +
             " by depth " + std::to_string(options.max_limit_depth));
  }
  for (int depth : depths) result.kernel_values.push_back(at_depth[depth]);
  return result;
}

ReconstructionTable GroupReconstructionStudy(const KernelSpec& spec,
                                             const Dataset& data,
                                             const Matrix& group_features,
                                             const Vector& group_labels,
                                             int runs, const OptConfig& config) {
  if (group_features.rows() < 2) {
    Fail(ErrorCode::kInvalidArgument, "group study needs s >= 2");
  }
  if (runs < 1) Fail(ErrorCode::kInvalidArgument, "runs must be >= 1");
  LeaveOneOutPair pair;
  pair.base = data;
  pair.differing_features = group_features;
  pair.differing_labels = group_labels;
  ValidatePair(pair);

  ReconstructionTable table;
  table.runs = runs;
  const LooModel model(spec, pair);
  for (Eigen::Index i = 0; i < group_features.rows(); ++i) {
    MemberRecovery m;
    m.index = static_cast<int>(i);
    m.kl_at_member = ComputeLoodReport(model, group_features.row(i)).kl;
    table.members.push_back(m);
  }
  for (int r = 0; r < runs; ++r) {
    OptConfig cfg = config;
    cfg.seed = DeriveSeed(config.seed, static_cast<std::uint64_t>(r));
    const OptTrace trace = OptimizeQuery(spec, pair, Objective::kKl, 1, cfg);
    RunOutcome out;
    out.run = r;
    out.converged = trace.converged;
    out.final_query = trace.final_query.row(0).transpose();
    if (trace.converged) {
      Eigen::Index nearest = 0;
      out.distance =
          (group_features.rowwise() - out.final_query.transpose())
              .rowwise()
              .norm()
              .minCoeff(&nearest);
      out.nearest_member = static_cast<int>(nearest);
      ++table.members[nearest].recovered;
    } else {
      ++table.non_converged;
    }
    table.outcomes.push_back(out);
  }
  for (MemberRecovery& m : table.members) {
    m.frequency = static_cast<double>(m.recovered) / runs;
  }
  return table;
}

}  // namespace lood
