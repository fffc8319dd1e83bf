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
#include "lood/metrics.h"

#include <cmath>
#include <limits>
#include <string>

#include "lood/error.h"
#include "lood/linalg.h"

namespace lood {

namespace {

void CheckMatching(const PosteriorSummary& a, const PosteriorSummary& b) {
  if (a.query_count() != b.query_count() ||
      a.covariance.rows() != a.query_count() ||
      b.covariance.rows() != b.query_count()) {
    Fail(ErrorCode::kDimensionMismatch,
         "posteriors over " + std::to_string(a.query_count()) + " and " +
             std::to_string(b.query_count()) + " queries");
  }
}

}  // namespace

double MeanDistanceLood(const PosteriorSummary& post_d,
                        const PosteriorSummary& post_dp) {
  if (post_d.mean.size() != post_dp.mean.size()) {
    Fail(ErrorCode::kDimensionMismatch, "mean vectors differ in length");
  }
  return 0.5 * (post_d.mean - post_dp.mean).squaredNorm();
}

KlValue KlDivergence(const PosteriorSummary& post_d,
                     const PosteriorSummary& post_dp) {
  CheckMatching(post_d, post_dp);
  const Eigen::Index q = post_d.query_count();
  const Vector delta = post_d.mean - post_dp.mean;
  KlValue out;
  if (q == 1) {
    double var = post_d.covariance(0, 0);
    double var_p = post_dp.covariance(0, 0);
    if (var < kVarianceFloor) {
      var = kVarianceFloor;
      out.floored = true;
    }
    if (var_p < kVarianceFloor) {
      var_p = kVarianceFloor;
      out.floored = true;
    }
    // r - 1 - log r written as x - log1p(x) with x = r - 1.
    const double x = (var - var_p) / var_p;
    out.value = 0.5 * (x - std::log1p(x) + delta(0) * delta(0) / var_p);
    return out;
  }
  const CholeskyFactor f = CholeskyPsd(post_d.covariance);
  const CholeskyFactor fp = CholeskyPsd(post_dp.covariance);
  out.floored = f.jitter > 0.0 || fp.jitter > 0.0;
  // Tr(Sigma'^{-1} Sigma) = ||L'^{-1} L||_F^2 with the jittered factors.
  const Matrix w = fp.lower.triangularView<Eigen::Lower>().solve(f.lower);
  const Vector z = fp.lower.triangularView<Eigen::Lower>().solve(delta);
  out.value = 0.5 * (LogdetPsd(fp) - LogdetPsd(f) - static_cast<double>(q) +
                     w.squaredNorm() + z.squaredNorm());
  return out;
}

double VarianceRatio(const PosteriorSummary& post_d,
                     const PosteriorSummary& post_dp) {
  CheckMatching(post_d, post_dp);
  if (post_d.query_count() != 1) {
    Fail(ErrorCode::kMultiQueryUnsupported,
         "variance ratio needs a single query, got " +
             std::to_string(post_d.query_count()));
  }
  return post_d.covariance(0, 0) /
         std::max(post_dp.covariance(0, 0), kVarianceFloor);
}

LoodReport ReportFromPosteriors(const PosteriorSummary& post_d,
                                const PosteriorSummary& post_dp) {
  LoodReport report;
  const KlValue kl = KlDivergence(post_d, post_dp);
  report.kl = kl.value;
  report.variance_floored = kl.floored;
  report.mean_distance = MeanDistanceLood(post_d, post_dp);
  report.query_count = post_d.query_count();
  if (report.query_count == 1) {
    report.variance_ratio = VarianceRatio(post_d, post_dp);
  }
  return report;
}

LoodReport ComputeLoodReport(const LooModel& model, const Matrix& queries) {
  const auto [post_d, post_dp] = model.Posteriors(queries);
  return ReportFromPosteriors(post_d, post_dp);
}

LoodReport ComputeLoodReport(const KernelSpec& spec, const LeaveOneOutPair& pair,
                             const Matrix& queries) {
  return ComputeLoodReport(LooModel(spec, pair), queries);
}

std::optional<double> HomogeneityDegree(const KernelSpec& spec) {
  if (std::holds_alternative<LinearSpec>(spec)) return 1.0;
  if (const auto* nngp = std::get_if<NngpFcSpec>(&spec)) {
    if (nngp->activation == Activation::kRelu && nngp->bias_variance == 0.0 &&
        !nngp->normalize_inputs) {
      return 1.0;
    }
  }
  return std::nullopt;
}

ScaleInvarianceReport ScaleInvarianceCheck(const KernelSpec& spec,
                                           const LeaveOneOutPair& pair,
                                           const Matrix& queries,
                                           const std::vector<double>& lambdas) {
  const std::optional<double> degree = HomogeneityDegree(spec);
  if (!degree) {
    Fail(ErrorCode::kNonHomogeneousKernel,
         "kernel " + KernelName(spec) + " is not homogeneous in its inputs");
  }
  const LooModel model(spec, pair);
  const auto [base_d, base_dp] = model.Posteriors(queries);
  const double base_kl = KlLood(base_d, base_dp);
  const double base_mean_norm = base_d.mean.norm();
  const double base_m = MeanDistanceLood(base_d, base_dp);

  ScaleInvarianceReport report;
  report.degree = *degree;
  report.base_kl = base_kl;
  double sxx = 0.0;
  double sxy_mean = 0.0;
  double sxy_m = 0.0;
  for (double lambda : lambdas) {
    if (!(lambda > 0.0)) {
      Fail(ErrorCode::kInvalidArgument, "scale factors must be positive");
    }
    const auto [post_d, post_dp] = model.Posteriors(lambda * queries);
    ScaleInvarianceEntry e;
    e.lambda = lambda;
    e.kl = KlLood(post_d, post_dp);
    e.kl_rel_deviation = std::abs(e.kl - base_kl) / std::abs(base_kl);
    const Vector expected = std::pow(lambda, *degree) * base_d.mean;
    e.mean_rel_deviation = (post_d.mean - expected).norm() / expected.norm();
    const double log_l = std::log(lambda);
    const double dy_mean = std::log(post_d.mean.norm() / base_mean_norm);
    const double dy_m = std::log(MeanDistanceLood(post_d, post_dp) / base_m);
    if (lambda == 1.0) {
      e.kl_rel_deviation = 0.0;
      e.mean_rel_deviation = 0.0;
      e.mean_exponent = std::numeric_limits<double>::quiet_NaN();
      e.mean_distance_exponent = std::numeric_limits<double>::quiet_NaN();
    } else {
      e.mean_exponent = dy_mean / log_l;
      e.mean_distance_exponent = dy_m / log_l;
      sxx += log_l * log_l;
      sxy_mean += log_l * dy_mean;
      sxy_m += log_l * dy_m;
    }
    report.entries.push_back(e);
  }
  if (sxx > 0.0) {
    report.fitted_mean_exponent = sxy_mean / sxx;
    report.fitted_mean_distance_exponent = sxy_m / sxx;
  } else {
    report.fitted_mean_exponent = std::numeric_limits<double>::quiet_NaN();
    report.fitted_mean_distance_exponent =
        std::numeric_limits<double>::quiet_NaN();
  }
  return report;
}

}  // namespace lood
