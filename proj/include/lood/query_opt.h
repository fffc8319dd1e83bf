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
#ifndef LOOD_QUERY_OPT_H_
#define LOOD_QUERY_OPT_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lood/gp.h"
#include "lood/kernels.h"
#include "lood/metrics.h"

namespace lood {

// Gradient of the single-query KL split as F1 + F2 + F3 with
//   F1 = 1/2 (1 - Sigma'/Sigma) d(Sigma/Sigma')
//   F2 = 1/2 d||mu - mu'||^2 / Sigma'
//   F3 = 1/2 ||mu - mu'||^2 d(1/Sigma')
struct GradientReport {
  Vector f1;
  Vector f2;
  Vector f3;
  Vector total;
  Vector fd_total;
  double rel_discrepancy = 0.0;
  bool clamped = false;
};

GradientReport KlGradSingle(const LooModel& model, const Vector& query);
GradientReport KlGradSingle(const KernelSpec& spec, const LeaveOneOutPair& pair,
                            const Vector& query);

// Closed-form gradient of M(Q) at Q = S for a single differing record:
//   -(Sigma(S) e^2 / v^2) dK_SD M^{-1} K_DS,  e = y_S - mu(S),
//   v = Sigma(S) + sigma^2, with dK_SD = d/dQ K_QD at Q = S.
// Throws kKernelNotRegular when CheckRegularity fails on D' at 1e-8.
Vector MeanGradAtS(const KernelSpec& spec, const LeaveOneOutPair& pair);

using MatrixObjective = std::function<double(const Matrix&)>;
using VectorObjective = std::function<double(const Vector&)>;

// Central differences, one coordinate at a time.
Matrix FdGrad(const MatrixObjective& objective, const Matrix& point, double step);

// Central-difference Hessian, symmetrized.
Matrix FdHessian(const VectorObjective& objective, const Vector& point,
                 double step);

enum class Objective { kKl, kMeanDistance };

struct InitSpec {
  enum class Kind { kUniformBox, kGivenPoint, kGaussianAround };
  Kind kind = Kind::kUniformBox;
  double lo = -1.0;
  double hi = 1.0;
  Matrix point;  // one row is broadcast to every query
  double std = 1.0;

  static InitSpec UniformBox(double lo, double hi);
  static InitSpec Given(const Matrix& point);
  static InitSpec GaussianAround(const Matrix& point, double std);
};

struct OptConfig {
  int max_iters = 2000;
  // Unset: 0.1 (1 + ||S||) / (1 + ||g0||).
  std::optional<double> learning_rate;
  double grad_tol = 1e-6;
  bool project_to_sphere = false;
  std::uint64_t seed = 0;
  InitSpec init;
  // Iterates are clipped to [lo, hi] per coordinate when set.
  std::optional<std::pair<double, double>> box;
  // Independent starts used by FindNonstationaryS; the best is kept.
  int restarts = 1;
};

void ValidateOptConfig(const OptConfig& config);

struct Iterate {
  int iteration = 0;
  Matrix query;
  double value = 0.0;
  double grad_norm = 0.0;
};

struct OptTrace {
  std::vector<Iterate> iterates;
  bool converged = false;
  Matrix final_query;
  double final_value = 0.0;
  std::string stop_reason;
};

// Backtracking gradient ascent on LOOD(Q) over q queries.
OptTrace OptimizeQuery(const KernelSpec& spec, const LeaveOneOutPair& pair,
                       Objective objective, int query_count,
                       const OptConfig& config);

// Generic ascent driver with the same step rule; `scale_hint` plays the role
// of ||S|| in the default learning rate.
OptTrace GradientAscent(const MatrixObjective& objective,
                        const std::function<Matrix(const Matrix&)>& gradient,
                        const Matrix& init, double scale_hint,
                        const OptConfig& config);

using LabelFn = std::function<double(const Vector&)>;

struct NonstationaryResult {
  Vector s_star;
  double grad_norm = 0.0;  // ||grad_Q M|_{Q=S*}||
  std::vector<OptTrace> traces;
};

// Maximizes ||MeanGradAtS||^2 over S with labels from label_fn.
NonstationaryResult FindNonstationaryS(const KernelSpec& spec,
                                       const Dataset& data,
                                       const LabelFn& label_fn,
                                       const OptConfig& config);

struct StationarityReport {
  bool passed = false;
  double analytic_norm = 0.0;
  double fd_norm = 0.0;
  // Norms after removing the radial component, for normalized kernels.
  bool tangential = false;
  RegularityReport regularity;
  std::string note;
};

// Checks the KL gradient at Q = S; fd_tol defaults to tol.
StationarityReport VerifyStationarity(const KernelSpec& spec,
                                      const LeaveOneOutPair& pair, double tol,
                                      std::optional<double> fd_tol = {});

struct HessianReport {
  Matrix hessian;
  Vector eigenvalues;  // ascending
  double max_eigenvalue = 0.0;
  bool negative_definite = false;
};

// Hessian of M(Q) at Q = S, step 1e-3 (1 + ||S||).
HessianReport HessianCheck(const KernelSpec& spec, const LeaveOneOutPair& pair);
HessianReport HessianOf(const VectorObjective& objective, const Vector& point,
                        double step);

struct ScanPoint {
  double x = 0.0;
  double kl = 0.0;
  double mean_distance = 0.0;
};

// LOOD at Q = S + x * direction, ||direction||_inf <= 1.
std::vector<ScanPoint> PerturbationScan(const KernelSpec& spec,
                                        const LeaveOneOutPair& pair,
                                        const Vector& direction,
                                        const std::vector<double>& xs);

// Index of the first maximal element.
std::size_t ArgMax(const std::vector<double>& values);

}  // namespace lood

#endif  // LOOD_QUERY_OPT_H_
