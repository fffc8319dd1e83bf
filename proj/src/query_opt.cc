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
#include "lood/query_opt.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "lood/error.h"

namespace lood {

namespace {

constexpr int kMaxHalvings = 20;
constexpr double kRegularityTol = 1e-8;
constexpr double kFdGradRelStep = 1e-4;
constexpr double kOptFdRelStep = 1e-5;
constexpr double kHessianRelStep = 1e-3;

// Value, variance and their query gradients for one side of the pair.
struct SideJet {
  double mean = 0.0;
  double var = 0.0;
  Vector d_mean;
  Vector d_var;
  bool clamped = false;
};

SideJet EvalSide(const KernelSpec& spec, const LooModel::Side& side,
                 const Vector& q) {
  const Eigen::Index n = side.features.rows();
  const Eigen::Index d = q.size();
  SideJet jet;
  const KernelGradient self_grad = KernelGradQ(spec, q, q);
  jet.clamped = self_grad.clamped;
  jet.var = KernelEval(spec, q, q);
  jet.d_var = 2.0 * self_grad.grad;
  jet.d_mean = Vector::Zero(d);
  if (n == 0) return jet;

  Vector k(n);
  Matrix jac(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vector xi = side.features.row(i).transpose();
    k(i) = KernelEval(spec, q, xi);
    const KernelGradient g = KernelGradQ(spec, q, xi);
    jac.row(i) = g.grad.transpose();
    jet.clamped = jet.clamped || g.clamped;
  }
  const Vector m_inv_k = side.Solve(k);
  jet.mean = k.dot(side.weights);
  jet.d_mean = jac.transpose() * side.weights;
  jet.var -= k.dot(m_inv_k);
  jet.d_var -= 2.0 * jac.transpose() * m_inv_k;
  return jet;
}

Matrix RowMatrix(const Vector& v) { return v.transpose(); }

double QueryObjective(const LooModel& model, Objective objective,
                      const Matrix& queries) {
  const auto [post_d, post_dp] = model.Posteriors(queries);
  return objective == Objective::kKl ? KlLood(post_d, post_dp)
                                     : MeanDistanceLood(post_d, post_dp);
}

void NormalizeRows(Matrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double n = m.row(i).norm();
    if (!(n > 0.0)) Fail(ErrorCode::kZeroNormInput, "query row with zero norm");
    m.row(i) /= n;
  }
}

// Gradient restricted to the feasible directions at `point`.
Matrix EffectiveGradient(const Matrix& point, const Matrix& grad,
                         const OptConfig& config) {
  Matrix g = grad;
  if (config.project_to_sphere) {
    for (Eigen::Index i = 0; i < g.rows(); ++i) {
      const double n2 = point.row(i).squaredNorm();
      if (n2 > 0.0) {
        g.row(i) -= (g.row(i).dot(point.row(i)) / n2) * point.row(i);
      }
    }
  }
  if (config.box) {
    const auto [lo, hi] = *config.box;
    for (Eigen::Index i = 0; i < g.size(); ++i) {
      if ((point(i) <= lo && g(i) < 0.0) || (point(i) >= hi && g(i) > 0.0)) {
        g(i) = 0.0;
      }
    }
  }
  return g;
}

Matrix Retract(Matrix m, const OptConfig& config) {
  if (config.box) {
    m = m.cwiseMax(config.box->first).cwiseMin(config.box->second);
  }
  if (config.project_to_sphere) NormalizeRows(m);
  return m;
}

Matrix InitialPoint(const InitSpec& init, Eigen::Index rows, Eigen::Index cols,
                    std::mt19937_64& rng) {
  Matrix m(rows, cols);
  switch (init.kind) {
    case InitSpec::Kind::kUniformBox: {
      std::uniform_real_distribution<double> uni(init.lo, init.hi);
      for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = uni(rng);
      return m;
    }
    case InitSpec::Kind::kGivenPoint:
    case InitSpec::Kind::kGaussianAround: {
      if (init.point.cols() != cols ||
          (init.point.rows() != 1 && init.point.rows() != rows)) {
        Fail(ErrorCode::kDimensionMismatch, "initial point has wrong shape");
      }
      for (Eigen::Index i = 0; i < rows; ++i) {
        m.row(i) = init.point.row(init.point.rows() == 1 ? 0 : i);
      }
      if (init.kind == InitSpec::Kind::kGaussianAround) {
        std::normal_distribution<double> normal(0.0, init.std);
        for (Eigen::Index i = 0; i < m.size(); ++i) m(i) += normal(rng);
      }
      return m;
    }
  }
  return m;
}

// F1, F2, F3 and their sum; fd fields are left empty.
GradientReport AnalyticKlGrad(const LooModel& model, const Vector& query) {
  const KernelSpec& spec = model.spec();
  const SideJet a = EvalSide(spec, model.small_side(), query);
  const SideJet b = EvalSide(spec, model.large_side(), query);
  const double var = std::max(a.var, kVarianceFloor);
  const double var_p = std::max(b.var, kVarianceFloor);
  const double ratio = var / var_p;
  const double delta = a.mean - b.mean;
  const Vector d_ratio = a.d_var / var_p - var * b.d_var / (var_p * var_p);

  GradientReport r;
  r.clamped = a.clamped || b.clamped;
  r.f1 = 0.5 * (1.0 - 1.0 / ratio) * d_ratio;
  r.f2 = delta * (a.d_mean - b.d_mean) / var_p;
  r.f3 = -0.5 * delta * delta * b.d_var / (var_p * var_p);
  r.total = r.f1 + r.f2 + r.f3;
  return r;
}

}  // namespace

GradientReport KlGradSingle(const LooModel& model, const Vector& query) {
  GradientReport r = AnalyticKlGrad(model, query);
  const double step = kFdGradRelStep * (1.0 + query.norm());
  const Matrix fd = FdGrad(
      [&](const Matrix& q) { return QueryObjective(model, Objective::kKl, q); },
      RowMatrix(query), step);
  r.fd_total = fd.row(0).transpose();
  r.rel_discrepancy = (r.total - r.fd_total).norm() / (1e-12 + r.fd_total.norm());
  return r;
}

GradientReport KlGradSingle(const KernelSpec& spec, const LeaveOneOutPair& pair,
                            const Vector& query) {
  return KlGradSingle(LooModel(spec, pair), query);
}

Vector MeanGradAtS(const KernelSpec& spec, const LeaveOneOutPair& pair) {
  ValidatePair(pair);
  if (pair.group_size() != 1) {
    Fail(ErrorCode::kInvalidArgument, "mean gradient at S needs s = 1");
  }
  const Dataset augmented = Augmented(pair);
  const RegularityReport reg =
      CheckRegularity(spec, augmented.features, kRegularityTol);
  if (!reg.passed) {
    Fail(ErrorCode::kKernelNotRegular,
         "kernel " + KernelName(spec) + " fails regularity (diag " +
             std::to_string(reg.max_diag_deviation) + ", self-grad " +
             std::to_string(reg.max_self_grad_norm) + ")");
  }
  const Vector s = pair.differing_features.row(0).transpose();
  const double y_s = pair.differing_labels(0);
  const Dataset& data = pair.base;
  const double k_ss = KernelEval(spec, s, s);
  if (data.size() == 0) return Vector::Zero(s.size());

  Matrix m = KernelMatrix(spec, data.features, data.features);
  m.diagonal().array() += data.noise_variance;
  const CholeskyFactor factor = CholeskyPsd(m);
  const Eigen::Index n = data.size();
  Vector k_ds(n);
  Matrix jac(n, s.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vector xi = data.features.row(i).transpose();
    k_ds(i) = KernelEval(spec, s, xi);
    jac.row(i) = KernelGradQ(spec, s, xi).grad.transpose();
  }
  const Vector m_inv_k = SolvePsd(factor, k_ds);
  const double var_s = k_ss - k_ds.dot(m_inv_k);
  const double resid = y_s - k_ds.dot(SolvePsd(factor, data.labels));
  const double alpha = var_s + data.noise_variance;
  return -(var_s * resid * resid / (alpha * alpha)) * (jac.transpose() * m_inv_k);
}

Matrix FdGrad(const MatrixObjective& objective, const Matrix& point,
              double step) {
  Matrix grad(point.rows(), point.cols());
  Matrix probe = point;
  for (Eigen::Index i = 0; i < point.size(); ++i) {
    const double orig = probe(i);
    probe(i) = orig + step;
    const double up = objective(probe);
    probe(i) = orig - step;
    const double down = objective(probe);
    probe(i) = orig;
    grad(i) = (up - down) / (2.0 * step);
  }
  return grad;
}

Matrix FdHessian(const VectorObjective& objective, const Vector& point,
                 double step) {
  const Eigen::Index d = point.size();
  Matrix h(d, d);
  const double f0 = objective(point);
  Vector p = point;
  for (Eigen::Index i = 0; i < d; ++i) {
    p(i) = point(i) + step;
    const double up = objective(p);
    p(i) = point(i) - step;
    const double down = objective(p);
    p(i) = point(i);
    h(i, i) = (up - 2.0 * f0 + down) / (step * step);
    for (Eigen::Index j = 0; j < i; ++j) {
      double acc = 0.0;
      for (int si : {1, -1}) {
        for (int sj : {1, -1}) {
          p(i) = point(i) + si * step;
          p(j) = point(j) + sj * step;
          acc += si * sj * objective(p);
        }
      }
      p(i) = point(i);
      p(j) = point(j);
      h(i, j) = h(j, i) = acc / (4.0 * step * step);
    }
  }
  return Symmetrize(h);
}

InitSpec InitSpec::UniformBox(double lo, double hi) {
  InitSpec s;
  s.kind = Kind::kUniformBox;
  s.lo = lo;
  s.hi = hi;
  return s;
}

InitSpec InitSpec::Given(const Matrix& point) {
  InitSpec s;
  s.kind = Kind::kGivenPoint;
  s.point = point;
  return s;
}

InitSpec InitSpec::GaussianAround(const Matrix& point, double std) {
  InitSpec s;
  s.kind = Kind::kGaussianAround;
  s.point = point;
  s.std = std;
  return s;
}

void ValidateOptConfig(const OptConfig& config) {
  if (config.max_iters < 1) {
    Fail(ErrorCode::kInvalidArgument, "max_iters must be >= 1");
  }
  if (config.learning_rate && !(*config.learning_rate > 0.0)) {
    Fail(ErrorCode::kInvalidArgument, "learning_rate must be > 0");
  }
  if (!(config.grad_tol > 0.0)) {
    Fail(ErrorCode::kInvalidArgument, "grad_tol must be > 0");
  }
  if (config.restarts < 1) {
    Fail(ErrorCode::kInvalidArgument, "restarts must be >= 1");
  }
  if (config.init.kind == InitSpec::Kind::kUniformBox &&
      !(config.init.lo < config.init.hi)) {
    Fail(ErrorCode::kInvalidArgument, "init box needs lo < hi");
  }
  if (config.box && !(config.box->first < config.box->second)) {
    Fail(ErrorCode::kInvalidArgument, "box needs lo < hi");
  }
}

OptTrace GradientAscent(const MatrixObjective& objective,
                        const std::function<Matrix(const Matrix&)>& gradient,
                        const Matrix& init, double scale_hint,
                        const OptConfig& config) {
  ValidateOptConfig(config);
  OptTrace trace;
  Matrix point = Retract(init, config);
  double value = objective(point);
  Matrix grad = EffectiveGradient(point, gradient(point), config);
  double grad_norm = grad.norm();
  const double lr = config.learning_rate.value_or(
      0.1 * (1.0 + scale_hint) / (1.0 + grad_norm));
  trace.iterates.push_back({0, point, value, grad_norm});

  trace.stop_reason = "max_iters";
  for (int it = 1; it <= config.max_iters; ++it) {
    if (grad_norm <= config.grad_tol) {
      trace.stop_reason = "grad_tol";
      break;
    }
    double step = lr;
    bool accepted = false;
    Matrix next;
    double next_value = 0.0;
    for (int h = 0; h <= kMaxHalvings; ++h) {
      next = Retract(point + step * grad, config);
      next_value = objective(next);
      if (next_value >= value) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      trace.stop_reason = "line_search";
      break;
    }
    if (next == point) {
      trace.stop_reason = "stalled";
      break;
    }
    point = next;
    value = next_value;
    grad = EffectiveGradient(point, gradient(point), config);
    grad_norm = grad.norm();
    trace.iterates.push_back({it, point, value, grad_norm});
  }
  trace.converged = grad_norm <= config.grad_tol;
  trace.final_query = point;
  trace.final_value = value;
  return trace;
}

OptTrace OptimizeQuery(const KernelSpec& spec, const LeaveOneOutPair& pair,
                       Objective objective, int query_count,
                       const OptConfig& config) {
  if (query_count < 1) {
    Fail(ErrorCode::kInvalidArgument, "query count must be >= 1");
  }
  ValidateOptConfig(config);
  const LooModel model(spec, pair);
  const Eigen::Index d = pair.differing_features.cols();
  std::mt19937_64 rng(config.seed);
  const Matrix init = InitialPoint(config.init, query_count, d, rng);

  auto value = [&](const Matrix& q) {
    return QueryObjective(model, objective, q);
  };
  std::function<Matrix(const Matrix&)> gradient;
  if (objective == Objective::kKl && query_count == 1) {
    gradient = [&](const Matrix& q) -> Matrix {
      return RowMatrix(AnalyticKlGrad(model, q.row(0).transpose()).total);
    };
  } else {
    gradient = [&](const Matrix& q) {
      return FdGrad(value, q, kOptFdRelStep * (1.0 + q.norm()));
    };
  }
  return GradientAscent(value, gradient, init, pair.differing_features.norm(),
                        config);
}

NonstationaryResult FindNonstationaryS(const KernelSpec& spec,
                                       const Dataset& data,
                                       const LabelFn& label_fn,
                                       const OptConfig& config) {
  ValidateDataset(data);
  ValidateOptConfig(config);
  const Eigen::Index d = data.dim();
  auto objective = [&](const Matrix& s) {
    const Vector sv = s.row(0).transpose();
    return MeanGradAtS(spec, MakePair(data, sv, label_fn(sv))).squaredNorm();
  };
  auto gradient = [&](const Matrix& s) {
    return FdGrad(objective, s, kOptFdRelStep * (1.0 + s.norm()));
  };

  NonstationaryResult result;
  std::mt19937_64 rng(config.seed);
  double best = -1.0;
  for (int r = 0; r < config.restarts; ++r) {
    const Matrix init = InitialPoint(config.init, 1, d, rng);
    OptTrace trace = GradientAscent(objective, gradient, init, init.norm(), config);
    if (trace.final_value > best) {
      best = trace.final_value;
      result.s_star = trace.final_query.row(0).transpose();
    }
    result.traces.push_back(std::move(trace));
  }
  result.grad_norm = std::sqrt(std::max(best, 0.0));
  return result;
}

StationarityReport VerifyStationarity(const KernelSpec& spec,
                                      const LeaveOneOutPair& pair, double tol,
                                      std::optional<double> fd_tol) {
  StationarityReport report;
  if (pair.group_size() != 1) {
    report.note = "stationarity check needs a single differing record";
    return report;
  }
  const Vector s = pair.differing_features.row(0).transpose();
  try {
    report.regularity =
        CheckRegularity(spec, Augmented(pair).features, kRegularityTol);
    const GradientReport g = KlGradSingle(spec, pair, s);
    Vector analytic = g.total;
    Vector fd = g.fd_total;
    if (const auto* nngp = std::get_if<NngpFcSpec>(&spec);
        nngp != nullptr && nngp->normalize_inputs) {
      const Vector u = s.normalized();
      analytic -= analytic.dot(u) * u;
      fd -= fd.dot(u) * u;
      report.tangential = true;
    }
    report.analytic_norm = analytic.norm();
    report.fd_norm = fd.norm();
    report.passed = report.analytic_norm <= tol &&
                    report.fd_norm <= fd_tol.value_or(tol);
    if (!report.regularity.passed) {
      report.note = report.passed
                        ? "kernel regularity conditions fail on D'; gradient "
                          "vanished anyway"
                        : "kernel regularity conditions fail on D'";
    }
  } catch (const LoodError& e) {
    report.passed = false;
    report.note = std::string(ErrorCodeName(e.code())) + ": " + e.what();
  }
  return report;
}

HessianReport HessianOf(const VectorObjective& objective, const Vector& point,
                        double step) {
  HessianReport report;
  report.hessian = FdHessian(objective, point, step);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(report.hessian,
                                            Eigen::EigenvaluesOnly);
  report.eigenvalues = eig.eigenvalues();
  report.max_eigenvalue = report.eigenvalues.maxCoeff();
  report.negative_definite = report.max_eigenvalue < 0.0;
  return report;
}

HessianReport HessianCheck(const KernelSpec& spec, const LeaveOneOutPair& pair) {
  if (pair.group_size() != 1) {
    Fail(ErrorCode::kInvalidArgument, "hessian check needs s = 1");
  }
  const LooModel model(spec, pair);
  const Vector s = pair.differing_features.row(0).transpose();
  return HessianOf(
      [&](const Vector& q) {
        return QueryObjective(model, Objective::kMeanDistance, RowMatrix(q));
      },
      s, kHessianRelStep * (1.0 + s.norm()));
}

std::vector<ScanPoint> PerturbationScan(const KernelSpec& spec,
                                        const LeaveOneOutPair& pair,
                                        const Vector& direction,
                                        const std::vector<double>& xs) {
  if (pair.group_size() != 1) {
    Fail(ErrorCode::kInvalidArgument, "perturbation scan needs s = 1");
  }
  if (direction.size() != pair.differing_features.cols()) {
    Fail(ErrorCode::kDimensionMismatch, "direction has wrong dimension");
  }
  if (direction.size() > 0 && direction.cwiseAbs().maxCoeff() > 1.0) {
    Fail(ErrorCode::kInvalidArgument, "direction must lie in the unit inf-ball");
  }
  const LooModel model(spec, pair);
  const Vector s = pair.differing_features.row(0).transpose();
  std::vector<ScanPoint> out;
  out.reserve(xs.size());
  for (double x : xs) {
    const LoodReport r = ComputeLoodReport(model, RowMatrix(s + x * direction));
    out.push_back({x, r.kl, r.mean_distance});
  }
  return out;
}

std::size_t ArgMax(const std::vector<double>& values) {
  if (values.empty()) Fail(ErrorCode::kInvalidArgument, "argmax of empty list");
  return static_cast<std::size_t>(
      std::max_element(values.begin(), values.end()) - values.begin());
}

}  // namespace lood
