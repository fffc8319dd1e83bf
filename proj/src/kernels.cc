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
#include "lood/kernels.h"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <utility>

#include <boost/math/tools/toms748_solve.hpp>

#include "lood/error.h"
#include "lood/quadrature.h"

namespace lood {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kClamp = 1.0 - 1e-12;
constexpr double kCauchySchwarzSlack = 1e-10;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// Activation value and its first two derivatives.
struct Phi {
  double f;
  double d1;
  double d2;
};

Phi EvalPhi(Activation act, double x) {
  switch (act) {
    case Activation::kRelu:
      return {x > 0.0 ? x : 0.0, x > 0.0 ? 1.0 : 0.0, 0.0};
    case Activation::kGelu: {
      const double cdf = 0.5 * std::erfc(-x / std::numbers::sqrt2);
      const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * kPi);
      return {x * cdf, cdf + x * pdf, pdf * (2.0 - x * x)};
    }
    case Activation::kTanh: {
      const double t = std::tanh(x);
      return {t, 1.0 - t * t, -2.0 * t * (1.0 - t * t)};
    }
    case Activation::kErf: {
      const double g = 2.0 / std::sqrt(kPi) * std::exp(-x * x);
      return {std::erf(x), g, -2.0 * x * g};
    }
  }
  return {0.0, 0.0, 0.0};
}

double PhiValue(Activation act, double x) {
  switch (act) {
    case Activation::kRelu:
      return x > 0.0 ? x : 0.0;
    case Activation::kGelu:
      return x * 0.5 * std::erfc(-x / std::numbers::sqrt2);
    case Activation::kTanh:
      return std::tanh(x);
    case Activation::kErf:
      return std::erf(x);
  }
  return 0.0;
}

// E[phi(u) phi(v)] and its partials in k11 = Var u and k12 = Cov(u, v).
struct CrossMoment {
  double e = 0.0;
  double d_k11 = 0.0;
  double d_k12 = 0.0;
  bool clamped = false;
};

// E[phi(sqrt(k) z)^2] and its derivative in k.
struct SelfMoment {
  double e = 0.0;
  double d_k = 0.0;
};

void CheckTriple(double k11, double k12, double k22) {
  const double bound = k11 * k22;
  if (!(k11 >= 0.0) || !(k22 >= 0.0) ||
      !(k12 * k12 <= bound + kCauchySchwarzSlack * std::max(1.0, bound))) {
    Fail(ErrorCode::kQuadratureDivergence,
         "kernel triple violates Cauchy-Schwarz: k11=" + std::to_string(k11) +
             " k12=" + std::to_string(k12) + " k22=" + std::to_string(k22));
  }
}

CrossMoment ReluClosedForm(double k11, double k12, double k22) {
  CrossMoment m;
  const double norm = std::sqrt(k11 * k22);
  if (norm <= 0.0) return m;
  double c = k12 / norm;
  if (c > kClamp || c < -kClamp) {
    m.clamped = true;
    c = std::clamp(c, -kClamp, kClamp);
  }
  const double theta = std::acos(c);
  const double s = std::sin(theta);
  m.e = norm / (2.0 * kPi) * (s + (kPi - theta) * c);
  m.d_k12 = (kPi - theta) / (2.0 * kPi);
  m.d_k11 = std::sqrt(k22 / k11) * s / (4.0 * kPi);
  return m;
}

CrossMoment CrossExpectation(const NngpFcSpec& spec, double k11, double k12,
                             double k22, bool with_derivatives) {
  CheckTriple(k11, k12, k22);
  const Activation act = spec.activation;
  CrossMoment m;
  if (act == Activation::kRelu) {
    m = ReluClosedForm(k11, k12, k22);
    if (spec.force_quadrature) {
      // Value by quadrature; partials stay analytic since phi'' is a delta.
      const GaussianPair cov{k11, k12, k22};
      m.e = SplitLegendreExpectation<1>(cov, [](double u, double v) {
        return std::array<double, 1>{(u > 0.0 ? u : 0.0) * (v > 0.0 ? v : 0.0)};
      })[0];
    }
  } else {
    const GaussianPair cov{k11, k12, k22};
    if (with_derivatives) {
      const auto r = SplitLegendreExpectation<3>(cov, [act](double u, double v) {
        const Phi pu = EvalPhi(act, u);
        const Phi pv = EvalPhi(act, v);
        return std::array<double, 3>{pu.f * pv.f, pu.d1 * pv.d1,
                                     0.5 * pu.d2 * pv.f};
      });
      m.e = r[0];
      m.d_k12 = r[1];
      m.d_k11 = r[2];
    } else {
      m.e = SplitLegendreExpectation<1>(cov, [act](double u, double v) {
        return std::array<double, 1>{PhiValue(act, u) * PhiValue(act, v)};
      })[0];
    }
  }
  if (!std::isfinite(m.e) || !std::isfinite(m.d_k11) ||
      !std::isfinite(m.d_k12)) {
    Fail(ErrorCode::kQuadratureDivergence, "non-finite layer expectation");
  }
  return m;
}

SelfMoment SelfExpectation(const NngpFcSpec& spec, double k) {
  SelfMoment m;
  if (spec.activation == Activation::kRelu) {
    m.e = 0.5 * k;
    m.d_k = 0.5;
    return m;
  }
  const QuadratureRule& rule = StandardNormalSplitLegendre();
  const double a = std::sqrt(std::max(k, 0.0));
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const Phi p = EvalPhi(spec.activation, a * rule.nodes[i]);
    m.e += rule.weights[i] * p.f * p.f;
    m.d_k += rule.weights[i] * (p.d1 * p.d1 + p.f * p.d2);
  }
  if (!std::isfinite(m.e)) {
    Fail(ErrorCode::kQuadratureDivergence, "non-finite self expectation");
  }
  return m;
}

double Norm(const Vector& v, const char* what) {
  const double n = v.norm();
  if (!(n > 0.0)) {
    Fail(ErrorCode::kZeroNormInput, std::string("zero-norm ") + what);
  }
  return n;
}

void CheckDims(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) {
    Fail(ErrorCode::kDimensionMismatch,
         "kernel inputs of dimension " + std::to_string(a.size()) + " and " +
             std::to_string(b.size()));
  }
}

double NngpEval(const NngpFcSpec& spec, const Vector& x, const Vector& xp) {
  // Canonical argument order keeps the quadrature path exactly symmetric.
  const bool swap = std::lexicographical_compare(
      xp.data(), xp.data() + xp.size(), x.data(), x.data() + x.size());
  const Vector& a = swap ? xp : x;
  const Vector& b = swap ? x : xp;
  return NngpDepthRecursion(spec, NngpBaseTriple(spec, a, b)).k_qx;
}

}  // namespace

std::string ActivationName(Activation activation) {
  switch (activation) {
    case Activation::kRelu: return "relu";
    case Activation::kGelu: return "gelu";
    case Activation::kTanh: return "tanh";
    case Activation::kErf: return "erf";
  }
  return "unknown";
}

Activation ParseActivation(const std::string& name) {
  std::string lower = name;
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char ch) { return std::tolower(ch); });
  if (lower == "relu") return Activation::kRelu;
  if (lower == "gelu") return Activation::kGelu;
  if (lower == "tanh") return Activation::kTanh;
  if (lower == "erf") return Activation::kErf;
  Fail(ErrorCode::kConfigError, "unknown activation '" + name + "'");
}

CorrelationSpec ExpCorrelation(double temperature) {
  if (!(temperature > 0.0)) {
    Fail(ErrorCode::kInvalidArgument, "correlation temperature must be > 0");
  }
  return {"exp(" + std::to_string(temperature) + ")",
          [temperature](double c) { return std::exp((c - 1.0) / temperature); },
          [temperature](double c) {
            return std::exp((c - 1.0) / temperature) / temperature;
          }};
}

CorrelationSpec PolyCorrelation(int degree, double shift) {
  if (degree < 1 || !(shift >= 0.0)) {
    Fail(ErrorCode::kInvalidArgument, "poly correlation needs degree >= 1, shift >= 0");
  }
  const double denom = 1.0 + shift;
  return {"poly(" + std::to_string(degree) + "," + std::to_string(shift) + ")",
          [degree, shift, denom](double c) {
            return std::pow((c + shift) / denom, degree);
          },
          [degree, shift, denom](double c) {
            return degree * std::pow((c + shift) / denom, degree - 1) / denom;
          }};
}

void ValidateKernel(const KernelSpec& spec) {
  std::visit(
      Overloaded{
          [](const RbfSpec& s) {
            if (!(s.length > 0.0)) {
              Fail(ErrorCode::kInvalidArgument, "rbf length must be > 0");
            }
          },
          [](const LinearSpec& s) {
            if (!(s.scale > 0.0)) {
              Fail(ErrorCode::kInvalidArgument, "linear scale must be > 0");
            }
          },
          [](const CorrelationSpec& s) {
            if (!s.profile || !s.derivative) {
              Fail(ErrorCode::kInvalidArgument, "correlation profile unset");
            }
          },
          [](const NngpFcSpec& s) {
            if (s.depth < 1) {
              Fail(ErrorCode::kInvalidArgument, "nngp depth must be >= 1");
            }
            if (!(s.weight_variance > 0.0) || !(s.bias_variance >= 0.0)) {
              Fail(ErrorCode::kInvalidArgument,
                   "nngp needs weight_variance > 0 and bias_variance >= 0");
            }
          }},
      spec);
}

std::string KernelName(const KernelSpec& spec) {
  return std::visit(
      Overloaded{[](const RbfSpec&) { return std::string("rbf"); },
                 [](const LinearSpec&) { return std::string("linear"); },
                 [](const CorrelationSpec& s) { return "correlation:" + s.name; },
                 [](const NngpFcSpec& s) {
                   return "nngp_fc:" + ActivationName(s.activation);
                 }},
      spec);
}

double KernelEval(const KernelSpec& spec, const Vector& x, const Vector& xp) {
  CheckDims(x, xp);
  return std::visit(
      Overloaded{
          [&](const RbfSpec& s) {
            return std::exp(-(x - xp).squaredNorm() / (2.0 * s.length));
          },
          [&](const LinearSpec& s) {
            return s.scale * x.dot(xp) / static_cast<double>(x.size());
          },
          [&](const CorrelationSpec& s) {
            const double c = x.dot(xp) / (Norm(x, "input") * Norm(xp, "input"));
            return s.profile(std::clamp(c, -1.0, 1.0));
          },
          [&](const NngpFcSpec& s) { return NngpEval(s, x, xp); }},
      spec);
}

Matrix KernelMatrix(const KernelSpec& spec, const Matrix& x, const Matrix& z) {
  if (x.cols() != z.cols()) {
    Fail(ErrorCode::kDimensionMismatch,
         "kernel matrix with feature dims " + std::to_string(x.cols()) +
             " and " + std::to_string(z.cols()));
  }
  Matrix k(x.rows(), z.rows());
  const bool same = &x == &z || (x.rows() == z.rows() && x == z);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const Vector xi = x.row(i).transpose();
    for (Eigen::Index j = same ? i : 0; j < z.rows(); ++j) {
      k(i, j) = KernelEval(spec, xi, z.row(j).transpose());
      if (same) k(j, i) = k(i, j);
    }
  }
  return k;
}

KernelTriple NngpBaseTriple(const NngpFcSpec& spec, const Vector& q,
                            const Vector& x) {
  CheckDims(q, x);
  const double d = static_cast<double>(q.size());
  Vector qt = q;
  Vector xt = x;
  if (spec.normalize_inputs) {
    qt /= Norm(q, "input");
    xt /= Norm(x, "input");
  }
  const double sw = spec.weight_variance / d;
  return {spec.bias_variance + sw * qt.dot(qt),
          spec.bias_variance + sw * qt.dot(xt),
          spec.bias_variance + sw * xt.dot(xt)};
}

KernelTriple NngpLayer(const NngpFcSpec& spec, const KernelTriple& t) {
  const CrossMoment cross =
      CrossExpectation(spec, t.k_qq, t.k_qx, t.k_xx, /*with_derivatives=*/false);
  KernelTriple next;
  next.k_qx = spec.bias_variance + spec.weight_variance * cross.e;
  next.k_qq = spec.bias_variance +
              spec.weight_variance * SelfExpectation(spec, t.k_qq).e;
  next.k_xx = t.k_xx == t.k_qq
                  ? next.k_qq
                  : spec.bias_variance +
                        spec.weight_variance * SelfExpectation(spec, t.k_xx).e;
  return next;
}

KernelTriple NngpDepthRecursion(const NngpFcSpec& spec, KernelTriple base) {
  ValidateKernel(spec);
  for (int layer = 0; layer < spec.depth; ++layer) base = NngpLayer(spec, base);
  return base;
}

KernelGradient KernelGradQ(const KernelSpec& spec, const Vector& q,
                           const Vector& x) {
  CheckDims(q, x);
  const double d = static_cast<double>(q.size());
  return std::visit(
      Overloaded{
          [&](const RbfSpec& s) {
            const double k = std::exp(-(q - x).squaredNorm() / (2.0 * s.length));
            return KernelGradient{-(q - x) / s.length * k, false};
          },
          [&](const LinearSpec& s) {
            return KernelGradient{s.scale * x / d, false};
          },
          [&](const CorrelationSpec& s) {
            const double nq = Norm(q, "query");
            const double nx = Norm(x, "input");
            const double c = std::clamp(q.dot(x) / (nq * nx), -1.0, 1.0);
            const Vector dc = x / (nq * nx) - c * q / (nq * nq);
            return KernelGradient{s.derivative(c) * dc, false};
          },
          [&](const NngpFcSpec& s) {
            ValidateKernel(s);
            KernelTriple t = NngpBaseTriple(s, q, x);
            Vector dqq;
            Vector dqx;
            if (s.normalize_inputs) {
              const double nq = q.norm();
              const Vector qh = q / nq;
              const Vector xh = x / Norm(x, "input");
              dqq = Vector::Zero(q.size());
              dqx = s.weight_variance / d * (xh - qh.dot(xh) * qh) / nq;
            } else {
              dqq = 2.0 * s.weight_variance / d * q;
              dqx = s.weight_variance / d * x;
            }
            bool clamped = false;
            for (int layer = 0; layer < s.depth; ++layer) {
              const CrossMoment cross =
                  CrossExpectation(s, t.k_qq, t.k_qx, t.k_xx, true);
              clamped = clamped || cross.clamped;
              const SelfMoment self_q = SelfExpectation(s, t.k_qq);
              const double next_xx =
                  t.k_xx == t.k_qq
                      ? s.bias_variance + s.weight_variance * self_q.e
                      : s.bias_variance +
                            s.weight_variance * SelfExpectation(s, t.k_xx).e;
              dqx = s.weight_variance * (cross.d_k11 * dqq + cross.d_k12 * dqx);
              dqq = s.weight_variance * self_q.d_k * dqq;
              t.k_qx = s.bias_variance + s.weight_variance * cross.e;
              t.k_qq = s.bias_variance + s.weight_variance * self_q.e;
              t.k_xx = next_xx;
            }
            return KernelGradient{dqx, clamped};
          }},
      spec);
}

RegularityReport CheckRegularity(const KernelSpec& spec, const Matrix& samples,
                                 double tol) {
  if (samples.rows() == 0) {
    Fail(ErrorCode::kInvalidArgument, "regularity check needs samples");
  }
  RegularityReport report;
  for (Eigen::Index i = 0; i < samples.rows(); ++i) {
    const Vector x = samples.row(i).transpose();
    report.max_diag_deviation = std::max(
        report.max_diag_deviation, std::abs(KernelEval(spec, x, x) - 1.0));
    report.max_self_grad_norm = std::max(report.max_self_grad_norm,
                                         KernelGradQ(spec, x, x).grad.norm());
    const double step = 1e-5 * (1.0 + x.norm());
    Vector fd(x.size());
    for (Eigen::Index j = 0; j < x.size(); ++j) {
      Vector plus = x;
      Vector minus = x;
      plus(j) += step;
      minus(j) -= step;
      fd(j) = (KernelEval(spec, plus, x) - KernelEval(spec, minus, x)) /
              (2.0 * step);
    }
    report.max_self_grad_fd_norm =
        std::max(report.max_self_grad_fd_norm, fd.norm());
  }
  report.passed =
      report.max_diag_deviation <= tol && report.max_self_grad_norm <= tol;
  return report;
}

EdgeOfChaos FindEdgeOfChaos(Activation activation, double bias_variance) {
  if (activation == Activation::kRelu) {
    if (bias_variance != 0.0) {
      Fail(ErrorCode::kInvalidArgument,
           "ReLU edge of chaos needs bias_variance = 0");
    }
    return {2.0, 1.0};
  }
  if (!(bias_variance > 0.0)) {
    Fail(ErrorCode::kInvalidArgument,
         "smooth edge of chaos needs bias_variance > 0");
  }
  NngpFcSpec spec;
  spec.activation = activation;
  spec.bias_variance = bias_variance;

  const QuadratureRule& rule = StandardNormalSplitLegendre();
  auto slope = [&](double q) {
    const double a = std::sqrt(q);
    double chi = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) {
      const double d1 = EvalPhi(activation, a * rule.nodes[i]).d1;
      chi += rule.weights[i] * d1 * d1;
    }
    return chi;
  };
  boost::math::tools::eps_tolerance<double> tolerance(50);

  // Variance fixed point for a given weight variance; negative when absent.
  auto fixed_point = [&](double sw) {
    auto f = [&](double q) {
      return bias_variance + sw * SelfExpectation(spec, q).e - q;
    };
    double hi = std::max(1.0, 2.0 * bias_variance);
    while (f(hi) > 0.0) {
      hi *= 2.0;
      if (hi > 1e8) return -1.0;
    }
    std::uintmax_t iters = 200;
    const auto root =
        boost::math::tools::toms748_solve(f, bias_variance, hi, tolerance, iters);
    return 0.5 * (root.first + root.second);
  };
  auto criticality = [&](double sw) {
    const double q = fixed_point(sw);
    return q < 0.0 ? 1.0 : sw * slope(q) - 1.0;
  };

  double lo = 0.25;
  double prev = criticality(lo);
  for (double sw = lo + 0.05; sw <= 8.0; sw += 0.05) {
    const double cur = criticality(sw);
    if ((prev < 0.0) != (cur < 0.0)) {
      std::uintmax_t iters = 200;
      const auto root = boost::math::tools::toms748_solve(
          criticality, lo, sw, prev, cur, tolerance, iters);
      const double w = 0.5 * (root.first + root.second);
      return {w, fixed_point(w)};
    }
    lo = sw;
    prev = cur;
  }
  Fail(ErrorCode::kInvalidArgument,
       "no edge of chaos found for " + ActivationName(activation));
}

}  // namespace lood
