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
#include "lood/quadrature.h"

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "lood/error.h"

namespace lood {

namespace {

// Golub-Welsch: eigen-decomposition of the Jacobi matrix, then one Newton
// polish per node on the three-term recurrence.
QuadratureRule GolubWelsch(const Eigen::VectorXd& diag,
                           const Eigen::VectorXd& offdiag, double mu0) {
  const Eigen::Index n = diag.size();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, offdiag, Eigen::ComputeEigenvectors);
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    rule.nodes[i] = solver.eigenvalues()(i);
    const double v0 = solver.eigenvectors()(0, i);
    rule.weights[i] = mu0 * v0 * v0;
  }
  return rule;
}

}  // namespace

QuadratureRule GaussHermite(int order) {
  if (order < 1) Fail(ErrorCode::kInvalidArgument, "quadrature order < 1");
  // Orthonormal Hermite polynomials: h_{k+1} = x sqrt(2/(k+1)) h_k -
  // sqrt(k/(k+1)) h_{k-1}; Jacobi off-diagonal sqrt(k/2).
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(order);
  Eigen::VectorXd off(std::max(order - 1, 0));
  for (int k = 1; k < order; ++k) off(k - 1) = std::sqrt(k / 2.0);
  QuadratureRule rule = GolubWelsch(diag, off, std::sqrt(std::numbers::pi));

  // Newton polish and weights from w = 2 / (h'_n)^2 in orthonormal form.
  for (int i = 0; i < order; ++i) {
    double x = rule.nodes[i];
    double deriv = 1.0;
    for (int iter = 0; iter < 4; ++iter) {
      double p0 = std::pow(std::numbers::pi, -0.25);
      double p1 = 0.0;
      for (int k = 0; k < order; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = x * std::sqrt(2.0 / (k + 1)) * p1 - std::sqrt(k / (k + 1.0)) * p2;
      }
      deriv = std::sqrt(2.0 * order) * p1;
      x -= p0 / deriv;
    }
    rule.nodes[i] = x;
    rule.weights[i] = 2.0 / (deriv * deriv);
  }
  return rule;
}

QuadratureRule GaussLegendre(int order, double lo, double hi) {
  if (order < 1) Fail(ErrorCode::kInvalidArgument, "quadrature order < 1");
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(order);
  Eigen::VectorXd off(std::max(order - 1, 0));
  for (int k = 1; k < order; ++k) off(k - 1) = k / std::sqrt(4.0 * k * k - 1.0);
  QuadratureRule rule = GolubWelsch(diag, off, 2.0);

  for (int i = 0; i < order; ++i) {
    double x = rule.nodes[i];
    double deriv = 1.0;
    for (int iter = 0; iter < 4; ++iter) {
      double p0 = 1.0;
      double p1 = 0.0;
      for (int k = 0; k < order; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k + 1.0) * x * p1 - k * p2) / (k + 1.0);
      }
      deriv = order * (x * p0 - p1) / (x * x - 1.0);
      x -= p0 / deriv;
    }
    rule.nodes[i] = x;
    rule.weights[i] = 2.0 / ((1.0 - x * x) * deriv * deriv);
  }

  const double half = 0.5 * (hi - lo);
  const double mid = 0.5 * (hi + lo);
  for (int i = 0; i < order; ++i) {
    rule.nodes[i] = mid + half * rule.nodes[i];
    rule.weights[i] *= half;
  }
  return rule;
}

const QuadratureRule& StandardNormalHermite() {
  static const QuadratureRule rule = [] {
    QuadratureRule r = GaussHermite(kHermiteOrder);
    for (std::size_t i = 0; i < r.size(); ++i) {
      r.nodes[i] *= std::numbers::sqrt2;
      r.weights[i] /= std::sqrt(std::numbers::pi);
    }
    return r;
  }();
  return rule;
}

const QuadratureRule& StandardNormalSplitLegendre() {
  static const QuadratureRule rule = [] {
    QuadratureRule r;
    internal::AppendSplitLegendre(-kLegendreRadius, kLegendreRadius, 0.0,
                                  r.nodes, r.weights);
    return r;
  }();
  return rule;
}

Whitening Whiten(const GaussianPair& cov) {
  Whitening w{0.0, 0.0, 0.0};
  w.a = std::sqrt(std::max(cov.k11, 0.0));
  if (w.a > 0.0) {
    w.b = cov.k12 / w.a;
    w.c = std::sqrt(std::max(cov.k22 - w.b * w.b, 0.0));
  } else {
    w.c = std::sqrt(std::max(cov.k22, 0.0));
  }
  return w;
}

namespace internal {

namespace {

const QuadratureRule& UnitLegendre() {
  static const QuadratureRule rule = GaussLegendre(kLegendreOrder, -1.0, 1.0);
  return rule;
}

void AppendPiece(double lo, double hi, std::vector<double>& nodes,
                 std::vector<double>& weights) {
  const QuadratureRule& unit = UnitLegendre();
  const double half = 0.5 * (hi - lo);
  const double mid = 0.5 * (hi + lo);
  const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  for (std::size_t i = 0; i < unit.size(); ++i) {
    const double z = mid + half * unit.nodes[i];
    nodes.push_back(z);
    weights.push_back(unit.weights[i] * half * norm * std::exp(-0.5 * z * z));
  }
}

}  // namespace

void AppendSplitLegendre(double lo, double hi, double cut,
                         std::vector<double>& nodes,
                         std::vector<double>& weights) {
  if (cut > lo && cut < hi) {
    AppendPiece(lo, cut, nodes, weights);
    AppendPiece(cut, hi, nodes, weights);
  } else {
    AppendPiece(lo, hi, nodes, weights);
  }
}

}  // namespace internal

}  // namespace lood
