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
#ifndef LOOD_QUADRATURE_H_
#define LOOD_QUADRATURE_H_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

namespace lood {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }
};

// Physicists' Gauss-Hermite rule: sum_i w_i f(x_i) ~ int f(x) exp(-x^2) dx.
QuadratureRule GaussHermite(int order);

// Gauss-Legendre rule on [lo, hi].
QuadratureRule GaussLegendre(int order, double lo, double hi);

// Rule for E[f(z)], z ~ N(0, 1), built from Gauss-Hermite.
const QuadratureRule& StandardNormalHermite();

// Same target, Gauss-Legendre on [-8, 0] and [0, 8] with the density folded
// into the weights. Accurate for integrands with a sharp transition at 0.
const QuadratureRule& StandardNormalSplitLegendre();

// Order used by the tensor Gauss-Hermite path.
inline constexpr int kHermiteOrder = 40;
// Nodes per piece and truncation radius of the split Gauss-Legendre path.
inline constexpr int kLegendreOrder = 32;
inline constexpr double kLegendreRadius = 8.0;

// Covariance of a zero-mean Gaussian pair (u, v).
struct GaussianPair {
  double k11;
  double k12;
  double k22;
};

// Whitening u = a z1, v = b z1 + c z2 with z1, z2 i.i.d. N(0, 1).
struct Whitening {
  double a;
  double b;
  double c;
};

Whitening Whiten(const GaussianPair& cov);

// E[f(u, v)] for a smooth integrand with tensor Gauss-Hermite of order 40.
// f returns std::array<double, N> so several moments share one sweep.
template <std::size_t N, typename F>
std::array<double, N> HermiteExpectation(const GaussianPair& cov, F&& f) {
  const QuadratureRule& rule = StandardNormalHermite();
  const Whitening w = Whiten(cov);
  std::array<double, N> acc{};
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const double z1 = rule.nodes[i];
    const double u = w.a * z1;
    const double bz1 = w.b * z1;
    for (std::size_t j = 0; j < rule.size(); ++j) {
      const double v = bz1 + w.c * rule.nodes[j];
      const double wt = rule.weights[i] * rule.weights[j];
      const std::array<double, N> val = f(u, v);
      for (std::size_t k = 0; k < N; ++k) acc[k] += wt * val[k];
    }
  }
  return acc;
}

namespace internal {

// Nodes and weights (including the N(0,1) density) on [lo, hi], split at
// `cut` when it lies strictly inside.
void AppendSplitLegendre(double lo, double hi, double cut,
                         std::vector<double>& nodes,
                         std::vector<double>& weights);

}  // namespace internal

// E[f(u, v)] for an integrand with kinks on u = 0 and v = 0. Nested
// Gauss-Legendre on [-8, 8]^2 split at the kink lines in whitened space.
template <std::size_t N, typename F>
std::array<double, N> SplitLegendreExpectation(const GaussianPair& cov, F&& f) {
  const Whitening w = Whiten(cov);
  const QuadratureRule& outer = StandardNormalSplitLegendre();
  const std::vector<double>& outer_nodes = outer.nodes;
  const std::vector<double>& outer_weights = outer.weights;
  std::array<double, N> acc{};
  std::vector<double> inner_nodes;
  std::vector<double> inner_weights;
  for (std::size_t i = 0; i < outer_nodes.size(); ++i) {
    const double z1 = outer_nodes[i];
    const double u = w.a * z1;
    const double bz1 = w.b * z1;
    inner_nodes.clear();
    inner_weights.clear();
    const double cut = w.c > 0.0 ? -bz1 / w.c : 2.0 * kLegendreRadius;
    internal::AppendSplitLegendre(-kLegendreRadius, kLegendreRadius, cut,
                                  inner_nodes, inner_weights);
    for (std::size_t j = 0; j < inner_nodes.size(); ++j) {
      const double v = bz1 + w.c * inner_nodes[j];
      const double wt = outer_weights[i] * inner_weights[j];
      const std::array<double, N> val = f(u, v);
      for (std::size_t k = 0; k < N; ++k) acc[k] += wt * val[k];
    }
  }
  return acc;
}

}  // namespace lood

#endif  // LOOD_QUADRATURE_H_
