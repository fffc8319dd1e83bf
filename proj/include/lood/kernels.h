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
#ifndef LOOD_KERNELS_H_
#define LOOD_KERNELS_H_

#include <functional>
#include <string>
#include <variant>

#include "lood/linalg.h"

namespace lood {

enum class Activation { kRelu, kGelu, kTanh, kErf };

std::string ActivationName(Activation activation);
Activation ParseActivation(const std::string& name);

// K(x, x') = exp(-||x - x'||^2 / (2 length)).
struct RbfSpec {
  double length = 1.0;
};

// K(x, x') = scale <x, x'> / d.
struct LinearSpec {
  double scale = 1.0;
};

// K(x, x') = g(<x, x'> / (||x|| ||x'||)).
struct CorrelationSpec {
  std::string name;
  std::function<double(double)> profile;
  std::function<double(double)> derivative;
};

// g(c) = exp((c - 1) / temperature).
CorrelationSpec ExpCorrelation(double temperature);
// g(c) = ((c + shift) / (1 + shift))^degree, shift >= 0.
CorrelationSpec PolyCorrelation(int degree, double shift);

// Fully connected NNGP. Layer 0 is sigma_b^2 + sigma_w^2 <x, x'> / d on
// x / ||x|| when normalize_inputs is set; each of the `depth` layers applies
// K <- sigma_b^2 + sigma_w^2 E[phi(u) phi(v)].
struct NngpFcSpec {
  int depth = 1;
  Activation activation = Activation::kRelu;
  double weight_variance = 2.0;
  double bias_variance = 0.0;
  bool normalize_inputs = true;
  // Evaluate ReLU by quadrature instead of the arccosine closed form.
  bool force_quadrature = false;
};

using KernelSpec = std::variant<RbfSpec, LinearSpec, CorrelationSpec, NngpFcSpec>;

// Throws kInvalidArgument on nonpositive length/scale/variances or depth < 1.
void ValidateKernel(const KernelSpec& spec);
std::string KernelName(const KernelSpec& spec);

struct KernelTriple {
  double k_qq = 0.0;
  double k_qx = 0.0;
  double k_xx = 0.0;
};

double KernelEval(const KernelSpec& spec, const Vector& x, const Vector& xp);

// Rows of x against rows of z.
Matrix KernelMatrix(const KernelSpec& spec, const Matrix& x, const Matrix& z);

// Layer-0 triple for the pair (q, x).
KernelTriple NngpBaseTriple(const NngpFcSpec& spec, const Vector& q,
                            const Vector& x);

// Applies `spec.depth` layers. Throws kQuadratureDivergence when the triple
// breaks Cauchy-Schwarz by more than 1e-10 or an expectation is not finite.
KernelTriple NngpDepthRecursion(const NngpFcSpec& spec, KernelTriple base);

// One layer of the recursion, exposed for depth scans.
KernelTriple NngpLayer(const NngpFcSpec& spec, const KernelTriple& t);

struct KernelGradient {
  Vector grad;
  // Set when a correlation was clamped to +-(1 - 1e-12) on the way.
  bool clamped = false;
};

// dK(q, x)/dq.
KernelGradient KernelGradQ(const KernelSpec& spec, const Vector& q,
                           const Vector& x);

struct RegularityReport {
  double max_diag_deviation = 0.0;
  double max_self_grad_norm = 0.0;
  // Central-difference counterpart of max_self_grad_norm.
  double max_self_grad_fd_norm = 0.0;
  bool passed = false;
};

// Samples are the rows of `samples`.
RegularityReport CheckRegularity(const KernelSpec& spec, const Matrix& samples,
                                 double tol);

struct EdgeOfChaos {
  double weight_variance = 0.0;
  // Fixed point q* of q = sigma_b^2 + sigma_w^2 E[phi(sqrt(q) z)^2].
  double fixed_point = 0.0;
};

// Weight variance with sigma_w^2 E[phi'(sqrt(q*) z)^2] = 1 at the variance
// fixed point. ReLU requires bias_variance = 0 and reports q* = 1.
EdgeOfChaos FindEdgeOfChaos(Activation activation, double bias_variance);

}  // namespace lood

#endif  // LOOD_KERNELS_H_
