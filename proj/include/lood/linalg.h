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
#ifndef LOOD_LINALG_H_
#define LOOD_LINALG_H_

#include <array>

#include <Eigen/Dense>

namespace lood {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Jitter ladder for Cholesky: each entry is multiplied by the largest
// diagonal entry (or 1 when that is zero) and added to the diagonal.
struct JitterPolicy {
  std::array<double, 4> relative_steps = {0.0, 1e-10, 1e-9, 1e-8};

  static JitterPolicy Default() { return {}; }
  static JitterPolicy None() { return {{0.0, 0.0, 0.0, 0.0}}; }
};

// Lower-triangular L with L L^T = M + jitter * I.
struct CholeskyFactor {
  Matrix lower;
  double jitter = 0.0;

  Eigen::Index dim() const { return lower.rows(); }
};

struct BlockInverseResult {
  Matrix inverse;
  double alpha = 0.0;  // Schur complement c - b^T A^{-1} b
};

// (M + M^T) / 2.
Matrix Symmetrize(const Matrix& m);

// Throws kNotPsd when every rung of the ladder fails.
CholeskyFactor CholeskyPsd(const Matrix& m,
                           const JitterPolicy& policy = JitterPolicy::Default());

// Solves (L L^T) X = B. Throws kDimensionMismatch on row mismatch.
Matrix SolvePsd(const CholeskyFactor& factor, const Matrix& rhs);
Vector SolvePsd(const CholeskyFactor& factor, const Vector& rhs);

// log det(L L^T) = 2 sum_i log L_ii.
double LogdetPsd(const CholeskyFactor& factor);

// Inverse of [[A, b], [b^T, c]] from A^{-1} via the Schur complement
// alpha = c - b^T A^{-1} b. Throws kSingularSchur when alpha <= 1e-14.
BlockInverseResult BlockInverse(const Matrix& a_inv, const Vector& b, double c);

// True when an unjittered Cholesky succeeds or the smallest eigenvalue of
// the symmetrized matrix is >= -tol.
bool IsPsd(const Matrix& m, double tol);

// Largest absolute row sum.
double InfNorm(const Matrix& m);

}  // namespace lood

#endif  // LOOD_LINALG_H_
