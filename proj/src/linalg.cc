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
#include "lood/linalg.h"

#include <cmath>
#include <string>

#include "lood/error.h"

namespace lood {

namespace {

constexpr double kMinSchur = 1e-14;

std::string Shape(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

}  // namespace

Matrix Symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

double InfNorm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return m.cwiseAbs().rowwise().sum().maxCoeff();
}

CholeskyFactor CholeskyPsd(const Matrix& m, const JitterPolicy& policy) {
  if (m.rows() != m.cols()) {
    Fail(ErrorCode::kDimensionMismatch, "cholesky of non-square " + Shape(m));
  }
  const Eigen::Index n = m.rows();
  if (n == 0) return {Matrix(0, 0), 0.0};

  const Matrix sym = Symmetrize(m);
  const double max_diag = sym.diagonal().maxCoeff();
  const double scale = max_diag > 0.0 ? max_diag : 1.0;

  double last_tried = -1.0;
  for (double step : policy.relative_steps) {
    const double jitter = step * scale;
    if (jitter == last_tried) continue;
    last_tried = jitter;
    Matrix shifted = sym;
    shifted.diagonal().array() += jitter;
    Eigen::LLT<Matrix> llt(shifted);
    if (llt.info() == Eigen::Success) {
      return {llt.matrixL(), jitter};
    }
  }
  Fail(ErrorCode::kNotPsd,
       "matrix " + Shape(m) + " is not PSD after maximal jitter " +
           std::to_string(last_tried));
}

Matrix SolvePsd(const CholeskyFactor& factor, const Matrix& rhs) {
  if (rhs.rows() != factor.dim()) {
    Fail(ErrorCode::kDimensionMismatch,
         "solve with factor of dim " + std::to_string(factor.dim()) +
             " and rhs " + Shape(rhs));
  }
  if (factor.dim() == 0) return Matrix(0, rhs.cols());
  const auto lower = factor.lower.triangularView<Eigen::Lower>();
  Matrix y = lower.solve(rhs);
  return factor.lower.transpose().triangularView<Eigen::Upper>().solve(y);
}

Vector SolvePsd(const CholeskyFactor& factor, const Vector& rhs) {
  Matrix x = SolvePsd(factor, Matrix(rhs));
  return x.col(0);
}

double LogdetPsd(const CholeskyFactor& factor) {
  return 2.0 * factor.lower.diagonal().array().log().sum();
}

BlockInverseResult BlockInverse(const Matrix& a_inv, const Vector& b,
                                double c) {
  const Eigen::Index n = a_inv.rows();
  if (a_inv.cols() != n || b.size() != n) {
    Fail(ErrorCode::kDimensionMismatch,
         "block inverse with A^{-1} " + Shape(a_inv) + " and b of size " +
             std::to_string(b.size()));
  }
  const Vector a_inv_b = a_inv * b;
  const double alpha = c - b.dot(a_inv_b);
  if (!(alpha > kMinSchur)) {
    Fail(ErrorCode::kSingularSchur,
         "Schur complement " + std::to_string(alpha) + " is not positive");
  }
  BlockInverseResult result;
  result.alpha = alpha;
  result.inverse.resize(n + 1, n + 1);
  result.inverse.topLeftCorner(n, n) =
      a_inv + (a_inv_b * a_inv_b.transpose()) / alpha;
  result.inverse.topRightCorner(n, 1) = -a_inv_b / alpha;
  result.inverse.bottomLeftCorner(1, n) = -a_inv_b.transpose() / alpha;
  result.inverse(n, n) = 1.0 / alpha;
  return result;
}

bool IsPsd(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  if (m.rows() == 0) return true;
  const Matrix sym = Symmetrize(m);
  Eigen::LLT<Matrix> llt(sym);
  if (llt.info() == Eigen::Success) return true;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff() >= -tol;
}

}  // namespace lood
