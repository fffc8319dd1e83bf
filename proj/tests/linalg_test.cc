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
#include <random>

#include "gtest/gtest.h"
#include "lood/error.h"
#include "lood/gp.h"
#include "lood/kernels.h"
#include "test_util.h"

namespace lood {
namespace {

using testing::RandomMatrix;
using testing::RandomPsd;

// Laplace expansion along the first row.
double CofactorDet(const Matrix& m) {
  const Eigen::Index n = m.rows();
  if (n == 1) return m(0, 0);
  double det = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    Matrix minor(n - 1, n - 1);
    for (Eigen::Index r = 1; r < n; ++r) {
      Eigen::Index c2 = 0;
      for (Eigen::Index c = 0; c < n; ++c) {
        if (c == j) continue;
        minor(r - 1, c2++) = m(r, c);
      }
    }
    det += (j % 2 == 0 ? 1.0 : -1.0) * m(0, j) * CofactorDet(minor);
  }
  return det;
}

TEST(CholeskyPsd, IdentityGivesIdentity) {
  const CholeskyFactor f = CholeskyPsd(Matrix::Identity(3, 3));
  EXPECT_EQ(f.jitter, 0.0);
  EXPECT_TRUE(f.lower.isApprox(Matrix::Identity(3, 3)));
}

TEST(CholeskyPsd, ScalarFour) {
  Matrix m(1, 1);
  m << 4.0;
  EXPECT_DOUBLE_EQ(CholeskyPsd(m).lower(0, 0), 2.0);
}

TEST(CholeskyPsd, GramMatrixReconstructs) {
  std::mt19937_64 rng(1);
  const Matrix x = RandomMatrix(5, 5, rng);
  const Matrix m = x * x.transpose();
  const CholeskyFactor f = CholeskyPsd(m);
  const Matrix rebuilt = f.lower * f.lower.transpose();
  Matrix shifted = m;
  shifted.diagonal().array() += f.jitter;
  EXPECT_LE(InfNorm(rebuilt - shifted), 1e-10 * std::max(1.0, InfNorm(m)));
  EXPECT_LE(InfNorm(rebuilt - m), 1e-8 * InfNorm(m));
}

TEST(CholeskyPsd, ReconstructionPropertyOverRandomSizes) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index n = 1 + trial % 10;
    const Matrix m = RandomPsd(n, rng, 0.0);
    const CholeskyFactor f = CholeskyPsd(m);
    Matrix shifted = m;
    shifted.diagonal().array() += f.jitter;
    EXPECT_LE(InfNorm(f.lower * f.lower.transpose() - shifted),
              1e-10 * InfNorm(m));
  }
}

TEST(CholeskyPsd, RankDeficientNeedsJitter) {
  Matrix m = Matrix::Ones(4, 4);
  const CholeskyFactor f = CholeskyPsd(m);
  EXPECT_GT(f.jitter, 0.0);
  EXPECT_LE(f.jitter, 1e-8 * 1.0);
}

TEST(CholeskyPsd, IndefiniteThrowsNotPsd) {
  Matrix m(2, 2);
  m << 1.0, 0.0, 0.0, -1.0;
  try {
    CholeskyPsd(m);
    FAIL() << "expected NotPsd";
  } catch (const LoodError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotPsd);
  }
}

TEST(SolvePsd, IdentityReturnsRhs) {
  std::mt19937_64 rng(3);
  const Matrix b = RandomMatrix(4, 3, rng);
  const CholeskyFactor f = CholeskyPsd(Matrix::Identity(4, 4));
  EXPECT_TRUE(SolvePsd(f, b).isApprox(b));
}

TEST(SolvePsd, ScalarCase) {
  Matrix m(1, 1);
  m << 4.0;
  Matrix b(1, 1);
  b << 8.0;
  EXPECT_DOUBLE_EQ(SolvePsd(CholeskyPsd(m), b)(0, 0), 2.0);
}

TEST(SolvePsd, ResidualIsSmall) {
  std::mt19937_64 rng(4);
  const Matrix m = RandomPsd(6, rng);
  const Matrix b = RandomMatrix(6, 2, rng);
  const Matrix x = SolvePsd(CholeskyPsd(m), b);
  EXPECT_LE(InfNorm(m * x - b), 1e-8 * InfNorm(b));
  const Vector bv = b.col(0);
  EXPECT_LE((m * SolvePsd(CholeskyPsd(m), bv) - bv).cwiseAbs().maxCoeff(),
            1e-8 * bv.cwiseAbs().maxCoeff());
}

TEST(SolvePsd, DimensionMismatchThrows) {
  const CholeskyFactor f = CholeskyPsd(Matrix::Identity(3, 3));
  EXPECT_THROW(SolvePsd(f, Matrix(Matrix::Ones(2, 1))), LoodError);
}

TEST(LogdetPsd, IdentityIsZero) {
  EXPECT_DOUBLE_EQ(LogdetPsd(CholeskyPsd(Matrix::Identity(5, 5))), 0.0);
}

TEST(LogdetPsd, DiagonalTwoEight) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = 2.0;
  m(1, 1) = 8.0;
  EXPECT_NEAR(LogdetPsd(CholeskyPsd(m)), std::log(16.0), 1e-14);
}

TEST(LogdetPsd, MatchesCofactorExpansion) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix m = RandomPsd(4, rng);
    const double expected = std::log(CofactorDet(m));
    const double got = LogdetPsd(CholeskyPsd(m));
    EXPECT_NEAR(got, expected, 1e-8 * std::max(1.0, std::abs(expected)));
  }
}

TEST(LogdetPsd, MonotoneInJitter) {
  std::mt19937_64 rng(6);
  const Matrix m = RandomPsd(5, rng);
  double previous = -1e300;
  for (double shift : {0.0, 1e-6, 1e-3, 0.1, 1.0}) {
    Matrix shifted = m;
    shifted.diagonal().array() += shift;
    const double value = LogdetPsd(CholeskyPsd(shifted));
    EXPECT_GE(value, previous);
    previous = value;
  }
}

TEST(BlockInverse, BlockDiagonalCase) {
  const Vector b = Vector::Zero(2);
  const BlockInverseResult r = BlockInverse(Matrix::Identity(2, 2), b, 2.0);
  EXPECT_DOUBLE_EQ(r.alpha, 2.0);
  Matrix expected = Matrix::Identity(3, 3);
  expected(2, 2) = 0.5;
  EXPECT_TRUE(r.inverse.isApprox(expected));
}

TEST(BlockInverse, TwoByTwoAgainstDirectFormula) {
  Vector b(1);
  b << 0.5;
  const BlockInverseResult r = BlockInverse(Matrix::Identity(1, 1), b, 1.0);
  EXPECT_NEAR(r.alpha, 0.75, 1e-15);
  // inverse of [[a, b], [b, c]] = [[c, -b], [-b, a]] / (ac - b^2)
  const double det = 1.0 * 1.0 - 0.25;
  EXPECT_NEAR(r.inverse(0, 0), 1.0 / det, 1e-14);
  EXPECT_NEAR(r.inverse(0, 1), -0.5 / det, 1e-14);
  EXPECT_NEAR(r.inverse(1, 0), -0.5 / det, 1e-14);
  EXPECT_NEAR(r.inverse(1, 1), 1.0 / det, 1e-14);
  EXPECT_NEAR(r.inverse(0, 0), 4.0 / 3.0, 1e-14);
  EXPECT_NEAR(r.inverse(0, 1), -2.0 / 3.0, 1e-14);
}

TEST(BlockInverse, MatchesDirectInversionOverRandomSizes) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index n = 1 + trial % 10;
    const Matrix full = RandomPsd(n + 1, rng, 0.5);
    const Matrix a = full.topLeftCorner(n, n);
    const Vector b = full.topRightCorner(n, 1);
    const double c = full(n, n);
    const BlockInverseResult r = BlockInverse(a.inverse(), b, c);
    const Matrix direct = full.partialPivLu().inverse();
    EXPECT_LE(InfNorm(r.inverse - direct), 1e-8 * std::max(1.0, InfNorm(direct)))
        << "n=" << n;
    EXPECT_LE(InfNorm(r.inverse * full - Matrix::Identity(n + 1, n + 1)), 1e-8);
  }
}

TEST(BlockInverse, SingularSchurThrows) {
  Vector b(1);
  b << 1.0;
  try {
    BlockInverse(Matrix::Identity(1, 1), b, 1.0);
    FAIL() << "expected SingularSchur";
  } catch (const LoodError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSingularSchur);
  }
}

TEST(IsPsd, SimpleCases) {
  EXPECT_TRUE(IsPsd(Matrix::Identity(3, 3), 1e-10));
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = 1.0;
  m(1, 1) = -1.0;
  EXPECT_FALSE(IsPsd(m, 1e-10));
  EXPECT_FALSE(IsPsd(Matrix::Ones(2, 3), 1e-10));
}

TEST(IsPsd, PosteriorCovarianceOfRbfSetup) {
  std::mt19937_64 rng(8);
  Dataset data;
  data.features = RandomMatrix(8, 2, rng);
  data.labels = RandomMatrix(8, 1, rng).col(0);
  const Matrix q = RandomMatrix(5, 2, rng);
  const KernelSpec spec = RbfSpec{1.0};
  const Matrix k_qd = KernelMatrix(spec, q, data.features);
  Matrix m = KernelMatrix(spec, data.features, data.features);
  m.diagonal().array() += data.noise_variance;
  const Matrix cov =
      KernelMatrix(spec, q, q) - k_qd * m.partialPivLu().solve(k_qd.transpose());
  EXPECT_TRUE(IsPsd(cov, 1e-8));
}

}  // namespace
}  // namespace lood
