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
#ifndef LOOD_TESTS_TEST_UTIL_H_
#define LOOD_TESTS_TEST_UTIL_H_

#include <cmath>
#include <cstdint>
#include <random>

#include "lood/dataset.h"
#include "lood/gp.h"
#include "lood/linalg.h"

namespace lood::testing {

inline Matrix RandomMatrix(Eigen::Index rows, Eigen::Index cols,
                           std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = normal(rng);
  }
  return m;
}

// X X^T + shift I.
inline Matrix RandomPsd(Eigen::Index n, std::mt19937_64& rng,
                        double shift = 0.1) {
  const Matrix x = RandomMatrix(n, n, rng);
  return x * x.transpose() + shift * Matrix::Identity(n, n);
}

// Ten points x ~ N(0, 1) with y = sin(x) and noise 0.01.
inline Dataset SineData(std::uint64_t seed = 0, int n = 10) {
  ToyGeneratorSpec spec;
  spec.n = n;
  spec.seed = seed;
  return GenerateToy(spec);
}

inline LeaveOneOutPair SinePair(double s, std::uint64_t seed = 0) {
  Vector sv(1);
  sv << s;
  return MakePair(SineData(seed), sv, std::sin(s));
}

inline Matrix Point(double x) {
  Matrix q(1, 1);
  q << x;
  return q;
}

}  // namespace lood::testing

#endif  // LOOD_TESTS_TEST_UTIL_H_
