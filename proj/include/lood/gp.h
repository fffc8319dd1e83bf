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
#ifndef LOOD_GP_H_
#define LOOD_GP_H_

#include <cstdint>
#include <optional>
#include <utility>

#include "lood/kernels.h"
#include "lood/linalg.h"

namespace lood {

struct Dataset {
  Matrix features;  // n x d
  Vector labels;    // n
  double noise_variance = 0.01;

  Eigen::Index size() const { return features.rows(); }
  Eigen::Index dim() const { return features.cols(); }
};

// Throws on shape mismatch, non-finite labels or noise below 1e-12.
void ValidateDataset(const Dataset& data);

// D and the records S with D' = D u S.
struct LeaveOneOutPair {
  Dataset base;
  Matrix differing_features;  // s x d
  Vector differing_labels;    // s

  Eigen::Index group_size() const { return differing_features.rows(); }
};

void ValidatePair(const LeaveOneOutPair& pair);

// D' as a single dataset, S appended after D.
Dataset Augmented(const LeaveOneOutPair& pair);

LeaveOneOutPair MakePair(const Dataset& base, const Vector& s_features,
                         double s_label);

struct PosteriorSummary {
  Vector mean;
  Matrix covariance;

  Eigen::Index query_count() const { return mean.size(); }
};

// mu = K_QD M^{-1} y and Sigma = K_QQ - K_QD M^{-1} K_DQ with
// M = K_DD + sigma^2 I. An empty dataset gives the prior.
PosteriorSummary Posterior(const KernelSpec& spec, const Dataset& data,
                           const Matrix& queries);

enum class LooPath {
  kAuto,         // block update when s = 1, direct otherwise
  kBlockUpdate,  // requires s = 1
  kDirect,
};

// Fitted pair of GP regressors that answers repeated queries.
class LooModel {
 public:
  LooModel(KernelSpec spec, LeaveOneOutPair pair, LooPath path = LooPath::kAuto);

  // Posteriors for D and D' at the rows of `queries`.
  std::pair<PosteriorSummary, PosteriorSummary> Posteriors(
      const Matrix& queries) const;

  const KernelSpec& spec() const { return spec_; }
  const LeaveOneOutPair& pair() const { return pair_; }
  bool used_block_update() const { return block_update_; }

  // One side of the pair: training inputs, M^{-1} y and a way to apply M^{-1}.
  struct Side {
    Matrix features;
    Vector weights;
    std::optional<CholeskyFactor> factor;
    Matrix inverse;  // used when factor is empty

    Vector Solve(const Vector& rhs) const;
    Matrix Solve(const Matrix& rhs) const;
  };
  const Side& small_side() const { return small_; }
  const Side& large_side() const { return large_; }

 private:
  PosteriorSummary SidePosterior(const Side& side, const Matrix& queries,
                                 const Matrix& k_qq) const;

  KernelSpec spec_;
  LeaveOneOutPair pair_;
  bool block_update_ = false;
  Side small_;
  Side large_;
};

std::pair<PosteriorSummary, PosteriorSummary> LooPairPosteriors(
    const KernelSpec& spec, const LeaveOneOutPair& pair, const Matrix& queries,
    LooPath path = LooPath::kAuto);

// count x q draws from N(mean, covariance), deterministic in seed.
Matrix PredictiveSample(const PosteriorSummary& summary, int count,
                        std::uint64_t seed);

}  // namespace lood

#endif  // LOOD_GP_H_
