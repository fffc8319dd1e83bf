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
#include "lood/gp.h"

#include <cmath>
#include <random>
#include <string>

#include "lood/error.h"

namespace lood {

namespace {

constexpr double kMinNoise = 1e-12;

Matrix NoisyGram(const KernelSpec& spec, const Dataset& data) {
  Matrix m = KernelMatrix(spec, data.features, data.features);
  m.diagonal().array() += data.noise_variance;
  return m;
}

void CheckQueries(const Dataset& data, const Matrix& queries) {
  if (queries.rows() < 1) {
    Fail(ErrorCode::kInvalidArgument, "posterior needs at least one query");
  }
  if (data.size() > 0 && queries.cols() != data.dim()) {
    Fail(ErrorCode::kDimensionMismatch,
         "queries of dim " + std::to_string(queries.cols()) +
             " against data of dim " + std::to_string(data.dim()));
  }
}

}  // namespace

void ValidateDataset(const Dataset& data) {
  if (data.labels.size() != data.features.rows()) {
    Fail(ErrorCode::kDimensionMismatch,
         "dataset has " + std::to_string(data.features.rows()) +
             " rows and " + std::to_string(data.labels.size()) + " labels");
  }
  if (!data.labels.allFinite() || !data.features.allFinite()) {
    Fail(ErrorCode::kInvalidArgument, "dataset contains non-finite values");
  }
  if (!(data.noise_variance >= kMinNoise)) {
    Fail(ErrorCode::kInvalidArgument, "noise variance below 1e-12");
  }
}

void ValidatePair(const LeaveOneOutPair& pair) {
  ValidateDataset(pair.base);
  if (pair.differing_features.rows() < 1) {
    Fail(ErrorCode::kInvalidArgument, "pair needs at least one differing record");
  }
  if (pair.differing_labels.size() != pair.differing_features.rows()) {
    Fail(ErrorCode::kDimensionMismatch, "differing labels/features mismatch");
  }
  if (pair.base.size() > 0 &&
      pair.differing_features.cols() != pair.base.dim()) {
    Fail(ErrorCode::kDimensionMismatch,
         "differing records of dim " +
             std::to_string(pair.differing_features.cols()) +
             " against data of dim " + std::to_string(pair.base.dim()));
  }
  if (!pair.differing_labels.allFinite() ||
      !pair.differing_features.allFinite()) {
    Fail(ErrorCode::kInvalidArgument, "differing record is not finite");
  }
}

Dataset Augmented(const LeaveOneOutPair& pair) {
  const Eigen::Index n = pair.base.size();
  const Eigen::Index s = pair.group_size();
  const Eigen::Index d = pair.differing_features.cols();
  Dataset out;
  out.noise_variance = pair.base.noise_variance;
  out.features.resize(n + s, d);
  out.labels.resize(n + s);
  if (n > 0) {
    out.features.topRows(n) = pair.base.features;
    out.labels.head(n) = pair.base.labels;
  }
  out.features.bottomRows(s) = pair.differing_features;
  out.labels.tail(s) = pair.differing_labels;
  return out;
}

LeaveOneOutPair MakePair(const Dataset& base, const Vector& s_features,
                         double s_label) {
  LeaveOneOutPair pair;
  pair.base = base;
  pair.differing_features = s_features.transpose();
  pair.differing_labels = Vector::Constant(1, s_label);
  return pair;
}

PosteriorSummary Posterior(const KernelSpec& spec, const Dataset& data,
                           const Matrix& queries) {
  ValidateDataset(data);
  CheckQueries(data, queries);
  PosteriorSummary out;
  const Matrix k_qq = KernelMatrix(spec, queries, queries);
  if (data.size() == 0) {
    out.mean = Vector::Zero(queries.rows());
    out.covariance = Symmetrize(k_qq);
    return out;
  }
  const CholeskyFactor factor = CholeskyPsd(NoisyGram(spec, data));
  const Matrix k_dq = KernelMatrix(spec, data.features, queries);
  out.mean = k_dq.transpose() * SolvePsd(factor, data.labels);
  const Matrix v = factor.lower.triangularView<Eigen::Lower>().solve(k_dq);
  out.covariance = Symmetrize(k_qq - v.transpose() * v);
  return out;
}

Vector LooModel::Side::Solve(const Vector& rhs) const {
  return factor ? SolvePsd(*factor, rhs) : Vector(inverse * rhs);
}

Matrix LooModel::Side::Solve(const Matrix& rhs) const {
  return factor ? SolvePsd(*factor, rhs) : Matrix(inverse * rhs);
}

LooModel::LooModel(KernelSpec spec, LeaveOneOutPair pair, LooPath path)
    : spec_(std::move(spec)), pair_(std::move(pair)) {
  ValidateKernel(spec_);
  ValidatePair(pair_);
  const Eigen::Index n = pair_.base.size();
  const Eigen::Index s = pair_.group_size();
  if (path == LooPath::kBlockUpdate && s != 1) {
    Fail(ErrorCode::kInvalidArgument, "block update needs a single differing record");
  }
  block_update_ = path == LooPath::kBlockUpdate || (path == LooPath::kAuto && s == 1);

  const Dataset large = Augmented(pair_);
  small_.features = pair_.base.features;
  large_.features = large.features;

  if (n == 0) {
    small_.features.resize(0, pair_.differing_features.cols());
    small_.weights = Vector(0);
    small_.factor = CholeskyFactor{Matrix(0, 0), 0.0};
  } else {
    small_.factor = CholeskyPsd(NoisyGram(spec_, pair_.base));
    small_.weights = SolvePsd(*small_.factor, pair_.base.labels);
  }

  if (block_update_) {
    const Matrix a_inv =
        n == 0 ? Matrix(0, 0)
               : SolvePsd(*small_.factor, Matrix(Matrix::Identity(n, n)));
    const Vector sx = pair_.differing_features.row(0).transpose();
    Vector b(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      b(i) = KernelEval(spec_, pair_.base.features.row(i).transpose(), sx);
    }
    const double c = KernelEval(spec_, sx, sx) + pair_.base.noise_variance;
    large_.inverse = BlockInverse(a_inv, b, c).inverse;
    large_.weights = large_.inverse * large.labels;
  } else {
    large_.factor = CholeskyPsd(NoisyGram(spec_, large));
    large_.weights = SolvePsd(*large_.factor, large.labels);
  }
}

PosteriorSummary LooModel::SidePosterior(const Side& side,
                                         const Matrix& queries,
                                         const Matrix& k_qq) const {
  PosteriorSummary out;
  if (side.features.rows() == 0) {
    out.mean = Vector::Zero(queries.rows());
    out.covariance = Symmetrize(k_qq);
    return out;
  }
  const Matrix k_dq = KernelMatrix(spec_, side.features, queries);
  out.mean = k_dq.transpose() * side.weights;
  out.covariance = Symmetrize(k_qq - k_dq.transpose() * side.Solve(k_dq));
  return out;
}

std::pair<PosteriorSummary, PosteriorSummary> LooModel::Posteriors(
    const Matrix& queries) const {
  if (queries.rows() < 1 || queries.cols() != large_.features.cols()) {
    Fail(ErrorCode::kDimensionMismatch,
         "queries " + std::to_string(queries.rows()) + "x" +
             std::to_string(queries.cols()) + " for data of dim " +
             std::to_string(large_.features.cols()));
  }
  const Matrix k_qq = KernelMatrix(spec_, queries, queries);
  return {SidePosterior(small_, queries, k_qq),
          SidePosterior(large_, queries, k_qq)};
}

std::pair<PosteriorSummary, PosteriorSummary> LooPairPosteriors(
    const KernelSpec& spec, const LeaveOneOutPair& pair, const Matrix& queries,
    LooPath path) {
  return LooModel(spec, pair, path).Posteriors(queries);
}

Matrix PredictiveSample(const PosteriorSummary& summary, int count,
                        std::uint64_t seed) {
  if (count < 1) Fail(ErrorCode::kInvalidArgument, "sample count must be >= 1");
  const Eigen::Index q = summary.query_count();
  const CholeskyFactor factor = CholeskyPsd(summary.covariance);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix out(count, q);
  Vector z(q);
  for (int i = 0; i < count; ++i) {
    for (Eigen::Index j = 0; j < q; ++j) z(j) = normal(rng);
    out.row(i) = (summary.mean + factor.lower * z).transpose();
  }
  return out;
}

}  // namespace lood
