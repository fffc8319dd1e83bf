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
#include "lood/leakage.h"

#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "gtest/gtest.h"
#include "lood/error.h"
#include "lood/metrics.h"
#include "lood/random.h"
#include "test_util.h"

namespace lood {
namespace {

using testing::Point;
using testing::RandomMatrix;

PosteriorSummary Scalar(double mean, double var) {
  PosteriorSummary p;
  p.mean = Vector::Constant(1, mean);
  p.covariance = Matrix::Constant(1, 1, var);
  return p;
}

double Phi(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double StdDev(const std::vector<double>& v) {
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / (v.size() - 1));
}

TEST(MiaAuc, IdenticalGaussiansAreChance) {
  const MiaResult r = MiaAuc(Scalar(0.3, 2.0), Scalar(0.3, 2.0), 5000, 1);
  EXPECT_NEAR(r.auc, 0.5, 0.02);
  EXPECT_EQ(r.n_samples, 5000);
}

TEST(MiaAuc, SeparatedGaussians) {
  EXPECT_GE(MiaAuc(Scalar(0.0, 1.0), Scalar(10.0, 1.0), 5000, 2).auc, 0.999);
}

TEST(MiaAuc, EqualVarianceClosedForm) {
  const double sigma = 0.7;
  for (double ratio : {0.0, 0.5, 1.0, 2.0, 4.0}) {
    const MiaResult r = MiaAuc(Scalar(0.0, sigma * sigma),
                               Scalar(ratio * sigma, sigma * sigma), 5000, 3);
    EXPECT_NEAR(r.auc, Phi(ratio / std::sqrt(2.0)), 0.02) << "ratio=" << ratio;
  }
}

TEST(MiaAuc, MonotoneInMeanGap) {
  double previous = 0.0;
  for (double gap : {0.0, 0.25, 0.5, 1.0, 2.0, 3.0}) {
    const double auc = MiaAuc(Scalar(0.0, 1.0), Scalar(gap, 1.0), 20000, 4).auc;
    EXPECT_GE(auc, previous - 0.01);
    previous = auc;
  }
}

TEST(MiaAuc, MonteCarloErrorShrinksWithSamples) {
  std::vector<double> small;
  std::vector<double> large;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    small.push_back(MiaAuc(Scalar(0.0, 1.0), Scalar(1.0, 1.0), 1000, seed).auc);
    large.push_back(MiaAuc(Scalar(0.0, 1.0), Scalar(1.0, 1.0), 2000, 100 + seed).auc);
  }
  const double ratio = StdDev(large) / StdDev(small);
  EXPECT_GE(ratio, 0.4);
  EXPECT_LE(ratio, 1.0);
}

TEST(RankAuc, TiesShareHalfCredit) {
  EXPECT_DOUBLE_EQ(RankAuc({1.0, 1.0}, {1.0, 1.0}), 0.5);
  EXPECT_DOUBLE_EQ(RankAuc({2.0, 3.0}, {0.0, 1.0}), 1.0);
  EXPECT_DOUBLE_EQ(RankAuc({1.0}, {1.0, 0.0}), 0.75);
}

TEST(AverageRanks, TiedValues) {
  const std::vector<double> r = AverageRanks({10.0, 20.0, 10.0, 5.0});
  EXPECT_EQ(r, (std::vector<double>{2.5, 4.0, 2.5, 1.0}));
}

TEST(Correlation, PearsonAndSpearman) {
  EXPECT_NEAR(*Pearson({1, 2, 3}, {2, 4, 6}), 1.0, 1e-15);
  EXPECT_NEAR(*Spearman({1, 2, 3, 4}, {1, 8, 27, 64}), 1.0, 1e-15);
  EXPECT_FALSE(Pearson({1, 1, 1}, {1, 2, 3}).has_value());
}

TEST(LoodAucCorrelation, IdenticalCandidatesAreDegenerate) {
  const Dataset data = testing::SineData();
  const Matrix c = Matrix::Constant(4, 1, 2.0);
  const Vector y = Vector::Constant(4, std::sin(2.0));
  const CorrelationReport r = LoodAucCorrelation(RbfSpec{1.0}, data, c, y, 500, 1);
  EXPECT_FALSE(r.pearson.has_value());
  EXPECT_FALSE(r.spearman.has_value());
  EXPECT_EQ(r.rows.size(), 4u);
}

TEST(LoodAucCorrelation, RowsAreConsistent) {
  const Dataset data = testing::SineData();
  Matrix c(5, 1);
  c << -3.0, -1.0, 0.5, 2.0, 4.0;
  const Vector y = c.col(0).array().sin();
  const CorrelationReport r = LoodAucCorrelation(RbfSpec{1.0}, data, c, y, 2000, 7);
  ASSERT_EQ(r.rows.size(), 5u);
  for (const CorrelationRow& row : r.rows) {
    Vector s(1);
    s << c(row.index, 0);
    const double kl =
        ComputeLoodReport(RbfSpec{1.0}, MakePair(data, s, y(row.index)), Point(s(0))).kl;
    EXPECT_NEAR(row.kl, kl, 1e-12 * kl);
    EXPECT_NEAR(row.log_kl, std::log(kl), 1e-12);
  }
  EXPECT_EQ(r.top_k, 5);
  const CorrelationReport again = LoodAucCorrelation(RbfSpec{1.0}, data, c, y, 2000, 7);
  EXPECT_EQ(r.rows[2].auc, again.rows[2].auc);
}

TEST(LowRankAnalysis, MidpointAndHalfRange) {
  // Linear kernel scale 1 on d = 1: K(x, x') = x x'.
  LeaveOneOutPair pair;
  const double a = std::sqrt(0.8);
  const double b = std::sqrt(0.9);
  pair.base.features = Matrix::Constant(1, 1, a);
  pair.base.labels = Vector::Constant(1, 0.1);
  pair.differing_features = Matrix::Constant(1, 1, b);
  pair.differing_labels = Vector::Constant(1, -0.2);
  const LowRankReport r = LowRankAnalysis(LinearSpec{1.0}, pair, Point(b));
  EXPECT_NEAR(r.alpha_min, 0.85, 1e-12);
  EXPECT_NEAR(r.h_alpha_min, 0.05, 1e-12);
  EXPECT_NEAR(r.zeta, 0.2, 1e-15);
  EXPECT_LE(r.observed_max_lood, r.bound);
}

TEST(LowRankAnalysis, ConstantKernelReducesToBOverN) {
  LeaveOneOutPair pair;
  pair.base.features = Matrix::Ones(5, 1);
  pair.base.labels = (Vector(5) << 0.3, -0.1, 0.2, 0.0, 0.4).finished();
  pair.differing_features = Matrix::Ones(1, 1);
  pair.differing_labels = Vector::Constant(1, -0.5);
  const LowRankReport r = LowRankAnalysis(LinearSpec{1.0}, pair, Point(1.0));
  EXPECT_EQ(r.h_alpha_min, 0.0);
  EXPECT_NEAR(r.bound, r.b / 5.0, 1e-15);
  EXPECT_NEAR(r.b, 0.25 + 2 * 0.25 / 0.01, 1e-12);
  EXPECT_LE(r.observed_max_lood, r.bound);
}

TEST(LowRankAnalysis, LengthSweepShrinksLeakage) {
  const LeaveOneOutPair pair = testing::SinePair(2.5);
  Matrix grid(201, 1);
  for (int i = 0; i <= 200; ++i) grid(i, 0) = -5.0 + 0.05 * i;
  double last_h = 1e300;
  for (double l : {1.0, 10.0, 100.0, 1000.0}) {
    const LowRankReport r = LowRankAnalysis(RbfSpec{l}, pair, grid);
    EXPECT_LT(r.h_alpha_min, last_h);
    EXPECT_LE(r.observed_max_lood, r.bound);
    last_h = r.h_alpha_min;
  }
}

TEST(LowRankAnalysis, NonpositiveMidpointThrows) {
  LeaveOneOutPair pair;
  pair.base.features = Matrix::Constant(1, 1, 1.0);
  pair.base.labels = Vector::Zero(1);
  pair.differing_features = Matrix::Constant(1, 1, -1.0);
  pair.differing_labels = Vector::Zero(1);
  try {
    LowRankAnalysis(LinearSpec{1.0}, pair, Point(0.0));
    FAIL() << "expected AlphaNonpositive";
  } catch (const LoodError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kAlphaNonpositive);
  }
}

TEST(ActivationScan, PerfectlyCorrelatedIsDegenerate) {
  NngpFcSpec tmpl;
  Vector x(2);
  x << 0.6, 0.8;
  const ActivationScanResult r = ActivationScan(tmpl, {4, 8, 16}, x, x);
  EXPECT_TRUE(r.degenerate);
  for (double d : r.distances) EXPECT_EQ(d, 0.0);
}

TEST(ActivationScan, ReluDistancesShrink) {
  NngpFcSpec tmpl;
  tmpl.normalize_inputs = false;
  Vector x(2);
  Vector y(2);
  x << 1.0, 0.0;
  y << 0.0, 1.0;
  const ActivationScanResult r = ActivationScan(tmpl, {4, 8, 16, 32, 64}, x, y);
  EXPECT_FALSE(r.degenerate);
  for (std::size_t i = 1; i < r.distances.size(); ++i) {
    EXPECT_LT(r.distances[i], r.distances[i - 1]);
    EXPECT_GT(r.distances[i], 0.0);
  }
  EXPECT_LT(r.fitted_slope, 0.0);
}

TEST(GroupReconstructionStudy, DuplicateVersusOutlier) {
  const Dataset data = testing::SineData();
  Matrix group(2, 1);
  group << data.features(4, 0), 4.0;
  const Vector labels = (Vector(2) << data.labels(4), std::sin(4.0)).finished();
  OptConfig config;
  config.seed = 3;
  config.grad_tol = 1e-4;
  // Starts cover the data hull [-1.1, 1.9] and the outlier, not the empty
  // left tail where every run drifts to the nearest member, the duplicate.
  config.init = InitSpec::UniformBox(-2.0, 5.0);
  const ReconstructionTable t =
      GroupReconstructionStudy(RbfSpec{1.0}, data, group, labels, 20, config);
  ASSERT_EQ(t.members.size(), 2u);
  EXPECT_GT(t.members[1].kl_at_member, t.members[0].kl_at_member);
  EXPECT_GE(t.members[1].recovered, t.members[0].recovered);
  int total = t.non_converged;
  for (const MemberRecovery& m : t.members) total += m.recovered;
  EXPECT_EQ(total, t.runs);

  const ReconstructionTable again =
      GroupReconstructionStudy(RbfSpec{1.0}, data, group, labels, 20, config);
  for (std::size_t i = 0; i < t.members.size(); ++i) {
    EXPECT_EQ(t.members[i].recovered, again.members[i].recovered);
  }
}

TEST(GroupReconstructionStudy, NeedsAGroup) {
  const Dataset data = testing::SineData();
  EXPECT_THROW(GroupReconstructionStudy(RbfSpec{1.0}, data, Point(1.0),
                                        Vector::Constant(1, 0.8), 5, OptConfig()),
               LoodError);
}

TEST(DeriveSeed, DistinctStreams) {
  EXPECT_NE(DeriveSeed(1, 0), DeriveSeed(1, 1));
  EXPECT_NE(DeriveSeed(1, 0), DeriveSeed(2, 0));
  EXPECT_EQ(DeriveSeed(7, 3), DeriveSeed(7, 3));
}

}  // namespace
}  // namespace lood
