// Copyright 2026 The dpsum Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "dpsum/strategy.h"

#include <cmath>
#include <random>
#include <vector>

#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "dpsum/noise.h"

namespace dpsum {
namespace {

Eigen::MatrixXd Prefix(Eigen::Index n) {
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) w.row(j).head(j + 1).setOnes();
  return w;
}

// Delta(A)^2 Tr(W (A^T A)^{-1} W^T) with an explicit inverse.
double DenseObjective(const Eigen::MatrixXd& w, const Eigen::MatrixXd& a) {
  const Eigen::MatrixXd inv = (a.transpose() * a).inverse();
  const double delta = SensitivityL1(a);
  return delta * delta * (w * inv * w.transpose()).trace();
}

double IdentityObjective(const Eigen::MatrixXd& w) {
  return DenseObjective(w, Eigen::MatrixXd::Identity(w.cols(), w.cols()));
}

Eigen::VectorXd Vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

TEST(StrategyMatrixTest, RejectsRankDeficientAndEmpty) {
  EXPECT_EQ(StrategyMatrix::Create(Eigen::MatrixXd::Ones(1, 2)).status().code(),
            absl::StatusCode::kFailedPrecondition);
  Eigen::MatrixXd dup(3, 2);
  dup << 1, 2, 2, 4, 3, 6;
  EXPECT_FALSE(StrategyMatrix::Create(dup).ok());
  EXPECT_EQ(StrategyMatrix::Create(Eigen::MatrixXd(0, 0)).status().code(),
            absl::StatusCode::kInvalidArgument);
  Eigen::MatrixXd bad = Eigen::MatrixXd::Identity(2, 2);
  bad(0, 0) = NAN;
  EXPECT_FALSE(StrategyMatrix::Create(bad).ok());
}

TEST(StrategyMatrixTest, CachesInverseOnlyForSmallDomains) {
  EXPECT_NE(StrategyMatrix::Identity(4).gram_inverse(), nullptr);
  EXPECT_EQ(StrategyMatrix::Identity(StrategyMatrix::kGramInverseLimit + 1)
                .gram_inverse(),
            nullptr);
  const StrategyMatrix big =
      StrategyMatrix::Identity(StrategyMatrix::kGramInverseLimit + 1);
  const Eigen::MatrixXd rhs = Eigen::MatrixXd::Ones(big.cols(), 2);
  EXPECT_TRUE(big.SolveGram(rhs).isApprox(rhs));
}

TEST(LeastSquaresTest, Examples) {
  auto x = LeastSquares(StrategyMatrix::Identity(3), Vec({3, -1, 4}));
  ASSERT_TRUE(x.ok());
  EXPECT_TRUE(x->isApprox(Vec({3, -1, 4})));

  auto mean = LeastSquares(*StrategyMatrix::Create(Eigen::MatrixXd::Ones(2, 1)),
                           Vec({1, 3}));
  ASSERT_TRUE(mean.ok());
  EXPECT_NEAR((*mean)[0], 2.0, 1e-12);

  Eigen::MatrixXd a(3, 2);
  a << 1, 0, 0, 1, 1, 1;
  auto solved = LeastSquares(*StrategyMatrix::Create(a), Vec({1, 2, 3}));
  ASSERT_TRUE(solved.ok());
  EXPECT_NEAR((*solved)[0], 1.0, 1e-12);
  EXPECT_NEAR((*solved)[1], 2.0, 1e-12);
}

TEST(LeastSquaresTest, RejectsLengthMismatch) {
  EXPECT_EQ(LeastSquares(StrategyMatrix::Identity(3), Vec({1, 2})).status().code(),
            absl::StatusCode::kInvalidArgument);
}

TEST(LeastSquaresTest, ResidualIsOrthogonalOnBothSolverPaths) {
  std::mt19937_64 gen(4);
  std::normal_distribution<double> g;
  for (Eigen::Index n : {5, 40, 90, 300}) {
    Eigen::MatrixXd a(n + 7, n);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = g(gen);
    Eigen::VectorXd z(n + 7);
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = g(gen);
    const StrategyMatrix s = *StrategyMatrix::Create(a);
    const Eigen::VectorXd x = *LeastSquares(s, z);
    const Eigen::VectorXd normal = a.transpose() * (a * x - z);
    EXPECT_LT(normal.lpNorm<Eigen::Infinity>(), 1e-8 * z.norm() * a.norm())
        << "n=" << n;
  }
}

TEST(HierarchyTest, TreeObjectiveMatchesDenseEvaluation) {
  std::mt19937_64 gen(5);
  std::uniform_int_distribution<int> size(1, 40), branch(2, 5), levels(0, 3);
  std::uniform_real_distribution<double> weight(0.1, 2.0), entry(0.0, 3.0);
  for (int rep = 0; rep < 100; ++rep) {
    const Eigen::Index n = size(gen);
    Eigen::MatrixXd w(size(gen), n);
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = entry(gen);
    std::vector<int> branching;
    std::vector<double> weights{weight(gen)};
    const int depth = levels(gen);
    for (int l = 0; l < depth; ++l) {
      branching.push_back(branch(gen));
      weights.push_back(weight(gen));
    }
    const Eigen::MatrixXd a = HierarchicalStrategyMatrix(n, branching, weights);
    const double dense = DenseObjective(w, a);
    EXPECT_NEAR(HierarchicalVarianceObjective(w, branching, weights), dense,
                1e-8 * dense);
  }
}

TEST(HierarchyTest, StrategyShape) {
  const std::vector<int> branching{2};
  const std::vector<double> weights{0.5, 0.5};
  const Eigen::MatrixXd a = HierarchicalStrategyMatrix(3, branching, weights);
  Eigen::MatrixXd expected(5, 3);
  expected << 0.5, 0, 0,  //
      0, 0.5, 0,          //
      0, 0, 0.5,          //
      0.5, 0.5, 0,        //
      0, 0, 0.5;
  EXPECT_EQ(a, expected);
}

TEST(GreedyHTest, SingleCellIsTrivial) {
  auto g = GreedyH(Eigen::MatrixXd::Ones(1, 1));
  ASSERT_TRUE(g.ok());
  EXPECT_EQ(g->strategy.matrix(), Eigen::MatrixXd::Ones(1, 1));
  EXPECT_TRUE(g->branching.empty());
}

TEST(GreedyHTest, IdentityWorkloadIsNoWorseThanIdentity) {
  for (Eigen::Index n : {1, 2, 7, 32}) {
    const Eigen::MatrixXd w = Eigen::MatrixXd::Identity(n, n);
    auto g = GreedyH(w);
    ASSERT_TRUE(g.ok());
    EXPECT_LE(DenseObjective(w, g->strategy.matrix()),
              IdentityObjective(w) * (1 + 1e-12));
  }
}

TEST(GreedyHTest, PrefixWorkloadStrictlyBeatsIdentity) {
  const Eigen::MatrixXd w = Prefix(8);
  auto g = GreedyH(w);
  ASSERT_TRUE(g.ok());
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(8);
  const double greedy = *ExpectedErrorTimm(w, ones, ones, ones, g->strategy, 1);
  const double identity = *ExpectedErrorTimm(w, ones, ones, ones,
                                             StrategyMatrix::Identity(8), 1);
  EXPECT_LT(greedy, identity);
  EXPECT_FALSE(g->branching.empty());
}

TEST(GreedyHTest, SixteenCellPrefixStrictlyBeatsIdentity) {
  const Eigen::MatrixXd w = Prefix(16);
  auto g = GreedyH(w);
  ASSERT_TRUE(g.ok());
  EXPECT_LT(DenseObjective(w, g->strategy.matrix()),
            0.95 * IdentityObjective(w));
}

TEST(GreedyHTest, DominanceAndNormalisationOnRandomWorkloads) {
  std::mt19937_64 gen(6);
  std::uniform_int_distribution<int> size(1, 60);
  std::uniform_real_distribution<double> weight(0.0, 5.0);
  for (int rep = 0; rep < 30; ++rep) {
    const Eigen::Index n = size(gen);
    Eigen::MatrixXd w = Prefix(n);
    if (rep % 2 == 1) {
      Eigen::VectorXd t(n);
      for (Eigen::Index i = 0; i < n; ++i) t[i] = weight(gen);
      w = w * t.asDiagonal();
    }
    auto g = GreedyH(w);
    ASSERT_TRUE(g.ok());
    const Eigen::MatrixXd& a = g->strategy.matrix();
    EXPECT_NEAR(g->strategy.sensitivity(), 1.0, 1e-12);
    double sum = 0.0;
    for (double x : g->level_weights) sum += x;
    EXPECT_NEAR(sum, 1.0, 1e-12);
    EXPECT_LE(DenseObjective(w, a), IdentityObjective(w) * (1 + 1e-9));
    // Left pseudoinverse.
    const Eigen::MatrixXd pinv =
        (a.transpose() * a).inverse() * a.transpose();
    EXPECT_LT((pinv * a - Eigen::MatrixXd::Identity(n, n))
                  .lpNorm<Eigen::Infinity>(),
              1e-9);
  }
}

TEST(GreedyHTest, ScalesToTheLargestPreset) {
  auto g = GreedyH(Prefix(1000));
  ASSERT_TRUE(g.ok());
  EXPECT_EQ(g->strategy.cols(), 1000);
  EXPECT_LT(HierarchicalVarianceObjective(Prefix(1000), g->branching,
                                          g->level_weights),
            0.5 * Prefix(1000).squaredNorm());
}

TEST(GreedyHTest, RejectsEmptyWorkload) {
  EXPECT_FALSE(GreedyH(Eigen::MatrixXd(0, 3)).ok());
}

TEST(ExpectedErrorTest, OneDimensionalExamples) {
  const Eigen::MatrixXd w = Eigen::MatrixXd::Ones(1, 1);
  const StrategyMatrix a = StrategyMatrix::Identity(1);
  for (double theta : {1.0, 7.0, 50.0}) {
    const Eigen::VectorXd t = Vec({theta});
    for (double x : {0.0, 3.0}) {
      EXPECT_DOUBLE_EQ(*ExpectedErrorTimm(w, t, t, Vec({x}), a, 1),
                       2 * theta * theta);
      EXPECT_DOUBLE_EQ(*ExpectedErrorTamm(w, t, t, Vec({x}), a, 1),
                       2 * theta * theta);
    }
  }
  EXPECT_DOUBLE_EQ(
      *ExpectedErrorTimm(w, Vec({100}), Vec({50}), Vec({3}), a, 1), 27500);
  EXPECT_DOUBLE_EQ(
      *ExpectedErrorTamm(w, Vec({100}), Vec({50}), Vec({3}), a, 1), 27500);
}

TEST(ExpectedErrorTest, BiasAndVarianceLimits) {
  const Eigen::MatrixXd w = Prefix(6);
  const Eigen::VectorXd d = Vec({1, 2, 3, 4, 5, 6});
  const Eigen::VectorXd x = Vec({5, 0, 2, 1, 7, 3});
  const StrategyMatrix a = GreedyH(w)->strategy;
  // No truncation: pure variance term.
  const double var_only = 2.0 * std::pow(SensitivityL1(a.matrix() * d.asDiagonal()), 2) *
                          (w * (a.matrix().transpose() * a.matrix()).inverse() *
                           w.transpose()).trace();
  EXPECT_NEAR(*ExpectedErrorTimm(w, d, d, x, a, 1), var_only, 1e-9 * var_only);
  // Zero weights: pure bias.
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(6);
  EXPECT_NEAR(*ExpectedErrorTamm(w, d, zero, x, a, 1),
              (w * d.cwiseProduct(x)).squaredNorm(), 1e-9);
}

TEST(ExpectedErrorTest, VarianceScalesWithInverseEpsilonSquared) {
  const Eigen::MatrixXd w = Prefix(10);
  Eigen::VectorXd d(10), t(10), x(10);
  for (int i = 0; i < 10; ++i) {
    d[i] = 10.0 * (i + 1);
    t[i] = std::min(d[i], 45.0);
    x[i] = i % 3;
  }
  const StrategyMatrix a = GreedyH(w * t.asDiagonal())->strategy;
  const double bias = (w * (d - t).cwiseProduct(x)).squaredNorm();
  for (auto* f : {&ExpectedErrorTimm, &ExpectedErrorTamm}) {
    const double v1 = *(*f)(w, d, t, x, a, 1.0) - bias;
    const double v2 = *(*f)(w, d, t, x, a, 2.0) - bias;
    const double v3 = *(*f)(w, d, t, x, a, 3.0) - bias;
    EXPECT_NEAR(v1 / v2, 4.0, 1e-9);
    EXPECT_NEAR(v1 / v3, 9.0, 1e-9);
  }
}

TEST(ExpectedErrorTest, RejectsBadInputs) {
  const Eigen::MatrixXd w = Prefix(3);
  const Eigen::VectorXd v = Eigen::VectorXd::Ones(3);
  EXPECT_FALSE(
      ExpectedErrorTimm(w, v, v, Vec({1, 1}), StrategyMatrix::Identity(3), 1).ok());
  EXPECT_FALSE(ExpectedErrorTamm(w, v, v, v, StrategyMatrix::Identity(2), 1).ok());
  EXPECT_FALSE(ExpectedErrorTamm(w, v, v, v, StrategyMatrix::Identity(3), 0).ok());
}

}  // namespace
}  // namespace dpsum
