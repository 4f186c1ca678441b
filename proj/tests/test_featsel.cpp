/*
 * Copyright 2026 The riskstack Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "oracles.hpp"
#include "riskstack/featsel.hpp"
#include "riskstack/learners.hpp"
#include "riskstack/metrics.hpp"
#include "riskstack/synthetic.hpp"

using namespace riskstack;

namespace {

Dataset with_names(const Matrix& x, const LabelVector& y, std::vector<std::string> names) {
  return make_dataset(x, y, names);
}

MethodRanking manual(RankMethod method, std::vector<std::string> names, std::vector<int> ranks) {
  MethodRanking r;
  r.method = method;
  r.features = std::move(names);
  r.rank = std::move(ranks);
  r.score.assign(r.features.size(), 0.0);
  return r;
}

// Random centered design with column norms sqrt(n) and mutually orthogonal
// columns.
Matrix orthonormal_design(std::mt19937_64& gen, Index n, Index p) {
  std::normal_distribution<double> g;
  Matrix a(n, p + 1);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j <= p; ++j) a(i, j) = g(gen);
  }
  a.col(0).setOnes();
  const Eigen::HouseholderQR<Matrix> qr(a);
  const Matrix q = qr.householderQ() * Matrix::Identity(n, p + 1);
  return q.rightCols(p) * std::sqrt(static_cast<double>(n));
}

}  // namespace

TEST(MutualInformation, PerfectlyInformativeBinaryIsLn2) {
  const Index n = 400;
  Matrix x(n, 2);
  LabelVector y(n);
  for (Index i = 0; i < n; ++i) {
    y(i) = static_cast<int>(i % 2);
    x(i, 0) = y(i);
    x(i, 1) = static_cast<double>((i / 2) % 2);
  }
  const auto r = mutual_info(with_names(x, y, {"same", "indep"}));
  EXPECT_NEAR(r.score_of("same"), std::log(2.0), 1e-12);
  EXPECT_NEAR(r.score_of("indep"), 0.0, 1e-12);
  EXPECT_EQ(r.rank_of("same"), 1);
}

TEST(MutualInformation, ProductDistributionIsZero) {
  // Counts are an outer product of marginals, so the joint factorizes.
  const std::vector<int> u{3, 1, 4};
  const std::vector<int> v{2, 5};
  std::vector<int> a, b;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 2; ++c) {
      for (int k = 0; k < u[r] * v[c]; ++k) {
        a.push_back(r);
        b.push_back(c);
      }
    }
  }
  EXPECT_NEAR(mutual_information(a, b), 0.0, 1e-12);
}

TEST(MutualInformation, ContingencyTableMatchesDoubleSum) {
  std::mt19937_64 gen(17);
  std::uniform_int_distribution<int> cell(0, 40);
  for (int trial = 0; trial < 50; ++trial) {
    Matrix counts(4, 3);
    for (Index r = 0; r < 4; ++r) {
      for (Index c = 0; c < 3; ++c) counts(r, c) = cell(gen);
    }
    const double expected = oracle::mi_double_sum(counts);
    EXPECT_NEAR(mutual_information(counts), expected, 1e-12);

    std::vector<int> a, b;
    for (Index r = 0; r < 4; ++r) {
      for (Index c = 0; c < 3; ++c) {
        for (int k = 0; k < counts(r, c); ++k) {
          a.push_back(static_cast<int>(r));
          b.push_back(static_cast<int>(c));
        }
      }
    }
    EXPECT_NEAR(mutual_information(a, b), expected, 1e-12);
    EXPECT_NEAR(mutual_information(b, a), expected, 1e-12);
  }
}

TEST(MutualInformation, ConstantLabelRejected) {
  Matrix x(4, 1);
  x << 0, 1, 0, 1;
  const LabelVector y = LabelVector::Ones(4);
  try {
    mutual_info(with_names(x, y, {"a"}));
    FAIL();
  } catch (const std::exception& e) {
    EXPECT_NE(std::string(e.what()).find("label has one class"), std::string::npos);
  }
}

TEST(MutualInformation, ContinuousColumnsUseAtMostBinsCodes) {
  Vector col(1000);
  for (Index i = 0; i < col.size(); ++i) col(i) = std::sin(0.37 * double(i)) * 10;
  const auto codes = discretize(col, FeatureKind::continuous, 10);
  const std::set<int> distinct(codes.begin(), codes.end());
  EXPECT_LE(distinct.size(), 10u);
  EXPECT_GE(distinct.size(), 8u);
}

TEST(Rfe, NoiseFeatureEliminatedFirst) {
  std::mt19937_64 gen(8);
  std::normal_distribution<double> g;
  const Index n = 60;
  Matrix x(n, 3);
  LabelVector y(n);
  for (Index i = 0; i < n; ++i) {
    x(i, 0) = g(gen);
    x(i, 1) = g(gen);
    x(i, 2) = g(gen);
    y(i) = x(i, 0) + 0.8 * x(i, 1) > 0 ? 1 : 0;
  }
  const Dataset d = with_names(x, y, {"f1", "f2", "f3"});

  // Oracle: among all two-feature subsets, the one without f3 fits best.
  const std::vector<std::vector<Index>> subsets{{0, 1}, {0, 2}, {1, 2}};
  std::vector<double> loss;
  for (const auto& s : subsets) {
    Matrix sub(n, 2);
    sub << x.col(s[0]), x.col(s[1]);
    const Dataset part = with_names(sub, y, {"a", "b"});
    const auto model = fit(LearnerSpec{Family::logreg, {}, "", 0}, part);
    const Vector p = predict_proba(model, sub);
    double l = 0;
    for (Index i = 0; i < n; ++i) l -= std::log(y(i) ? p(i) : 1 - p(i));
    loss.push_back(l);
  }
  EXPECT_EQ(std::min_element(loss.begin(), loss.end()) - loss.begin(), 0);

  const auto r = rfe(d, 1);
  ASSERT_FALSE(r.elimination_order.empty());
  EXPECT_EQ(r.elimination_order.front(), "f3");
  EXPECT_EQ(r.rank_of("f3"), 3);
}

TEST(Rfe, KeepAllRanksLexicographically) {
  const Dataset d = synthetic_brfss(300, 2);
  const auto r = rfe(d, static_cast<int>(d.cols()));
  EXPECT_TRUE(r.elimination_order.empty());
  auto names = d.feature_names();
  std::sort(names.begin(), names.end());
  for (std::size_t i = 0; i < names.size(); ++i) EXPECT_EQ(r.rank_of(names[i]), int(i) + 1);
}

TEST(Rfe, DuplicatedColumnLeavesOneSurvivor) {
  std::mt19937_64 gen(31);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u;
  const Index n = 500;
  Matrix x(n, 4);
  LabelVector y(n);
  for (Index i = 0; i < n; ++i) {
    x(i, 0) = g(gen);
    x(i, 1) = x(i, 0);
    x(i, 2) = g(gen);
    x(i, 3) = g(gen);
    y(i) = u(gen) < sigmoid(2.0 * x(i, 0) + 1.5 * x(i, 2)) ? 1 : 0;
  }
  const auto r = rfe(with_names(x, y, {"x1", "x1dup", "x2", "noise"}), 2);
  ASSERT_EQ(r.elimination_order.size(), 2u);
  EXPECT_EQ(r.elimination_order[0], "noise");
  const std::string& second = r.elimination_order[1];
  EXPECT_TRUE(second == "x1" || second == "x1dup") << second;
  EXPECT_LE(r.rank_of("x2"), 2);
}

TEST(Lasso, ZeroAtAndAboveLambdaMax) {
  std::mt19937_64 gen(2);
  std::normal_distribution<double> g;
  for (int problem = 0; problem < 20; ++problem) {
    Matrix x(80, 5);
    Vector y(80);
    for (Index i = 0; i < 80; ++i) {
      for (Index j = 0; j < 5; ++j) x(i, j) = g(gen);
      y(i) = x(i, 0) - 2 * x(i, 3) + g(gen);
    }
    // Direct formula, independent of the library helper.
    const Vector yc = y.array() - y.mean();
    double lmax = 0;
    for (Index j = 0; j < 5; ++j) {
      const Vector xc = x.col(j).array() - x.col(j).mean();
      lmax = std::max(lmax, std::abs(xc.dot(yc)) / 80.0);
    }
    EXPECT_NEAR(lasso_lambda_max(x, y), lmax, 1e-12);
    for (double scale : {1.0, 1.5, 10.0}) {
      const auto fit = lasso_coordinate_descent(x, y, lmax * scale);
      for (Index j = 0; j < 5; ++j) EXPECT_EQ(fit.coefficients(j), 0.0) << problem << " " << scale;
      EXPECT_DOUBLE_EQ(fit.intercept, y.mean());
    }
  }
}

TEST(Lasso, JustBelowLambdaMaxIsNonzero) {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> g;
  Matrix x(60, 4);
  Vector y(60);
  for (Index i = 0; i < 60; ++i) {
    for (Index j = 0; j < 4; ++j) x(i, j) = g(gen);
    y(i) = 1.5 * x(i, 2) + g(gen);
  }
  const auto fit = lasso_coordinate_descent(x, y, lasso_lambda_max(x, y) * (1 - 1e-6), 1e-14);
  EXPECT_NE(fit.coefficients(2), 0.0);
}

TEST(Lasso, LambdaZeroMatchesOls) {
  std::mt19937_64 gen(4);
  std::normal_distribution<double> g;
  Matrix x(40, 4);
  Vector y(40);
  for (Index i = 0; i < 40; ++i) {
    for (Index j = 0; j < 4; ++j) x(i, j) = g(gen);
    x(i, 2) += 0.5 * x(i, 0);
    y(i) = 1.0 + x(i, 0) - 0.5 * x(i, 1) + 0.25 * x(i, 3) + 0.1 * g(gen);
  }
  const Vector ols = oracle::ols_normal_equations(x, y);
  const auto fit = lasso_coordinate_descent(x, y, 0.0, 1e-13, 100000);
  EXPECT_TRUE(fit.converged);
  EXPECT_NEAR(fit.intercept, ols(0), 1e-6);
  for (Index j = 0; j < 4; ++j) EXPECT_NEAR(fit.coefficients(j), ols(j + 1), 1e-6);
}

TEST(Lasso, OrthonormalDesignClosedForm) {
  std::mt19937_64 gen(6);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 10; ++trial) {
    const Index n = 50;
    const Matrix x = orthonormal_design(gen, n, 6);
    Vector y(n);
    for (Index i = 0; i < n; ++i) y(i) = 0.7 * x(i, 0) - 0.3 * x(i, 4) + 0.2 * g(gen);
    const double lambda = 0.05 * (trial + 1);
    const auto fit = lasso_coordinate_descent(x, y, lambda);
    for (Index j = 0; j < 6; ++j) {
      const double expected = oracle::soft(x.col(j).dot(y) / double(n), lambda);
      EXPECT_NEAR(fit.coefficients(j), expected, 1e-8);
    }
  }
}

TEST(Lasso, ObjectiveNeverIncreasesAcrossSweeps) {
  std::mt19937_64 gen(10);
  std::normal_distribution<double> g;
  for (int problem = 0; problem < 50; ++problem) {
    const Index n = 30 + problem;
    const Index p = 3 + problem % 8;
    Matrix x(n, p);
    Vector y(n);
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < p; ++j) x(i, j) = g(gen) + (j > 0 ? 0.6 * x(i, j - 1) : 0.0);
      y(i) = x(i, 0) - x(i, p - 1) + g(gen);
    }
    const double lambda = lasso_lambda_max(x, y) * 0.05 * (1 + problem % 5);
    const auto fit = lasso_coordinate_descent(x, y, lambda);
    ASSERT_GE(fit.objective_trace.size(), 1u);
    double previous = lasso_objective(x, y, Vector::Zero(p), y.mean(), lambda);
    for (double obj : fit.objective_trace) {
      EXPECT_LE(obj, previous + 1e-14 * std::abs(previous)) << "problem " << problem;
      previous = obj;
    }
    EXPECT_NEAR(fit.objective_trace.back(),
                lasso_objective(x, y, fit.coefficients, fit.intercept, lambda), 1e-10);
  }
}

TEST(Lasso, KktConditionsHold) {
  std::mt19937_64 gen(12);
  std::normal_distribution<double> g;
  const double tol = 1e-7;
  for (int problem = 0; problem < 20; ++problem) {
    const Index n = 100;
    const Index p = 8;
    Matrix x(n, p);
    Vector y(n);
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < p; ++j) x(i, j) = g(gen);
      y(i) = 2 * x(i, 1) - x(i, 5) + 0.5 * g(gen);
    }
    const double lambda = lasso_lambda_max(x, y) * 0.1;
    const auto fit = lasso_coordinate_descent(x, y, lambda, tol);
    ASSERT_TRUE(fit.converged);
    const Vector r = (y - x * fit.coefficients).array() - fit.intercept;
    for (Index j = 0; j < p; ++j) {
      const double grad = x.col(j).dot(r) / double(n);
      const double b = fit.coefficients(j);
      if (b != 0.0) {
        EXPECT_NEAR(grad, lambda * (b > 0 ? 1.0 : -1.0), 10 * tol) << j;
      } else {
        EXPECT_LE(std::abs(grad), lambda + 10 * tol) << j;
      }
    }
  }
}

TEST(Lasso, SweepLimitReportsNotConverged) {
  std::mt19937_64 gen(14);
  std::normal_distribution<double> g;
  Matrix x(50, 3);
  Vector y(50);
  for (Index i = 0; i < 50; ++i) {
    x(i, 0) = g(gen);
    x(i, 1) = x(i, 0) + 0.01 * g(gen);
    x(i, 2) = g(gen);
    y(i) = x(i, 0) + x(i, 1) + g(gen);
  }
  const auto fit = lasso_coordinate_descent(x, y, 1e-4, 1e-12, 2);
  EXPECT_FALSE(fit.converged);
  EXPECT_EQ(fit.iterations_run, 2);
}

TEST(Lasso, SingleInformativeFeatureRanksFirst) {
  std::mt19937_64 gen(16);
  std::normal_distribution<double> g;
  const Index n = 400;
  Matrix x(n, 6);
  LabelVector y(n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < 6; ++j) x(i, j) = g(gen);
    y(i) = x(i, 3) + 0.3 * g(gen) > 0 ? 1 : 0;
  }
  const Dataset d = with_names(x, y, {"a", "b", "c", "signal", "e", "f"});
  // Oracle: correlation screening.
  Matrix xy(n, 7);
  xy << x, y.cast<double>();
  const Matrix corr = oracle::pearson(xy);
  Index best = 0;
  for (Index j = 1; j < 6; ++j) {
    if (std::abs(corr(j, 6)) > std::abs(corr(best, 6))) best = j;
  }
  ASSERT_EQ(best, 3);
  EXPECT_EQ(lasso_rank(d).rank_of("signal"), 1);
}

TEST(Lasso, AllZeroScoresRankLexicographically) {
  const std::vector<double> scores(4, 0.0);
  const std::vector<std::string> names{"delta", "alpha", "charlie", "bravo"};
  const auto ranks = rank_scores(scores, names);
  EXPECT_EQ(ranks, (std::vector<int>{4, 1, 3, 2}));

  std::mt19937_64 gen(18);
  std::normal_distribution<double> g;
  Matrix x(100, 4);
  LabelVector y(100);
  for (Index i = 0; i < 100; ++i) {
    for (Index j = 0; j < 4; ++j) x(i, j) = g(gen);
    y(i) = g(gen) > 0;
  }
  const Dataset d = with_names(x, y, names);
  const auto big = lasso_fit(d, 1e6);
  EXPECT_TRUE((big.coefficients.array() == 0.0).all());
}

TEST(Aggregate, OneMethodReproducesItsOrder) {
  const auto m = manual(RankMethod::mi, {"a", "b", "c", "d"}, {3, 1, 4, 2});
  const std::vector<MethodRanking> one{m};
  const auto agg = aggregate(one, 4);
  EXPECT_EQ(agg.selected, (std::vector<std::string>{"b", "d", "a", "c"}));
  EXPECT_DOUBLE_EQ(agg.aggregate[0], 2.0 / 3.0);
}

TEST(Aggregate, ReversedOrdersTieAtOneHalf) {
  const auto m1 = manual(RankMethod::mi, {"w", "x", "y", "z"}, {1, 2, 3, 4});
  const auto m2 = manual(RankMethod::lasso, {"w", "x", "y", "z"}, {4, 3, 2, 1});
  const std::vector<MethodRanking> both{m1, m2};
  const auto agg = aggregate(both, 2);
  for (double s : agg.aggregate) EXPECT_DOUBLE_EQ(s, 0.5);
  EXPECT_EQ(agg.selected, (std::vector<std::string>{"w", "x"}));
}

TEST(Aggregate, MismatchedFeatureSetsRejected) {
  const auto m1 = manual(RankMethod::mi, {"a", "b"}, {1, 2});
  const auto m2 = manual(RankMethod::rfe, {"a", "c"}, {1, 2});
  const std::vector<MethodRanking> both{m1, m2};
  EXPECT_ANY_THROW(aggregate(both, 1));
}

TEST(Aggregate, ScoresStayInUnitInterval) {
  const auto r = rank_features(synthetic_brfss(1500, 19), 10);
  EXPECT_EQ(r.selected.size(), 10u);
  EXPECT_EQ(r.methods.size(), 3u);
  for (double s : r.aggregate) {
    EXPECT_GE(s, 0.0);
    EXPECT_LE(s, 1.0);
  }
  const auto j = to_json(r);
  EXPECT_EQ(j["selected"].size(), 10u);
  EXPECT_EQ(j["aggregate"].size(), r.features.size());
}
