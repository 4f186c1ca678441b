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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "oracles.hpp"
#include "riskstack/learners.hpp"
#include "riskstack/metrics.hpp"

using namespace riskstack;

namespace {

LabelVector labels_of(std::initializer_list<int> v) {
  LabelVector y(static_cast<Index>(v.size()));
  Index i = 0;
  for (int x : v) y(i++) = x;
  return y;
}

Vector scores_of(std::initializer_list<double> v) {
  Vector s(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) s(i++) = x;
  return s;
}

// Random instance with both classes; every third instance uses coarse
// scores so that ties are common.
std::pair<LabelVector, Vector> random_instance(std::mt19937_64& gen, int trial) {
  std::uniform_int_distribution<int> size(2, 200);
  std::uniform_real_distribution<double> u;
  const Index n = size(gen);
  LabelVector y(n);
  Vector s(n);
  for (Index i = 0; i < n; ++i) {
    y(i) = u(gen) < 0.4 ? 1 : 0;
    const double raw = u(gen) + 0.3 * y(i);
    s(i) = trial % 3 == 0 ? std::round(raw * 5) / 5 : raw;
  }
  y(0) = 1;
  y(1) = 0;
  return {y, s};
}

}  // namespace

TEST(Confusion, HandCount) {
  const auto cm = confusion(labels_of({1, 1, 0, 0}), labels_of({1, 0, 0, 1}));
  EXPECT_EQ(cm.tp, 1u);
  EXPECT_EQ(cm.fn, 1u);
  EXPECT_EQ(cm.tn, 1u);
  EXPECT_EQ(cm.fp, 1u);
  const auto perfect = confusion(labels_of({1, 0, 1}), labels_of({1, 0, 1}));
  EXPECT_EQ(perfect.fp, 0u);
  EXPECT_EQ(perfect.fn, 0u);
}

TEST(ScalarMetrics, PublishedConfusionCounts) {
  ConfusionMatrix cm;
  cm.tn = 36041;
  cm.fp = 2821;
  cm.fn = 1273;
  cm.tp = 37589;
  // Direct arithmetic from the definitions.
  const double acc = (36041.0 + 37589.0) / (36041.0 + 2821.0 + 1273.0 + 37589.0);
  const double prec = 37589.0 / (37589.0 + 2821.0);
  const double rec = 37589.0 / (37589.0 + 1273.0);
  const auto m = scalar_metrics(cm);
  EXPECT_NEAR(m.accuracy, acc, 1e-15);
  EXPECT_NEAR(m.precision, prec, 1e-15);
  EXPECT_NEAR(m.recall, rec, 1e-15);
  EXPECT_NEAR(m.f1, 2 * prec * rec / (prec + rec), 1e-15);
  EXPECT_NEAR(m.accuracy, 0.94733, 1e-5);
  EXPECT_NEAR(m.precision, 0.93019, 1e-5);
  EXPECT_NEAR(m.recall, 0.96724, 1e-5);
  EXPECT_NEAR(m.f1, 0.94835, 1e-5);
}

TEST(ScalarMetrics, UndefinedDenominatorsFlagged) {
  ConfusionMatrix cm;
  cm.tn = 5;
  cm.fn = 3;
  const auto m = scalar_metrics(cm);
  EXPECT_EQ(m.precision, 0.0);
  EXPECT_TRUE(m.precision_undefined);
  EXPECT_FALSE(m.recall_undefined);
  EXPECT_EQ(m.recall, 0.0);

  ConfusionMatrix all_right;
  all_right.tn = 4;
  all_right.tp = 6;
  const auto p = scalar_metrics(all_right);
  EXPECT_EQ(p.accuracy, 1.0);
  EXPECT_EQ(p.precision, 1.0);
  EXPECT_EQ(p.recall, 1.0);
  EXPECT_EQ(p.f1, 1.0);
}

TEST(Roc, PerfectAndAllTied) {
  EXPECT_DOUBLE_EQ(roc_auc(labels_of({1, 1, 0, 0}), scores_of({0.9, 0.8, 0.3, 0.2})), 1.0);
  EXPECT_DOUBLE_EQ(roc_auc(labels_of({1, 0, 1, 0}), scores_of({0.4, 0.4, 0.4, 0.4})), 0.5);
}

TEST(Roc, TrapezoidMatchesPairCounting) {
  std::mt19937_64 gen(100);
  for (int trial = 0; trial < 100; ++trial) {
    const auto [y, s] = random_instance(gen, trial);
    EXPECT_NEAR(roc_auc(y, s), oracle::pair_auc(y, s), 1e-12) << "trial " << trial;
  }
}

TEST(Roc, CurveEndpointsAndMonotoneInvariance) {
  std::mt19937_64 gen(101);
  const auto [y, s] = random_instance(gen, 1);
  const Curve c = roc(y, s);
  ASSERT_GE(c.points.size(), 2u);
  EXPECT_EQ(c.points.front().x, 0.0);
  EXPECT_EQ(c.points.front().y, 0.0);
  EXPECT_TRUE(std::isinf(c.points.front().threshold));
  EXPECT_EQ(c.points.back().x, 1.0);
  EXPECT_EQ(c.points.back().y, 1.0);
  for (std::size_t i = 1; i < c.points.size(); ++i) {
    EXPECT_GE(c.points[i].x, c.points[i - 1].x);
    EXPECT_GE(c.points[i].y, c.points[i - 1].y);
  }
  const Vector squashed = s.unaryExpr([](double v) { return std::exp(3 * v) - 2; });
  EXPECT_EQ(roc_auc(y, squashed), c.area);
}

TEST(AveragePrecision, PerfectAndAllPositive) {
  EXPECT_DOUBLE_EQ(average_precision(labels_of({1, 1, 0, 0}), scores_of({0.9, 0.8, 0.3, 0.2})), 1.0);
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u;
  Vector s(50);
  for (Index i = 0; i < 50; ++i) s(i) = u(gen);
  EXPECT_DOUBLE_EQ(average_precision(LabelVector::Ones(50), s), 1.0);
}

TEST(AveragePrecision, MatchesPrefixOracle) {
  std::mt19937_64 gen(102);
  for (int trial = 0; trial < 100; ++trial) {
    const auto [y, s] = random_instance(gen, trial);
    EXPECT_NEAR(average_precision(y, s), oracle::prefix_ap(y, s), 1e-12) << "trial " << trial;
  }
}

TEST(Evaluate, ReportIsConsistentAndSerializes) {
  std::mt19937_64 gen(103);
  const auto [y, s] = random_instance(gen, 2);
  const EvalReport r = evaluate(y, s, 0.5);
  EXPECT_EQ(r.confusion, confusion(y, threshold_labels(s, 0.5)));
  EXPECT_EQ(r.roc_auc, roc_auc(y, s));
  EXPECT_EQ(r.average_precision, average_precision(y, s));
  EXPECT_EQ(r.confusion.total(), static_cast<std::size_t>(y.size()));
  const auto j = to_json(r);
  for (const char* key : {"threshold", "confusion", "accuracy", "precision", "recall", "f1",
                          "roc_auc", "pr_auc", "warnings", "roc_curve", "pr_curve"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  EXPECT_TRUE(j["roc_curve"][0][2].is_null());
  EXPECT_EQ(j["pr_auc"].get<double>(), r.average_precision);

  const auto path = std::filesystem::temp_directory_path() / "riskstack_roc.csv";
  write_curve_csv(r.roc, path);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  EXPECT_NE(header.find("threshold"), std::string::npos);
  std::size_t lines = 0;
  for (std::string line; std::getline(in, line);) ++lines;
  EXPECT_EQ(lines, r.roc.points.size());
  std::filesystem::remove(path);
}

TEST(Evaluate, SingleClassLabelsRejectedForCurves) {
  EXPECT_ANY_THROW(roc_auc(LabelVector::Zero(5), Vector::Random(5)));
}

namespace {

// A stump on column 0 at zero: reads nothing else.
Vector stump(const Matrix& x) {
  return (x.col(0).array() > 0.0).cast<double>().matrix();
}

Dataset stump_data(std::uint64_t seed, Index n) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> g;
  Matrix x(n, 2);
  LabelVector y(n);
  for (Index i = 0; i < n; ++i) {
    y(i) = static_cast<int>(i % 2);
    x(i, 0) = std::abs(g(gen)) * (y(i) ? 1.0 : -1.0);
    x(i, 1) = g(gen);
  }
  return make_dataset(x, y, {"signal", "unused"});
}

}  // namespace

TEST(PermutationImportance, UnusedFeatureHasNoDrop) {
  const Dataset d = stump_data(1, 1000);
  const auto imp = permutation_importance(stump, d, Metric::accuracy, 5, 3);
  EXPECT_LT(std::abs(imp.at("unused").mean_drop), 0.005);
  EXPECT_EQ(imp.at("unused").std_drop, 0.0);
}

TEST(PermutationImportance, OnlyInformativeFeatureDropsToChance) {
  const Dataset d = stump_data(2, 2000);
  const auto imp = permutation_importance(stump, d, Metric::accuracy, 5, 4);
  // Full accuracy is 1; shuffled predictions are independent of the labels,
  // so accuracy concentrates at 0.5.
  EXPECT_NEAR(imp.at("signal").mean_drop, 0.5, 0.05);
}

TEST(PermutationImportance, DeterministicForSeed) {
  const Dataset d = stump_data(3, 500);
  const auto a = permutation_importance(stump, d, Metric::roc_auc, 1, 9);
  const auto b = permutation_importance(stump, d, Metric::roc_auc, 1, 9);
  EXPECT_EQ(a.at("signal").mean_drop, b.at("signal").mean_drop);
  EXPECT_EQ(a.at("unused").mean_drop, b.at("unused").mean_drop);
}
