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

#include <random>
#include <set>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "oracles.hpp"
#include "riskstack/neighbors.hpp"
#include "riskstack/resample.hpp"
#include "riskstack/synthetic.hpp"

using namespace riskstack;

namespace {

Dataset points(const std::vector<std::vector<double>>& rows, const std::vector<int>& labels) {
  Matrix x(static_cast<Index>(rows.size()), static_cast<Index>(rows[0].size()));
  LabelVector y(static_cast<Index>(labels.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) x(Index(i), Index(j)) = rows[i][j];
    y(Index(i)) = labels[i];
  }
  std::vector<std::string> names;
  for (Index j = 0; j < x.cols(); ++j) names.push_back("x" + std::to_string(j));
  return make_dataset(x, y, names);
}

Dataset random_table(std::mt19937_64& gen, Index n, Index p, double minority_rate, bool coarse) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> grid(0, 6);
  Matrix x(n, p);
  LabelVector y(n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < p; ++j) x(i, j) = coarse ? grid(gen) : u(gen);
    y(i) = u(gen) < minority_rate ? 1 : 0;
  }
  // Keep both classes present.
  y(0) = 1;
  y(1) = 0;
  std::vector<std::string> names;
  for (Index j = 0; j < p; ++j) names.push_back("x" + std::to_string(j));
  return make_dataset(x, y, names);
}

std::size_t count(const LabelVector& y, int label) {
  return static_cast<std::size_t>((y.array() == label).count());
}

}  // namespace

TEST(Smote, CountArithmetic) {
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for (int i = 0; i < 10; ++i) {
    rows.push_back({double(i), 0.0});
    labels.push_back(0);
  }
  for (int i = 0; i < 4; ++i) {
    rows.push_back({double(i), 5.0 + i});
    labels.push_back(1);
  }
  ResampleConfig cfg;
  cfg.smote_k = 3;
  const auto r = smote(points(rows, labels), cfg);
  EXPECT_EQ(count(r.data.labels, 1), 10u);
  EXPECT_EQ(r.report.synthetic_created, 6u);
  EXPECT_EQ(r.report.minority_label, 1);
}

TEST(Smote, SyntheticPointsLieOnTheDiagonalSegment) {
  std::vector<std::vector<double>> rows{{0, 0}, {1, 1}};
  std::vector<int> labels{1, 1};
  for (int i = 0; i < 30; ++i) {
    rows.push_back({5.0 + i, -3.0});
    labels.push_back(0);
  }
  ResampleConfig cfg;
  cfg.smote_k = 1;
  cfg.seed = 9;
  const auto r = smote(points(rows, labels), cfg);
  ASSERT_EQ(r.report.synthetic_created, 28u);
  for (Index i = 32; i < r.data.rows(); ++i) {
    const double a = r.data.features(i, 0);
    const double b = r.data.features(i, 1);
    EXPECT_DOUBLE_EQ(a, b);
    EXPECT_GE(a, 0.0);
    EXPECT_LE(a, 1.0);
    EXPECT_EQ(r.data.labels(i), 1);
  }
}

TEST(Smote, EverySyntheticPassesSegmentOracle) {
  std::mt19937_64 gen(21);
  for (int trial = 0; trial < 20; ++trial) {
    const Dataset d = random_table(gen, 120, 3, 0.2, false);
    ResampleConfig cfg;
    cfg.smote_k = 1 + trial % 5;
    cfg.seed = static_cast<std::uint64_t>(trial);
    if (count(d.labels, 1) < static_cast<std::size_t>(cfg.smote_k + 1)) continue;
    const auto r = smote(d, cfg);

    oracle::Mat minority(static_cast<Index>(count(d.labels, 1)), d.cols());
    Index m = 0;
    for (Index i = 0; i < d.rows(); ++i) {
      if (d.labels(i) == 1) minority.row(m++) = d.features.row(i);
    }
    EXPECT_EQ(count(r.data.labels, 0), count(r.data.labels, 1));
    EXPECT_EQ(r.data.features.topRows(d.rows()), d.features);
    for (Index i = d.rows(); i < r.data.rows(); ++i) {
      EXPECT_TRUE(oracle::on_knn_segment(minority, cfg.smote_k, r.data.features.row(i)))
          << "trial " << trial << " row " << i;
    }
  }
}

TEST(Smote, BalancedInputIsNoOp) {
  const Dataset d = points({{0, 0}, {1, 0}, {5, 5}, {6, 5}}, {0, 0, 1, 1});
  ResampleConfig cfg;
  cfg.smote_k = 1;
  const auto r = smote(d, cfg);
  EXPECT_EQ(r.report.synthetic_created, 0u);
  EXPECT_EQ(r.data.features, d.features);
  EXPECT_EQ(r.data.labels, d.labels);
}

TEST(Smote, TooFewMinorityRowsNamesMinimum) {
  const Dataset d = points({{0, 0}, {1, 0}, {2, 0}, {5, 5}, {6, 5}}, {0, 0, 0, 1, 1});
  ResampleConfig cfg;
  cfg.smote_k = 3;
  try {
    smote(d, cfg);
    FAIL() << "expected an error";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("4"), std::string::npos) << e.what();
  }
}

TEST(Smote, DeterministicForSeed) {
  const Dataset d = synthetic_brfss(600, 4);
  ResampleConfig cfg;
  cfg.seed = 77;
  const auto a = smote(d, cfg);
  const auto b = smote(d, cfg);
  EXPECT_EQ(a.data.features, b.data.features);
  cfg.seed = 78;
  const auto c = smote(d, cfg);
  EXPECT_NE(a.data.features, c.data.features);
}

TEST(Smote, PartialTargetRatio) {
  const Dataset d = synthetic_brfss(1000, 6, 0.1);
  ResampleConfig cfg;
  cfg.target_ratio = 0.5;
  const auto r = smote(d, cfg);
  const double ratio = double(r.report.counts_after_smote[1]) / double(r.report.counts_after_smote[0]);
  EXPECT_NEAR(ratio, 0.5, 1.0 / double(r.report.counts_after_smote[0]));
}

TEST(Tomek, MatchesMutualNearestNeighbourOracle) {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 100; ++trial) {
    const Index n = 20 + static_cast<Index>(gen() % 281);
    const bool coarse = trial % 3 == 0;
    const Dataset d = random_table(gen, n, 2 + trial % 3, 0.35, coarse);
    const auto expected = oracle::tomek_pairs(d.features, d.labels);
    const auto links = find_tomek_links(d.features, d.labels);
    const std::set<std::pair<Index, Index>> got(links.begin(), links.end());
    ASSERT_EQ(got, expected) << "trial " << trial << " n=" << n;

    const int majority = count(d.labels, 1) > count(d.labels, 0) ? 1 : 0;
    std::set<Index> removed;
    for (const auto& [a, b] : expected) removed.insert(d.labels(a) == majority ? a : b);
    const auto r = tomek(d);
    ASSERT_EQ(r.data.rows(), d.rows() - static_cast<Index>(removed.size()));
    Index k = 0;
    for (Index i = 0; i < d.rows(); ++i) {
      if (removed.count(i)) continue;
      ASSERT_EQ(r.data.features.row(k), d.features.row(i));
      ++k;
    }
    EXPECT_EQ(r.report.tomek_pairs_found, expected.size());
    EXPECT_LE(r.report.majority_removed, r.report.tomek_pairs_found);
  }
}

TEST(Tomek, CloseCrossClassPairRemovesMajority) {
  const Dataset d = points({{0.5, 0}, {0.55, 0}, {10, 10}, {10, 11}, {-10, 10}, {20, -20}},
                           {0, 1, 0, 0, 0, 1});
  const auto r = tomek(d);
  EXPECT_EQ(r.report.tomek_pairs_found, 1u);
  EXPECT_EQ(r.report.majority_removed, 1u);
  ASSERT_EQ(r.data.rows(), 5);
  EXPECT_DOUBLE_EQ(r.data.features(0, 0), 0.55);
}

TEST(Tomek, SeparatedClustersHaveNoLinks) {
  const Dataset d = points({{0, 0}, {0.1, 0}, {0, 0.1}, {5, 5}, {5.1, 5}, {5, 5.1}},
                           {0, 0, 0, 1, 1, 1});
  EXPECT_TRUE(find_tomek_links(d.features, d.labels).empty());
  EXPECT_EQ(tomek(d).data.features, d.features);
}

TEST(Tomek, SingleClassHasNoLinks) {
  const Dataset d = points({{0, 0}, {0.1, 0}, {3, 3}}, {1, 1, 1});
  EXPECT_TRUE(find_tomek_links(d.features, d.labels).empty());
  EXPECT_EQ(tomek(d).data.rows(), 3);
}

TEST(Balance, ReportArithmeticOnRandomInputs) {
  std::mt19937_64 gen(13);
  for (int trial = 0; trial < 15; ++trial) {
    const Dataset d = random_table(gen, 150, 3, 0.25, false);
    ResampleConfig cfg;
    cfg.smote_k = 3;
    cfg.seed = static_cast<std::uint64_t>(trial);
    if (count(d.labels, 1) < 4) continue;
    const auto r = balance(d, cfg);
    const auto& rep = r.report;
    EXPECT_EQ(rep.counts_before[1], count(d.labels, 1));
    EXPECT_EQ(rep.counts_after_smote[rep.minority_label],
              rep.counts_before[rep.minority_label] + rep.synthetic_created);
    EXPECT_EQ(rep.counts_after_smote[0], rep.counts_after_smote[1]);
    EXPECT_LE(rep.majority_removed, rep.tomek_pairs_found);
    EXPECT_EQ(rep.counts_after[0], count(r.data.labels, 0));
    EXPECT_EQ(rep.counts_after[1], count(r.data.labels, 1));
    EXPECT_EQ(rep.counts_after[0] + rep.counts_after[1],
              rep.counts_after_smote[0] + rep.counts_after_smote[1] - rep.majority_removed);
  }
}

TEST(Balance, BalancedSeparatedInputUnchanged) {
  const Dataset d = points({{0, 0}, {0.1, 0}, {0, 0.1}, {5, 5}, {5.1, 5}, {5, 5.1}},
                           {0, 0, 0, 1, 1, 1});
  ResampleConfig cfg;
  cfg.smote_k = 2;
  const auto r = balance(d, cfg);
  EXPECT_EQ(r.data.features, d.features);
  EXPECT_EQ(r.data.labels, d.labels);
  EXPECT_FALSE(r.data.transform_log.empty());
}

TEST(Balance, ReportJsonKeys) {
  const auto r = balance(synthetic_brfss(300, 2), ResampleConfig{});
  const auto j = to_json(r.report);
  for (const char* key : {"counts_before", "counts_after_smote", "counts_after", "synthetic_created",
                          "tomek_pairs_found", "majority_removed"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
}

TEST(KdTree, AgreesWithLinearScan) {
  std::mt19937_64 gen(3);
  std::uniform_int_distribution<int> grid(0, 4);
  RowMatrix pts(500, 3);
  for (Index i = 0; i < pts.rows(); ++i) {
    for (Index j = 0; j < 3; ++j) pts(i, j) = grid(gen);
  }
  const KdTree tree(pts, 8);
  for (Index q = 0; q < pts.rows(); q += 7) {
    EXPECT_EQ(tree.query(pts.row(q).data(), 6, q), brute_force_knn(pts, pts.row(q).data(), 6, q));
  }
}
