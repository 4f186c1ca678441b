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

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "riskstack/common.hpp"

namespace riskstack {

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;  // rows with x <= threshold go left
  int left = -1;
  int right = -1;
  double value = 0.0;  // leaf output
  double gain = 0.0;   // split gain credited to `feature`
};

struct DecisionTree {
  std::vector<TreeNode> nodes;

  template <typename Row>
  double evaluate(const Row& row) const {
    int id = 0;
    while (nodes[static_cast<std::size_t>(id)].feature >= 0) {
      const TreeNode& n = nodes[static_cast<std::size_t>(id)];
      id = row(n.feature) <= n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(id)].value;
  }

  int depth() const;
  std::size_t leaf_count() const;
};

/// Quantile cut points per feature. Columns with at most max_bins distinct
/// values get one bin per value (cuts at midpoints), so splits are exact.
class BinMapper {
 public:
  BinMapper() = default;
  BinMapper(const Matrix& x, int max_bins);

  Index features() const { return static_cast<Index>(cuts_.size()); }
  const std::vector<double>& cuts(Index feature) const {
    return cuts_[static_cast<std::size_t>(feature)];
  }
  int bins(Index feature) const {
    return static_cast<int>(cuts_[static_cast<std::size_t>(feature)].size()) + 1;
  }
  std::uint16_t bin(Index feature, double value) const;

 private:
  std::vector<std::vector<double>> cuts_;
};

/// Column-major bin codes for a training matrix.
struct BinnedMatrix {
  BinMapper mapper;
  Index rows = 0;
  std::vector<std::uint16_t> codes;

  BinnedMatrix(const Matrix& x, int max_bins);
  std::uint16_t operator()(Index row, Index feature) const {
    return codes[static_cast<std::size_t>(feature * rows + row)];
  }
};

struct GrowParams {
  int max_depth = 0;  // 0 = unlimited
  Index min_samples_split = 2;
  Index min_samples_leaf = 1;
  double min_child_weight = 0.0;  // hessian mass per child (gradient trees)
  double l2 = 0.0;                // leaf L2 (gradient trees)
  double leaf_scale = 1.0;        // multiplies gradient-tree leaf values
  int max_features = 0;           // features sampled per split; 0 = all
  double min_gain = 0.0;          // splits need gain strictly above this
};

/// CART on Gini impurity. `rows` may repeat (bootstrap). Leaves hold the
/// class-1 fraction; gains are weighted impurity decreases.
DecisionTree grow_gini_tree(const BinnedMatrix& x, const LabelVector& y,
                            std::span<const Index> rows, const GrowParams& params,
                            Rng& rng);

/// Newton tree on first/second-order statistics. Leaves hold
/// -G / (H + l2) * leaf_scale; gains are 0.5 * (GL^2/(HL+l2) + GR^2/(HR+l2)
/// - G^2/(H+l2)).
DecisionTree grow_gradient_tree(const BinnedMatrix& x, const Vector& grad,
                                const Vector& hess, std::span<const Index> rows,
                                const GrowParams& params, Rng& rng);

struct GbdtParams {
  int n_trees = 100;
  int max_depth = 6;
  double learning_rate = 0.3;
  double min_child_weight = 1.0;
  double l2_reg = 1.0;
  int max_bins = 256;
  double subsample = 1.0;
  int min_samples_leaf = 1;

  void validate() const;
};

/// Named defaults standing in for the boosted libraries: xgb, lgbm, cat, gb.
GbdtParams gbdt_preset(const std::string& name);
std::vector<std::string> gbdt_preset_names();

/// Boosted or averaged set of trees.
struct TreeEnsemble {
  std::vector<DecisionTree> trees;
  double learning_rate = 1.0;
  double base_score = 0.0;  // boosted: initial log-odds
  bool boosted = true;       // false: probability average (forest)

  template <typename Row>
  double raw_score(const Row& row) const {
    double s = boosted ? base_score : 0.0;
    for (const auto& t : trees) s += t.evaluate(row);
    return s;
  }

  Vector predict_proba(const Matrix& x) const;
};

/// Logistic-loss gradient and hessian with respect to the raw score.
inline double logistic_gradient(double score, int label) {
  return sigmoid(score) - label;
}
inline double logistic_hessian(double score) {
  const double p = sigmoid(score);
  return p * (1.0 - p);
}
inline double logistic_loss(double score, int label) {
  // log(1 + e^s) - y s, evaluated stably
  const double softplus =
      score > 0 ? score + std::log1p(std::exp(-score)) : std::log1p(std::exp(score));
  return softplus - label * score;
}

/// Newton boosting on logistic loss. `loss_trace`, when given, receives the
/// mean training log-loss before the first tree and after every tree.
TreeEnsemble fit_gbdt(const Matrix& x, const LabelVector& y,
                      const GbdtParams& params, std::uint64_t seed,
                      std::vector<double>* loss_trace = nullptr);

struct ForestParams {
  int n_trees = 100;
  int max_depth = 0;
  Index min_samples_split = 2;
  Index min_samples_leaf = 1;
  int max_features = 0;  // 0 = floor(sqrt(p))
  bool bootstrap = true;
  int max_bins = 256;
};

TreeEnsemble fit_forest(const Matrix& x, const LabelVector& y,
                        const ForestParams& params, std::uint64_t seed);

/// Sum of split gains per feature over all trees.
Vector tree_gain_importance(const TreeEnsemble& ensemble, Index features);

}  // namespace riskstack
