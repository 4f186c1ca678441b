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

#include "riskstack/tree.hpp"

#include <algorithm>
#include <functional>

namespace riskstack {
namespace {

struct BinStat {
  double a = 0.0;  // class-1 weight, or gradient sum
  double b = 0.0;  // total weight, or hessian sum
  Index count = 0;

  void add(const BinStat& o) {
    a += o.a;
    b += o.b;
    count += o.count;
  }
  BinStat minus(const BinStat& o) const { return {a - o.a, b - o.b, count - o.count}; }
};

struct GiniCriterion {
  const LabelVector& y;
  const GrowParams& params;

  BinStat stat(Index row) const { return {static_cast<double>(y(row)), 1.0, 1}; }
  // Negative weighted Gini impurity: -2 a (b - a) / b.
  double score(const BinStat& s) const {
    return s.b > 0 ? -2.0 * s.a * (s.b - s.a) / s.b : 0.0;
  }
  double leaf(const BinStat& s) const { return s.b > 0 ? s.a / s.b : 0.0; }
  bool child_ok(const BinStat& s) const { return s.count >= params.min_samples_leaf; }
  bool pure(const BinStat& s) const { return s.a == 0.0 || s.a == s.b; }
};

struct GradientCriterion {
  const Vector& grad;
  const Vector& hess;
  const GrowParams& params;

  BinStat stat(Index row) const { return {grad(row), hess(row), 1}; }
  double score(const BinStat& s) const { return 0.5 * s.a * s.a / (s.b + params.l2); }
  double leaf(const BinStat& s) const {
    const double denom = s.b + params.l2;
    return denom > 0 ? -s.a / denom * params.leaf_scale : 0.0;
  }
  bool child_ok(const BinStat& s) const {
    return s.count >= params.min_samples_leaf && s.b >= params.min_child_weight;
  }
  bool pure(const BinStat&) const { return false; }
};

template <typename Criterion>
class Grower {
 public:
  Grower(const BinnedMatrix& x, const Criterion& crit, const GrowParams& params,
         Rng& rng, std::span<const Index> rows)
      : x_(x), crit_(crit), params_(params), rng_(rng), rows_(rows.begin(), rows.end()) {
    int max_bins = 1;
    for (Index f = 0; f < x_.mapper.features(); ++f) {
      max_bins = std::max(max_bins, x_.mapper.bins(f));
    }
    hist_.assign(static_cast<std::size_t>(max_bins), BinStat{});
    all_features_ = iota_indices(x_.mapper.features());
  }

  DecisionTree run() {
    BinStat total;
    for (Index r : rows_) total.add(crit_.stat(r));
    grow(0, static_cast<Index>(rows_.size()), 0, total);
    return std::move(tree_);
  }

 private:
  struct Split {
    double gain = 0.0;
    Index feature = -1;
    int bin = -1;
  };

  std::vector<Index> candidate_features() {
    const Index p = static_cast<Index>(all_features_.size());
    if (params_.max_features <= 0 || params_.max_features >= p) return all_features_;
    std::vector<Index> pool = all_features_;
    const auto m = static_cast<std::size_t>(params_.max_features);
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t j = i + rng_.below(pool.size() - i);
      std::swap(pool[i], pool[j]);
    }
    pool.resize(m);
    std::sort(pool.begin(), pool.end());
    return pool;
  }

  Split best_split(Index begin, Index end, const BinStat& total) {
    Split best;
    best.gain = params_.min_gain;
    const double parent = crit_.score(total);
    for (Index f : candidate_features()) {
      touched_.clear();
      for (Index i = begin; i < end; ++i) {
        const Index row = rows_[static_cast<std::size_t>(i)];
        const std::uint16_t code = x_(row, f);
        BinStat& slot = hist_[code];
        if (slot.count == 0) touched_.push_back(code);
        slot.add(crit_.stat(row));
      }
      std::sort(touched_.begin(), touched_.end());
      BinStat left;
      // Gain only changes at populated bins; the last one cannot split.
      for (std::size_t k = 0; k + 1 < touched_.size(); ++k) {
        left.add(hist_[touched_[k]]);
        const BinStat right = total.minus(left);
        if (!crit_.child_ok(left) || !crit_.child_ok(right)) continue;
        const double gain = crit_.score(left) + crit_.score(right) - parent;
        if (gain > best.gain) {
          best = {gain, f, touched_[k]};
        }
      }
      for (std::uint16_t code : touched_) hist_[code] = BinStat{};
    }
    return best;
  }

  int grow(Index begin, Index end, int depth, const BinStat& total) {
    const int id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.push_back(TreeNode{});
    tree_.nodes.back().value = crit_.leaf(total);

    const bool depth_ok = params_.max_depth <= 0 || depth < params_.max_depth;
    if (!depth_ok || end - begin < params_.min_samples_split || crit_.pure(total)) {
      return id;
    }
    const Split split = best_split(begin, end, total);
    if (split.feature < 0) return id;

    auto middle = std::partition(
        rows_.begin() + begin, rows_.begin() + end,
        [&](Index row) { return x_(row, split.feature) <= split.bin; });
    const Index mid = static_cast<Index>(middle - rows_.begin());
    BinStat left_total;
    for (Index i = begin; i < mid; ++i) left_total.add(crit_.stat(rows_[static_cast<std::size_t>(i)]));
    const BinStat right_total = total.minus(left_total);

    const int left = grow(begin, mid, depth + 1, left_total);
    const int right = grow(mid, end, depth + 1, right_total);
    TreeNode& node = tree_.nodes[static_cast<std::size_t>(id)];
    node.feature = static_cast<int>(split.feature);
    node.threshold = x_.mapper.cuts(split.feature)[static_cast<std::size_t>(split.bin)];
    node.gain = split.gain;
    node.left = left;
    node.right = right;
    return id;
  }

  const BinnedMatrix& x_;
  const Criterion& crit_;
  const GrowParams& params_;
  Rng& rng_;
  std::vector<Index> rows_;
  std::vector<BinStat> hist_;
  std::vector<std::uint16_t> touched_;
  std::vector<Index> all_features_;
  DecisionTree tree_;
};

}  // namespace

int DecisionTree::depth() const {
  std::function<int(int)> walk = [&](int id) -> int {
    const TreeNode& n = nodes[static_cast<std::size_t>(id)];
    if (n.feature < 0) return 0;
    return 1 + std::max(walk(n.left), walk(n.right));
  };
  return nodes.empty() ? 0 : walk(0);
}

std::size_t DecisionTree::leaf_count() const {
  return static_cast<std::size_t>(std::count_if(
      nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.feature < 0; }));
}

BinMapper::BinMapper(const Matrix& x, int max_bins) {
  if (max_bins < 2 || max_bins > 65535) {
    throw TrainingError("max_bins must lie in [2, 65535]");
  }
  cuts_.resize(static_cast<std::size_t>(x.cols()));
  parallel_for(x.cols(), [&](Index f) {
    std::vector<double> sorted(x.col(f).begin(), x.col(f).end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> distinct = sorted;
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    auto& cuts = cuts_[static_cast<std::size_t>(f)];
    if (static_cast<int>(distinct.size()) <= max_bins) {
      for (std::size_t k = 0; k + 1 < distinct.size(); ++k) {
        cuts.push_back(distinct[k] + (distinct[k + 1] - distinct[k]) / 2);
      }
      return;
    }
    const std::size_t n = sorted.size();
    for (int k = 1; k < max_bins; ++k) {
      const double v = sorted[static_cast<std::size_t>(k) * n / static_cast<std::size_t>(max_bins)];
      const auto next = std::upper_bound(distinct.begin(), distinct.end(), v);
      if (next == distinct.end()) break;
      const double cut = v + (*next - v) / 2;
      if (cuts.empty() || cut > cuts.back()) cuts.push_back(cut);
    }
  });
}

std::uint16_t BinMapper::bin(Index feature, double value) const {
  const auto& c = cuts_[static_cast<std::size_t>(feature)];
  return static_cast<std::uint16_t>(std::lower_bound(c.begin(), c.end(), value) - c.begin());
}

BinnedMatrix::BinnedMatrix(const Matrix& x, int max_bins)
    : mapper(x, max_bins), rows(x.rows()) {
  codes.resize(static_cast<std::size_t>(x.rows() * x.cols()));
  parallel_for(x.cols(), [&](Index f) {
    for (Index i = 0; i < x.rows(); ++i) {
      codes[static_cast<std::size_t>(f * rows + i)] = mapper.bin(f, x(i, f));
    }
  });
}

DecisionTree grow_gini_tree(const BinnedMatrix& x, const LabelVector& y,
                            std::span<const Index> rows, const GrowParams& params,
                            Rng& rng) {
  GiniCriterion crit{y, params};
  return Grower<GiniCriterion>(x, crit, params, rng, rows).run();
}

DecisionTree grow_gradient_tree(const BinnedMatrix& x, const Vector& grad,
                                const Vector& hess, std::span<const Index> rows,
                                const GrowParams& params, Rng& rng) {
  GradientCriterion crit{grad, hess, params};
  return Grower<GradientCriterion>(x, crit, params, rng, rows).run();
}

void GbdtParams::validate() const {
  if (n_trees < 1) throw TrainingError("gbdt n_trees must be >= 1");
  if (max_depth < 1) throw TrainingError("gbdt max_depth must be >= 1");
  if (!(learning_rate > 0)) throw TrainingError("gbdt learning_rate must be > 0");
  if (min_child_weight < 0) throw TrainingError("gbdt min_child_weight must be >= 0");
  if (l2_reg < 0) throw TrainingError("gbdt l2_reg must be >= 0");
  if (max_bins < 2) throw TrainingError("gbdt max_bins must be >= 2");
  if (min_samples_leaf < 1) throw TrainingError("gbdt min_samples_leaf must be >= 1");
  if (!(subsample > 0 && subsample <= 1)) {
    throw TrainingError("gbdt subsample must lie in (0, 1]");
  }
}

GbdtParams gbdt_preset(const std::string& name) {
  GbdtParams p;
  if (name == "xgb" || name.empty()) {
    p = {100, 6, 0.3, 1.0, 1.0, 256, 1.0, 1};
  } else if (name == "lgbm") {
    p = {100, 5, 0.1, 1e-3, 0.0, 255, 1.0, 20};
  } else if (name == "cat") {
    p = {200, 6, 0.1, 1.0, 3.0, 254, 1.0, 1};
  } else if (name == "gb") {
    p = {100, 3, 0.1, 1e-3, 0.0, 256, 1.0, 1};
  } else {
    throw TrainingError("unknown gbdt preset '" + name + "' (xgb, lgbm, cat, gb)");
  }
  return p;
}

std::vector<std::string> gbdt_preset_names() { return {"xgb", "lgbm", "cat", "gb"}; }

Vector TreeEnsemble::predict_proba(const Matrix& x) const {
  Vector out(x.rows());
  constexpr Index kChunk = 2048;
  const Index chunks = (x.rows() + kChunk - 1) / kChunk;
  parallel_for(chunks, [&](Index c) {
    const Index end = std::min(x.rows(), (c + 1) * kChunk);
    for (Index i = c * kChunk; i < end; ++i) {
      const double s = raw_score(x.row(i));
      if (boosted) {
        out(i) = sigmoid(s);
      } else {
        out(i) = trees.empty() ? 0.5 : s / static_cast<double>(trees.size());
      }
    }
  });
  return out;
}

TreeEnsemble fit_gbdt(const Matrix& x, const LabelVector& y,
                      const GbdtParams& params, std::uint64_t seed,
                      std::vector<double>* loss_trace) {
  params.validate();
  const Index n = x.rows();
  TreeEnsemble model;
  model.boosted = true;
  model.learning_rate = params.learning_rate;
  const double prior = std::clamp(y.cast<double>().mean(), 1e-6, 1.0 - 1e-6);
  model.base_score = logit(prior);

  const BinnedMatrix binned(x, params.max_bins);
  GrowParams grow;
  grow.max_depth = params.max_depth;
  grow.min_child_weight = params.min_child_weight;
  grow.min_samples_leaf = params.min_samples_leaf;
  grow.l2 = params.l2_reg;
  grow.leaf_scale = params.learning_rate;

  Vector score = Vector::Constant(n, model.base_score);
  Vector grad(n);
  Vector hess(n);
  auto mean_loss = [&] {
    double s = 0.0;
    for (Index i = 0; i < n; ++i) s += logistic_loss(score(i), y(i));
    return s / static_cast<double>(n);
  };
  if (loss_trace) loss_trace->push_back(mean_loss());

  const std::vector<Index> all_rows = iota_indices(n);
  for (int t = 0; t < params.n_trees; ++t) {
    for (Index i = 0; i < n; ++i) {
      grad(i) = logistic_gradient(score(i), y(i));
      hess(i) = logistic_hessian(score(i));
    }
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
    std::vector<Index> rows = all_rows;
    if (params.subsample < 1.0) {
      const auto keep = std::max<std::size_t>(
          1, static_cast<std::size_t>(params.subsample * static_cast<double>(n)));
      for (std::size_t i = 0; i < keep; ++i) {
        std::swap(rows[i], rows[i + rng.below(rows.size() - i)]);
      }
      rows.resize(keep);
      std::sort(rows.begin(), rows.end());
    }
    DecisionTree tree = grow_gradient_tree(binned, grad, hess, rows, grow, rng);
    for (Index i = 0; i < n; ++i) score(i) += tree.evaluate(x.row(i));
    model.trees.push_back(std::move(tree));
    if (loss_trace) loss_trace->push_back(mean_loss());
  }
  return model;
}

TreeEnsemble fit_forest(const Matrix& x, const LabelVector& y,
                        const ForestParams& params, std::uint64_t seed) {
  if (params.n_trees < 1) throw TrainingError("forest n_trees must be >= 1");
  const Index n = x.rows();
  const Index p = x.cols();
  TreeEnsemble model;
  model.boosted = false;
  model.learning_rate = 1.0;
  model.trees.resize(static_cast<std::size_t>(params.n_trees));

  const BinnedMatrix binned(x, params.max_bins);
  GrowParams grow;
  grow.max_depth = params.max_depth;
  grow.min_samples_split = std::max<Index>(2, params.min_samples_split);
  grow.min_samples_leaf = std::max<Index>(1, params.min_samples_leaf);
  grow.max_features = params.max_features > 0
                          ? params.max_features
                          : std::max(1, static_cast<int>(std::sqrt(static_cast<double>(p))));

  parallel_for(params.n_trees, [&](Index t) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
    std::vector<Index> rows;
    if (params.bootstrap) {
      rows.resize(static_cast<std::size_t>(n));
      for (auto& r : rows) r = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n)));
      std::sort(rows.begin(), rows.end());
    } else {
      rows = iota_indices(n);
    }
    model.trees[static_cast<std::size_t>(t)] = grow_gini_tree(binned, y, rows, grow, rng);
  });
  return model;
}

Vector tree_gain_importance(const TreeEnsemble& ensemble, Index features) {
  Vector total = Vector::Zero(features);
  for (const auto& tree : ensemble.trees) {
    for (const auto& node : tree.nodes) {
      if (node.feature >= 0 && node.feature < features) total(node.feature) += node.gain;
    }
  }
  return total;
}

}  // namespace riskstack
