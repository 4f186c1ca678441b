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

#include "riskstack/neighbors.hpp"

#include <algorithm>
#include <queue>

namespace riskstack {
namespace {

// Bounded max-heap keeping the k smallest neighbors.
class TopK {
 public:
  explicit TopK(int k) : k_(static_cast<std::size_t>(k)) {}

  bool full() const { return heap_.size() >= k_; }
  const Neighbor& worst() const { return heap_.top(); }

  void offer(const Neighbor& n) {
    if (!full()) {
      heap_.push(n);
    } else if (n < heap_.top()) {
      heap_.pop();
      heap_.push(n);
    }
  }

  std::vector<Neighbor> sorted() && {
    std::vector<Neighbor> out;
    out.reserve(heap_.size());
    while (!heap_.empty()) {
      out.push_back(heap_.top());
      heap_.pop();
    }
    std::reverse(out.begin(), out.end());
    return out;
  }

 private:
  std::size_t k_;
  std::priority_queue<Neighbor> heap_;
};

}  // namespace

std::vector<Neighbor> brute_force_knn(const RowMatrix& points,
                                      const double* query, int k,
                                      Index exclude) {
  TopK top(k);
  const Index dim = points.cols();
  for (Index i = 0; i < points.rows(); ++i) {
    if (i == exclude) continue;
    top.offer({squared_distance(points.row(i).data(), query, dim), i});
  }
  return std::move(top).sorted();
}

KdTree::KdTree(RowMatrix points, Index leaf_size)
    : points_(std::move(points)), leaf_size_(std::max<Index>(1, leaf_size)) {
  order_ = iota_indices(points_.rows());
  if (points_.rows() > 0) {
    nodes_.reserve(static_cast<std::size_t>(2 * points_.rows() / leaf_size_ + 2));
    build(0, points_.rows());
  }
}

Index KdTree::build(Index begin, Index end) {
  const Index id = static_cast<Index>(nodes_.size());
  nodes_.push_back({begin, end, -1, -1});
  const Index dim = points_.cols();
  box_lo_.resize(box_lo_.size() + static_cast<std::size_t>(dim));
  box_hi_.resize(box_hi_.size() + static_cast<std::size_t>(dim));
  double* lo = &box_lo_[static_cast<std::size_t>(id * dim)];
  double* hi = &box_hi_[static_cast<std::size_t>(id * dim)];
  std::fill(lo, lo + dim, std::numeric_limits<double>::infinity());
  std::fill(hi, hi + dim, -std::numeric_limits<double>::infinity());
  for (Index i = begin; i < end; ++i) {
    const double* row = points_.row(order_[static_cast<std::size_t>(i)]).data();
    for (Index d = 0; d < dim; ++d) {
      lo[d] = std::min(lo[d], row[d]);
      hi[d] = std::max(hi[d], row[d]);
    }
  }
  Index split_dim = 0;
  double spread = -1.0;
  for (Index d = 0; d < dim; ++d) {
    if (hi[d] - lo[d] > spread) {
      spread = hi[d] - lo[d];
      split_dim = d;
    }
  }
  if (end - begin <= leaf_size_ || spread <= 0.0) return id;

  const Index mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid,
                   order_.begin() + end, [&](Index a, Index b) {
                     return points_(a, split_dim) < points_(b, split_dim);
                   });
  const Index left = build(begin, mid);
  const Index right = build(mid, end);
  nodes_[static_cast<std::size_t>(id)].left = left;
  nodes_[static_cast<std::size_t>(id)].right = right;
  return id;
}

double KdTree::box_distance(Index node, const double* q) const {
  const Index dim = points_.cols();
  const double* lo = &box_lo_[static_cast<std::size_t>(node * dim)];
  const double* hi = &box_hi_[static_cast<std::size_t>(node * dim)];
  double s = 0.0;
  for (Index d = 0; d < dim; ++d) {
    double diff = 0.0;
    if (q[d] < lo[d]) {
      diff = lo[d] - q[d];
    } else if (q[d] > hi[d]) {
      diff = q[d] - hi[d];
    }
    s += diff * diff;
  }
  return s;
}

std::vector<Neighbor> KdTree::query(const double* point, int k,
                                    Index exclude) const {
  TopK top(k);
  if (nodes_.empty() || k <= 0) return std::move(top).sorted();
  const Index dim = points_.cols();

  struct Pending {
    Index node;
    double bound;
  };
  std::vector<Pending> stack{{0, box_distance(0, point)}};
  while (!stack.empty()) {
    const Pending item = stack.back();
    stack.pop_back();
    // Strict: a box at exactly the current worst distance may still hold a
    // lower-index tie.
    if (top.full() && item.bound > top.worst().dist2) continue;
    const Node& node = nodes_[static_cast<std::size_t>(item.node)];
    if (node.left < 0) {
      for (Index i = node.begin; i < node.end; ++i) {
        const Index row = order_[static_cast<std::size_t>(i)];
        if (row == exclude) continue;
        top.offer({squared_distance(points_.row(row).data(), point, dim), row});
      }
      continue;
    }
    const double dl = box_distance(node.left, point);
    const double dr = box_distance(node.right, point);
    // Push the farther child first so the nearer one is explored next.
    if (dl <= dr) {
      stack.push_back({node.right, dr});
      stack.push_back({node.left, dl});
    } else {
      stack.push_back({node.left, dl});
      stack.push_back({node.right, dr});
    }
  }
  return std::move(top).sorted();
}

std::vector<std::vector<Neighbor>> all_knn(const RowMatrix& points, int k) {
  const KdTree tree(points);
  std::vector<std::vector<Neighbor>> out(static_cast<std::size_t>(points.rows()));
  parallel_for(points.rows(), [&](Index i) {
    out[static_cast<std::size_t>(i)] = tree.query(points.row(i).data(), k, i);
  });
  return out;
}

}  // namespace riskstack
