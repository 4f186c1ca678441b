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

#include <vector>

#include "riskstack/common.hpp"

namespace riskstack {

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Neighbors order by squared distance, then by row index. Every query in the
// library uses this order so that results are exact and reproducible.
struct Neighbor {
  double dist2 = 0.0;
  Index index = -1;

  friend bool operator<(const Neighbor& a, const Neighbor& b) {
    return a.dist2 < b.dist2 || (a.dist2 == b.dist2 && a.index < b.index);
  }
  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

inline double squared_distance(const double* a, const double* b, Index dim) {
  double s = 0.0;
  for (Index d = 0; d < dim; ++d) {
    const double diff = a[d] - b[d];
    s += diff * diff;
  }
  return s;
}

/// Exact k nearest rows of `points` to `query` by linear scan. Row `exclude`
/// (if >= 0) is skipped. Result sorted ascending.
std::vector<Neighbor> brute_force_knn(const RowMatrix& points,
                                      const double* query, int k,
                                      Index exclude = -1);

/// Exact k-nearest-neighbor index (kd-tree with bounding boxes). Pruning is
/// strict so equal-distance candidates with lower indices are never missed.
class KdTree {
 public:
  KdTree() = default;
  explicit KdTree(RowMatrix points, Index leaf_size = 24);

  Index size() const { return points_.rows(); }
  Index dim() const { return points_.cols(); }
  const RowMatrix& points() const { return points_; }

  std::vector<Neighbor> query(const double* point, int k,
                              Index exclude = -1) const;

 private:
  struct Node {
    Index begin = 0;
    Index end = 0;
    Index left = -1;
    Index right = -1;
  };

  Index build(Index begin, Index end);
  double box_distance(Index node, const double* q) const;

  RowMatrix points_;
  Index leaf_size_ = 24;
  std::vector<Index> order_;
  std::vector<Node> nodes_;
  std::vector<double> box_lo_;
  std::vector<double> box_hi_;
};

/// k nearest neighbors for every row of `points` against itself, excluding
/// the row itself. Parallel over query rows, deterministic output.
std::vector<std::vector<Neighbor>> all_knn(const RowMatrix& points, int k);

}  // namespace riskstack
