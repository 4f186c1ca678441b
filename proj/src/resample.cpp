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

#include "riskstack/resample.hpp"

#include <sstream>

#include <nlohmann/json.hpp>

#include "riskstack/neighbors.hpp"

namespace riskstack {

void ResampleConfig::validate() const {
  if (smote_k < 1) throw DataError("smote_k must be at least 1");
  if (!(target_ratio > 0.0 && target_ratio <= 1.0)) {
    throw DataError("target_ratio must lie in (0, 1]");
  }
}

Resampled smote(const Dataset& data, const ResampleConfig& config) {
  config.validate();
  if (data.has_missing()) throw DataError("smote requires imputed data");
  Resampled out;
  auto& report = out.report;
  report.counts_before = data.class_counts();
  const int minority = report.counts_before[1] <= report.counts_before[0] ? 1 : 0;
  const int majority = 1 - minority;
  report.minority_label = minority;
  const std::size_t n_min = report.counts_before[static_cast<std::size_t>(minority)];
  const std::size_t n_maj = report.counts_before[static_cast<std::size_t>(majority)];

  const auto target = static_cast<std::size_t>(
      std::llround(config.target_ratio * static_cast<double>(n_maj)));
  const std::size_t synthetic = target > n_min ? target - n_min : 0;

  out.data = data;
  if (synthetic > 0) {
    const auto k = static_cast<std::size_t>(config.smote_k);
    if (n_min < k + 1) {
      throw DataError("smote with k=" + std::to_string(k) +
                      " needs at least " + std::to_string(k + 1) +
                      " minority rows, found " + std::to_string(n_min));
    }
    std::vector<Index> minority_rows;
    for (Index i = 0; i < data.rows(); ++i) {
      if (data.labels(i) == minority) minority_rows.push_back(i);
    }
    RowMatrix pool(static_cast<Index>(minority_rows.size()), data.cols());
    for (std::size_t r = 0; r < minority_rows.size(); ++r) {
      pool.row(static_cast<Index>(r)) = data.features.row(minority_rows[r]);
    }
    const auto neighbors = all_knn(pool, config.smote_k);

    const Index n0 = data.rows();
    out.data.features.conservativeResize(n0 + static_cast<Index>(synthetic),
                                         Eigen::NoChange);
    out.data.labels.conservativeResize(n0 + static_cast<Index>(synthetic));
    Rng rng(config.seed);
    for (std::size_t s = 0; s < synthetic; ++s) {
      const auto p = static_cast<Index>(rng.below(minority_rows.size()));
      const auto& nn = neighbors[static_cast<std::size_t>(p)];
      const Index q = nn[rng.below(nn.size())].index;
      const double gap = rng.uniform();
      const Index row = n0 + static_cast<Index>(s);
      out.data.features.row(row) =
          pool.row(p) + gap * (pool.row(q) - pool.row(p));
      out.data.labels(row) = minority;
    }
  }
  report.synthetic_created = synthetic;
  report.counts_after_smote = out.data.class_counts();
  report.counts_after = report.counts_after_smote;
  std::ostringstream step;
  step << "smote(k=" << config.smote_k << ", target_ratio="
       << config.target_ratio << ", seed=" << config.seed
       << ", synthetic=" << synthetic << ")";
  out.data.transform_log.push_back(step.str());
  return out;
}

std::vector<std::pair<Index, Index>> find_tomek_links(const Matrix& features,
                                                      const LabelVector& labels) {
  std::vector<std::pair<Index, Index>> links;
  if (features.rows() < 2) return links;
  const RowMatrix points = features;
  const auto nn = all_knn(points, 1);
  for (Index a = 0; a < features.rows(); ++a) {
    const Index b = nn[static_cast<std::size_t>(a)].front().index;
    if (b <= a || labels(a) == labels(b)) continue;
    if (nn[static_cast<std::size_t>(b)].front().index == a) links.emplace_back(a, b);
  }
  return links;
}

Resampled tomek(const Dataset& data, std::optional<int> majority_label) {
  if (data.has_missing()) throw DataError("tomek requires imputed data");
  Resampled out;
  auto& report = out.report;
  report.counts_before = data.class_counts();
  report.counts_after_smote = report.counts_before;
  const int majority =
      majority_label.value_or(report.counts_before[1] > report.counts_before[0] ? 1 : 0);
  report.minority_label = 1 - majority;

  std::vector<std::pair<Index, Index>> links;
  if (report.counts_before[0] > 0 && report.counts_before[1] > 0) {
    links = find_tomek_links(data.features, data.labels);
  }
  std::vector<bool> drop(static_cast<std::size_t>(data.rows()), false);
  for (const auto& [a, b] : links) {
    const Index victim = data.labels(a) == majority ? a : b;
    drop[static_cast<std::size_t>(victim)] = true;
  }
  std::vector<Index> keep;
  keep.reserve(drop.size());
  for (Index i = 0; i < data.rows(); ++i) {
    if (!drop[static_cast<std::size_t>(i)]) keep.push_back(i);
  }
  report.tomek_pairs_found = links.size();
  report.majority_removed = static_cast<std::size_t>(data.rows()) - keep.size();
  out.data = keep.size() == drop.size() ? data : data.select_rows(keep);
  report.counts_after = out.data.class_counts();
  out.data.transform_log.push_back(
      "tomek(links=" + std::to_string(links.size()) +
      ", removed=" + std::to_string(report.majority_removed) + ")");
  return out;
}

Resampled balance(const Dataset& data, const ResampleConfig& config) {
  Resampled over = smote(data, config);
  const int majority = 1 - over.report.minority_label;
  Resampled cleaned = tomek(over.data, majority);
  Resampled out;
  out.data = std::move(cleaned.data);
  out.report = over.report;
  out.report.tomek_pairs_found = cleaned.report.tomek_pairs_found;
  out.report.majority_removed = cleaned.report.majority_removed;
  out.report.counts_after = cleaned.report.counts_after;
  return out;
}

nlohmann::json to_json(const ResampleReport& report) {
  auto counts = [](const std::array<std::size_t, 2>& c) {
    return nlohmann::json{{"0", c[0]}, {"1", c[1]}};
  };
  return {{"counts_before", counts(report.counts_before)},
          {"counts_after_smote", counts(report.counts_after_smote)},
          {"counts_after", counts(report.counts_after)},
          {"minority_label", report.minority_label},
          {"synthetic_created", report.synthetic_created},
          {"tomek_pairs_found", report.tomek_pairs_found},
          {"majority_removed", report.majority_removed}};
}

}  // namespace riskstack
