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

#include <array>
#include <optional>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "riskstack/dataset.hpp"

namespace riskstack {

struct ResampleConfig {
  int smote_k = 5;
  // Minority / majority count ratio reached by oversampling.
  double target_ratio = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct ResampleReport {
  std::array<std::size_t, 2> counts_before{};
  std::array<std::size_t, 2> counts_after_smote{};
  std::array<std::size_t, 2> counts_after{};
  int minority_label = 1;
  std::size_t synthetic_created = 0;
  std::size_t tomek_pairs_found = 0;
  std::size_t majority_removed = 0;
};

struct Resampled {
  Dataset data;
  ResampleReport report;
};

/// Oversamples the minority class: each synthetic row is p + u * (q - p) for
/// a uniformly drawn minority row p, one of its smote_k nearest minority
/// neighbors q, and u ~ U[0, 1). Originals come first and are untouched.
Resampled smote(const Dataset& data, const ResampleConfig& config);

/// Index pairs (a < b) with opposite labels that are each other's nearest
/// neighbor over the whole table (ties to the lower row index).
std::vector<std::pair<Index, Index>> find_tomek_links(const Matrix& features,
                                                      const LabelVector& labels);

/// One pass of Tomek-link cleaning: removes the majority-class member of
/// every link. `majority_label` defaults to the larger class (0 on a tie).
Resampled tomek(const Dataset& data,
                std::optional<int> majority_label = std::nullopt);

/// smote() followed by tomek() with the pre-SMOTE majority class.
Resampled balance(const Dataset& data, const ResampleConfig& config);

nlohmann::json to_json(const ResampleReport& report);

}  // namespace riskstack
