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
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "riskstack/learners.hpp"
#include "riskstack/metrics.hpp"

namespace riskstack {

using Folds = std::vector<std::vector<Index>>;

/// k disjoint folds covering 0..n-1, each sorted ascending. Fold sizes differ
/// by at most one; with `stratify` so do the per-class counts.
Folds kfold_indices(Index n, int k, const LabelVector& labels, bool stratify,
                    std::uint64_t seed);

/// Complement of folds[k] within 0..n-1, sorted.
std::vector<Index> training_rows(const Folds& folds, std::size_t k, Index n);

struct ParamDomain {
  enum class Kind { discrete, int_range, log_uniform };

  Kind kind = Kind::discrete;
  std::vector<double> values;  // discrete only
  double low = 0.0;
  double high = 0.0;

  static ParamDomain discrete(std::vector<double> values);
  static ParamDomain int_range(long low, long high);
  static ParamDomain log_uniform(double low, double high);

  bool finite() const { return kind != Kind::log_uniform; }
  std::size_t size() const;  // finite domains only
  double at(std::size_t i) const;
  double sample(Rng& rng) const;
  /// The value with its immediate neighbours: adjacent list entries,
  /// v -/+ 1 for integers, v / 2 and v * 2 for log-uniform, clipped.
  std::vector<double> neighbourhood(double v) const;
  void validate(const std::string& name) const;
};

using SearchSpace = std::map<std::string, ParamDomain>;
using ParamGrid = std::map<std::string, std::vector<double>>;

struct CvConfig {
  int folds = 5;
  Metric metric = Metric::roc_auc;
  bool stratify = true;
  std::uint64_t seed = 0;
};

struct CvResult {
  Hyperparams params;
  std::vector<double> fold_scores;
  double mean = 0.0;
  double std = 0.0;  // population
};

struct SearchResult {
  Hyperparams best_params;
  std::size_t best_index = 0;
  std::vector<CvResult> results;  // evaluation order

  const CvResult& best() const { return results.at(best_index); }
};

/// Scores every candidate on the same folds. Candidate params override
/// `base.params`.
std::vector<CvResult> evaluate_candidates(const LearnerSpec& base,
                                          const std::vector<Hyperparams>& candidates,
                                          const Dataset& train, const CvConfig& cv);

SearchResult random_search(const LearnerSpec& base, const SearchSpace& space, int budget,
                           const Dataset& train, const CvConfig& cv, std::uint64_t seed);

/// Full Cartesian product, first parameter name outermost, values in list order.
SearchResult grid_search(const LearnerSpec& base, const ParamGrid& grid,
                         const Dataset& train, const CvConfig& cv);

std::vector<Hyperparams> grid_points(const ParamGrid& grid);

ParamGrid refinement_grid(const SearchSpace& space, const Hyperparams& center);

struct TuneResult {
  SearchResult random;
  SearchResult refine;
  Hyperparams best_params;
  double best_mean = 0.0;
};

/// Random search (default budget 25) then the refinement grid around its winner.
TuneResult tune(const LearnerSpec& base, const SearchSpace& space, int budget,
                const Dataset& train, const CvConfig& cv, std::uint64_t seed);

SearchSpace default_search_space(Family family);

nlohmann::json to_json(const CvResult& result);
nlohmann::json to_json(const SearchResult& result);
nlohmann::json to_json(const TuneResult& result);

}  // namespace riskstack
