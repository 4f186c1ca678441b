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
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "riskstack/dataset.hpp"
#include "riskstack/neighbors.hpp"
#include "riskstack/tree.hpp"

namespace riskstack {

enum class Family { logreg, linear_svc, gaussian_nb, knn, tree, random_forest, gbdt };

std::string to_string(Family family);
Family family_from_string(const std::string& text);
std::vector<Family> all_families();

using Hyperparams = std::map<std::string, double>;

struct LearnerSpec {
  Family family = Family::logreg;
  Hyperparams params;  // overrides on top of the family (or preset) defaults
  std::string preset;  // gbdt only: xgb, lgbm, cat, gb
  std::uint64_t seed = 0;

  /// Display name, e.g. "gbdt:xgb" or "knn".
  std::string name() const;
};

struct ParamInfo {
  std::string name;
  double default_value = 0.0;
  std::string description;
};

/// Every hyperparameter the family accepts, with defaults.
///
///   logreg        l2=1, max_iter=100, tol=1e-8
///   linear_svc    lambda=1e-4, epochs=10
///   gaussian_nb   var_floor=1e-9
///   knn           k=5
///   tree          max_depth=0 (unlimited), min_samples_split=2,
///                 min_samples_leaf=1, max_bins=256
///   random_forest n_trees=100, max_depth=0, min_samples_split=2,
///                 min_samples_leaf=1, max_features=0 (sqrt p),
///                 bootstrap=1, max_bins=256
///   gbdt          n_trees, max_depth, learning_rate, min_child_weight,
///                 l2_reg, max_bins, subsample, min_samples_leaf (defaults
///                 from the preset)
std::vector<ParamInfo> parameter_list(Family family, const std::string& preset = "");

/// Defaults merged with the spec's overrides. Throws TrainingError on an
/// unknown parameter name or preset.
Hyperparams resolve_params(const LearnerSpec& spec);

struct LinearPayload {
  Vector weights;
  double intercept = 0.0;
  // Logistic link on the margin; identity link (1, 0) for logreg.
  double link_scale = 1.0;
  double link_offset = 0.0;
};

struct NaiveBayesPayload {
  std::array<double, 2> log_prior{};
  Matrix mean;      // 2 x p
  Matrix variance;  // 2 x p, floored
};

struct KnnPayload {
  std::shared_ptr<const KdTree> index;  // owns the stored training rows
  LabelVector labels;
  int k = 5;
};

using ModelPayload =
    std::variant<LinearPayload, NaiveBayesPayload, KnnPayload, TreeEnsemble>;

struct TrainedModel {
  Family family = Family::logreg;
  std::string preset;
  Hyperparams params;  // resolved
  std::uint64_t seed = 0;
  std::vector<std::string> features;
  std::size_t training_rows = 0;
  ModelPayload payload;

  Index width() const { return static_cast<Index>(features.size()); }
};

/// Trains one learner. All families except knn need both classes present.
TrainedModel fit(const LearnerSpec& spec, const Dataset& train);

/// Class-1 probability per row. Throws DataError on a width mismatch.
Vector predict_proba(const TrainedModel& model, const Matrix& rows);

/// label = 1 iff probability >= threshold.
LabelVector predict(const TrainedModel& model, const Matrix& rows,
                    double threshold = 0.5);

/// |weight| for linear models, total split gain for tree models. Throws
/// TrainingError for knn and gaussian_nb (use permutation importance).
std::map<std::string, double> feature_importance(const TrainedModel& model);

}  // namespace riskstack
