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
#include <functional>
#include <span>
#include <vector>

#include "riskstack/learners.hpp"

namespace riskstack {

struct StackSpec {
  std::vector<LearnerSpec> bases;
  LearnerSpec meta;
  int n_folds = 5;
  bool passthrough = false;
  std::uint64_t seed = 0;  // fold assignment

  void validate() const;
};

/// bases gbdt:xgb and knn, meta gbdt:lgbm.
StackSpec default_stack_spec(std::uint64_t seed = 0);

struct StackModel {
  StackSpec spec;
  std::vector<TrainedModel> bases;  // refitted on the full training set
  TrainedModel meta;
  std::vector<std::string> features;

  Index width() const { return static_cast<Index>(features.size()); }
};

/// Called once per (base, fold) fit with the rows it trained on and the rows
/// it then predicted.
using FoldObserver = std::function<void(std::size_t base, std::size_t fold,
                                        std::span<const Index> trained_on,
                                        std::span<const Index> predicted)>;

/// n x bases matrix of out-of-fold probabilities over stratified folds.
Matrix oof_matrix(std::span<const LearnerSpec> bases, const Dataset& train, int n_folds,
                  std::uint64_t seed, const FoldObserver& observer = {});

StackModel fit_stack(const StackSpec& spec, const Dataset& train,
                     const FoldObserver& observer = {});

/// Inputs the meta model sees for these rows.
Matrix meta_features(const StackModel& model, const Matrix& rows);

Vector predict_stack(const StackModel& model, const Matrix& rows);

}  // namespace riskstack
