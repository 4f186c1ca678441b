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

#include "riskstack/ensemble.hpp"

#include "riskstack/tuning.hpp"

namespace riskstack {

void StackSpec::validate() const {
  if (bases.empty()) throw TrainingError("stack needs at least one base learner");
  if (n_folds < 2) throw TrainingError("stack n_folds must be >= 2");
}

StackSpec default_stack_spec(std::uint64_t seed) {
  StackSpec spec;
  spec.bases = {LearnerSpec{Family::gbdt, {}, "xgb", seed},
                LearnerSpec{Family::knn, {}, "", seed}};
  spec.meta = LearnerSpec{Family::gbdt, {}, "lgbm", seed};
  spec.seed = seed;
  return spec;
}

namespace {

std::vector<std::string> meta_names(const StackSpec& spec,
                                    const std::vector<std::string>& features) {
  std::vector<std::string> names;
  for (std::size_t b = 0; b < spec.bases.size(); ++b) {
    names.push_back("base" + std::to_string(b) + ":" + spec.bases[b].name());
  }
  if (spec.passthrough) names.insert(names.end(), features.begin(), features.end());
  return names;
}

}  // namespace

Matrix oof_matrix(std::span<const LearnerSpec> bases, const Dataset& train, int n_folds,
                  std::uint64_t seed, const FoldObserver& observer) {
  const Folds folds = kfold_indices(train.rows(), n_folds, train.labels, true, seed);
  std::vector<std::vector<Index>> fit_rows;
  std::vector<Dataset> fit_sets;
  for (std::size_t k = 0; k < folds.size(); ++k) {
    fit_rows.push_back(training_rows(folds, k, train.rows()));
    Dataset part = train.select_rows(fit_rows.back());
    const auto counts = part.class_counts();
    if (counts[0] == 0 || counts[1] == 0) {
      throw TrainingError("stacking fold " + std::to_string(k) + " has a single class");
    }
    fit_sets.push_back(std::move(part));
  }

  Matrix oof(train.rows(), static_cast<Index>(bases.size()));
  const auto n_cells = static_cast<Index>(bases.size() * folds.size());
  const auto n_k = static_cast<Index>(folds.size());
  parallel_for(n_cells, [&](Index cell) {
    const auto b = static_cast<std::size_t>(cell / n_k);
    const auto k = static_cast<std::size_t>(cell % n_k);
    const TrainedModel model = fit(bases[b], fit_sets[k]);
    Matrix held(static_cast<Index>(folds[k].size()), train.cols());
    for (std::size_t r = 0; r < folds[k].size(); ++r) {
      held.row(static_cast<Index>(r)) = train.features.row(folds[k][r]);
    }
    const Vector prob = predict_proba(model, held);
    // Each cell writes a disjoint set of entries.
    for (std::size_t r = 0; r < folds[k].size(); ++r) {
      oof(folds[k][r], static_cast<Index>(b)) = prob(static_cast<Index>(r));
    }
  });
  if (observer) {
    for (std::size_t b = 0; b < bases.size(); ++b) {
      for (std::size_t k = 0; k < folds.size(); ++k) observer(b, k, fit_rows[k], folds[k]);
    }
  }
  return oof;
}

StackModel fit_stack(const StackSpec& spec, const Dataset& train, const FoldObserver& observer) {
  spec.validate();
  StackModel model;
  model.spec = spec;
  model.features = train.feature_names();

  Matrix level1 = oof_matrix(spec.bases, train, spec.n_folds, spec.seed, observer);
  if (spec.passthrough) {
    Matrix joined(train.rows(), level1.cols() + train.cols());
    joined << level1, train.features;
    level1 = std::move(joined);
  }
  const Dataset meta_train = make_dataset(level1, train.labels, meta_names(spec, model.features));
  model.meta = fit(spec.meta, meta_train);

  model.bases.resize(spec.bases.size());
  parallel_for(static_cast<Index>(spec.bases.size()), [&](Index b) {
    model.bases[static_cast<std::size_t>(b)] = fit(spec.bases[static_cast<std::size_t>(b)], train);
  });
  return model;
}

Matrix meta_features(const StackModel& model, const Matrix& rows) {
  if (rows.cols() != model.width()) {
    throw DataError("stack expects " + std::to_string(model.width()) + " features, got " +
                    std::to_string(rows.cols()));
  }
  const auto n_bases = static_cast<Index>(model.bases.size());
  Matrix level1(rows.rows(), n_bases + (model.spec.passthrough ? rows.cols() : 0));
  for (Index b = 0; b < n_bases; ++b) {
    level1.col(b) = predict_proba(model.bases[static_cast<std::size_t>(b)], rows);
  }
  if (model.spec.passthrough) level1.rightCols(rows.cols()) = rows;
  return level1;
}

Vector predict_stack(const StackModel& model, const Matrix& rows) {
  return predict_proba(model.meta, meta_features(model, rows));
}

}  // namespace riskstack
