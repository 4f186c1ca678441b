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

#include "riskstack/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <nlohmann/json.hpp>

namespace riskstack {

Folds kfold_indices(Index n, int k, const LabelVector& labels, bool stratify,
                    std::uint64_t seed) {
  if (k < 2) throw DataError("k-fold needs k >= 2");
  if (static_cast<Index>(k) > n) {
    throw DataError("k-fold with k=" + std::to_string(k) + " exceeds n=" + std::to_string(n));
  }
  if (stratify && labels.size() != n) throw DataError("fold labels must have n entries");

  std::vector<std::vector<Index>> groups;
  if (stratify) {
    groups.resize(2);
    for (Index i = 0; i < n; ++i) groups[labels(i) == 1 ? 1 : 0].push_back(i);
  } else {
    groups.push_back(iota_indices(n));
  }

  Folds folds(static_cast<std::size_t>(k));
  std::size_t dealt = 0;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    Rng rng(derive_seed(seed, g));
    rng.shuffle(groups[g]);
    // Continue the round-robin across groups so overall sizes stay balanced.
    for (Index i : groups[g]) folds[dealt++ % folds.size()].push_back(i);
  }
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

std::vector<Index> training_rows(const Folds& folds, std::size_t k, Index n) {
  std::vector<char> held(static_cast<std::size_t>(n), 0);
  for (Index i : folds.at(k)) held[static_cast<std::size_t>(i)] = 1;
  std::vector<Index> out;
  out.reserve(static_cast<std::size_t>(n) - folds[k].size());
  for (Index i = 0; i < n; ++i) {
    if (!held[static_cast<std::size_t>(i)]) out.push_back(i);
  }
  return out;
}

ParamDomain ParamDomain::discrete(std::vector<double> values) {
  ParamDomain d;
  d.kind = Kind::discrete;
  d.values = std::move(values);
  return d;
}

ParamDomain ParamDomain::int_range(long low, long high) {
  ParamDomain d;
  d.kind = Kind::int_range;
  d.low = static_cast<double>(low);
  d.high = static_cast<double>(high);
  return d;
}

ParamDomain ParamDomain::log_uniform(double low, double high) {
  ParamDomain d;
  d.kind = Kind::log_uniform;
  d.low = low;
  d.high = high;
  return d;
}

std::size_t ParamDomain::size() const {
  switch (kind) {
    case Kind::discrete:
      return values.size();
    case Kind::int_range:
      return static_cast<std::size_t>(high - low) + 1;
    case Kind::log_uniform:
      break;
  }
  throw DataError("log-uniform domain has no finite size");
}

double ParamDomain::at(std::size_t i) const {
  if (kind == Kind::discrete) return values.at(i);
  if (kind == Kind::int_range) return low + static_cast<double>(i);
  throw DataError("log-uniform domain cannot be enumerated");
}

double ParamDomain::sample(Rng& rng) const {
  if (kind == Kind::log_uniform) {
    return std::exp(std::log(low) + rng.uniform() * (std::log(high) - std::log(low)));
  }
  return at(static_cast<std::size_t>(rng.below(size())));
}

std::vector<double> ParamDomain::neighbourhood(double v) const {
  std::vector<double> out;
  switch (kind) {
    case Kind::discrete: {
      const auto it = std::find(values.begin(), values.end(), v);
      if (it == values.end()) return {v};
      if (it != values.begin()) out.push_back(*(it - 1));
      out.push_back(v);
      if (it + 1 != values.end()) out.push_back(*(it + 1));
      break;
    }
    case Kind::int_range:
      if (v - 1 >= low) out.push_back(v - 1);
      out.push_back(v);
      if (v + 1 <= high) out.push_back(v + 1);
      break;
    case Kind::log_uniform:
      if (v / 2 >= low) out.push_back(v / 2);
      out.push_back(v);
      if (v * 2 <= high) out.push_back(v * 2);
      break;
  }
  return out;
}

void ParamDomain::validate(const std::string& name) const {
  switch (kind) {
    case Kind::discrete:
      if (values.empty()) throw DataError("search domain '" + name + "' is empty");
      break;
    case Kind::int_range:
      if (!(low <= high)) throw DataError("search range '" + name + "' is not ordered");
      break;
    case Kind::log_uniform:
      if (!(low > 0) || !(low <= high)) {
        throw DataError("log-uniform range '" + name + "' needs 0 < low <= high");
      }
      break;
  }
}

namespace {

double fold_score(const LearnerSpec& spec, const Dataset& train, const Dataset& test,
                  Metric metric) {
  const TrainedModel model = fit(spec, train);
  return score_metric(metric, test.labels, predict_proba(model, test.features));
}

std::size_t first_argmax(const std::vector<CvResult>& results) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < results.size(); ++i) {
    if (results[i].mean > results[best].mean) best = i;
  }
  return best;
}

SearchResult assemble(std::vector<CvResult> results) {
  SearchResult out;
  out.results = std::move(results);
  out.best_index = first_argmax(out.results);
  out.best_params = out.results[out.best_index].params;
  return out;
}

}  // namespace

std::vector<CvResult> evaluate_candidates(const LearnerSpec& base,
                                          const std::vector<Hyperparams>& candidates,
                                          const Dataset& train, const CvConfig& cv) {
  const Folds folds = kfold_indices(train.rows(), cv.folds, train.labels, cv.stratify, cv.seed);
  std::vector<Dataset> fold_train;
  std::vector<Dataset> fold_test;
  for (std::size_t k = 0; k < folds.size(); ++k) {
    fold_train.push_back(train.select_rows(training_rows(folds, k, train.rows())));
    fold_test.push_back(train.select_rows(folds[k]));
  }

  const auto n_folds = static_cast<Index>(folds.size());
  std::vector<double> scores(candidates.size() * folds.size());
  parallel_for(static_cast<Index>(scores.size()), [&](Index cell) {
    const auto c = static_cast<std::size_t>(cell / n_folds);
    const auto k = static_cast<std::size_t>(cell % n_folds);
    LearnerSpec spec = base;
    for (const auto& [name, value] : candidates[c]) spec.params[name] = value;
    scores[static_cast<std::size_t>(cell)] = fold_score(spec, fold_train[k], fold_test[k], cv.metric);
  });

  std::vector<CvResult> results(candidates.size());
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    auto& r = results[c];
    r.params = candidates[c];
    r.fold_scores.assign(scores.begin() + static_cast<std::ptrdiff_t>(c * folds.size()),
                         scores.begin() + static_cast<std::ptrdiff_t>((c + 1) * folds.size()));
    double sum = 0.0;
    for (double s : r.fold_scores) sum += s;
    r.mean = sum / static_cast<double>(r.fold_scores.size());
    double ss = 0.0;
    for (double s : r.fold_scores) ss += (s - r.mean) * (s - r.mean);
    r.std = std::sqrt(ss / static_cast<double>(r.fold_scores.size()));
  }
  return results;
}

SearchResult random_search(const LearnerSpec& base, const SearchSpace& space, int budget,
                           const Dataset& train, const CvConfig& cv, std::uint64_t seed) {
  if (space.empty()) throw DataError("search space is empty");
  if (budget < 1) throw DataError("search budget must be >= 1");
  for (const auto& [name, domain] : space) domain.validate(name);

  Rng rng(seed);
  std::vector<Hyperparams> candidates;
  bool finite = true;
  double total = 1.0;
  for (const auto& [name, domain] : space) {
    if (!domain.finite()) {
      finite = false;
      break;
    }
    total *= static_cast<double>(domain.size());
  }

  if (finite && total <= 1e6) {
    // Enumerate mixed-radix codes, then draw without replacement.
    const auto count = static_cast<std::size_t>(total);
    std::vector<std::size_t> codes(count);
    for (std::size_t i = 0; i < count; ++i) codes[i] = i;
    const std::size_t take = std::min(count, static_cast<std::size_t>(budget));
    for (std::size_t i = 0; i < take; ++i) {
      std::swap(codes[i], codes[i + rng.below(count - i)]);
      std::size_t code = codes[i];
      Hyperparams params;
      for (auto it = space.rbegin(); it != space.rend(); ++it) {
        const std::size_t radix = it->second.size();
        params[it->first] = it->second.at(code % radix);
        code /= radix;
      }
      candidates.push_back(std::move(params));
    }
  } else {
    std::set<Hyperparams> seen;
    const int max_draws = budget * 100;
    for (int draw = 0; draw < max_draws && static_cast<int>(candidates.size()) < budget; ++draw) {
      Hyperparams params;
      for (const auto& [name, domain] : space) params[name] = domain.sample(rng);
      if (seen.insert(params).second) candidates.push_back(std::move(params));
    }
  }
  return assemble(evaluate_candidates(base, candidates, train, cv));
}

std::vector<Hyperparams> grid_points(const ParamGrid& grid) {
  std::vector<Hyperparams> points{Hyperparams{}};
  for (const auto& [name, values] : grid) {
    if (values.empty()) throw DataError("grid entry '" + name + "' is empty");
    std::vector<Hyperparams> next;
    next.reserve(points.size() * values.size());
    for (const auto& p : points) {
      for (double v : values) {
        Hyperparams q = p;
        q[name] = v;
        next.push_back(std::move(q));
      }
    }
    points = std::move(next);
  }
  return points;
}

SearchResult grid_search(const LearnerSpec& base, const ParamGrid& grid, const Dataset& train,
                         const CvConfig& cv) {
  if (grid.empty()) throw DataError("grid is empty");
  return assemble(evaluate_candidates(base, grid_points(grid), train, cv));
}

ParamGrid refinement_grid(const SearchSpace& space, const Hyperparams& center) {
  ParamGrid grid;
  for (const auto& [name, value] : center) {
    const auto it = space.find(name);
    grid[name] = it == space.end() ? std::vector<double>{value} : it->second.neighbourhood(value);
  }
  return grid;
}

TuneResult tune(const LearnerSpec& base, const SearchSpace& space, int budget,
                const Dataset& train, const CvConfig& cv, std::uint64_t seed) {
  TuneResult out;
  out.random = random_search(base, space, budget, train, cv, seed);
  out.refine = grid_search(base, refinement_grid(space, out.random.best_params), train, cv);
  out.best_params = out.refine.best_params;
  out.best_mean = out.refine.best().mean;
  return out;
}

SearchSpace default_search_space(Family family) {
  using D = ParamDomain;
  switch (family) {
    case Family::logreg:
      return {{"l2", D::log_uniform(1e-3, 1e2)}};
    case Family::linear_svc:
      return {{"lambda", D::log_uniform(1e-6, 1e-2)}, {"epochs", D::discrete({5, 10, 20})}};
    case Family::gaussian_nb:
      return {{"var_floor", D::log_uniform(1e-12, 1e-3)}};
    case Family::knn:
      return {{"k", D::int_range(1, 31)}};
    case Family::tree:
      return {{"max_depth", D::int_range(2, 24)}, {"min_samples_leaf", D::int_range(1, 50)}};
    case Family::random_forest:
      return {{"n_trees", D::discrete({50, 100, 200})},
              {"max_depth", D::discrete({0, 8, 16, 24})},
              {"min_samples_leaf", D::int_range(1, 10)}};
    case Family::gbdt:
      return {{"n_trees", D::discrete({50, 100, 200, 400})},
              {"max_depth", D::int_range(2, 10)},
              {"learning_rate", D::log_uniform(0.01, 0.3)},
              {"min_child_weight", D::log_uniform(1e-3, 10.0)}};
  }
  throw DataError("no default search space");
}

nlohmann::json to_json(const CvResult& result) {
  return {{"params", result.params},
          {"fold_scores", result.fold_scores},
          {"mean", result.mean},
          {"std", result.std}};
}

nlohmann::json to_json(const SearchResult& result) {
  nlohmann::json candidates = nlohmann::json::array();
  for (const auto& r : result.results) candidates.push_back(to_json(r));
  return {{"best_index", result.best_index},
          {"best_params", result.best_params},
          {"candidates", candidates}};
}

nlohmann::json to_json(const TuneResult& result) {
  return {{"random_search", to_json(result.random)},
          {"refinement", to_json(result.refine)},
          {"best_params", result.best_params},
          {"best_mean", result.best_mean}};
}

}  // namespace riskstack
