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

#include "riskstack/learners.hpp"

#include <algorithm>

#include "riskstack/linear.hpp"

namespace riskstack {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

int as_int(const Hyperparams& p, const std::string& name) {
  return static_cast<int>(std::llround(p.at(name)));
}

void require_both_classes(const Dataset& train, Family family) {
  const auto counts = train.class_counts();
  if (counts[0] == 0 || counts[1] == 0) {
    throw TrainingError(to_string(family) + " needs both classes in the training data");
  }
}

TrainedModel fit_naive_bayes(const Dataset& train, const Hyperparams& params) {
  const double floor = params.at("var_floor");
  const Index p = train.cols();
  NaiveBayesPayload nb;
  nb.mean = Matrix::Zero(2, p);
  nb.variance = Matrix::Zero(2, p);
  const auto counts = train.class_counts();
  const double n = static_cast<double>(train.rows());
  for (int c = 0; c < 2; ++c) {
    nb.log_prior[static_cast<std::size_t>(c)] = std::log(static_cast<double>(counts[static_cast<std::size_t>(c)]) / n);
  }
  for (Index i = 0; i < train.rows(); ++i) {
    nb.mean.row(train.labels(i)) += train.features.row(i);
  }
  for (int c = 0; c < 2; ++c) nb.mean.row(c) /= static_cast<double>(counts[static_cast<std::size_t>(c)]);
  for (Index i = 0; i < train.rows(); ++i) {
    const int c = train.labels(i);
    nb.variance.row(c) += (train.features.row(i) - nb.mean.row(c)).array().square().matrix();
  }
  for (int c = 0; c < 2; ++c) {
    nb.variance.row(c) /= static_cast<double>(counts[static_cast<std::size_t>(c)]);
  }
  nb.variance = nb.variance.cwiseMax(floor);
  TrainedModel m;
  m.payload = std::move(nb);
  return m;
}

Vector predict_naive_bayes(const NaiveBayesPayload& nb, const Matrix& x) {
  Vector out(x.rows());
  std::array<double, 2> norm{};
  for (int c = 0; c < 2; ++c) {
    norm[static_cast<std::size_t>(c)] =
        nb.log_prior[static_cast<std::size_t>(c)] -
        0.5 * (2.0 * M_PI * nb.variance.row(c).array()).log().sum();
  }
  for (Index i = 0; i < x.rows(); ++i) {
    std::array<double, 2> joint{};
    for (int c = 0; c < 2; ++c) {
      joint[static_cast<std::size_t>(c)] =
          norm[static_cast<std::size_t>(c)] -
          0.5 * ((x.row(i) - nb.mean.row(c)).array().square() / nb.variance.row(c).array()).sum();
    }
    out(i) = sigmoid(joint[1] - joint[0]);
  }
  return out;
}

Vector predict_knn(const KnnPayload& knn, const Matrix& x) {
  Vector out(x.rows());
  const RowMatrix queries = x;
  const int k = static_cast<int>(std::min<Index>(knn.k, knn.index->size()));
  parallel_for(x.rows(), [&](Index i) {
    const auto nn = knn.index->query(queries.row(i).data(), k);
    double positives = 0;
    for (const auto& nb : nn) positives += knn.labels(nb.index);
    out(i) = nn.empty() ? 0.0 : positives / static_cast<double>(nn.size());
  });
  return out;
}

}  // namespace

std::string to_string(Family family) {
  switch (family) {
    case Family::logreg:
      return "logreg";
    case Family::linear_svc:
      return "linear_svc";
    case Family::gaussian_nb:
      return "gaussian_nb";
    case Family::knn:
      return "knn";
    case Family::tree:
      return "tree";
    case Family::random_forest:
      return "random_forest";
    case Family::gbdt:
      return "gbdt";
  }
  return "unknown";
}

Family family_from_string(const std::string& text) {
  for (Family f : all_families()) {
    if (to_string(f) == text) return f;
  }
  if (text == "svc") return Family::linear_svc;
  if (text == "nb") return Family::gaussian_nb;
  if (text == "rf" || text == "forest") return Family::random_forest;
  throw TrainingError("unknown learner family '" + text + "'");
}

std::vector<Family> all_families() {
  return {Family::logreg, Family::linear_svc, Family::gaussian_nb, Family::knn,
          Family::tree,   Family::random_forest, Family::gbdt};
}

std::string LearnerSpec::name() const {
  if (family == Family::gbdt) return "gbdt:" + (preset.empty() ? std::string("xgb") : preset);
  return to_string(family);
}

std::vector<ParamInfo> parameter_list(Family family, const std::string& preset) {
  switch (family) {
    case Family::logreg:
      return {{"l2", 1.0, "L2 penalty on weights (inverse of C)"},
              {"max_iter", 100, "Newton iteration cap"},
              {"tol", 1e-8, "gradient norm stopping tolerance"}};
    case Family::linear_svc:
      return {{"lambda", 1e-4, "L2 regularization strength"},
              {"epochs", 10, "passes over the training rows"}};
    case Family::gaussian_nb:
      return {{"var_floor", 1e-9, "minimum per-feature variance"}};
    case Family::knn:
      return {{"k", 5, "neighbors voting on each prediction"}};
    case Family::tree:
      return {{"max_depth", 0, "depth cap, 0 = unlimited"},
              {"min_samples_split", 2, "rows needed to split a node"},
              {"min_samples_leaf", 1, "rows needed in each child"},
              {"max_bins", 256, "histogram bins per feature"}};
    case Family::random_forest:
      return {{"n_trees", 100, "number of bagged trees"},
              {"max_depth", 0, "depth cap, 0 = unlimited"},
              {"min_samples_split", 2, "rows needed to split a node"},
              {"min_samples_leaf", 1, "rows needed in each child"},
              {"max_features", 0, "features tried per split, 0 = sqrt(p)"},
              {"bootstrap", 1, "1 = bootstrap rows per tree"},
              {"max_bins", 256, "histogram bins per feature"}};
    case Family::gbdt: {
      const GbdtParams g = gbdt_preset(preset);
      return {{"n_trees", static_cast<double>(g.n_trees), "boosting rounds"},
              {"max_depth", static_cast<double>(g.max_depth), "tree depth"},
              {"learning_rate", g.learning_rate, "shrinkage per tree"},
              {"min_child_weight", g.min_child_weight, "minimum hessian per child"},
              {"l2_reg", g.l2_reg, "L2 penalty on leaf values"},
              {"max_bins", static_cast<double>(g.max_bins), "histogram bins per feature"},
              {"subsample", g.subsample, "row fraction per tree"},
              {"min_samples_leaf", static_cast<double>(g.min_samples_leaf),
               "rows needed in each child"}};
    }
  }
  return {};
}

Hyperparams resolve_params(const LearnerSpec& spec) {
  if (!spec.preset.empty() && spec.family != Family::gbdt) {
    throw TrainingError("presets apply to gbdt only (got preset '" + spec.preset +
                        "' for " + to_string(spec.family) + ")");
  }
  Hyperparams out;
  for (const auto& info : parameter_list(spec.family, spec.preset)) {
    out[info.name] = info.default_value;
  }
  for (const auto& [name, value] : spec.params) {
    if (!out.contains(name)) {
      throw TrainingError("unknown hyperparameter '" + name + "' for " +
                          to_string(spec.family));
    }
    if (!std::isfinite(value)) {
      throw TrainingError("hyperparameter '" + name + "' must be finite");
    }
    out[name] = value;
  }
  return out;
}

TrainedModel fit(const LearnerSpec& spec, const Dataset& train) {
  train.validate();
  const Hyperparams params = resolve_params(spec);
  if (train.rows() == 0) throw TrainingError("training data is empty");
  if (!train.features.allFinite()) {
    throw TrainingError("training features contain non-finite values");
  }
  if (spec.family != Family::knn) require_both_classes(train, spec.family);

  TrainedModel model;
  switch (spec.family) {
    case Family::logreg: {
      const LogisticFit f = fit_logistic(train.features, train.labels, params.at("l2"),
                                         as_int(params, "max_iter"), params.at("tol"));
      model.payload = LinearPayload{f.weights, f.intercept, 1.0, 0.0};
      break;
    }
    case Family::linear_svc: {
      const LinearSvcFit f = fit_linear_svc(train.features, train.labels,
                                            params.at("lambda"), as_int(params, "epochs"),
                                            spec.seed);
      model.payload = LinearPayload{f.weights, f.intercept, f.platt_scale, f.platt_offset};
      break;
    }
    case Family::gaussian_nb:
      model = fit_naive_bayes(train, params);
      break;
    case Family::knn: {
      const int k = as_int(params, "k");
      if (k < 1) throw TrainingError("knn k must be >= 1");
      model.payload = KnnPayload{std::make_shared<const KdTree>(RowMatrix(train.features)),
                                 train.labels, k};
      break;
    }
    case Family::tree:
    case Family::random_forest: {
      ForestParams fp;
      fp.max_depth = as_int(params, "max_depth");
      fp.min_samples_split = as_int(params, "min_samples_split");
      fp.min_samples_leaf = as_int(params, "min_samples_leaf");
      fp.max_bins = as_int(params, "max_bins");
      if (spec.family == Family::tree) {
        fp.n_trees = 1;
        fp.bootstrap = false;
        fp.max_features = static_cast<int>(train.cols());
      } else {
        fp.n_trees = as_int(params, "n_trees");
        fp.bootstrap = as_int(params, "bootstrap") != 0;
        fp.max_features = as_int(params, "max_features");
      }
      model.payload = fit_forest(train.features, train.labels, fp, spec.seed);
      break;
    }
    case Family::gbdt: {
      GbdtParams gp;
      gp.n_trees = as_int(params, "n_trees");
      gp.max_depth = as_int(params, "max_depth");
      gp.learning_rate = params.at("learning_rate");
      gp.min_child_weight = params.at("min_child_weight");
      gp.l2_reg = params.at("l2_reg");
      gp.max_bins = as_int(params, "max_bins");
      gp.subsample = params.at("subsample");
      gp.min_samples_leaf = as_int(params, "min_samples_leaf");
      model.payload = fit_gbdt(train.features, train.labels, gp, spec.seed);
      break;
    }
  }
  model.family = spec.family;
  model.preset = spec.family == Family::gbdt && spec.preset.empty() ? "xgb" : spec.preset;
  model.params = params;
  model.seed = spec.seed;
  model.features = train.feature_names();
  model.training_rows = static_cast<std::size_t>(train.rows());
  return model;
}

Vector predict_proba(const TrainedModel& model, const Matrix& rows) {
  if (rows.cols() != model.width()) {
    throw DataError("model expects " + std::to_string(model.width()) +
                    " features per row, got " + std::to_string(rows.cols()));
  }
  return std::visit(
      Overloaded{
          [&](const LinearPayload& lin) -> Vector {
            const Vector margin = (rows * lin.weights).array() + lin.intercept;
            return (lin.link_scale * margin.array() + lin.link_offset)
                .unaryExpr([](double z) { return sigmoid(z); });
          },
          [&](const NaiveBayesPayload& nb) -> Vector { return predict_naive_bayes(nb, rows); },
          [&](const KnnPayload& knn) -> Vector { return predict_knn(knn, rows); },
          [&](const TreeEnsemble& ens) -> Vector { return ens.predict_proba(rows); }},
      model.payload);
}

LabelVector predict(const TrainedModel& model, const Matrix& rows, double threshold) {
  return (predict_proba(model, rows).array() >= threshold).cast<int>();
}

std::map<std::string, double> feature_importance(const TrainedModel& model) {
  Vector scores;
  std::visit(Overloaded{[&](const LinearPayload& lin) { scores = lin.weights.cwiseAbs(); },
                        [&](const NaiveBayesPayload&) {
                          throw TrainingError(
                              "gaussian_nb has no native importance; use permutation importance");
                        },
                        [&](const KnnPayload&) {
                          throw TrainingError(
                              "knn has no native importance; use permutation importance");
                        },
                        [&](const TreeEnsemble& ens) {
                          scores = tree_gain_importance(ens, model.width());
                        }},
             model.payload);
  std::map<std::string, double> out;
  for (std::size_t j = 0; j < model.features.size(); ++j) {
    out[model.features[j]] = scores(static_cast<Index>(j));
  }
  return out;
}

}  // namespace riskstack
