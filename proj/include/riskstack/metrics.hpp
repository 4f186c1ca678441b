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
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "riskstack/dataset.hpp"

namespace riskstack {

struct ConfusionMatrix {
  std::size_t tn = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tp = 0;

  std::size_t total() const { return tn + fp + fn + tp; }
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

struct ScalarMetrics {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  // Set when the metric's denominator was zero and 0 was reported instead.
  bool precision_undefined = false;
  bool recall_undefined = false;
  bool f1_undefined = false;
};

struct CurvePoint {
  double x = 0.0;
  double y = 0.0;
  double threshold = 0.0;  // +inf for the curve's starting point
};

struct Curve {
  std::vector<CurvePoint> points;
  double area = 0.0;  // trapezoid ROC-AUC, or step-wise average precision
};

struct EvalReport {
  double threshold = 0.5;
  ConfusionMatrix confusion;
  ScalarMetrics scalars;
  double roc_auc = 0.0;
  double average_precision = 0.0;
  Curve roc;
  Curve pr;
};

enum class Metric { roc_auc, accuracy };

std::string to_string(Metric metric);
Metric metric_from_string(const std::string& text);

namespace detail {
ConfusionMatrix confusion(const LabelVector& labels, const LabelVector& predicted);
Curve roc(const LabelVector& labels, const Vector& scores);
Curve pr(const LabelVector& labels, const Vector& scores);
}  // namespace detail

template <typename L, typename P>
ConfusionMatrix confusion(const Eigen::DenseBase<L>& labels,
                          const Eigen::DenseBase<P>& predicted) {
  return detail::confusion(labels.derived().template cast<int>().eval(),
                           predicted.derived().template cast<int>().eval());
}

ScalarMetrics scalar_metrics(const ConfusionMatrix& cm);

/// ROC sweep over unique scores, descending; area by the trapezoid rule.
template <typename L, typename S>
Curve roc(const Eigen::DenseBase<L>& labels, const Eigen::DenseBase<S>& scores) {
  return detail::roc(labels.derived().template cast<int>().eval(),
                     scores.derived().template cast<double>().eval());
}

/// Precision-recall sweep; area is sum_k (R_k - R_{k-1}) * P_k.
template <typename L, typename S>
Curve pr(const Eigen::DenseBase<L>& labels, const Eigen::DenseBase<S>& scores) {
  return detail::pr(labels.derived().template cast<int>().eval(),
                    scores.derived().template cast<double>().eval());
}

template <typename L, typename S>
double roc_auc(const Eigen::DenseBase<L>& labels,
               const Eigen::DenseBase<S>& scores) {
  return roc(labels, scores).area;
}

template <typename L, typename S>
double average_precision(const Eigen::DenseBase<L>& labels,
                         const Eigen::DenseBase<S>& scores) {
  return pr(labels, scores).area;
}

/// label = 1 iff probability >= threshold.
LabelVector threshold_labels(const Vector& probabilities, double threshold = 0.5);

EvalReport evaluate(const LabelVector& labels, const Vector& probabilities,
                    double threshold = 0.5);

double score_metric(Metric metric, const LabelVector& labels,
                    const Vector& probabilities);

struct ImportanceStat {
  double mean_drop = 0.0;
  double std_drop = 0.0;
};

using Predictor = std::function<Vector(const Matrix&)>;

/// Mean and std of the metric drop after shuffling each feature column,
/// over `repeats` shuffles. Shuffle seeds derive from (seed, feature, repeat).
std::map<std::string, ImportanceStat> permutation_importance(
    const Predictor& predict, const Dataset& data, Metric metric,
    int repeats = 5, std::uint64_t seed = 0);

nlohmann::json to_json(const ConfusionMatrix& cm);
nlohmann::json to_json(const EvalReport& report);
void write_curve_csv(const Curve& curve, const std::filesystem::path& path);

}  // namespace riskstack
