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

#include "riskstack/metrics.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include <nlohmann/json.hpp>

namespace riskstack {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_lengths(Index a, Index b) {
  if (a != b) {
    throw DataError("length mismatch: " + std::to_string(a) + " labels vs " +
                    std::to_string(b) + " scores");
  }
}

// Row order by descending score, ties by row index.
std::vector<Index> descending_order(const Vector& scores) {
  std::vector<Index> order = iota_indices(scores.size());
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return scores(a) > scores(b); });
  return order;
}

}  // namespace

std::string to_string(Metric metric) {
  return metric == Metric::roc_auc ? "roc_auc" : "accuracy";
}

Metric metric_from_string(const std::string& text) {
  if (text == "roc_auc" || text == "auc") return Metric::roc_auc;
  if (text == "accuracy") return Metric::accuracy;
  throw DataError("unknown metric '" + text + "'");
}

namespace detail {

ConfusionMatrix confusion(const LabelVector& labels, const LabelVector& predicted) {
  check_lengths(labels.size(), predicted.size());
  ConfusionMatrix cm;
  for (Index i = 0; i < labels.size(); ++i) {
    const int y = labels(i);
    const int p = predicted(i);
    if ((y != 0 && y != 1) || (p != 0 && p != 1)) {
      throw DataError("confusion expects 0/1 values (row " + std::to_string(i) + ")");
    }
    if (y == 1) {
      p == 1 ? ++cm.tp : ++cm.fn;
    } else {
      p == 1 ? ++cm.fp : ++cm.tn;
    }
  }
  return cm;
}

Curve roc(const LabelVector& labels, const Vector& scores) {
  check_lengths(labels.size(), scores.size());
  const auto positives = static_cast<double>((labels.array() == 1).count());
  const auto negatives = static_cast<double>(labels.size()) - positives;
  if (positives == 0 || negatives == 0) {
    throw DataError("roc needs both classes present");
  }
  const auto order = descending_order(scores);
  Curve curve;
  curve.points.push_back({0.0, 0.0, kInf});
  double tp = 0;
  double fp = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    const double s = scores(order[i]);
    for (; i < order.size() && scores(order[i]) == s; ++i) {
      labels(order[i]) == 1 ? ++tp : ++fp;
    }
    const CurvePoint prev = curve.points.back();
    const CurvePoint next{fp / negatives, tp / positives, s};
    curve.area += (next.x - prev.x) * (next.y + prev.y) * 0.5;
    curve.points.push_back(next);
  }
  return curve;
}

Curve pr(const LabelVector& labels, const Vector& scores) {
  check_lengths(labels.size(), scores.size());
  const auto positives = static_cast<double>((labels.array() == 1).count());
  if (positives == 0) throw DataError("precision-recall needs positive labels");
  const auto order = descending_order(scores);
  Curve curve;
  curve.points.push_back({0.0, 1.0, kInf});
  double tp = 0;
  double fp = 0;
  double prev_recall = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    const double s = scores(order[i]);
    for (; i < order.size() && scores(order[i]) == s; ++i) {
      labels(order[i]) == 1 ? ++tp : ++fp;
    }
    const double recall = tp / positives;
    const double precision = tp / (tp + fp);
    curve.area += (recall - prev_recall) * precision;
    prev_recall = recall;
    curve.points.push_back({recall, precision, s});
  }
  return curve;
}

}  // namespace detail

ScalarMetrics scalar_metrics(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw DataError("empty confusion matrix");
  ScalarMetrics m;
  const auto tp = static_cast<double>(cm.tp);
  const auto fp = static_cast<double>(cm.fp);
  const auto fn = static_cast<double>(cm.fn);
  const auto tn = static_cast<double>(cm.tn);
  m.accuracy = (tp + tn) / static_cast<double>(cm.total());
  if (tp + fp > 0) {
    m.precision = tp / (tp + fp);
  } else {
    m.precision_undefined = true;
  }
  if (tp + fn > 0) {
    m.recall = tp / (tp + fn);
  } else {
    m.recall_undefined = true;
  }
  if (m.precision + m.recall > 0) {
    m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
  } else {
    m.f1_undefined = true;
  }
  return m;
}

LabelVector threshold_labels(const Vector& probabilities, double threshold) {
  return (probabilities.array() >= threshold).cast<int>();
}

EvalReport evaluate(const LabelVector& labels, const Vector& probabilities,
                    double threshold) {
  EvalReport r;
  r.threshold = threshold;
  r.confusion = confusion(labels, threshold_labels(probabilities, threshold));
  r.scalars = scalar_metrics(r.confusion);
  r.roc = roc(labels, probabilities);
  r.pr = pr(labels, probabilities);
  r.roc_auc = r.roc.area;
  r.average_precision = r.pr.area;
  return r;
}

double score_metric(Metric metric, const LabelVector& labels,
                    const Vector& probabilities) {
  if (metric == Metric::roc_auc) return roc_auc(labels, probabilities);
  return scalar_metrics(confusion(labels, threshold_labels(probabilities)))
      .accuracy;
}

std::map<std::string, ImportanceStat> permutation_importance(
    const Predictor& predict, const Dataset& data, Metric metric, int repeats,
    std::uint64_t seed) {
  if (repeats < 1) throw DataError("permutation importance needs repeats >= 1");
  const double baseline = score_metric(metric, data.labels, predict(data.features));
  const Index p = data.cols();
  std::vector<std::vector<double>> drops(static_cast<std::size_t>(p));
  parallel_for(p, [&](Index j) {
    auto& out = drops[static_cast<std::size_t>(j)];
    Matrix shuffled = data.features;
    for (int r = 0; r < repeats; ++r) {
      Rng rng(derive_seed(derive_seed(seed, static_cast<std::uint64_t>(j)),
                          static_cast<std::uint64_t>(r)));
      std::vector<Index> perm = iota_indices(data.rows());
      rng.shuffle(perm);
      for (Index i = 0; i < data.rows(); ++i) {
        shuffled(i, j) = data.features(perm[static_cast<std::size_t>(i)], j);
      }
      out.push_back(baseline - score_metric(metric, data.labels, predict(shuffled)));
    }
  });
  std::map<std::string, ImportanceStat> result;
  for (Index j = 0; j < p; ++j) {
    const auto& d = drops[static_cast<std::size_t>(j)];
    const double mean = std::accumulate(d.begin(), d.end(), 0.0) / d.size();
    double var = 0.0;
    for (double v : d) var += (v - mean) * (v - mean);
    result[data.schema[static_cast<std::size_t>(j)].name] = {
        mean, std::sqrt(var / static_cast<double>(d.size()))};
  }
  return result;
}

nlohmann::json to_json(const ConfusionMatrix& cm) {
  return {{"tn", cm.tn}, {"fp", cm.fp}, {"fn", cm.fn}, {"tp", cm.tp}};
}

nlohmann::json to_json(const EvalReport& report) {
  auto curve_json = [](const Curve& c) {
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : c.points) {
      // JSON has no infinity; the opening point's threshold is null.
      nlohmann::json t = std::isinf(p.threshold) ? nlohmann::json(nullptr)
                                                 : nlohmann::json(p.threshold);
      pts.push_back({p.x, p.y, t});
    }
    return pts;
  };
  nlohmann::json flags = nlohmann::json::array();
  if (report.scalars.precision_undefined) flags.push_back("precision_undefined");
  if (report.scalars.recall_undefined) flags.push_back("recall_undefined");
  if (report.scalars.f1_undefined) flags.push_back("f1_undefined");
  return {{"threshold", report.threshold},
          {"confusion", to_json(report.confusion)},
          {"accuracy", report.scalars.accuracy},
          {"precision", report.scalars.precision},
          {"recall", report.scalars.recall},
          {"f1", report.scalars.f1},
          {"roc_auc", report.roc_auc},
          {"pr_auc", report.average_precision},
          {"warnings", flags},
          {"roc_curve", curve_json(report.roc)},
          {"pr_curve", curve_json(report.pr)}};
}

void write_curve_csv(const Curve& curve, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out.precision(17);
  out << "x,y,threshold\n";
  for (const auto& p : curve.points) {
    out << p.x << ',' << p.y << ',';
    if (std::isinf(p.threshold)) {
      out << "inf";
    } else {
      out << p.threshold;
    }
    out << '\n';
  }
}

}  // namespace riskstack
