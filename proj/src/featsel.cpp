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

#include "riskstack/featsel.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "riskstack/linear.hpp"

namespace riskstack {
namespace {

std::size_t position_of(const std::vector<std::string>& names, const std::string& name) {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw DataError("ranking has no feature '" + name + "'");
  return static_cast<std::size_t>(it - names.begin());
}

}  // namespace

std::string to_string(RankMethod method) {
  switch (method) {
    case RankMethod::mi:
      return "mi";
    case RankMethod::rfe:
      return "rfe";
    case RankMethod::lasso:
      return "lasso";
  }
  return "unknown";
}

int MethodRanking::rank_of(const std::string& name) const {
  return rank[position_of(features, name)];
}

double MethodRanking::score_of(const std::string& name) const {
  return score[position_of(features, name)];
}

std::vector<std::string> MethodRanking::ordered() const {
  std::vector<std::string> out(features.size());
  for (std::size_t j = 0; j < features.size(); ++j) {
    out[static_cast<std::size_t>(rank[j] - 1)] = features[j];
  }
  return out;
}

std::vector<int> rank_scores(std::span<const double> scores,
                             std::span<const std::string> names, bool higher_is_better) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) {
      return higher_is_better ? scores[a] > scores[b] : scores[a] < scores[b];
    }
    return names[a] < names[b];
  });
  std::vector<int> rank(scores.size());
  for (std::size_t r = 0; r < order.size(); ++r) rank[order[r]] = static_cast<int>(r + 1);
  return rank;
}

double mutual_information(const Matrix& counts) {
  const double total = counts.sum();
  if (!(total > 0)) return 0.0;
  const Vector row_sum = counts.rowwise().sum();
  const Eigen::RowVectorXd col_sum = counts.colwise().sum();
  double mi = 0.0;
  for (Index r = 0; r < counts.rows(); ++r) {
    for (Index c = 0; c < counts.cols(); ++c) {
      const double nrc = counts(r, c);
      if (nrc <= 0) continue;
      mi += nrc / total * std::log(nrc * total / (row_sum(r) * col_sum(c)));
    }
  }
  return std::max(0.0, mi);
}

double mutual_information(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw DataError("mutual information needs equal lengths");
  std::map<int, Index> ra;
  std::map<int, Index> rb;
  for (int v : a) ra.emplace(v, 0);
  for (int v : b) rb.emplace(v, 0);
  Index k = 0;
  for (auto& [v, idx] : ra) idx = k++;
  k = 0;
  for (auto& [v, idx] : rb) idx = k++;
  Matrix counts = Matrix::Zero(static_cast<Index>(ra.size()), static_cast<Index>(rb.size()));
  for (std::size_t i = 0; i < a.size(); ++i) counts(ra[a[i]], rb[b[i]]) += 1.0;
  return mutual_information(counts);
}

std::vector<int> discretize(const Eigen::Ref<const Vector>& column, FeatureKind kind,
                            int bins) {
  std::vector<int> codes(static_cast<std::size_t>(column.size()));
  if (kind != FeatureKind::continuous) {
    std::map<double, int> levels;
    for (Index i = 0; i < column.size(); ++i) levels.emplace(column(i), 0);
    int next = 0;
    for (auto& [v, code] : levels) code = next++;
    for (Index i = 0; i < column.size(); ++i) {
      codes[static_cast<std::size_t>(i)] = levels[column(i)];
    }
    return codes;
  }
  std::vector<double> sorted(column.begin(), column.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> edges;
  for (int k = 1; k < bins; ++k) {
    const double q = sorted[static_cast<std::size_t>(k) * sorted.size() / static_cast<std::size_t>(bins)];
    if (edges.empty() || q > edges.back()) edges.push_back(q);
  }
  for (Index i = 0; i < column.size(); ++i) {
    // Values strictly below the first edge form bin 0.
    codes[static_cast<std::size_t>(i)] = static_cast<int>(
        std::upper_bound(edges.begin(), edges.end(), column(i)) - edges.begin());
  }
  return codes;
}

MethodRanking mutual_info(const Dataset& data, int bins) {
  if (data.has_missing()) throw DataError("mutual information requires imputed data");
  const auto counts = data.class_counts();
  if (counts[0] == 0 || counts[1] == 0) throw DataError("label has one class");
  const std::vector<int> label(data.labels.begin(), data.labels.end());
  MethodRanking out;
  out.method = RankMethod::mi;
  out.features = data.feature_names();
  out.score.assign(out.features.size(), 0.0);
  parallel_for(data.cols(), [&](Index j) {
    const auto codes = discretize(data.features.col(j),
                                  data.schema[static_cast<std::size_t>(j)].kind, bins);
    out.score[static_cast<std::size_t>(j)] = mutual_information(codes, label);
  });
  out.rank = rank_scores(out.score, out.features);
  return out;
}

void standardize_columns(const Matrix& x, Matrix& out, Vector& center, Vector& scale) {
  center = x.colwise().mean();
  out = x.rowwise() - center.transpose();
  scale = (out.colwise().squaredNorm() / static_cast<double>(std::max<Index>(1, x.rows())))
              .cwiseSqrt()
              .transpose();
  for (Index j = 0; j < x.cols(); ++j) {
    if (scale(j) > 0) {
      out.col(j) /= scale(j);
    } else {
      scale(j) = 1.0;
      out.col(j).setZero();
    }
  }
}

MethodRanking rfe(const Dataset& data, int keep, double l2) {
  const Index p = data.cols();
  if (keep < 1) throw DataError("rfe keep must be >= 1");
  if (data.has_missing()) throw DataError("rfe requires imputed data");
  Matrix standardized;
  Vector center;
  Vector scale;
  standardize_columns(data.features, standardized, center, scale);
  const auto names = data.feature_names();

  MethodRanking out;
  out.method = RankMethod::rfe;
  out.features = names;
  out.score.assign(names.size(), 0.0);

  std::vector<Index> alive = iota_indices(p);
  auto fit_alive = [&] {
    Matrix x(data.rows(), static_cast<Index>(alive.size()));
    for (std::size_t k = 0; k < alive.size(); ++k) {
      x.col(static_cast<Index>(k)) = standardized.col(alive[k]);
    }
    LogisticFit f = fit_logistic(x, data.labels, l2);
    if (!f.converged) {
      throw TrainingError("rfe estimator did not converge after " +
                          std::to_string(f.iterations) + " iterations");
    }
    return f;
  };

  while (static_cast<Index>(alive.size()) > keep) {
    const LogisticFit f = fit_alive();
    std::size_t weakest = 0;
    for (std::size_t k = 1; k < alive.size(); ++k) {
      const double a = std::abs(f.weights(static_cast<Index>(k)));
      const double b = std::abs(f.weights(static_cast<Index>(weakest)));
      const auto& na = names[static_cast<std::size_t>(alive[k])];
      const auto& nb = names[static_cast<std::size_t>(alive[weakest])];
      if (a < b || (a == b && na > nb)) weakest = k;
    }
    const auto victim = static_cast<std::size_t>(alive[weakest]);
    out.score[victim] = std::abs(f.weights(static_cast<Index>(weakest)));
    out.elimination_order.push_back(names[victim]);
    alive.erase(alive.begin() + static_cast<std::ptrdiff_t>(weakest));
  }
  const LogisticFit final_fit = fit_alive();
  for (std::size_t k = 0; k < alive.size(); ++k) {
    out.score[static_cast<std::size_t>(alive[k])] =
        std::abs(final_fit.weights(static_cast<Index>(k)));
  }

  std::vector<std::string> survivors;
  for (Index j : alive) survivors.push_back(names[static_cast<std::size_t>(j)]);
  std::sort(survivors.begin(), survivors.end());
  out.rank.assign(names.size(), 0);
  int r = 1;
  for (const auto& s : survivors) out.rank[position_of(names, s)] = r++;
  for (auto it = out.elimination_order.rbegin(); it != out.elimination_order.rend(); ++it) {
    out.rank[position_of(names, *it)] = r++;
  }
  return out;
}

LassoFit lasso_fit(const Dataset& data, double lambda, double tol, int max_sweeps) {
  if (lambda < 0) throw DataError("lasso lambda must be >= 0");
  if (data.has_missing()) throw DataError("lasso requires imputed data");
  Matrix standardized;
  Vector center;
  Vector scale;
  standardize_columns(data.features, standardized, center, scale);
  const Vector y = data.labels.cast<double>();
  return lasso_coordinate_descent(standardized, y, lambda, tol, max_sweeps);
}

MethodRanking lasso_rank(const Dataset& data) {
  Matrix standardized;
  Vector center;
  Vector scale;
  standardize_columns(data.features, standardized, center, scale);
  const Vector y = data.labels.cast<double>();
  const double lambda = lasso_lambda_max(standardized, y) / 100.0;
  const LassoFit fit = lasso_coordinate_descent(standardized, y, lambda);

  MethodRanking out;
  out.method = RankMethod::lasso;
  out.features = data.feature_names();
  out.score.resize(out.features.size());
  for (std::size_t j = 0; j < out.features.size(); ++j) {
    out.score[j] = std::abs(fit.coefficients(static_cast<Index>(j)));
  }
  out.rank = rank_scores(out.score, out.features);
  return out;
}

FeatureRanking aggregate(std::span<const MethodRanking> rankings, int keep) {
  if (rankings.empty()) throw DataError("aggregate needs at least one ranking");
  if (keep < 1) throw DataError("aggregate keep must be >= 1");
  FeatureRanking out;
  out.methods.assign(rankings.begin(), rankings.end());
  out.features = rankings.front().features;
  const std::set<std::string> reference(out.features.begin(), out.features.end());
  for (const auto& r : rankings) {
    const std::set<std::string> names(r.features.begin(), r.features.end());
    if (names != reference || r.features.size() != out.features.size()) {
      throw DataError("rankings cover different feature sets (" + to_string(r.method) + ")");
    }
  }
  const std::size_t p = out.features.size();
  const double denom = p > 1 ? static_cast<double>(p - 1) : 1.0;
  out.aggregate.assign(p, 0.0);
  for (std::size_t j = 0; j < p; ++j) {
    double sum = 0.0;
    for (const auto& r : rankings) sum += (r.rank_of(out.features[j]) - 1) / denom;
    out.aggregate[j] = sum / static_cast<double>(rankings.size());
  }
  const auto order = rank_scores(out.aggregate, out.features, /*higher_is_better=*/false);
  std::vector<std::string> by_rank(p);
  for (std::size_t j = 0; j < p; ++j) by_rank[static_cast<std::size_t>(order[j] - 1)] = out.features[j];
  by_rank.resize(std::min(p, static_cast<std::size_t>(keep)));
  out.selected = std::move(by_rank);
  return out;
}

FeatureRanking rank_features(const Dataset& data, int keep) {
  const std::vector<MethodRanking> methods{mutual_info(data), rfe(data, 1), lasso_rank(data)};
  return aggregate(methods, keep);
}

nlohmann::json to_json(const MethodRanking& ranking) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& name : ranking.ordered()) {
    entries.push_back({{"feature", name},
                       {"rank", ranking.rank_of(name)},
                       {"score", ranking.score_of(name)}});
  }
  nlohmann::json j{{"method", to_string(ranking.method)}, {"ranking", entries}};
  if (!ranking.elimination_order.empty()) j["elimination_order"] = ranking.elimination_order;
  return j;
}

nlohmann::json to_json(const FeatureRanking& ranking) {
  nlohmann::json methods = nlohmann::json::array();
  for (const auto& m : ranking.methods) methods.push_back(to_json(m));
  nlohmann::json table = nlohmann::json::array();
  const auto order = rank_scores(ranking.aggregate, ranking.features, false);
  std::vector<std::size_t> by_rank(ranking.features.size());
  for (std::size_t j = 0; j < order.size(); ++j) by_rank[static_cast<std::size_t>(order[j] - 1)] = j;
  for (std::size_t j : by_rank) {
    nlohmann::json row{{"feature", ranking.features[j]},
                       {"aggregate_score", ranking.aggregate[j]}};
    for (const auto& m : ranking.methods) row[to_string(m.method) + "_rank"] = m.rank_of(ranking.features[j]);
    table.push_back(std::move(row));
  }
  return {{"methods", methods}, {"aggregate", table}, {"selected", ranking.selected}};
}

std::string format_table(const FeatureRanking& ranking) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof line, "%-22s %9s", "feature", "aggregate");
  out << line;
  for (const auto& m : ranking.methods) {
    std::snprintf(line, sizeof line, " %6s", to_string(m.method).c_str());
    out << line;
  }
  out << "  selected\n";
  const auto order = rank_scores(ranking.aggregate, ranking.features, false);
  std::vector<std::size_t> by_rank(ranking.features.size());
  for (std::size_t j = 0; j < order.size(); ++j) by_rank[static_cast<std::size_t>(order[j] - 1)] = j;
  for (std::size_t j : by_rank) {
    const auto& name = ranking.features[j];
    std::snprintf(line, sizeof line, "%-22s %9.4f", name.c_str(), ranking.aggregate[j]);
    out << line;
    for (const auto& m : ranking.methods) {
      std::snprintf(line, sizeof line, " %6d", m.rank_of(name));
      out << line;
    }
    const bool chosen = std::find(ranking.selected.begin(), ranking.selected.end(), name) !=
                        ranking.selected.end();
    out << (chosen ? "  *" : "") << '\n';
  }
  return out.str();
}

}  // namespace riskstack
