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

#include "riskstack/dataset.hpp"

#include <charconv>
#include <cstring>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

namespace riskstack {
namespace {

bool is_missing(double v) { return std::isnan(v); }

// Splits one RFC-4180 record. Returns false at end of input.
bool read_record(std::istream& in, std::vector<std::string>& fields) {
  fields.clear();
  if (in.peek() == std::char_traits<char>::eof()) return false;
  std::string field;
  bool quoted = false;
  bool any = false;
  char c;
  while (in.get(c)) {
    any = true;
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field.push_back('"');
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c == '\r') {
      if (in.peek() == '\n') in.get(c);
      break;
    } else if (c == '\n') {
      break;
    } else {
      field.push_back(c);
    }
  }
  if (!any) return false;
  fields.push_back(std::move(field));
  return true;
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return std::string(s.substr(first, last - first + 1));
}

std::optional<double> parse_number(const std::string& text) {
  const std::string t = trim(text);
  if (t.empty()) return std::nullopt;
  double value = 0.0;
  const char* begin = t.data();
  const char* end = t.data() + t.size();
  if (*begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return value;
}

double median_of(std::vector<double> values) {
  const std::size_t n = values.size();
  const std::size_t mid = n / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  const double upper = values[mid];
  if (n % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + mid);
  return 0.5 * (lower + upper);
}

double mode_of(const std::vector<double>& values) {
  std::map<double, std::size_t> counts;
  for (double v : values) ++counts[v];
  double best = counts.begin()->first;
  std::size_t best_count = 0;
  for (const auto& [v, c] : counts) {
    if (c > best_count) {  // ties keep the smaller value
      best = v;
      best_count = c;
    }
  }
  return best;
}

}  // namespace

std::string to_string(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::binary:
      return "binary";
    case FeatureKind::ordinal:
      return "ordinal";
    case FeatureKind::continuous:
      return "continuous";
  }
  return "continuous";
}

FeatureKind feature_kind_from_string(const std::string& text) {
  if (text == "binary") return FeatureKind::binary;
  if (text == "ordinal") return FeatureKind::ordinal;
  if (text == "continuous") return FeatureKind::continuous;
  throw FormatError("unknown feature kind '" + text + "'");
}

std::vector<std::string> Dataset::feature_names() const {
  std::vector<std::string> out;
  out.reserve(schema.size());
  for (const auto& s : schema) out.push_back(s.name);
  return out;
}

std::optional<Index> Dataset::column_index(const std::string& name) const {
  for (std::size_t j = 0; j < schema.size(); ++j) {
    if (schema[j].name == name) return static_cast<Index>(j);
  }
  return std::nullopt;
}

Dataset Dataset::select_rows(std::span<const Index> rows) const {
  Dataset out;
  out.schema = schema;
  out.transform_log = transform_log;
  out.label_name = label_name;
  out.features.resize(static_cast<Index>(rows.size()), cols());
  out.labels.resize(static_cast<Index>(rows.size()));
  for (Index j = 0; j < cols(); ++j) {
    auto src = features.col(j);
    auto dst = out.features.col(j);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      dst(static_cast<Index>(i)) = src(rows[i]);
    }
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.labels(static_cast<Index>(i)) = labels(rows[i]);
  }
  return out;
}

Dataset Dataset::select_columns(std::span<const std::string> names) const {
  Dataset out;
  out.transform_log = transform_log;
  out.label_name = label_name;
  out.labels = labels;
  out.features.resize(rows(), static_cast<Index>(names.size()));
  for (std::size_t k = 0; k < names.size(); ++k) {
    const auto j = column_index(names[k]);
    if (!j) throw DataError("unknown feature '" + names[k] + "'");
    out.features.col(static_cast<Index>(k)) = features.col(*j);
    out.schema.push_back(schema[static_cast<std::size_t>(*j)]);
  }
  return out;
}

std::array<std::size_t, 2> Dataset::class_counts() const {
  std::array<std::size_t, 2> counts{0, 0};
  for (Index i = 0; i < labels.size(); ++i) ++counts[labels(i) == 1 ? 1 : 0];
  return counts;
}

bool Dataset::has_missing() const { return features.hasNaN(); }

void Dataset::validate() const {
  if (labels.size() != features.rows()) {
    throw DataError("label count " + std::to_string(labels.size()) +
                    " does not match row count " +
                    std::to_string(features.rows()));
  }
  if (static_cast<Index>(schema.size()) != features.cols()) {
    throw DataError("schema has " + std::to_string(schema.size()) +
                    " entries for " + std::to_string(features.cols()) +
                    " columns");
  }
  for (Index i = 0; i < labels.size(); ++i) {
    if (labels(i) != 0 && labels(i) != 1) {
      throw DataError("label at row " + std::to_string(i) + " is not 0/1");
    }
  }
}

std::vector<FeatureSchema> infer_schema(const Matrix& features,
                                        std::span<const std::string> names) {
  std::vector<FeatureSchema> schema(static_cast<std::size_t>(features.cols()));
  for (Index j = 0; j < features.cols(); ++j) {
    auto& s = schema[static_cast<std::size_t>(j)];
    s.name = names[static_cast<std::size_t>(j)];
    std::set<double> distinct;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (Index i = 0; i < features.rows(); ++i) {
      const double v = features(i, j);
      if (is_missing(v)) continue;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      if (distinct.size() <= kOrdinalMaxDistinct) distinct.insert(v);
    }
    if (distinct.empty()) {
      lo = hi = 0.0;
    }
    s.observed_min = lo;
    s.observed_max = hi;
    const bool zero_one = !distinct.empty() &&
                          std::all_of(distinct.begin(), distinct.end(),
                                      [](double v) { return v == 0.0 || v == 1.0; });
    if (zero_one) {
      s.kind = FeatureKind::binary;
    } else if (distinct.size() <= kOrdinalMaxDistinct) {
      s.kind = FeatureKind::ordinal;
    } else {
      s.kind = FeatureKind::continuous;
    }
  }
  return schema;
}

Dataset make_dataset(Matrix features, LabelVector labels,
                     std::vector<std::string> names, std::string label_name) {
  if (static_cast<Index>(names.size()) != features.cols()) {
    throw DataError("expected " + std::to_string(features.cols()) +
                    " column names, got " + std::to_string(names.size()));
  }
  Dataset d;
  d.schema = infer_schema(features, names);
  d.features = std::move(features);
  d.labels = std::move(labels);
  d.label_name = std::move(label_name);
  d.validate();
  return d;
}

Dataset parse_csv(std::istream& in, const std::string& label_column,
                  const std::string& source_name) {
  std::vector<std::string> header;
  if (!read_record(in, header)) {
    throw DataError(source_name + ": empty dataset (no header row)");
  }
  for (auto& h : header) h = trim(h);
  if (!header.empty() && header[0].rfind("\xEF\xBB\xBF", 0) == 0) {
    header[0].erase(0, 3);
  }
  const auto label_it = std::find(header.begin(), header.end(), label_column);
  if (label_it == header.end()) {
    throw DataError(source_name + ": missing label column '" + label_column +
                    "'");
  }
  const std::size_t label_pos =
      static_cast<std::size_t>(label_it - header.begin());

  std::vector<std::string> names;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c != label_pos) names.push_back(header[c]);
  }
  const std::size_t p = names.size();

  std::vector<std::vector<double>> columns(p);
  std::vector<int> labels;
  std::vector<std::string> fields;
  std::size_t line = 1;
  while (read_record(in, fields)) {
    ++line;
    if (fields.size() == 1 && trim(fields[0]).empty()) continue;
    if (fields.size() != header.size()) {
      throw DataError(source_name + ": row " + std::to_string(labels.size() + 1) + " (line " +
                      std::to_string(line) + ") has " +
                      std::to_string(fields.size()) + " fields, expected " +
                      std::to_string(header.size()));
    }
    const auto label = parse_number(fields[label_pos]);
    if (!label || (*label != 0.0 && *label != 1.0)) {
      throw DataError(source_name + ": row " + std::to_string(labels.size() + 1) + " (line " +
                      std::to_string(line) + "), column '" + label_column + "': label '" +
                      fields[label_pos] + "' is not 0 or 1");
    }
    labels.push_back(static_cast<int>(*label));
    std::size_t k = 0;
    for (std::size_t c = 0; c < fields.size(); ++c) {
      if (c == label_pos) continue;
      const std::string cell = trim(fields[c]);
      const auto v = (cell == "NA") ? std::nullopt : parse_number(cell);
      columns[k++].push_back(v ? *v : std::numeric_limits<double>::quiet_NaN());
    }
  }
  if (labels.empty()) {
    throw DataError(source_name + ": empty dataset (header only)");
  }

  const Index n = static_cast<Index>(labels.size());
  Matrix x(n, static_cast<Index>(p));
  for (std::size_t j = 0; j < p; ++j) {
    x.col(static_cast<Index>(j)) =
        Eigen::Map<const Vector>(columns[j].data(), n);
  }
  LabelVector y = Eigen::Map<const LabelVector>(labels.data(), n);
  Dataset d = make_dataset(std::move(x), std::move(y), std::move(names),
                           label_column);
  d.transform_log.push_back("load_csv(" + source_name + ")");
  return d;
}

Dataset load_csv(const std::filesystem::path& path,
                 const std::string& label_column) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open input file '" + path.string() + "'");
  return parse_csv(in, label_column, path.string());
}

void write_csv(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out.precision(17);
  for (const auto& s : data.schema) out << s.name << ',';
  out << data.label_name << '\n';
  for (Index i = 0; i < data.rows(); ++i) {
    for (Index j = 0; j < data.cols(); ++j) {
      const double v = data.features(i, j);
      if (is_missing(v)) {
        out << "NA";
      } else {
        out << v;
      }
      out << ',';
    }
    out << data.labels(i) << '\n';
  }
}

Deduplicated deduplicate(const Dataset& data) {
  struct RowKey {
    const Dataset* d;
    Index row;
  };
  auto hash = [](const RowKey& k) {
    std::size_t h = std::hash<int>{}(k.d->labels(k.row));
    for (Index j = 0; j < k.d->cols(); ++j) {
      double v = k.d->features(k.row, j);
      std::uint64_t bits;
      if (std::isnan(v)) v = std::numeric_limits<double>::quiet_NaN();
      if (v == 0.0) v = 0.0;  // fold -0 onto +0
      std::memcpy(&bits, &v, sizeof bits);
      h ^= std::hash<std::uint64_t>{}(bits) + 0x9e3779b97f4a7c15ULL + (h << 6) +
           (h >> 2);
    }
    return h;
  };
  auto equal = [](const RowKey& a, const RowKey& b) {
    if (a.d->labels(a.row) != b.d->labels(b.row)) return false;
    for (Index j = 0; j < a.d->cols(); ++j) {
      const double u = a.d->features(a.row, j);
      const double v = b.d->features(b.row, j);
      if (std::isnan(u) && std::isnan(v)) continue;
      if (u != v) return false;
    }
    return true;
  };
  std::unordered_set<RowKey, decltype(hash), decltype(equal)> seen(
      static_cast<std::size_t>(data.rows()) * 2, hash, equal);
  std::vector<Index> keep;
  keep.reserve(static_cast<std::size_t>(data.rows()));
  for (Index i = 0; i < data.rows(); ++i) {
    if (seen.insert(RowKey{&data, i}).second) keep.push_back(i);
  }
  Deduplicated out;
  out.data = data.select_rows(keep);
  out.removed = static_cast<std::size_t>(data.rows()) - keep.size();
  out.data.transform_log.push_back("deduplicate(removed=" +
                                   std::to_string(out.removed) + ")");
  return out;
}

Dataset impute(const Dataset& data, ImputeStrategy strategy) {
  Dataset out = data;
  std::vector<double> fills(static_cast<std::size_t>(data.cols()),
                            std::numeric_limits<double>::quiet_NaN());
  parallel_for(data.cols(), [&](Index j) {
    auto col = data.features.col(j);
    std::vector<double> present;
    present.reserve(static_cast<std::size_t>(col.size()));
    for (Index i = 0; i < col.size(); ++i) {
      if (!is_missing(col(i))) present.push_back(col(i));
    }
    if (present.size() == static_cast<std::size_t>(col.size())) return;
    if (present.empty()) return;
    const bool binary = data.schema[static_cast<std::size_t>(j)].kind ==
                        FeatureKind::binary;
    fills[static_cast<std::size_t>(j)] =
        (binary && strategy == ImputeStrategy::mode_for_binary)
            ? mode_of(present)
            : median_of(std::move(present));
  });

  std::size_t filled = 0;
  for (Index j = 0; j < data.cols(); ++j) {
    auto col = out.features.col(j);
    const bool has_missing = col.hasNaN();
    if (!has_missing) continue;
    const double fill = fills[static_cast<std::size_t>(j)];
    if (std::isnan(fill)) {
      throw DataError("cannot impute column '" +
                      data.schema[static_cast<std::size_t>(j)].name +
                      "': every value is missing");
    }
    for (Index i = 0; i < col.size(); ++i) {
      if (is_missing(col(i))) {
        col(i) = fill;
        ++filled;
      }
    }
  }
  out.schema = infer_schema(out.features, out.feature_names());
  out.transform_log.push_back(
      std::string("impute(") +
      (strategy == ImputeStrategy::median ? "median" : "mode_for_binary") +
      ", filled=" + std::to_string(filled) + ")");
  return out;
}

Matrix Scaler::transform(const Matrix& raw) const {
  if (raw.cols() != size()) {
    throw DataError("scaler expects " + std::to_string(size()) +
                    " columns, got " + std::to_string(raw.cols()));
  }
  Matrix out(raw.rows(), raw.cols());
  for (Index j = 0; j < raw.cols(); ++j) {
    const double range = max(j) - min(j);
    if (range > 0) {
      out.col(j) = (raw.col(j).array() - min(j)) / range;
    } else {
      out.col(j).setZero();
    }
  }
  return out;
}

Matrix Scaler::inverse(const Matrix& scaled) const {
  if (scaled.cols() != size()) {
    throw DataError("scaler expects " + std::to_string(size()) +
                    " columns, got " + std::to_string(scaled.cols()));
  }
  Matrix out(scaled.rows(), scaled.cols());
  for (Index j = 0; j < scaled.cols(); ++j) {
    const double range = max(j) - min(j);
    out.col(j) = scaled.col(j).array() * range + min(j);
  }
  return out;
}

Scaler Scaler::subset(std::span<const Index> columns) const {
  Scaler out;
  out.method = method;
  out.min.resize(static_cast<Index>(columns.size()));
  out.max.resize(static_cast<Index>(columns.size()));
  for (std::size_t k = 0; k < columns.size(); ++k) {
    out.min(static_cast<Index>(k)) = min(columns[k]);
    out.max(static_cast<Index>(k)) = max(columns[k]);
  }
  return out;
}

Normalized normalize(const Dataset& data) {
  if (data.has_missing()) {
    throw DataError("normalize requires imputed data (missing cells present)");
  }
  Normalized out;
  out.scaler.min = data.features.colwise().minCoeff();
  out.scaler.max = data.features.colwise().maxCoeff();
  if (data.rows() == 0) {
    out.scaler.min = Vector::Zero(data.cols());
    out.scaler.max = Vector::Zero(data.cols());
  }
  out.data = data;
  out.data.features = out.scaler.transform(data.features);
  // Schema keeps the raw observed ranges; kinds are invariant under min-max.
  out.data.transform_log.push_back("normalize(minmax)");
  return out;
}

SplitResult split(const Dataset& data, double test_fraction, bool stratify,
                  std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw DataError("test fraction must lie strictly between 0 and 1");
  }
  Rng rng(seed);
  std::vector<Index> train_rows;
  std::vector<Index> test_rows;
  auto take = [&](std::vector<Index> pool) {
    rng.shuffle(pool);
    const auto n_test = static_cast<std::size_t>(
        std::llround(test_fraction * static_cast<double>(pool.size())));
    test_rows.insert(test_rows.end(), pool.begin(), pool.begin() + n_test);
    train_rows.insert(train_rows.end(), pool.begin() + n_test, pool.end());
  };
  if (stratify) {
    std::array<std::vector<Index>, 2> by_class;
    for (Index i = 0; i < data.rows(); ++i) {
      by_class[data.labels(i) == 1 ? 1 : 0].push_back(i);
    }
    for (int c = 0; c < 2; ++c) {
      if (by_class[c].size() < 2) {
        throw DataError("stratified split needs at least 2 rows of class " +
                        std::to_string(c) + ", found " +
                        std::to_string(by_class[c].size()));
      }
    }
    take(std::move(by_class[0]));
    take(std::move(by_class[1]));
  } else {
    take(iota_indices(data.rows()));
  }
  std::sort(train_rows.begin(), train_rows.end());
  std::sort(test_rows.begin(), test_rows.end());

  SplitResult out;
  out.train = data.select_rows(train_rows);
  out.test = data.select_rows(test_rows);
  std::ostringstream step;
  step << "split(test_fraction=" << test_fraction
       << ", stratify=" << (stratify ? "true" : "false") << ", seed=" << seed
       << ")";
  out.train.transform_log.push_back(step.str() + "[train]");
  out.test.transform_log.push_back(step.str() + "[test]");
  out.train_rows = std::move(train_rows);
  out.test_rows = std::move(test_rows);
  return out;
}

ProfileReport profile(const Dataset& data, int bins) {
  if (data.rows() < 3) throw DataError("profile needs at least 3 rows");
  if (data.has_missing()) throw DataError("profile requires imputed data");
  if (bins < 1) throw DataError("histogram bin count must be positive");

  const Index n = data.rows();
  const Index p = data.cols();
  ProfileReport report;
  report.names = data.feature_names();
  report.schema = data.schema;
  report.class_counts = data.class_counts();
  report.histograms.resize(static_cast<std::size_t>(p));
  report.vif.assign(static_cast<std::size_t>(p), 1.0);
  report.vif_infinite.assign(static_cast<std::size_t>(p), false);

  parallel_for(p, [&](Index j) {
    auto col = data.features.col(j);
    const double lo = col.minCoeff();
    const double hi = col.maxCoeff();
    Histogram h;
    h.counts.assign(static_cast<std::size_t>(bins), 0);
    const double width = (hi - lo) / bins;
    for (int b = 0; b <= bins; ++b) h.edges.push_back(lo + width * b);
    h.edges.back() = hi;
    for (Index i = 0; i < n; ++i) {
      int b = width > 0 ? static_cast<int>((col(i) - lo) / width) : 0;
      b = std::clamp(b, 0, bins - 1);
      ++h.counts[static_cast<std::size_t>(b)];
    }
    report.histograms[static_cast<std::size_t>(j)] = std::move(h);
  });

  report.correlation = pearson_correlation(data.features);

  // VIF_j = 1 / (1 - R_j^2), R_j^2 from OLS of column j on the rest.
  parallel_for(p, [&](Index j) {
    const auto js = static_cast<std::size_t>(j);
    Vector target = data.features.col(j);
    const double mean = target.mean();
    const double sst = (target.array() - mean).square().sum();
    if (!(sst > 0.0)) {
      report.vif_infinite[js] = true;
      return;
    }
    if (p == 1) {
      report.vif[js] = 1.0;
      return;
    }
    Matrix design(n, p);
    design.col(0).setOnes();
    Index k = 1;
    for (Index c = 0; c < p; ++c) {
      if (c != j) design.col(k++) = data.features.col(c);
    }
    const Vector coef = design.colPivHouseholderQr().solve(target);
    const double ssr = (target - design * coef).squaredNorm();
    const double unexplained = ssr / sst;
    if (unexplained < 1e-12) {
      report.vif_infinite[js] = true;
    } else {
      report.vif[js] = 1.0 / std::min(1.0, unexplained);
    }
  });
  return report;
}

nlohmann::json to_json(const FeatureSchema& schema) {
  return {{"name", schema.name},
          {"kind", to_string(schema.kind)},
          {"min", schema.observed_min},
          {"max", schema.observed_max}};
}

FeatureSchema feature_schema_from_json(const nlohmann::json& j) {
  FeatureSchema s;
  s.name = j.at("name").get<std::string>();
  s.kind = feature_kind_from_string(j.at("kind").get<std::string>());
  s.observed_min = j.at("min").get<double>();
  s.observed_max = j.at("max").get<double>();
  return s;
}

nlohmann::json to_json(const ProfileReport& report) {
  nlohmann::json features = nlohmann::json::array();
  for (std::size_t j = 0; j < report.names.size(); ++j) {
    nlohmann::json f = to_json(report.schema[j]);
    f["histogram"] = {{"edges", report.histograms[j].edges},
                      {"counts", report.histograms[j].counts}};
    if (report.vif_infinite[j]) {
      f["vif"] = nullptr;
      f["vif_infinite"] = true;
    } else {
      f["vif"] = report.vif[j];
      f["vif_infinite"] = false;
    }
    features.push_back(std::move(f));
  }
  nlohmann::json corr = nlohmann::json::array();
  for (Index a = 0; a < report.correlation.rows(); ++a) {
    std::vector<double> row(report.correlation.row(a).begin(),
                            report.correlation.row(a).end());
    corr.push_back(row);
  }
  return {{"features", features},
          {"correlation", {{"names", report.names}, {"matrix", corr}}},
          {"class_counts",
           {{"0", report.class_counts[0]}, {"1", report.class_counts[1]}}}};
}

nlohmann::json to_json(const Scaler& scaler) {
  return {{"method", scaler.method},
          {"min", std::vector<double>(scaler.min.begin(), scaler.min.end())},
          {"max", std::vector<double>(scaler.max.begin(), scaler.max.end())}};
}

}  // namespace riskstack
