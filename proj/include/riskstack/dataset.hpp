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

#include <algorithm>
#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "riskstack/common.hpp"

namespace riskstack {

enum class FeatureKind { binary, ordinal, continuous };

std::string to_string(FeatureKind kind);
FeatureKind feature_kind_from_string(const std::string& text);

// Columns with at most this many distinct values (and not exactly {0,1}) are
// ordinal; anything wider is continuous.
inline constexpr std::size_t kOrdinalMaxDistinct = 15;

struct FeatureSchema {
  std::string name;
  FeatureKind kind = FeatureKind::continuous;
  double observed_min = 0.0;
  double observed_max = 0.0;
};

/// Numeric table with binary labels. Missing cells are NaN until impute().
struct Dataset {
  Matrix features;  // rows x columns, column-major
  LabelVector labels;
  std::vector<FeatureSchema> schema;
  std::vector<std::string> transform_log;
  std::string label_name = "label";

  Index rows() const { return features.rows(); }
  Index cols() const { return features.cols(); }

  std::vector<std::string> feature_names() const;

  /// Column position of `name`, or nullopt.
  std::optional<Index> column_index(const std::string& name) const;

  Dataset select_rows(std::span<const Index> rows) const;

  /// Keeps the named columns in the given order. Throws DataError on an
  /// unknown name.
  Dataset select_columns(std::span<const std::string> names) const;

  std::array<std::size_t, 2> class_counts() const;

  bool has_missing() const;

  /// Checks the shape invariants; throws DataError on violation.
  void validate() const;
};

/// Builds a dataset from in-memory columns. Schema is inferred.
Dataset make_dataset(Matrix features, LabelVector labels,
                     std::vector<std::string> names,
                     std::string label_name = "label");

/// Re-infers kind and observed range of every column from the data.
std::vector<FeatureSchema> infer_schema(const Matrix& features,
                                        std::span<const std::string> names);

Dataset load_csv(const std::filesystem::path& path,
                 const std::string& label_column);
Dataset parse_csv(std::istream& in, const std::string& label_column,
                  const std::string& source_name = "<stream>");

/// Writes header + rows with round-trip precision. Missing cells as "NA".
void write_csv(const Dataset& data, const std::filesystem::path& path);

struct Deduplicated {
  Dataset data;
  std::size_t removed = 0;
};

/// Drops rows identical (features and label) to an earlier row.
Deduplicated deduplicate(const Dataset& data);

enum class ImputeStrategy {
  median,           // column median everywhere
  mode_for_binary,  // median, except the mode for binary columns
};

Dataset impute(const Dataset& data,
               ImputeStrategy strategy = ImputeStrategy::mode_for_binary);

/// Per-column min-max scaler onto [0, 1]. Constant columns map to 0.
struct Scaler {
  Vector min;
  Vector max;
  std::string method = "minmax";

  Index size() const { return min.size(); }
  Matrix transform(const Matrix& raw) const;
  Matrix inverse(const Matrix& scaled) const;

  /// Scaler restricted to the given column positions, in that order.
  Scaler subset(std::span<const Index> columns) const;
};

struct Normalized {
  Dataset data;
  Scaler scaler;
};

Normalized normalize(const Dataset& data);

struct SplitResult {
  Dataset train;
  Dataset test;
  std::vector<Index> train_rows;
  std::vector<Index> test_rows;
};

/// Holds out round(test_fraction * n_c) rows per class when stratified,
/// round(test_fraction * n) otherwise. Deterministic for a fixed seed.
SplitResult split(const Dataset& data, double test_fraction, bool stratify,
                  std::uint64_t seed);

struct Histogram {
  std::vector<double> edges;  // bins + 1 edges
  std::vector<std::size_t> counts;
};

struct ProfileReport {
  std::vector<std::string> names;
  std::vector<FeatureSchema> schema;
  std::vector<Histogram> histograms;
  Matrix correlation;
  std::vector<double> vif;          // meaningful when !vif_infinite[j]
  std::vector<bool> vif_infinite;   // R^2 == 1 (or a constant column)
  std::array<std::size_t, 2> class_counts{};
};

ProfileReport profile(const Dataset& data, int bins = 10);

/// Pearson correlation of the columns of `x`. Constant columns get zero
/// off-diagonal entries and a unit diagonal.
template <typename Derived>
Matrix pearson_correlation(const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  const Index n = x.rows();
  const Index p = x.cols();
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> centered =
      x.rowwise() - x.colwise().mean();
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> norms = centered.colwise().norm();
  Matrix corr = Matrix::Identity(p, p);
  if (n == 0) return corr;
  for (Index a = 0; a < p; ++a) {
    for (Index b = a + 1; b < p; ++b) {
      double r = 0.0;
      if (norms(a) > 0 && norms(b) > 0) {
        r = static_cast<double>(centered.col(a).dot(centered.col(b)) /
                                (norms(a) * norms(b)));
        r = std::clamp(r, -1.0, 1.0);
      }
      corr(a, b) = r;
      corr(b, a) = r;
    }
  }
  return corr;
}

nlohmann::json to_json(const FeatureSchema& schema);
FeatureSchema feature_schema_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ProfileReport& report);
nlohmann::json to_json(const Scaler& scaler);

}  // namespace riskstack
