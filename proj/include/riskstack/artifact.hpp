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
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "riskstack/dataset.hpp"
#include "riskstack/ensemble.hpp"
#include "riskstack/learners.hpp"

namespace riskstack {

inline constexpr int kArtifactFormatVersion = 1;
inline constexpr const char* kArtifactFormat = "riskstack-model";

struct ArtifactMetadata {
  std::uint64_t seed = 0;
  std::string created;  // caller supplied; kept out of the model bits
  std::string dataset_fingerprint;
  std::size_t training_rows = 0;
  std::string mode;
  nlohmann::json extra = nlohmann::json::object();
};

using ArtifactModel = std::variant<TrainedModel, StackModel>;

struct ModelArtifact {
  int format_version = kArtifactFormatVersion;
  ArtifactModel model;
  Scaler scaler;                       // raw units -> model input, one entry per feature
  std::vector<std::string> features;   // model input order
  std::vector<FeatureSchema> schema;   // raw units, same order
  ArtifactMetadata metadata;
  Matrix holdout_features;             // model-input space; may be empty
  LabelVector holdout_labels;
  std::string checksum;                // hex sha256 of the payload, set by save/load

  /// Probabilities for rows already in model-input space.
  Vector predict_proba(const Matrix& model_input) const;
  /// Probabilities for rows in raw units (scaled first).
  Vector predict_raw(const Matrix& raw) const;
  std::string model_name() const;
};

struct ArtifactSummary {
  std::filesystem::path path;
  std::string checksum;
  std::size_t bytes = 0;
  int format_version = kArtifactFormatVersion;
};

/// Bit-exact text encoding of a double: 16 hex digits of its IEEE-754 bits.
std::string encode_real(double value);
double decode_real(std::string_view text);

std::string sha256_hex(std::string_view bytes);
/// sha256 over feature names, feature bits and labels.
std::string dataset_fingerprint(const Dataset& data);

/// Header line, newline, payload line, newline.
std::string serialize(const ModelArtifact& artifact);
ModelArtifact deserialize(std::string_view text);

ArtifactSummary save(const ModelArtifact& artifact, const std::filesystem::path& path);
ModelArtifact load(const std::filesystem::path& path);

nlohmann::json model_to_json(const TrainedModel& model);
TrainedModel model_from_json(const nlohmann::json& j);

}  // namespace riskstack
