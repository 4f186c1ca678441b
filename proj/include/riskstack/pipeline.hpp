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
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "riskstack/artifact.hpp"
#include "riskstack/ensemble.hpp"
#include "riskstack/featsel.hpp"
#include "riskstack/metrics.hpp"
#include "riskstack/resample.hpp"

namespace riskstack {

inline constexpr const char* kVersion = "1.0.0";

/// replicate_paper: prep -> select -> balance -> split, all on the full data.
/// leakage_safe: prep -> split, then normalize/select/balance fitted on the
/// training part only.
enum class PipelineMode { replicate_paper, leakage_safe };

std::string to_string(PipelineMode mode);
PipelineMode pipeline_mode_from_string(const std::string& text);

using ModelChoice = std::variant<LearnerSpec, StackSpec>;

std::string model_name(const ModelChoice& choice);

struct PipelineConfig {
  std::filesystem::path input;
  std::string label = "Diabetes_binary";
  PipelineMode mode = PipelineMode::leakage_safe;
  bool deduplicate = true;
  bool balance = false;
  ResampleConfig resample;
  int keep = 0;  // 0 keeps every feature
  double test_fraction = 0.2;
  std::uint64_t seed = 42;
  std::filesystem::path output_dir = "riskstack-out";
  ModelChoice model = LearnerSpec{};
  std::vector<LearnerSpec> compare;  // also trained and evaluated on the same split
  int importance_rows = 2000;
  std::string created;  // artifact timestamp, free text
  bool write_artifact = true;
};

struct StageRecord {
  std::string name;
  std::vector<std::string> outputs;
};

struct PipelineResult {
  std::vector<StageRecord> stages;
  std::vector<std::string> features;
  std::string model;
  EvalReport model_eval;
  std::map<std::string, EvalReport> comparisons;
  ArtifactSummary artifact;
  std::size_t train_rows = 0;
  std::size_t test_rows = 0;
};

/// Runs every stage and writes its outputs under config.output_dir, plus
/// manifest.json. A failing stage is rethrown with its name prefixed and
/// the same error type.
PipelineResult run_pipeline(const PipelineConfig& config);

/// Learners compared by the paper-style run, in report order.
std::vector<LearnerSpec> paper_learner_zoo(std::uint64_t seed);

/// The paper-style configuration: replicate_paper mode, balancing on,
/// keep 18, default stack, learner zoo.
PipelineConfig paper_config(std::filesystem::path input, std::filesystem::path output_dir,
                            std::uint64_t seed);

/// Writes `j` with two-space indentation and a trailing newline.
void write_json(const nlohmann::json& j, const std::filesystem::path& path);

}  // namespace riskstack
