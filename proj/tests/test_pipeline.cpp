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

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "riskstack/common.hpp"
#include "riskstack/pipeline.hpp"
#include "riskstack/synthetic.hpp"

using namespace riskstack;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("riskstack_pipeline_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string read_all(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path fixture_csv(const fs::path& dir) {
  const fs::path p = dir / "fixture.csv";
  write_csv(synthetic_brfss(400, 3, 0.25, 0.01), p);
  return p;
}

PipelineConfig small_config(const fs::path& out, PipelineMode mode) {
  PipelineConfig c;
  c.input = fixture_csv(out);
  c.output_dir = out;
  c.mode = mode;
  c.balance = true;
  c.keep = 8;
  c.seed = 11;
  c.resample.seed = 12;
  c.created = "2026-01-01T00:00:00Z";
  StackSpec stack = default_stack_spec(11);
  stack.n_folds = 3;
  c.model = stack;
  c.compare = {{Family::logreg, {}, "", 11}, {Family::gaussian_nb, {}, "", 11}};
  return c;
}

std::vector<std::string> stage_names(const json& manifest) {
  std::vector<std::string> names;
  for (const auto& s : manifest["stages"]) names.push_back(s["name"].get<std::string>());
  return names;
}

}  // namespace

TEST(Pipeline, ReplicateModeOrdersSelectBeforeBalanceBeforeSplit) {
  const fs::path out = scratch("replicate");
  const PipelineResult r = run_pipeline(small_config(out, PipelineMode::replicate_paper));
  const json manifest = json::parse(read_all(out / "manifest.json"));
  EXPECT_EQ(manifest["status"], "ok");
  const std::vector<std::string> expected{"load", "prep", "select", "balance", "split",
                                          "compare", "train", "evaluate", "save"};
  EXPECT_EQ(stage_names(manifest), expected);
  EXPECT_EQ(r.features.size(), 8u);
  for (const char* f : {"prep_report.json", "feature_ranking.json", "resample_report.json",
                        "split.json", "metrics_summary.json", "model.rsm"}) {
    EXPECT_TRUE(fs::exists(out / f)) << f;
  }
  // The split sees the balanced table: its class counts add up to the
  // resampler's output, not to the raw file.
  const json split = json::parse(read_all(out / "split.json"));
  const json resample = json::parse(read_all(out / "resample_report.json"));
  for (int c = 0; c < 2; ++c) {
    EXPECT_EQ(split["train_counts"][c].get<int>() + split["test_counts"][c].get<int>(),
              resample["counts_after"][std::to_string(c)].get<int>());
  }
}

TEST(Pipeline, LeakageSafeFitsEverythingOnTrainOnly) {
  const fs::path out = scratch("safe");
  const PipelineResult r = run_pipeline(small_config(out, PipelineMode::leakage_safe));
  const json manifest = json::parse(read_all(out / "manifest.json"));
  const std::vector<std::string> expected{"load",  "prep",    "split",    "normalize", "select",
                                          "balance", "compare", "train", "evaluate", "save"};
  EXPECT_EQ(stage_names(manifest), expected);
  // Test split keeps its natural imbalance.
  const json split = json::parse(read_all(out / "split.json"));
  EXPECT_GT(split["test_counts"][0].get<int>(), split["test_counts"][1].get<int>());
  EXPECT_EQ(static_cast<std::size_t>(split["test_rows"].get<int>()), r.test_rows);

  const ModelArtifact a = load(out / "model.rsm");
  EXPECT_EQ(a.features, r.features);
  EXPECT_EQ(a.metadata.mode, "leakage-safe");
  EXPECT_EQ(a.checksum, r.artifact.checksum);
  EXPECT_EQ(static_cast<std::size_t>(a.schema.size()), r.features.size());
}

TEST(Pipeline, ManifestRecordsSeedsAndVersion) {
  const fs::path out = scratch("manifest");
  run_pipeline(small_config(out, PipelineMode::leakage_safe));
  const json m = json::parse(read_all(out / "manifest.json"));
  EXPECT_EQ(m["version"], kVersion);
  EXPECT_EQ(m["seed"], 11);
  EXPECT_EQ(m["seeds"]["resample"], 12);
  EXPECT_EQ(m["artifact_format_version"], kArtifactFormatVersion);
  for (const auto& s : m["stages"]) {
    for (const auto& f : s["outputs"]) EXPECT_TRUE(fs::exists(out / f.get<std::string>())) << f;
  }
}

TEST(Pipeline, ByteIdenticalAcrossRunsAndThreadCounts) {
  std::vector<std::string> evals;
  std::vector<std::string> models;
  int run = 0;
  for (int threads : {1, 4, 1}) {
    set_thread_count(threads);
    const fs::path out = scratch("repeat" + std::to_string(run++));
    const PipelineResult r = run_pipeline(small_config(out, PipelineMode::leakage_safe));
    evals.push_back(read_all(out / ("eval_" + r.model + ".json")));
    models.push_back(read_all(out / "model.rsm"));
    EXPECT_FALSE(evals.back().empty());
  }
  set_thread_count(0);
  EXPECT_EQ(evals[0], evals[1]);
  EXPECT_EQ(evals[0], evals[2]);
  EXPECT_EQ(models[0], models[1]);
  EXPECT_EQ(models[0], models[2]);
}

TEST(Pipeline, MissingInputNamesThePathAndStage) {
  PipelineConfig c = small_config(scratch("missing"), PipelineMode::leakage_safe);
  c.input = "/nonexistent/brfss.csv";
  try {
    run_pipeline(c);
    FAIL() << "missing input accepted";
  } catch (const DataError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("/nonexistent/brfss.csv"), std::string::npos) << msg;
    EXPECT_NE(msg.find("load"), std::string::npos) << msg;
  }
  const json m = json::parse(read_all(c.output_dir / "manifest.json"));
  EXPECT_EQ(m["status"], "failed");
}

TEST(Pipeline, PaperConfigShape) {
  const PipelineConfig c = paper_config("in.csv", "out", 42);
  EXPECT_EQ(c.mode, PipelineMode::replicate_paper);
  EXPECT_TRUE(c.balance);
  EXPECT_EQ(c.keep, 18);
  ASSERT_TRUE(std::holds_alternative<StackSpec>(c.model));
  EXPECT_EQ(model_name(c.model), "stack");
  EXPECT_FALSE(c.compare.empty());
}
