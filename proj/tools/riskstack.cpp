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

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "riskstack/pipeline.hpp"
#include "riskstack/service.hpp"
#include "riskstack/synthetic.hpp"
#include "riskstack/tuning.hpp"

namespace fs = std::filesystem;
using namespace riskstack;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitTraining = 3;

LearnerSpec parse_learner(const std::string& text, const std::vector<std::string>& params,
                          std::uint64_t seed) {
  LearnerSpec spec;
  const auto colon = text.find(':');
  spec.family = family_from_string(text.substr(0, colon));
  if (colon != std::string::npos) spec.preset = text.substr(colon + 1);
  spec.seed = seed;
  for (const auto& p : params) {
    const auto eq = p.find('=');
    if (eq == std::string::npos) throw DataError("parameter '" + p + "' is not name=value");
    try {
      spec.params[p.substr(0, eq)] = std::stod(p.substr(eq + 1));
    } catch (const std::logic_error&) {
      throw DataError("parameter '" + p + "' has a non-numeric value");
    }
  }
  resolve_params(spec);
  return spec;
}

std::string timestamp() {
  std::time_t t = std::time(nullptr);
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) t = std::strtoll(epoch, nullptr, 10);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

void print_eval(const std::string& name, const EvalReport& r) {
  std::printf("%-22s acc %.4f  prec %.4f  rec %.4f  f1 %.4f  roc_auc %.4f  pr_auc %.4f\n",
              name.c_str(), r.scalars.accuracy, r.scalars.precision, r.scalars.recall,
              r.scalars.f1, r.roc_auc, r.average_precision);
}

void print_result(const PipelineResult& result) {
  for (const auto& [name, r] : result.comparisons) print_eval(name, r);
  print_eval(result.model, result.model_eval);
  if (!result.artifact.checksum.empty()) {
    std::printf("artifact %s (sha256 %s)\n", result.artifact.path.string().c_str(),
                result.artifact.checksum.substr(0, 12).c_str());
  }
}

Dataset prepared(const fs::path& input, const std::string& label, bool dedupe) {
  Dataset d = load_csv(input, label);
  if (dedupe) d = deduplicate(d).data;
  return normalize(impute(d)).data;
}

struct Common {
  std::string input;
  std::string label = "Diabetes_binary";
  std::string out = "riskstack-out";
  bool no_dedupe = false;
};

void add_common(CLI::App* cmd, Common& c, bool needs_out = true) {
  cmd->add_option("-i,--input", c.input, "Input CSV")->required();
  cmd->add_option("--label", c.label, "Label column")->capture_default_str();
  if (needs_out) cmd->add_option("-o,--out", c.out, "Output directory")->capture_default_str();
  cmd->add_flag("--no-dedupe", c.no_dedupe, "Keep duplicate rows");
}

struct PipelineFlags {
  std::string mode = "leakage-safe";
  bool balance = false;
  int keep = 0;
  double test_fraction = 0.2;
  int smote_k = 5;
  double ratio = 1.0;
  int importance_rows = 2000;
};

void add_pipeline_flags(CLI::App* cmd, PipelineFlags& f) {
  cmd->add_option("--mode", f.mode, "replicate-paper or leakage-safe")->capture_default_str();
  cmd->add_flag("--balance", f.balance, "SMOTE + Tomek balancing");
  cmd->add_option("--keep", f.keep, "Features kept by selection (0 = all)")->capture_default_str();
  cmd->add_option("--test-fraction", f.test_fraction, "Held-out share")->capture_default_str();
  cmd->add_option("--smote-k", f.smote_k, "SMOTE neighbours")->capture_default_str();
  cmd->add_option("--ratio", f.ratio, "Minority/majority ratio after SMOTE")->capture_default_str();
  cmd->add_option("--importance-rows", f.importance_rows, "Held-out rows bundled for importance")
      ->capture_default_str();
}

PipelineConfig make_config(const Common& c, const PipelineFlags& f, std::uint64_t seed) {
  PipelineConfig config;
  config.input = c.input;
  config.label = c.label;
  config.output_dir = c.out;
  config.deduplicate = !c.no_dedupe;
  config.mode = pipeline_mode_from_string(f.mode);
  config.balance = f.balance;
  config.keep = f.keep;
  config.test_fraction = f.test_fraction;
  config.resample.smote_k = f.smote_k;
  config.resample.target_ratio = f.ratio;
  config.resample.seed = derive_seed(seed, 2);
  config.importance_rows = f.importance_rows;
  config.seed = seed;
  config.created = timestamp();
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"riskstack: tabular diabetes-risk modelling toolkit"};
  app.set_config("--config", "", "INI/TOML file with option values");
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  std::uint64_t seed = 42;
  app.add_option("--threads", threads, "Worker threads (results do not depend on it)");
  app.add_option("--seed", seed, "Master seed")->capture_default_str();

  Common common;
  PipelineFlags flags;

  auto* profile_cmd = app.add_subcommand("profile", "Distributions, correlation, VIF");
  add_common(profile_cmd, common);
  int bins = 10;
  profile_cmd->add_option("--bins", bins, "Histogram bins")->capture_default_str();

  auto* prep_cmd = app.add_subcommand("prep", "Deduplicate, impute, normalize");
  add_common(prep_cmd, common);

  auto* balance_cmd = app.add_subcommand("balance", "SMOTE followed by Tomek-link cleaning");
  add_common(balance_cmd, common);
  add_pipeline_flags(balance_cmd, flags);

  auto* select_cmd = app.add_subcommand("select", "Rank features by MI, RFE and LASSO");
  add_common(select_cmd, common);
  int keep = 18;
  select_cmd->add_option("--keep", keep, "Features to keep")->capture_default_str();

  std::string learner = "gbdt:xgb";
  std::vector<std::string> params;
  auto* train_cmd = app.add_subcommand("train", "Train one learner, evaluate, save artifact");
  add_common(train_cmd, common);
  add_pipeline_flags(train_cmd, flags);
  std::string family;
  std::string preset;
  train_cmd->add_option("--family", family, "logreg, linear_svc, gaussian_nb, knn, tree, "
                                            "random_forest, gbdt");
  train_cmd->add_option("--preset", preset, "gbdt preset: xgb, lgbm, cat, gb");
  train_cmd->add_option("--learner", learner, "family[:preset] shorthand")->capture_default_str();
  train_cmd->add_option("--param", params, "Hyperparameter override name=value (repeatable)");

  auto* stack_cmd = app.add_subcommand("stack", "Train a stacking ensemble, evaluate, save");
  add_common(stack_cmd, common);
  add_pipeline_flags(stack_cmd, flags);
  std::vector<std::string> bases{"gbdt:xgb", "knn"};
  std::string meta = "gbdt:lgbm";
  int folds = 5;
  bool passthrough = false;
  stack_cmd->add_option("--base", bases, "Base learner family[:preset] (repeatable)")
      ->capture_default_str();
  stack_cmd->add_option("--meta", meta, "Meta learner")->capture_default_str();
  stack_cmd->add_option("--folds", folds, "Out-of-fold folds")->capture_default_str();
  stack_cmd->add_flag("--passthrough", passthrough, "Feed original features to the meta learner");

  auto* tune_cmd = app.add_subcommand("tune", "Random search then refinement grid");
  add_common(tune_cmd, common);
  std::string tune_learner = "knn";
  int budget = 25;
  std::string metric = "roc_auc";
  double tune_test_fraction = 0.2;
  tune_cmd->add_option("--learner", tune_learner, "family[:preset]")->capture_default_str();
  tune_cmd->add_option("--budget", budget, "Random-search candidates")->capture_default_str();
  tune_cmd->add_option("--folds", folds, "Cross-validation folds")->capture_default_str();
  tune_cmd->add_option("--metric", metric, "roc_auc or accuracy")->capture_default_str();
  tune_cmd->add_option("--test-fraction", tune_test_fraction, "Held-out share excluded from tuning")
      ->capture_default_str();

  auto* eval_cmd = app.add_subcommand("evaluate", "Score a saved artifact on a labelled CSV");
  add_common(eval_cmd, common);
  std::string model_path;
  eval_cmd->add_option("-m,--model", model_path, "Artifact file")->required();

  auto* paper_cmd = app.add_subcommand("reproduce-paper",
                                       "Replicate-paper pipeline: default stack plus learner zoo");
  add_common(paper_cmd, common);
  bool no_compare = false;
  paper_cmd->add_flag("--no-compare", no_compare, "Skip the individual learners");
  int paper_importance_rows = 2000;
  paper_cmd->add_option("--importance-rows", paper_importance_rows)->capture_default_str();

  auto* serve_cmd = app.add_subcommand("serve", "HTTP prediction service");
  ServiceOptions service;
  std::string serve_model;
  serve_cmd->add_option("-m,--model", serve_model, "Artifact file")->required();
  serve_cmd->add_option("--host", service.host)->capture_default_str();
  serve_cmd->add_option("--port", service.port)->capture_default_str();
  serve_cmd->add_option("--importance-rows", service.importance_rows)->capture_default_str();
  serve_cmd->add_option("--allow-origin", service.allow_origin, "CORS origin for the web UI");

  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic survey-shaped CSV");
  Index synth_rows = 2000;
  std::string synth_out;
  double missing = 0.0;
  synth_cmd->add_option("--rows", synth_rows)->capture_default_str();
  synth_cmd->add_option("-o,--output", synth_out, "CSV path")->required();
  synth_cmd->add_option("--missing-rate", missing)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  set_thread_count(static_cast<int>(threads));
  try {
    if (*profile_cmd) {
      Dataset d = load_csv(common.input, common.label);
      if (!common.no_dedupe) d = deduplicate(d).data;
      fs::create_directories(common.out);
      write_json(to_json(profile(impute(d), bins)), fs::path(common.out) / "profile.json");
      std::printf("profile of %ld rows written to %s\n", static_cast<long>(d.rows()),
                  (fs::path(common.out) / "profile.json").string().c_str());
    } else if (*prep_cmd) {
      Dataset d = load_csv(common.input, common.label);
      nlohmann::json report{{"rows_in", d.rows()}};
      std::size_t removed = 0;
      if (!common.no_dedupe) {
        auto dd = deduplicate(d);
        removed = dd.removed;
        d = std::move(dd.data);
      }
      Normalized n = normalize(impute(d));
      report["duplicates_removed"] = removed;
      report["rows_out"] = n.data.rows();
      report["scaler"] = to_json(n.scaler);
      fs::create_directories(common.out);
      write_csv(n.data, fs::path(common.out) / "prepared.csv");
      write_json(report, fs::path(common.out) / "prep_report.json");
      std::printf("%ld rows prepared (%zu duplicates removed)\n",
                  static_cast<long>(n.data.rows()), removed);
    } else if (*balance_cmd) {
      Dataset d = load_csv(common.input, common.label);
      ResampleConfig rc;
      rc.smote_k = flags.smote_k;
      rc.target_ratio = flags.ratio;
      rc.seed = derive_seed(seed, 2);
      Resampled r = balance(impute(d), rc);
      fs::create_directories(common.out);
      write_csv(r.data, fs::path(common.out) / "balanced.csv");
      write_json(to_json(r.report), fs::path(common.out) / "resample_report.json");
      std::printf("%ld -> %ld rows\n", static_cast<long>(d.rows()), static_cast<long>(r.data.rows()));
    } else if (*select_cmd) {
      const FeatureRanking ranking =
          rank_features(prepared(common.input, common.label, !common.no_dedupe), keep);
      fs::create_directories(common.out);
      write_json(to_json(ranking), fs::path(common.out) / "feature_ranking.json");
      std::fputs(format_table(ranking).c_str(), stdout);
    } else if (*train_cmd) {
      std::string text = learner;
      if (!family.empty()) text = preset.empty() ? family : family + ":" + preset;
      PipelineConfig config = make_config(common, flags, seed);
      config.model = parse_learner(text, params, seed);
      print_result(run_pipeline(config));
    } else if (*stack_cmd) {
      PipelineConfig config = make_config(common, flags, seed);
      StackSpec spec;
      for (const auto& b : bases) spec.bases.push_back(parse_learner(b, {}, seed));
      spec.meta = parse_learner(meta, {}, seed);
      spec.n_folds = folds;
      spec.passthrough = passthrough;
      spec.seed = seed;
      spec.validate();
      config.model = spec;
      print_result(run_pipeline(config));
    } else if (*tune_cmd) {
      const Dataset d = prepared(common.input, common.label, !common.no_dedupe);
      const SplitResult s = split(d, tune_test_fraction, true, derive_seed(seed, 1));
      const LearnerSpec base = parse_learner(tune_learner, {}, seed);
      CvConfig cv;
      cv.folds = folds;
      cv.metric = metric_from_string(metric);
      cv.seed = derive_seed(seed, 4);
      const TuneResult t =
          tune(base, default_search_space(base.family), budget, s.train, cv, derive_seed(seed, 5));
      fs::create_directories(common.out);
      nlohmann::json j = to_json(t);
      j["learner"] = base.name();
      j["metric"] = to_string(cv.metric);
      write_json(j, fs::path(common.out) / "tune_trace.json");
      std::printf("best %s = %.6f with %s\n", to_string(cv.metric).c_str(), t.best_mean,
                  nlohmann::json(t.best_params).dump().c_str());
    } else if (*eval_cmd) {
      const ModelArtifact a = load(model_path);
      const Dataset d = impute(load_csv(common.input, common.label)).select_columns(a.features);
      const EvalReport r = evaluate(d.labels, a.predict_raw(d.features));
      fs::create_directories(common.out);
      nlohmann::json j = to_json(r);
      j["model"] = a.model_name();
      j["artifact_checksum"] = a.checksum;
      write_json(j, fs::path(common.out) / "eval.json");
      write_curve_csv(r.roc, fs::path(common.out) / "roc.csv");
      write_curve_csv(r.pr, fs::path(common.out) / "pr.csv");
      print_eval(a.model_name(), r);
    } else if (*paper_cmd) {
      PipelineConfig config = paper_config(common.input, common.out, seed);
      config.label = common.label;
      config.deduplicate = !common.no_dedupe;
      config.importance_rows = paper_importance_rows;
      config.created = timestamp();
      if (no_compare) config.compare.clear();
      print_result(run_pipeline(config));
    } else if (*serve_cmd) {
      service.model = serve_model;
      return run_service(service);
    } else if (*synth_cmd) {
      write_csv(synthetic_brfss(synth_rows, seed, 0.14, missing), synth_out);
    }
  } catch (const TrainingError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitTraining;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitData;
  }
  return 0;
}
