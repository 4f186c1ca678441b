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

#include "riskstack/pipeline.hpp"

#include <algorithm>
#include <fstream>

#include <nlohmann/json.hpp>

namespace riskstack {

using nlohmann::json;
namespace fs = std::filesystem;

std::string to_string(PipelineMode mode) {
  return mode == PipelineMode::replicate_paper ? "replicate-paper" : "leakage-safe";
}

PipelineMode pipeline_mode_from_string(const std::string& text) {
  if (text == "replicate-paper" || text == "replicate_paper") return PipelineMode::replicate_paper;
  if (text == "leakage-safe" || text == "leakage_safe") return PipelineMode::leakage_safe;
  throw DataError("unknown pipeline mode '" + text + "' (replicate-paper, leakage-safe)");
}

std::string model_name(const ModelChoice& choice) {
  if (const auto* spec = std::get_if<LearnerSpec>(&choice)) return spec->name();
  return "stack";
}

void write_json(const json& j, const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open output file '" + path.string() + "'");
  out << j.dump(2) << '\n';
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

std::vector<LearnerSpec> paper_learner_zoo(std::uint64_t seed) {
  return {{Family::logreg, {}, "", seed},        {Family::linear_svc, {}, "", seed},
          {Family::gaussian_nb, {}, "", seed},   {Family::knn, {}, "", seed},
          {Family::random_forest, {}, "", seed}, {Family::gbdt, {}, "xgb", seed},
          {Family::gbdt, {}, "lgbm", seed},      {Family::gbdt, {}, "cat", seed},
          {Family::gbdt, {}, "gb", seed}};
}

PipelineConfig paper_config(fs::path input, fs::path output_dir, std::uint64_t seed) {
  PipelineConfig c;
  c.input = std::move(input);
  c.output_dir = std::move(output_dir);
  c.seed = seed;
  c.mode = PipelineMode::replicate_paper;
  c.balance = true;
  c.keep = 18;
  c.resample.seed = derive_seed(seed, 2);
  c.model = default_stack_spec(seed);
  c.compare = paper_learner_zoo(seed);
  return c;
}

namespace {

std::string file_stem(const std::string& name) {
  std::string out = name;
  std::replace(out.begin(), out.end(), ':', '-');
  return out;
}

class StageRunner {
 public:
  explicit StageRunner(std::vector<StageRecord>& log) : log_(log) {}

  template <typename F>
  auto operator()(const std::string& name, F&& body) {
    log_.push_back({name, {}});
    try {
      return body(log_.back());
    } catch (const TrainingError& e) {
      throw TrainingError(prefix(name) + e.what());
    } catch (const FormatError& e) {
      throw FormatError(prefix(name) + e.what());
    } catch (const DataError& e) {
      throw DataError(prefix(name) + e.what());
    } catch (const Error& e) {
      throw Error(prefix(name) + e.what());
    }
  }

 private:
  static std::string prefix(const std::string& name) { return "stage '" + name + "' failed: "; }
  std::vector<StageRecord>& log_;
};

std::vector<Index> positions_of(const std::vector<std::string>& all,
                                const std::vector<std::string>& chosen) {
  std::vector<Index> out;
  for (const auto& name : chosen) {
    out.push_back(static_cast<Index>(std::find(all.begin(), all.end(), name) - all.begin()));
  }
  return out;
}

json split_json(const Dataset& train, const Dataset& test) {
  const auto tr = train.class_counts();
  const auto te = test.class_counts();
  return {{"train_rows", train.rows()},
          {"test_rows", test.rows()},
          {"train_counts", {tr[0], tr[1]}},
          {"test_counts", {te[0], te[1]}}};
}

json manifest_json(const PipelineConfig& c, const std::vector<StageRecord>& stages,
                   const std::string& status, const std::string& error) {
  json stage_list = json::array();
  for (const auto& s : stages) stage_list.push_back({{"name", s.name}, {"outputs", s.outputs}});
  json m{{"tool", "riskstack"},
         {"version", kVersion},
         {"artifact_format_version", kArtifactFormatVersion},
         {"status", status},
         {"mode", to_string(c.mode)},
         {"seed", c.seed},
         {"seeds",
          {{"split", derive_seed(c.seed, 1)}, {"resample", c.resample.seed}, {"model", c.seed}}},
         {"input", c.input.string()},
         {"label", c.label},
         {"deduplicate", c.deduplicate},
         {"balance", c.balance},
         {"keep", c.keep},
         {"test_fraction", c.test_fraction},
         {"model", model_name(c.model)},
         {"stages", stage_list}};
  if (!error.empty()) m["error"] = error;
  return m;
}

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& config) {
  if (!(config.test_fraction > 0.0 && config.test_fraction < 1.0)) {
    throw DataError("test fraction must be in (0, 1)");
  }
  if (config.keep < 0) throw DataError("keep must be >= 0");
  fs::create_directories(config.output_dir);
  const fs::path out = config.output_dir;

  PipelineResult result;
  StageRunner stage(result.stages);
  try {
    Dataset loaded = stage("load", [&](StageRecord&) { return load_csv(config.input, config.label); });

    Dataset train;
    Dataset test;
    Scaler scaler;
    std::vector<std::string> scaler_names;
    std::vector<FeatureSchema> raw_schema_all;

    auto prep = [&] {
      json report{{"rows_in", loaded.rows()}, {"columns", loaded.cols()}};
      Dataset d = loaded;
      std::size_t removed = 0;
      if (config.deduplicate) {
        auto dd = deduplicate(d);
        removed = dd.removed;
        d = std::move(dd.data);
      }
      const bool had_missing = d.has_missing();
      d = impute(d);
      report["duplicates_removed"] = removed;
      report["imputed"] = had_missing;
      report["rows_out"] = d.rows();
      const auto counts = d.class_counts();
      report["class_counts"] = {counts[0], counts[1]};
      return std::pair{std::move(d), std::move(report)};
    };

    auto select = [&](const Dataset& fit_on) {
      return stage("select", [&](StageRecord& rec) {
        std::vector<std::string> chosen = fit_on.feature_names();
        if (config.keep > 0 && config.keep < fit_on.cols()) {
          const FeatureRanking ranking = rank_features(fit_on, config.keep);
          chosen = ranking.selected;
          write_json(to_json(ranking), out / "feature_ranking.json");
          rec.outputs.push_back("feature_ranking.json");
        }
        return chosen;
      });
    };

    auto balance_train = [&](const Dataset& d) {
      return stage("balance", [&](StageRecord& rec) {
        Resampled r = balance(d, config.resample);
        write_json(to_json(r.report), out / "resample_report.json");
        rec.outputs.push_back("resample_report.json");
        return std::move(r.data);
      });
    };

    std::vector<std::string> selected;
    if (config.mode == PipelineMode::replicate_paper) {
      auto [prepped, report] = stage("prep", [&](StageRecord& rec) {
        auto pr = prep();
        Normalized n = normalize(pr.first);
        pr.second["scaler"] = to_json(n.scaler);
        write_json(pr.second, out / "prep_report.json");
        rec.outputs.push_back("prep_report.json");
        raw_schema_all = pr.first.schema;
        scaler = n.scaler;
        return std::pair{std::move(n.data), std::move(pr.second)};
      });
      scaler_names = prepped.feature_names();
      selected = select(prepped);
      Dataset data = prepped.select_columns(selected);
      if (config.balance) data = balance_train(data);
      auto parts = stage("split", [&](StageRecord& rec) {
        SplitResult s = split(data, config.test_fraction, true, derive_seed(config.seed, 1));
        write_json(split_json(s.train, s.test), out / "split.json");
        rec.outputs.push_back("split.json");
        return s;
      });
      train = std::move(parts.train);
      test = std::move(parts.test);
    } else {
      auto [prepped, report] = stage("prep", [&](StageRecord& rec) {
        auto pr = prep();
        write_json(pr.second, out / "prep_report.json");
        rec.outputs.push_back("prep_report.json");
        return pr;
      });
      auto parts = stage("split", [&](StageRecord& rec) {
        SplitResult s = split(prepped, config.test_fraction, true, derive_seed(config.seed, 1));
        write_json(split_json(s.train, s.test), out / "split.json");
        rec.outputs.push_back("split.json");
        return s;
      });
      stage("normalize", [&](StageRecord& rec) {
        Normalized n = normalize(parts.train);
        scaler = n.scaler;
        const auto names = parts.train.feature_names();
        raw_schema_all = infer_schema(parts.train.features, names);
        train = std::move(n.data);
        test = parts.test;
        test.features = scaler.transform(parts.test.features);
        write_json(to_json(scaler), out / "scaler.json");
        rec.outputs.push_back("scaler.json");
        return 0;
      });
      scaler_names = train.feature_names();
      selected = select(train);
      train = train.select_columns(selected);
      test = test.select_columns(selected);
      if (config.balance) train = balance_train(train);
    }
    result.features = selected;
    result.train_rows = static_cast<std::size_t>(train.rows());
    result.test_rows = static_cast<std::size_t>(test.rows());

    auto evaluate_and_write = [&](StageRecord& rec, const std::string& name, const Vector& prob) {
      EvalReport report = evaluate(test.labels, prob);
      json j = to_json(report);
      j["model"] = name;
      j["mode"] = to_string(config.mode);
      j["seed"] = config.seed;
      j["test_rows"] = test.rows();
      const std::string stem = file_stem(name);
      write_json(j, out / ("eval_" + stem + ".json"));
      write_curve_csv(report.roc, out / ("roc_" + stem + ".csv"));
      write_curve_csv(report.pr, out / ("pr_" + stem + ".csv"));
      rec.outputs.insert(rec.outputs.end(), {"eval_" + stem + ".json", "roc_" + stem + ".csv",
                                             "pr_" + stem + ".csv"});
      return report;
    };

    if (!config.compare.empty()) {
      stage("compare", [&](StageRecord& rec) {
        for (const auto& spec : config.compare) {
          const TrainedModel m = fit(spec, train);
          result.comparisons[spec.name()] =
              evaluate_and_write(rec, spec.name(), predict_proba(m, test.features));
        }
        return 0;
      });
    }

    ArtifactModel trained = stage("train", [&](StageRecord&) -> ArtifactModel {
      if (const auto* spec = std::get_if<LearnerSpec>(&config.model)) return fit(*spec, train);
      return fit_stack(std::get<StackSpec>(config.model), train);
    });

    ModelArtifact artifact;
    artifact.model = std::move(trained);
    artifact.features = selected;
    artifact.scaler = scaler.subset(positions_of(scaler_names, selected));
    for (Index p : positions_of(scaler_names, selected)) {
      artifact.schema.push_back(raw_schema_all[static_cast<std::size_t>(p)]);
    }
    result.model = model_name(config.model);

    result.model_eval = stage("evaluate", [&](StageRecord& rec) {
      EvalReport r = evaluate_and_write(rec, result.model, artifact.predict_proba(test.features));
      json summary = json::object();
      auto row = [](const EvalReport& e) {
        return json{{"accuracy", e.scalars.accuracy}, {"precision", e.scalars.precision},
                    {"recall", e.scalars.recall},     {"f1", e.scalars.f1},
                    {"roc_auc", e.roc_auc},           {"pr_auc", e.average_precision}};
      };
      for (const auto& [name, e] : result.comparisons) summary[name] = row(e);
      summary[result.model] = row(r);
      write_json(summary, out / "metrics_summary.json");
      rec.outputs.push_back("metrics_summary.json");
      return r;
    });

    if (config.write_artifact) {
      stage("save", [&](StageRecord& rec) {
        const Index keep_rows = std::min<Index>(test.rows(), std::max(0, config.importance_rows));
        std::vector<Index> rows = iota_indices(test.rows());
        Rng rng(derive_seed(config.seed, 7));
        rng.shuffle(rows);
        rows.resize(static_cast<std::size_t>(keep_rows));
        std::sort(rows.begin(), rows.end());
        const Dataset slice = test.select_rows(rows);
        artifact.holdout_features = slice.features;
        artifact.holdout_labels = slice.labels;
        artifact.metadata.seed = config.seed;
        artifact.metadata.created = config.created;
        artifact.metadata.dataset_fingerprint = dataset_fingerprint(train);
        artifact.metadata.training_rows = static_cast<std::size_t>(train.rows());
        artifact.metadata.mode = to_string(config.mode);
        result.artifact = save(artifact, out / "model.rsm");
        rec.outputs.push_back("model.rsm");
        return 0;
      });
    }
  } catch (const Error& e) {
    write_json(manifest_json(config, result.stages, "failed", e.what()), out / "manifest.json");
    throw;
  }
  write_json(manifest_json(config, result.stages, "ok", ""), out / "manifest.json");
  return result;
}

}  // namespace riskstack
