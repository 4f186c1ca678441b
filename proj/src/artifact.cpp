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

#include "riskstack/artifact.hpp"

#include <bit>
#include <charconv>
#include <fstream>
#include <sstream>

#include <openssl/evp.h>

namespace riskstack {

using nlohmann::json;

std::string encode_real(double value) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::uint64_t bits = std::bit_cast<std::uint64_t>(value);
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kDigits[bits & 0xf];
    bits >>= 4;
  }
  return out;
}

double decode_real(std::string_view text) {
  std::uint64_t bits = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), bits, 16);
  if (text.size() != 16 || ec != std::errc() || ptr != text.data() + text.size()) {
    throw FormatError("bad real encoding '" + std::string(text) + "'");
  }
  return std::bit_cast<double>(bits);
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw Error("sha256 failed");
  }
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < length; ++i) {
    out.push_back(kDigits[digest[i] >> 4]);
    out.push_back(kDigits[digest[i] & 0xf]);
  }
  return out;
}

std::string dataset_fingerprint(const Dataset& data) {
  std::string bytes;
  for (const auto& name : data.feature_names()) bytes += name + '\n';
  bytes.append(reinterpret_cast<const char*>(data.features.data()),
               static_cast<std::size_t>(data.features.size()) * sizeof(double));
  for (Index i = 0; i < data.labels.size(); ++i) bytes.push_back(data.labels(i) ? '1' : '0');
  return sha256_hex(bytes);
}

namespace {

json reals(const Vector& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(encode_real(v(i)));
  return out;
}

Vector reals_from(const json& j) {
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Index>(i)) = decode_real(j[i].get<std::string>());
  return v;
}

json matrix(const Matrix& m) {
  json data = json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) data.push_back(encode_real(m(r, c)));
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

Matrix matrix_from(const json& j) {
  const auto rows = j.at("rows").get<Index>();
  const auto cols = j.at("cols").get<Index>();
  const json& data = j.at("data");
  if (data.size() != static_cast<std::size_t>(rows * cols)) throw FormatError("matrix size mismatch");
  Matrix m(rows, cols);
  std::size_t k = 0;
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) m(r, c) = decode_real(data[k++].get<std::string>());
  }
  return m;
}

json params_json(const Hyperparams& params) {
  json out = json::object();
  for (const auto& [name, value] : params) out[name] = encode_real(value);
  return out;
}

Hyperparams params_from(const json& j) {
  Hyperparams out;
  for (const auto& [name, value] : j.items()) out[name] = decode_real(value.get<std::string>());
  return out;
}

json spec_json(const LearnerSpec& spec) {
  return {{"family", to_string(spec.family)},
          {"preset", spec.preset},
          {"seed", spec.seed},
          {"params", params_json(spec.params)}};
}

LearnerSpec spec_from(const json& j) {
  LearnerSpec spec;
  spec.family = family_from_string(j.at("family").get<std::string>());
  spec.preset = j.at("preset").get<std::string>();
  spec.seed = j.at("seed").get<std::uint64_t>();
  spec.params = params_from(j.at("params"));
  return spec;
}

json payload_json(const ModelPayload& payload) {
  return std::visit(
      [](const auto& p) -> json {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, LinearPayload>) {
          return {{"type", "linear"},
                  {"weights", reals(p.weights)},
                  {"intercept", encode_real(p.intercept)},
                  {"link_scale", encode_real(p.link_scale)},
                  {"link_offset", encode_real(p.link_offset)}};
        } else if constexpr (std::is_same_v<T, NaiveBayesPayload>) {
          return {{"type", "gaussian_nb"},
                  {"log_prior", {encode_real(p.log_prior[0]), encode_real(p.log_prior[1])}},
                  {"mean", matrix(p.mean)},
                  {"variance", matrix(p.variance)}};
        } else if constexpr (std::is_same_v<T, KnnPayload>) {
          std::vector<int> labels(p.labels.begin(), p.labels.end());
          return {{"type", "knn"},
                  {"k", p.k},
                  {"points", matrix(Matrix(p.index->points()))},
                  {"labels", labels}};
        } else {
          json trees = json::array();
          for (const auto& t : p.trees) {
            json feature = json::array(), threshold = json::array(), left = json::array(),
                 right = json::array(), value = json::array(), gain = json::array();
            for (const auto& n : t.nodes) {
              feature.push_back(n.feature);
              threshold.push_back(encode_real(n.threshold));
              left.push_back(n.left);
              right.push_back(n.right);
              value.push_back(encode_real(n.value));
              gain.push_back(encode_real(n.gain));
            }
            trees.push_back({{"feature", feature}, {"threshold", threshold}, {"left", left},
                             {"right", right}, {"value", value}, {"gain", gain}});
          }
          return {{"type", "trees"},
                  {"learning_rate", encode_real(p.learning_rate)},
                  {"base_score", encode_real(p.base_score)},
                  {"boosted", p.boosted},
                  {"trees", trees}};
        }
      },
      payload);
}

ModelPayload payload_from(const json& j) {
  const auto type = j.at("type").get<std::string>();
  if (type == "linear") {
    LinearPayload p;
    p.weights = reals_from(j.at("weights"));
    p.intercept = decode_real(j.at("intercept").get<std::string>());
    p.link_scale = decode_real(j.at("link_scale").get<std::string>());
    p.link_offset = decode_real(j.at("link_offset").get<std::string>());
    return p;
  }
  if (type == "gaussian_nb") {
    NaiveBayesPayload p;
    p.log_prior[0] = decode_real(j.at("log_prior").at(0).get<std::string>());
    p.log_prior[1] = decode_real(j.at("log_prior").at(1).get<std::string>());
    p.mean = matrix_from(j.at("mean"));
    p.variance = matrix_from(j.at("variance"));
    return p;
  }
  if (type == "knn") {
    KnnPayload p;
    p.k = j.at("k").get<int>();
    p.index = std::make_shared<const KdTree>(RowMatrix(matrix_from(j.at("points"))));
    const auto labels = j.at("labels").get<std::vector<int>>();
    p.labels = Eigen::Map<const LabelVector>(labels.data(), static_cast<Index>(labels.size()));
    return p;
  }
  if (type == "trees") {
    TreeEnsemble p;
    p.learning_rate = decode_real(j.at("learning_rate").get<std::string>());
    p.base_score = decode_real(j.at("base_score").get<std::string>());
    p.boosted = j.at("boosted").get<bool>();
    for (const auto& t : j.at("trees")) {
      DecisionTree tree;
      const std::size_t count = t.at("feature").size();
      tree.nodes.resize(count);
      for (std::size_t i = 0; i < count; ++i) {
        TreeNode& n = tree.nodes[i];
        n.feature = t["feature"][i].get<int>();
        n.threshold = decode_real(t["threshold"][i].get<std::string>());
        n.left = t["left"][i].get<int>();
        n.right = t["right"][i].get<int>();
        n.value = decode_real(t["value"][i].get<std::string>());
        n.gain = decode_real(t["gain"][i].get<std::string>());
      }
      p.trees.push_back(std::move(tree));
    }
    return p;
  }
  throw FormatError("unknown model payload type '" + type + "'");
}

json schema_json(const FeatureSchema& s) {
  return {{"name", s.name},
          {"kind", to_string(s.kind)},
          {"min", encode_real(s.observed_min)},
          {"max", encode_real(s.observed_max)}};
}

FeatureSchema schema_from(const json& j) {
  FeatureSchema s;
  s.name = j.at("name").get<std::string>();
  s.kind = feature_kind_from_string(j.at("kind").get<std::string>());
  s.observed_min = decode_real(j.at("min").get<std::string>());
  s.observed_max = decode_real(j.at("max").get<std::string>());
  return s;
}

}  // namespace

json model_to_json(const TrainedModel& model) {
  return {{"family", to_string(model.family)},
          {"preset", model.preset},
          {"seed", model.seed},
          {"params", params_json(model.params)},
          {"features", model.features},
          {"training_rows", model.training_rows},
          {"payload", payload_json(model.payload)}};
}

TrainedModel model_from_json(const json& j) {
  TrainedModel m;
  m.family = family_from_string(j.at("family").get<std::string>());
  m.preset = j.at("preset").get<std::string>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.params = params_from(j.at("params"));
  m.features = j.at("features").get<std::vector<std::string>>();
  m.training_rows = j.at("training_rows").get<std::size_t>();
  m.payload = payload_from(j.at("payload"));
  return m;
}

Vector ModelArtifact::predict_proba(const Matrix& model_input) const {
  if (const auto* single = std::get_if<TrainedModel>(&model)) {
    return riskstack::predict_proba(*single, model_input);
  }
  return predict_stack(std::get<StackModel>(model), model_input);
}

Vector ModelArtifact::predict_raw(const Matrix& raw) const {
  return predict_proba(scaler.transform(raw));
}

std::string ModelArtifact::model_name() const {
  if (const auto* single = std::get_if<TrainedModel>(&model)) {
    return single->preset.empty() ? to_string(single->family)
                                  : to_string(single->family) + ":" + single->preset;
  }
  const auto& stack = std::get<StackModel>(model);
  std::string name = "stack(";
  for (std::size_t b = 0; b < stack.spec.bases.size(); ++b) {
    name += (b ? "+" : "") + stack.spec.bases[b].name();
  }
  return name + " -> " + stack.spec.meta.name() + ")";
}

std::string serialize(const ModelArtifact& artifact) {
  json payload;
  if (const auto* single = std::get_if<TrainedModel>(&artifact.model)) {
    payload["kind"] = "single";
    payload["model"] = model_to_json(*single);
  } else {
    const auto& stack = std::get<StackModel>(artifact.model);
    json bases = json::array();
    json base_specs = json::array();
    for (const auto& b : stack.bases) bases.push_back(model_to_json(b));
    for (const auto& s : stack.spec.bases) base_specs.push_back(spec_json(s));
    payload["kind"] = "stack";
    payload["stack"] = {{"spec",
                         {{"bases", base_specs},
                          {"meta", spec_json(stack.spec.meta)},
                          {"n_folds", stack.spec.n_folds},
                          {"passthrough", stack.spec.passthrough},
                          {"seed", stack.spec.seed}}},
                        {"bases", bases},
                        {"meta", model_to_json(stack.meta)},
                        {"features", stack.features}};
  }
  payload["features"] = artifact.features;
  json schema = json::array();
  for (const auto& s : artifact.schema) schema.push_back(schema_json(s));
  payload["schema"] = schema;
  payload["scaler"] = {{"method", artifact.scaler.method},
                       {"min", reals(artifact.scaler.min)},
                       {"max", reals(artifact.scaler.max)}};
  payload["metadata"] = {{"seed", artifact.metadata.seed},
                         {"created", artifact.metadata.created},
                         {"dataset_fingerprint", artifact.metadata.dataset_fingerprint},
                         {"training_rows", artifact.metadata.training_rows},
                         {"mode", artifact.metadata.mode},
                         {"extra", artifact.metadata.extra}};
  std::vector<int> holdout_labels(artifact.holdout_labels.begin(), artifact.holdout_labels.end());
  payload["holdout"] = {{"features", matrix(artifact.holdout_features)},
                        {"labels", holdout_labels}};

  const std::string body = payload.dump();
  const json header{{"format", kArtifactFormat},
                    {"format_version", artifact.format_version},
                    {"checksum", "sha256:" + sha256_hex(body)},
                    {"payload_bytes", body.size()}};
  return header.dump() + "\n" + body + "\n";
}

ModelArtifact deserialize(std::string_view text) {
  const auto newline = text.find('\n');
  if (newline == std::string_view::npos) throw FormatError("artifact has no payload line");
  json header;
  try {
    header = json::parse(text.substr(0, newline));
  } catch (const json::exception& e) {
    throw FormatError(std::string("artifact header is not JSON: ") + e.what());
  }
  if (header.value("format", "") != kArtifactFormat) throw FormatError("not a riskstack model artifact");
  const int version = header.value("format_version", -1);
  if (version != kArtifactFormatVersion) {
    throw FormatError("unsupported version " + std::to_string(version) + " (expected " +
                      std::to_string(kArtifactFormatVersion) + ")");
  }
  std::string_view body = text.substr(newline + 1);
  if (!body.empty() && body.back() == '\n') body.remove_suffix(1);
  const std::string digest = sha256_hex(body);
  if (header.value("checksum", "") != "sha256:" + digest) {
    throw FormatError("checksum mismatch: artifact payload is corrupted");
  }

  ModelArtifact a;
  a.format_version = version;
  a.checksum = digest;
  try {
    const json payload = json::parse(body);
    const auto kind = payload.at("kind").get<std::string>();
    if (kind == "single") {
      a.model = model_from_json(payload.at("model"));
    } else if (kind == "stack") {
      const json& s = payload.at("stack");
      StackModel stack;
      for (const auto& b : s.at("spec").at("bases")) stack.spec.bases.push_back(spec_from(b));
      stack.spec.meta = spec_from(s.at("spec").at("meta"));
      stack.spec.n_folds = s.at("spec").at("n_folds").get<int>();
      stack.spec.passthrough = s.at("spec").at("passthrough").get<bool>();
      stack.spec.seed = s.at("spec").at("seed").get<std::uint64_t>();
      for (const auto& b : s.at("bases")) stack.bases.push_back(model_from_json(b));
      stack.meta = model_from_json(s.at("meta"));
      stack.features = s.at("features").get<std::vector<std::string>>();
      a.model = std::move(stack);
    } else {
      throw FormatError("unknown artifact kind '" + kind + "'");
    }
    a.features = payload.at("features").get<std::vector<std::string>>();
    for (const auto& s : payload.at("schema")) a.schema.push_back(schema_from(s));
    a.scaler.method = payload.at("scaler").at("method").get<std::string>();
    a.scaler.min = reals_from(payload.at("scaler").at("min"));
    a.scaler.max = reals_from(payload.at("scaler").at("max"));
    const json& meta = payload.at("metadata");
    a.metadata.seed = meta.at("seed").get<std::uint64_t>();
    a.metadata.created = meta.at("created").get<std::string>();
    a.metadata.dataset_fingerprint = meta.at("dataset_fingerprint").get<std::string>();
    a.metadata.training_rows = meta.at("training_rows").get<std::size_t>();
    a.metadata.mode = meta.at("mode").get<std::string>();
    a.metadata.extra = meta.at("extra");
    a.holdout_features = matrix_from(payload.at("holdout").at("features"));
    const auto labels = payload.at("holdout").at("labels").get<std::vector<int>>();
    a.holdout_labels = Eigen::Map<const LabelVector>(labels.data(), static_cast<Index>(labels.size()));
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed artifact payload: ") + e.what());
  }
  return a;
}

ArtifactSummary save(const ModelArtifact& artifact, const std::filesystem::path& path) {
  const std::string text = serialize(artifact);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open output file '" + path.string() + "'");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.close();
  if (!out) throw Error("failed writing '" + path.string() + "'");
  ArtifactSummary summary;
  summary.path = path;
  summary.bytes = text.size();
  summary.format_version = artifact.format_version;
  const auto body_start = text.find('\n') + 1;
  summary.checksum = sha256_hex(std::string_view(text).substr(body_start, text.size() - body_start - 1));
  return summary;
}

ModelArtifact load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open input file '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return deserialize(buffer.str());
}

}  // namespace riskstack
