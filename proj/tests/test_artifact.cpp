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

#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "riskstack/artifact.hpp"
#include "riskstack/synthetic.hpp"

using namespace riskstack;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("riskstack_test_" + name);
}

ModelArtifact make_artifact(ArtifactModel model, const Dataset& raw) {
  ModelArtifact a;
  a.model = std::move(model);
  a.scaler = normalize(raw).scaler;
  a.features = raw.feature_names();
  a.schema = raw.schema;
  a.metadata.seed = 5;
  a.metadata.created = "2026-01-01T00:00:00Z";
  a.metadata.dataset_fingerprint = dataset_fingerprint(raw);
  a.metadata.training_rows = static_cast<std::size_t>(raw.rows());
  a.metadata.mode = "leakage-safe";
  a.holdout_features = a.scaler.transform(raw.features.topRows(20));
  a.holdout_labels = raw.labels.head(20);
  return a;
}

Matrix random_rows(Index n, Index p, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(-5.0, 60.0);
  Matrix x(n, p);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < p; ++j) x(i, j) = u(gen);
  }
  return x;
}

bool bitwise_equal(const Vector& a, const Vector& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

std::string read_all(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_all(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

}  // namespace

TEST(RealEncoding, BitExactIncludingSpecials) {
  for (double v : {0.0, -0.0, 1.0, -1.5, 3.141592653589793, 1e-308, 5e-324, 1.7976931348623157e308,
                   std::numeric_limits<double>::infinity(), 0.1 + 0.2}) {
    const std::string enc = encode_real(v);
    EXPECT_EQ(enc.size(), 16u);
    EXPECT_EQ(std::bit_cast<std::uint64_t>(decode_real(enc)), std::bit_cast<std::uint64_t>(v));
  }
  EXPECT_TRUE(std::isnan(decode_real(encode_real(std::numeric_limits<double>::quiet_NaN()))));
  EXPECT_ANY_THROW(decode_real("xyz"));
}

TEST(Sha256, KnownDigests) {
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(RoundTrip, EveryFamilyBitwiseOnThousandRows) {
  const Dataset raw = synthetic_brfss(400, 21);
  const Dataset scaled = normalize(raw).data;
  const Matrix queries = random_rows(1000, raw.cols(), 4);
  for (Family family : all_families()) {
    LearnerSpec spec;
    spec.family = family;
    spec.seed = 2;
    std::vector<std::string> presets{""};
    if (family == Family::gbdt) presets = gbdt_preset_names();
    for (const auto& preset : presets) {
      spec.preset = preset;
      const ModelArtifact a = make_artifact(fit(spec, scaled), raw);
      const auto path = temp_file("family.rsm");
      const ArtifactSummary summary = save(a, path);
      const ModelArtifact b = load(path);
      std::filesystem::remove(path);
      EXPECT_EQ(summary.checksum, b.checksum);
      EXPECT_EQ(summary.format_version, kArtifactFormatVersion);
      EXPECT_EQ(b.features, a.features);
      EXPECT_EQ(b.model_name(), a.model_name());
      EXPECT_EQ(b.scaler.min, a.scaler.min);
      EXPECT_EQ(b.scaler.max, a.scaler.max);
      EXPECT_EQ(b.holdout_features, a.holdout_features);
      EXPECT_EQ(b.holdout_labels, a.holdout_labels);
      EXPECT_EQ(b.metadata.dataset_fingerprint, a.metadata.dataset_fingerprint);
      EXPECT_TRUE(bitwise_equal(a.predict_raw(queries), b.predict_raw(queries)))
          << to_string(family) << " " << preset;
      // Serializing the loaded artifact reproduces the same bytes.
      EXPECT_EQ(serialize(b), serialize(a)) << to_string(family) << " " << preset;
    }
  }
}

TEST(RoundTrip, StacksBitwise) {
  const Dataset raw = synthetic_brfss(300, 22);
  const Dataset scaled = normalize(raw).data;
  const Matrix queries = random_rows(1000, raw.cols(), 5);
  for (bool passthrough : {false, true}) {
    StackSpec spec = default_stack_spec(3);
    spec.passthrough = passthrough;
    const ModelArtifact a = make_artifact(fit_stack(spec, scaled), raw);
    const ModelArtifact b = deserialize(serialize(a));
    EXPECT_TRUE(bitwise_equal(a.predict_raw(queries), b.predict_raw(queries)));
    EXPECT_EQ(b.model_name(), "stack(gbdt:xgb+knn -> gbdt:lgbm)");
    const auto& sb = std::get<StackModel>(b.model);
    EXPECT_EQ(sb.spec.passthrough, passthrough);
    EXPECT_EQ(sb.bases.size(), 2u);
  }
}

TEST(Integrity, CorruptedPayloadRejected) {
  const Dataset raw = synthetic_brfss(200, 23);
  LearnerSpec spec;
  spec.family = Family::logreg;
  const ModelArtifact a = make_artifact(fit(spec, normalize(raw).data), raw);
  const auto path = temp_file("corrupt.rsm");
  save(a, path);
  std::string text = read_all(path);
  const auto payload_start = text.find('\n') + 1;
  // Flip one hex digit deep inside the payload.
  const auto pos = text.find_first_of("0123456789abcdef", payload_start + text.size() / 3);
  ASSERT_NE(pos, std::string::npos);
  text[pos] = text[pos] == '0' ? '1' : '0';
  write_all(path, text);
  try {
    load(path);
    FAIL() << "corruption accepted";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("checksum"), std::string::npos) << e.what();
  }
  std::filesystem::remove(path);
}

TEST(Integrity, NewerFormatVersionRejected) {
  const Dataset raw = synthetic_brfss(200, 24);
  LearnerSpec spec;
  spec.family = Family::gaussian_nb;
  const ModelArtifact a = make_artifact(fit(spec, normalize(raw).data), raw);
  std::string text = serialize(a);
  const std::string from = "\"format_version\":" + std::to_string(kArtifactFormatVersion);
  const std::string to = "\"format_version\":" + std::to_string(kArtifactFormatVersion + 1);
  const auto pos = text.find(from);
  ASSERT_LT(pos, text.find('\n'));
  text.replace(pos, from.size(), to);
  try {
    deserialize(text);
    FAIL() << "future version accepted";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("unsupported version"), std::string::npos) << e.what();
  }
}

TEST(Integrity, GarbageRejected) {
  EXPECT_THROW(deserialize("not an artifact"), FormatError);
  EXPECT_THROW(deserialize("{\"format\":\"other\"}\n{}\n"), FormatError);
  EXPECT_ANY_THROW(load("/nonexistent/model.rsm"));
}

TEST(Fingerprint, SensitiveToLabelsAndValues) {
  Dataset d = synthetic_brfss(100, 25);
  const std::string base = dataset_fingerprint(d);
  EXPECT_EQ(base, dataset_fingerprint(d));
  d.labels(0) = 1 - d.labels(0);
  EXPECT_NE(base, dataset_fingerprint(d));
  d.labels(0) = 1 - d.labels(0);
  d.features(3, 2) = std::nextafter(d.features(3, 2), 1e9);
  EXPECT_NE(base, dataset_fingerprint(d));
}
