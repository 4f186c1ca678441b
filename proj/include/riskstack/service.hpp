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

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>

#include "riskstack/artifact.hpp"

namespace riskstack {

struct ServiceOptions {
  std::string host = "0.0.0.0";
  int port = 8080;  // 0 picks a free port
  std::filesystem::path model;
  int importance_rows = 2000;
  int importance_repeats = 5;
  std::uint64_t importance_seed = 0;
  std::string allow_origin;  // empty disables CORS headers
};

struct HttpResult {
  int status = 200;
  std::string body;
};

/// Request handling without any networking. Safe to call from many threads;
/// the loaded model is immutable once published.
class PredictionService {
 public:
  explicit PredictionService(ServiceOptions options);

  /// Loads options.model and precomputes importance. Errors are recorded and
  /// rethrown.
  void load();
  /// Publishes an in-memory artifact (importance computed here).
  void install(ModelArtifact artifact);

  bool ready() const;

  HttpResult predict(std::string_view body) const;
  HttpResult schema() const;
  HttpResult importance() const;
  HttpResult health() const;

  const ServiceOptions& options() const { return options_; }

 private:
  struct State {
    ModelArtifact artifact;
    std::string schema_body;
    std::string importance_body;
    std::string model_version;
  };

  std::shared_ptr<const State> state() const;

  ServiceOptions options_;
  std::chrono::steady_clock::time_point started_;
  mutable std::mutex mutex_;
  std::shared_ptr<const State> state_;
  std::string load_error_;
};

/// Blocking HTTP server around a PredictionService.
class HttpServer {
 public:
  HttpServer(PredictionService& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds host:port (port 0 picks one). Returns the bound port.
  int bind(const std::string& host, int port);
  /// Serves until stop(). Requires bind().
  void listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Starts serving immediately and loads the model in the background.
int run_service(const ServiceOptions& options);

}  // namespace riskstack
