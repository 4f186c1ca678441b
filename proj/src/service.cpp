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

#include "riskstack/service.hpp"

#include <algorithm>
#include <csignal>
#include <cstdio>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "riskstack/metrics.hpp"

namespace riskstack {

using nlohmann::json;

namespace {

HttpResult error_result(int status, const std::string& message, const std::string& field = "") {
  json body{{"error", message}};
  if (!field.empty()) body["field"] = field;
  return {status, body.dump()};
}

HttpResult not_loaded() { return error_result(503, "model not loaded"); }

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace

PredictionService::PredictionService(ServiceOptions options)
    : options_(std::move(options)), started_(std::chrono::steady_clock::now()) {}

std::shared_ptr<const PredictionService::State> PredictionService::state() const {
  std::lock_guard lock(mutex_);
  return state_;
}

bool PredictionService::ready() const { return state() != nullptr; }

void PredictionService::load() {
  try {
    install(riskstack::load(options_.model));
  } catch (const std::exception& e) {
    std::lock_guard lock(mutex_);
    load_error_ = e.what();
    throw;
  }
}

void PredictionService::install(ModelArtifact artifact) {
  auto next = std::make_shared<State>();
  next->model_version = artifact.checksum.substr(0, 12);

  json features = json::array();
  for (const auto& s : artifact.schema) features.push_back(to_json(s));
  next->schema_body = json{{"model", artifact.model_name()},
                           {"model_version", next->model_version},
                           {"features", features}}
                          .dump();

  const Index rows = std::min<Index>(artifact.holdout_features.rows(),
                                     std::max(0, options_.importance_rows));
  json entries = json::array();
  std::string metric_name = "none";
  if (rows > 0) {
    const Dataset slice = make_dataset(artifact.holdout_features.topRows(rows),
                                       artifact.holdout_labels.head(rows), artifact.features);
    const auto counts = slice.class_counts();
    const Metric metric = counts[0] > 0 && counts[1] > 0 ? Metric::roc_auc : Metric::accuracy;
    metric_name = to_string(metric);
    const auto& frozen = artifact;
    const auto stats = permutation_importance(
        [&frozen](const Matrix& x) { return frozen.predict_proba(x); }, slice, metric,
        options_.importance_repeats, options_.importance_seed);
    std::vector<std::pair<std::string, double>> scores;
    for (const auto& name : artifact.features) {
      scores.emplace_back(name, std::max(0.0, stats.at(name).mean_drop));
    }
    std::stable_sort(scores.begin(), scores.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first < b.first;
    });
    for (const auto& [name, score] : scores) {
      entries.push_back({{"feature", name}, {"score", score}, {"std", stats.at(name).std_drop}});
    }
  } else {
    for (const auto& name : artifact.features) entries.push_back({{"feature", name}, {"score", 0.0}});
  }
  next->importance_body = json{{"metric", metric_name},
                               {"rows", rows},
                               {"repeats", options_.importance_repeats},
                               {"importance", entries}}
                              .dump();
  next->artifact = std::move(artifact);

  std::lock_guard lock(mutex_);
  state_ = std::move(next);
  load_error_.clear();
}

HttpResult PredictionService::predict(std::string_view body) const {
  const auto s = state();
  if (!s) return not_loaded();
  json request;
  try {
    request = json::parse(body);
  } catch (const json::exception&) {
    return error_result(400, "malformed JSON");
  }
  if (!request.is_object()) return error_result(400, "request body must be a JSON object");

  const ModelArtifact& a = s->artifact;
  Matrix raw(1, static_cast<Index>(a.features.size()));
  json warnings = json::array();
  for (std::size_t j = 0; j < a.features.size(); ++j) {
    const std::string& name = a.features[j];
    const auto it = request.find(name);
    if (it == request.end()) return error_result(422, "missing feature '" + name + "'", name);
    if (!it->is_number()) return error_result(422, "feature '" + name + "' must be numeric", name);
    const double v = it->get<double>();
    raw(0, static_cast<Index>(j)) = v;
    const FeatureSchema& fs = a.schema[j];
    if (v < fs.observed_min || v > fs.observed_max) {
      warnings.push_back(name + "=" + format_number(v) + " is outside the observed range [" +
                         format_number(fs.observed_min) + ", " +
                         format_number(fs.observed_max) + "]");
    }
  }
  for (const auto& [key, value] : request.items()) {
    if (std::find(a.features.begin(), a.features.end(), key) == a.features.end()) {
      return error_result(422, "unknown feature '" + key + "'", key);
    }
  }

  const double p = a.predict_raw(raw)(0);
  json out{{"label", p >= 0.5 ? "diabetic" : "non-diabetic"},
           {"probability", p},
           {"confidence", std::max(p, 1.0 - p)},
           {"warnings", warnings}};
  return {200, out.dump()};
}

HttpResult PredictionService::schema() const {
  const auto s = state();
  if (!s) return not_loaded();
  return {200, s->schema_body};
}

HttpResult PredictionService::importance() const {
  const auto s = state();
  if (!s) return not_loaded();
  return {200, s->importance_body};
}

HttpResult PredictionService::health() const {
  const auto s = state();
  const double uptime =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started_).count();
  json out{{"uptime_seconds", uptime}};
  if (s) {
    out["status"] = "ok";
    out["model_version"] = s->model_version;
  } else {
    std::lock_guard lock(mutex_);
    out["status"] = load_error_.empty() ? "loading" : "error";
    out["model_version"] = nullptr;
    if (!load_error_.empty()) out["error"] = load_error_;
  }
  return {200, out.dump()};
}

struct HttpServer::Impl {
  httplib::Server server;
  bool bound = false;
};

HttpServer::HttpServer(PredictionService& service) : impl_(std::make_unique<Impl>()) {
  auto& server = impl_->server;
  const std::string origin = service.options().allow_origin;
  auto reply = [origin](httplib::Response& res, const HttpResult& r) {
    res.status = r.status;
    res.set_content(r.body, "application/json");
  };
  if (!origin.empty()) {
    server.set_post_routing_handler([origin](const httplib::Request&, httplib::Response& res) {
      res.set_header("Access-Control-Allow-Origin", origin);
      res.set_header("Vary", "Origin");
    });
    server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) {
      res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
      res.set_header("Access-Control-Allow-Headers", "Content-Type");
      res.status = 204;
    });
  }
  server.Post("/predict", [&service, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, service.predict(req.body));
  });
  server.Get("/schema", [&service, reply](const httplib::Request&, httplib::Response& res) {
    reply(res, service.schema());
  });
  server.Get("/importance", [&service, reply](const httplib::Request&, httplib::Response& res) {
    reply(res, service.importance());
  });
  server.Get("/health", [&service, reply](const httplib::Request&, httplib::Response& res) {
    reply(res, service.health());
  });
}

HttpServer::~HttpServer() = default;

int HttpServer::bind(const std::string& host, int port) {
  int bound_port = port;
  if (port == 0) {
    bound_port = impl_->server.bind_to_any_port(host);
  } else if (!impl_->server.bind_to_port(host, port)) {
    bound_port = -1;
  }
  if (bound_port < 0) throw Error("cannot bind " + host + ":" + std::to_string(port));
  impl_->bound = true;
  return bound_port;
}

void HttpServer::listen() {
  if (!impl_->bound) throw Error("server is not bound");
  impl_->server.listen_after_bind();
}

void HttpServer::stop() { impl_->server.stop(); }

namespace {
HttpServer* active_server = nullptr;
extern "C" void handle_stop_signal(int) {
  if (active_server) active_server->stop();
}
}  // namespace

int run_service(const ServiceOptions& options) {
  PredictionService service(options);
  HttpServer server(service);
  const int port = server.bind(options.host, options.port);
  std::fprintf(stderr, "serving on %s:%d, loading %s\n", options.host.c_str(), port,
               options.model.string().c_str());

  std::thread loader([&service] {
    try {
      service.load();
      std::fprintf(stderr, "model loaded\n");
    } catch (const std::exception& e) {
      std::fprintf(stderr, "model load failed: %s\n", e.what());
    }
  });
  active_server = &server;
  std::signal(SIGINT, handle_stop_signal);
  std::signal(SIGTERM, handle_stop_signal);
  server.listen();
  active_server = nullptr;
  loader.join();
  return service.ready() ? 0 : 2;
}

}  // namespace riskstack
