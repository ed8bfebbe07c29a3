/* Copyright 2026 The modguard Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "modguard/service.hpp"

#include <httplib.h>
#include <json.hpp>

#include <fstream>
#include <semaphore>
#include <sstream>

#include "modguard/error.hpp"
#include "modguard/hash.hpp"
#include "modguard/image.hpp"
#include "modguard/mock_backend.hpp"
#include "modguard/model_backend.hpp"
#include "modguard/textprep.hpp"

namespace modguard::service {
namespace {

constexpr std::string_view kModule = "service";
using nlohmann::json;

Response error_response(int status, std::string_view message) {
  nlohmann::ordered_json j;
  j["error"] = message;
  return {status, j.dump()};
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIoError, kModule, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

struct Service::Http {
  httplib::Server server;
  std::counting_semaphore<1 << 16> workers;
  int port = 0;

  explicit Http(std::size_t n) : workers(static_cast<std::ptrdiff_t>(n)) {}
};

void ServiceConfig::validate() const {
  host_port();
  if (model_path.empty()) throw Error(ErrorKind::kInvalidInput, kModule, "model path is not set");
  if (!std::filesystem::exists(model_path)) {
    throw Error(ErrorKind::kIoError, kModule, "model file not found: " + model_path.string());
  }
  if (backend != "mock" && backend != "model") {
    throw Error(ErrorKind::kInvalidInput, kModule, "backend must be 'mock' or 'model'");
  }
  if (backend == "model" && !std::filesystem::exists(model_file_path)) {
    throw Error(ErrorKind::kIoError, kModule, "embedding model not found: " + model_file_path.string());
  }
  if (max_body_bytes == 0) throw Error(ErrorKind::kInvalidInput, kModule, "max_body_bytes must be positive");
  if (backend_workers == 0) throw Error(ErrorKind::kInvalidInput, kModule, "backend_workers must be positive");
}

std::pair<std::string, int> ServiceConfig::host_port() const {
  const auto colon = bind_addr.rfind(':');
  if (colon == std::string::npos || colon == 0) {
    throw Error(ErrorKind::kInvalidInput, kModule, "bind address must be host:port, got " + bind_addr);
  }
  const std::string port = bind_addr.substr(colon + 1);
  int value = -1;
  try {
    std::size_t used = 0;
    value = std::stoi(port, &used);
    if (used != port.size()) value = -1;
  } catch (const std::exception&) {
    value = -1;
  }
  if (value < 0 || value > 65535) {
    throw Error(ErrorKind::kInvalidInput, kModule, "invalid port in bind address " + bind_addr);
  }
  return {bind_addr.substr(0, colon), value};
}

Service::Service(ServiceConfig config, std::shared_ptr<const embedding::EmbeddingBackend> backend)
    : config_(std::move(config)), backend_(std::move(backend)) {
  config_.validate();
  auto first = load_snapshot(1);
  if (!backend_) {
    if (config_.backend == "model") {
      backend_ = std::make_shared<embedding::ModelBackend>(config_.model_file_path);
    } else {
      backend_ = std::make_shared<embedding::MockBackend>(first->model.dim);
    }
  }
  if (backend_->dim() != first->model.dim) {
    throw Error(ErrorKind::kDimMismatch, kModule,
                "backend dim " + std::to_string(backend_->dim()) + " differs from model dim " +
                    std::to_string(first->model.dim));
  }
  snapshot_ = std::move(first);
  http_ = std::make_unique<Http>(config_.backend_workers);
}

Service::~Service() {
  stop();
  if (server_thread_.joinable()) server_thread_.join();
}

std::shared_ptr<const Snapshot> Service::load_snapshot(std::uint64_t generation) const {
  const std::string bytes = read_file(config_.model_path);
  auto snap = std::make_shared<Snapshot>();
  snap->model = classifiers::model_from_json(bytes);
  if (config_.threshold_override) {
    snap->model.threshold = *config_.threshold_override;
    snap->model.validate();
  }
  snap->model_hash = sha256_hex(bytes);
  snap->generation = generation;
  return snap;
}

std::shared_ptr<const Snapshot> Service::snapshot() const {
  std::lock_guard lock(snapshot_mu_);
  return snapshot_;
}

void Service::publish(std::shared_ptr<const Snapshot> next) {
  std::lock_guard lock(snapshot_mu_);
  snapshot_ = std::move(next);
}

Response Service::classify(std::string_view body) const {
  if (body.size() > config_.max_body_bytes) return error_response(413, "request body too large");
  const json j = json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return error_response(400, "body must be a JSON object");
  if (j.contains("threshold")) return error_response(400, "per-request thresholds are not accepted");
  const bool has_text = j.contains("text");
  const bool has_image = j.contains("image_b64");
  if (has_text == has_image) return error_response(400, "provide exactly one of 'text' or 'image_b64'");
  const auto& field = has_text ? j["text"] : j["image_b64"];
  if (!field.is_string()) return error_response(400, "input field must be a string");

  // One snapshot for the whole request.
  const auto snap = snapshot();
  std::vector<embedding::EmbeddingVector> vectors;
  try {
    if (has_text) {
      const textprep::CleanText text = textprep::clean_text(field.get<std::string>());
      if (text.empty()) return error_response(400, "text is empty after cleaning");
      http_->workers.acquire();
      try {
        vectors = embedding::embed_texts(*backend_, std::span(&text, 1));
      } catch (...) {
        http_->workers.release();
        throw;
      }
      http_->workers.release();
    } else {
      std::string encoded;
      try {
        encoded = base64_decode(field.get<std::string>());
      } catch (const Error&) {
        return error_response(400, "image_b64 is not valid base64");
      }
      const DecodedImage image = decode_image(std::string_view(encoded));
      http_->workers.acquire();
      try {
        vectors = embedding::embed_images(*backend_, std::span(&image, 1));
      } catch (...) {
        http_->workers.release();
        throw;
      }
      http_->workers.release();
    }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kImageDecodeError) return error_response(422, e.what());
    if (e.kind() == ErrorKind::kInvalidInput) return error_response(400, e.what());
    return error_response(500, e.what());
  }

  const auto prediction = classifiers::predict(snap->model, vectors.front().values());
  nlohmann::ordered_json out;
  out["label"] = to_int(prediction.label);
  out["score"] = prediction.score;
  out["model_kind"] = classifiers::kind_name(snap->model.kind);
  out["dim"] = snap->model.dim;
  return {200, out.dump()};
}

Response Service::health() const {
  nlohmann::ordered_json out;
  out["status"] = "ok";
  out["model_hash"] = snapshot()->model_hash;
  return {200, out.dump()};
}

Response Service::reload() {
  std::lock_guard guard(reload_mu_);
  std::shared_ptr<const Snapshot> next;
  try {
    next = load_snapshot(snapshot()->generation + 1);
    if (next->model.dim != backend_->dim()) {
      throw Error(ErrorKind::kDimMismatch, kModule,
                  "reloaded model dim " + std::to_string(next->model.dim) +
                      " differs from backend dim " + std::to_string(backend_->dim()));
    }
  } catch (const Error& e) {
    return error_response(e.kind() == ErrorKind::kIoError ? 500 : 422, e.what());
  }
  publish(next);
  nlohmann::ordered_json out;
  out["status"] = "reloaded";
  out["model_hash"] = next->model_hash;
  return {200, out.dump()};
}

int Service::start() {
  auto& svr = http_->server;
  svr.set_payload_max_length(config_.max_body_bytes);
  // httplib's default turns on SO_REUSEPORT, which lets a second server
  // silently share a port that is already taken.
  svr.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
  });
  auto reply = [](httplib::Response& res, const Response& r) {
    res.status = r.status;
    res.set_content(r.body, "application/json");
  };
  svr.Post("/v1/classify", [this, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, classify(req.body));
  });
  svr.Get("/v1/health", [this, reply](const httplib::Request&, httplib::Response& res) {
    reply(res, health());
  });
  svr.Post("/v1/reload", [this, reply](const httplib::Request&, httplib::Response& res) {
    reply(res, reload());
  });
  svr.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (!res.body.empty()) return;
    const char* message = res.status == 413 ? "request body too large"
                          : res.status == 404 ? "not found"
                                              : "request failed";
    nlohmann::ordered_json j;
    j["error"] = message;
    res.set_content(j.dump(), "application/json");
  });

  const auto [host, port] = config_.host_port();
  if (port == 0) {
    http_->port = svr.bind_to_any_port(host);
  } else {
    http_->port = svr.bind_to_port(host, port) ? port : -1;
  }
  if (http_->port <= 0) throw Error(ErrorKind::kIoError, kModule, "cannot bind " + config_.bind_addr);
  server_thread_ = std::thread([this] { http_->server.listen_after_bind(); });
  http_->server.wait_until_ready();
  return http_->port;
}

void Service::run() {
  start();
  if (server_thread_.joinable()) server_thread_.join();
}

void Service::stop() {
  if (http_) http_->server.stop();
}

}  // namespace modguard::service
