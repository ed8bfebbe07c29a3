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

#ifndef MODGUARD_SERVICE_HPP_
#define MODGUARD_SERVICE_HPP_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>

#include "modguard/classifiers.hpp"
#include "modguard/embedding.hpp"

namespace modguard::service {

inline constexpr std::size_t kDefaultMaxBodyBytes = 8u << 20;

struct ServiceConfig {
  std::string bind_addr = "127.0.0.1:8080";
  std::filesystem::path model_path;       // classifier model JSON
  std::string backend = "mock";           // "mock" or "model"
  std::filesystem::path model_file_path;  // embedding sidecar when backend == "model"
  std::size_t max_body_bytes = kDefaultMaxBodyBytes;
  // Replaces the model file's threshold for every snapshot this service loads.
  std::optional<double> threshold_override;
  // Concurrent embedding calls; further requests wait.
  std::size_t backend_workers = 4;

  // Throws InvalidInput or IoError (missing files).
  void validate() const;
  // Splits bind_addr; throws InvalidInput.
  std::pair<std::string, int> host_port() const;
};

// An immutable loaded model. Requests hold a reference for their whole
// lifetime, so a reload never changes the model under a running request.
struct Snapshot {
  classifiers::ClassifierModel model;
  std::string model_hash;  // sha256 of the model file bytes
  std::uint64_t generation = 0;
};

struct Response {
  int status = 200;
  std::string body;
};

class Service {
 public:
  // Loads the model and, when `backend` is null, builds the configured one
  // (the mock backend takes the model's dim). Throws on any load failure.
  explicit Service(ServiceConfig config,
                   std::shared_ptr<const embedding::EmbeddingBackend> backend = nullptr);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Endpoint logic, independent of the HTTP layer.
  // POST /v1/classify {"text": ...} | {"image_b64": ...}
  //   200 {"label","score","model_kind","dim"}; 400 malformed; 413 oversize;
  //   422 undecodable image; 500 backend failure.
  Response classify(std::string_view body) const;
  // GET /v1/health -> {"status":"ok","model_hash"}
  Response health() const;
  // POST /v1/reload: re-reads model_path and swaps it in. On failure the old
  // snapshot stays and the error is returned.
  Response reload();

  std::shared_ptr<const Snapshot> snapshot() const;

  // Binds bind_addr (port 0 picks a free port), serves on a background
  // thread and returns the bound port. Throws IoError when binding fails.
  int start();
  // Serves until stop() is called from another thread.
  void run();
  // Safe to call from any thread, e.g. a signal watcher.
  void stop();

 private:
  struct Http;

  std::shared_ptr<const Snapshot> load_snapshot(std::uint64_t generation) const;
  void publish(std::shared_ptr<const Snapshot> next);

  ServiceConfig config_;
  std::shared_ptr<const embedding::EmbeddingBackend> backend_;
  mutable std::mutex snapshot_mu_;
  std::shared_ptr<const Snapshot> snapshot_;
  std::mutex reload_mu_;
  std::unique_ptr<Http> http_;
  std::thread server_thread_;
};

}  // namespace modguard::service

#endif  // MODGUARD_SERVICE_HPP_
