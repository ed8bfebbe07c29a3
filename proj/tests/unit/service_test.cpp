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

#include <gtest/gtest.h>
#include <httplib.h>
#include <json.hpp>

#include "modguard/error.hpp"
#include "modguard/hash.hpp"
#include "modguard/mock_backend.hpp"
#include "modguard/service.hpp"
#include "service_fixture.hpp"
#include "temp_dir.hpp"

namespace modguard::service {
namespace {

using testing::TempDir;

template <typename F>
ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no modguard::Error thrown";
  return ErrorKind::kInvalidInput;
}

ServiceConfig fixture_config() {
  ServiceConfig c;
  c.bind_addr = "127.0.0.1:0";
  c.model_path = testing::service_fixture_dir() / "model.json";
  return c;
}

TEST(Replay, RecordedExchangesAreByteIdentical) {
  const auto exchanges = testing::load_exchanges(testing::service_fixture_dir() / "exchanges.jsonl");
  ASSERT_EQ(exchanges.size(), 50u);
  Service service(fixture_config());
  for (const auto& e : exchanges) {
    const auto r = testing::dispatch(service, e);
    EXPECT_EQ(r.status, e.status) << e.body;
    EXPECT_EQ(r.body, e.response) << e.body;
  }
}

TEST(Replay, OverHttp) {
  const auto exchanges = testing::load_exchanges(testing::service_fixture_dir() / "exchanges.jsonl");
  Service service(fixture_config());
  const int port = service.start();
  for (const auto& e : exchanges) {
    const auto r = testing::dispatch_http(port, e);
    EXPECT_EQ(r.status, e.status) << e.body;
    EXPECT_EQ(r.body, e.response) << e.body;
  }
  service.stop();
}

TEST(Classify, ResponseSchema) {
  Service service(fixture_config());
  const auto r = service.classify(R"({"text": "you are a stupid idiot"})");
  ASSERT_EQ(r.status, 200);
  const auto j = nlohmann::ordered_json::parse(r.body);
  std::vector<std::string> keys;
  for (const auto& [k, v] : j.items()) keys.push_back(k);
  EXPECT_EQ(keys, (std::vector<std::string>{"label", "score", "model_kind", "dim"}));
  EXPECT_EQ(j["dim"], testing::kServiceFixtureDim);
  EXPECT_EQ(j["label"], 1);
  EXPECT_GE(j["score"].get<double>(), 0.5);
}

TEST(Classify, OversizeBodies) {
  Service service(fixture_config());
  const std::string big = "{\"text\": \"" + std::string(9u << 20, 'a') + "\"}";
  EXPECT_EQ(service.classify(big).status, 413);
  const int port = service.start();
  httplib::Client client("127.0.0.1", port);
  auto res = client.Post("/v1/classify", big, "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 413);
  EXPECT_EQ(nlohmann::json::parse(res->body)["error"], "request body too large");
  res = client.Get("/v1/nothing");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 404);
  service.stop();
}

TEST(Classify, ThresholdOverrideAppliesToEverySnapshot) {
  auto cfg = fixture_config();
  cfg.threshold_override = 0.99;
  Service service(cfg);
  const auto body = R"({"text": "you are a stupid idiot"})";
  EXPECT_EQ(nlohmann::json::parse(service.classify(body).body)["label"], 0);
  ASSERT_EQ(service.reload().status, 200);
  EXPECT_EQ(service.snapshot()->model.threshold, 0.99);
  EXPECT_EQ(nlohmann::json::parse(service.classify(body).body)["label"], 0);
}

TEST(Health, ReportsFileHash) {
  Service service(fixture_config());
  const auto j = nlohmann::json::parse(service.health().body);
  EXPECT_EQ(j["status"], "ok");
  EXPECT_EQ(j["model_hash"], sha256_file_hex(fixture_config().model_path));
}

TEST(Reload, SameFileSameHashNewGeneration) {
  TempDir dir;
  std::filesystem::copy_file(fixture_config().model_path, dir / "m.json");
  auto cfg = fixture_config();
  cfg.model_path = dir / "m.json";
  Service service(cfg);
  const auto before = service.snapshot();
  const auto r = service.reload();
  ASSERT_EQ(r.status, 200);
  const auto j = nlohmann::json::parse(r.body);
  EXPECT_EQ(j["status"], "reloaded");
  EXPECT_EQ(j["model_hash"], before->model_hash);
  EXPECT_EQ(service.snapshot()->generation, before->generation + 1);
  // The old snapshot is still intact for anyone holding it.
  EXPECT_EQ(before->generation, 1u);
}

TEST(Reload, FailureKeepsOldSnapshot) {
  TempDir dir;
  std::filesystem::copy_file(fixture_config().model_path, dir / "m.json");
  auto cfg = fixture_config();
  cfg.model_path = dir / "m.json";
  Service service(cfg);
  const auto hash = service.snapshot()->model_hash;

  testing::write_file(dir / "m.json", "{broken");
  EXPECT_EQ(service.reload().status, 422);
  EXPECT_EQ(service.snapshot()->model_hash, hash);

  auto other = testing::train_fixture_model();
  other.dim = 4;
  other.weights.resize(4);
  classifiers::save_model(other, dir / "m.json");
  EXPECT_EQ(service.reload().status, 422);

  std::filesystem::remove(dir / "m.json");
  EXPECT_EQ(service.reload().status, 500);
  EXPECT_EQ(service.snapshot()->model_hash, hash);
  EXPECT_EQ(service.classify(R"({"text": "hi there"})").status, 200);
}

TEST(Reload, ConcurrentRequestsAttributable) {
  TempDir dir;
  const auto report = testing::run_reload_atomicity(dir.path(), 100);
  EXPECT_TRUE(report.reload_ok);
  EXPECT_EQ(report.unattributable, 0u);
  EXPECT_EQ(report.from_a + report.from_b, 100u);
  EXPECT_TRUE(report.after_reload_all_b);
}

TEST(Config, Validation) {
  auto c = fixture_config();
  EXPECT_EQ(c.host_port(), (std::pair<std::string, int>{"127.0.0.1", 0}));
  c.bind_addr = "nohost";
  EXPECT_EQ(kind_of([&] { c.validate(); }), ErrorKind::kInvalidInput);
  c.bind_addr = "h:99999";
  EXPECT_EQ(kind_of([&] { c.validate(); }), ErrorKind::kInvalidInput);
  c = fixture_config();
  c.model_path = "/nonexistent/model.json";
  EXPECT_EQ(kind_of([&] { c.validate(); }), ErrorKind::kIoError);
  c = fixture_config();
  c.backend = "remote";
  EXPECT_EQ(kind_of([&] { c.validate(); }), ErrorKind::kInvalidInput);
  c = fixture_config();
  c.max_body_bytes = 0;
  EXPECT_EQ(kind_of([&] { c.validate(); }), ErrorKind::kInvalidInput);
}

TEST(Service, BackendDimMustMatchModel) {
  auto backend = std::make_shared<embedding::MockBackend>(64);
  EXPECT_EQ(kind_of([&] { Service s(fixture_config(), backend); }), ErrorKind::kDimMismatch);
}

TEST(Service, StartStopAndBindFailure) {
  Service a(fixture_config());
  const int port = a.start();
  EXPECT_GT(port, 0);
  auto cfg = fixture_config();
  cfg.bind_addr = "127.0.0.1:" + std::to_string(port);
  Service b(cfg);
  EXPECT_EQ(kind_of([&] { b.start(); }), ErrorKind::kIoError);
  const auto health = testing::dispatch_http(port, {"GET", "/v1/health", "", 0, ""});
  EXPECT_EQ(health.status, 200);
  a.stop();
}

}  // namespace
}  // namespace modguard::service
