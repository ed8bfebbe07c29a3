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

#ifndef MODGUARD_TESTS_SERVICE_FIXTURE_HPP_
#define MODGUARD_TESTS_SERVICE_FIXTURE_HPP_

#include <filesystem>
#include <string>
#include <vector>

#include "modguard/classifiers.hpp"
#include "modguard/service.hpp"

namespace modguard::testing {

inline constexpr std::size_t kServiceFixtureDim = 128;

// One recorded request and the response the service gave.
struct Exchange {
  std::string method;  // "GET" or "POST"
  std::string path;
  std::string body;
  int status = 0;
  std::string response;
};

std::vector<Exchange> load_exchanges(const std::filesystem::path& path);
void save_exchanges(const std::vector<Exchange>& exchanges, const std::filesystem::path& path);

// Logistic model over mock embeddings of a small hand-written phrase set
// grown with stub paraphrases. Deterministic.
classifiers::ClassifierModel train_fixture_model();

// The 50 recorded requests (responses left empty).
std::vector<Exchange> fixture_requests();

// Calls the endpoint logic directly.
service::Response dispatch(service::Service& service, const Exchange& request);
// Sends the request over HTTP to 127.0.0.1:port.
service::Response dispatch_http(int port, const Exchange& request);

// Same model with weights and bias negated: every score becomes 1 - score.
classifiers::ClassifierModel negated(classifiers::ClassifierModel model);

// Serves model A from a file, fires `requests` concurrent classify calls over
// HTTP and, once half of them are under way, overwrites the file with model
// B and reloads. Every response must match what A or B alone would answer.
struct ReloadReport {
  std::size_t total = 0;
  std::size_t from_a = 0;
  std::size_t from_b = 0;
  std::size_t unattributable = 0;
  bool reload_ok = false;
  bool after_reload_all_b = false;
};
ReloadReport run_reload_atomicity(const std::filesystem::path& workdir, std::size_t requests);

std::filesystem::path service_fixture_dir();

}  // namespace modguard::testing

#endif  // MODGUARD_TESTS_SERVICE_FIXTURE_HPP_
