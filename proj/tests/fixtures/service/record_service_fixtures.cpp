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

// Regenerates model.json and exchanges.jsonl in this directory:
//   record_service_fixtures [output_dir]
// Run it only when the service response format changes on purpose.

#include <iostream>

#include "modguard/classifiers.hpp"
#include "modguard/error.hpp"
#include "service_fixture.hpp"

int main(int argc, char** argv) {
  namespace mt = modguard::testing;
  try {
    const std::filesystem::path dir = argc > 1 ? argv[1] : mt::service_fixture_dir();
    std::filesystem::create_directories(dir);
    modguard::classifiers::save_model(mt::train_fixture_model(), dir / "model.json");

    modguard::service::ServiceConfig config;
    config.model_path = dir / "model.json";
    modguard::service::Service service(config);
    auto exchanges = mt::fixture_requests();
    for (auto& e : exchanges) {
      const auto r = mt::dispatch(service, e);
      e.status = r.status;
      e.response = r.body;
    }
    mt::save_exchanges(exchanges, dir / "exchanges.jsonl");
    std::cout << "recorded " << exchanges.size() << " exchanges into " << dir << "\n";
  } catch (const modguard::Error& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
  return 0;
}
