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

#ifndef MODGUARD_TOOLS_CLI_HPP_
#define MODGUARD_TOOLS_CLI_HPP_

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace modguard::cli {

// Options shared by every subcommand.
struct Globals {
  std::uint64_t seed = 0;
  bool quiet = false;
};

// Runs the command line. Returns the process exit code: 0 on success, 1 when
// a command fails, 2 for usage errors.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// Subcommand registration, grouped by area.
void add_data_commands(CLI::App& app, Globals& globals);
void add_model_commands(CLI::App& app, Globals& globals);

// Helpers shared by the command files.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);
// Calls fn(record, line_number) for every non-blank JSONL line.
void for_each_jsonl(const std::filesystem::path& path,
                    const std::function<void(const nlohmann::json&, std::size_t)>& fn);
void log(const Globals& globals, const std::string& message);

}  // namespace modguard::cli

#endif  // MODGUARD_TOOLS_CLI_HPP_
