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

#include "cli.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include "modguard/error.hpp"

namespace modguard::cli {

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIoError, "cli", "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(ErrorKind::kIoError, "cli", "cannot write " + path.string());
}

void for_each_jsonl(const std::filesystem::path& path,
                    const std::function<void(const nlohmann::json&, std::size_t)>& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIoError, "cli", "cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      throw Error(ErrorKind::kSchemaError, "cli",
                  path.filename().string() + " line " + std::to_string(line_no) + ": not a JSON object");
    }
    fn(j, line_no);
  }
}

void log(const Globals& globals, const std::string& message) {
  if (!globals.quiet) std::cerr << message << '\n';
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Two-stage multimodal harmful-content detection toolkit", "modguard"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals globals;
  app.add_option("--seed", globals.seed, "Seed for every stochastic stage")->envname("MODGUARD_SEED");
  app.add_flag("-q,--quiet", globals.quiet, "Suppress progress messages");
  app.set_config("--config", "", "TOML-style key = value file mirroring the flags");
  app.set_version_flag("--version", "modguard 0.1.0");

  add_data_commands(app, globals);
  add_model_commands(app, globals);

  // Commands print through std::cout; redirect it when a different stream is
  // requested so the in-process runner can capture output.
  std::streambuf* saved_out = nullptr;
  if (&out != &std::cout) saved_out = std::cout.rdbuf(out.rdbuf());
  struct Restore {
    std::streambuf* saved;
    ~Restore() {
      if (saved) std::cout.rdbuf(saved);
    }
  } restore{saved_out};

  // CLI11 reports a misspelt subcommand as a missing one; name it instead.
  for (int i = 1; i < argc; ++i) {
    const std::string_view arg = argv[i];
    if (arg == "--seed" || arg == "--config") {
      ++i;
      continue;
    }
    if (arg.empty() || arg[0] == '-') continue;
    if (app.get_subcommand_no_throw(std::string(arg)) == nullptr) {
      err << "error: unknown subcommand '" << arg << "'\n\n" << app.help();
      return 2;
    }
    break;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion& e) {
    out << e.what() << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace modguard::cli
