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

#include <iostream>
#include <memory>

#include "cli.hpp"
#include "modguard/augmentation.hpp"
#include "modguard/corpus.hpp"
#include "modguard/error.hpp"
#include "modguard/image_search.hpp"
#include "modguard/textprep.hpp"

namespace modguard::cli {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string required_string(const json& j, const char* key, std::size_t line) {
  if (!j.contains(key) || !j[key].is_string()) {
    throw Error(ErrorKind::kSchemaError, "cli",
                "line " + std::to_string(line) + ": missing string field '" + key + "'");
  }
  return j[key].get<std::string>();
}

std::unique_ptr<augmentation::AugmentationClient> make_llm(bool stub, std::uint64_t seed,
                                                           int retries) {
  if (stub) return std::make_unique<augmentation::StubClient>(seed);
  auto config = augmentation::LlmClientConfig::from_env();
  config.max_retries = retries;
  return std::make_unique<augmentation::LlmClient>(config);
}

void add_preprocess(CLI::App& app, Globals& g) {
  struct Opts {
    std::string in, out;
  };
  auto o = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand("preprocess", "Clean tweet text: {id, text} JSONL in and out");
  cmd->add_option("--in", o->in, "Input JSONL")->required();
  cmd->add_option("--out", o->out, "Output JSONL")->required();
  cmd->callback([o, &g] {
    std::string out;
    std::size_t n = 0;
    for_each_jsonl(o->in, [&](const json& j, std::size_t line) {
      json rec = j;
      required_string(j, "id", line);
      rec["text"] = textprep::clean_text(required_string(j, "text", line)).str();
      out += rec.dump() + "\n";
      ++n;
    });
    write_text_file(o->out, out);
    log(g, "preprocess: cleaned " + std::to_string(n) + " records");
  });
}

void add_ingest(CLI::App& app, Globals& g) {
  struct Opts {
    std::string format, in, out, images_dir = "images";
  };
  auto o = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand("ingest", "Convert a source dataset into a corpus JSONL");
  cmd->add_option("--format", o->format, "Source format")
      ->required()
      ->check(CLI::IsMember({"hate-speech-csv", "redcaps", "review-manifest"}));
  cmd->add_option("--in", o->in, "Source file")->required();
  cmd->add_option("--out", o->out, "Corpus JSONL")->required();
  cmd->add_option("--images-dir", o->images_dir, "RedCaps image root");
  cmd->callback([o, &g] {
    const std::string text = read_text_file(o->in);
    corpus::IngestReport report;
    corpus::Corpus c;
    if (o->format == "hate-speech-csv") c = corpus::ingest_hate_speech_csv(text, &report);
    else if (o->format == "redcaps") c = corpus::ingest_redcaps(text, o->images_dir);
    else c = corpus::ingest_review_manifest(text, &report);
    corpus::save_corpus(c, o->out);
    log(g, "ingest: wrote " + std::to_string(c.size()) + " examples (" +
               std::to_string(report.dropped_class) + " other-class rows dropped, " +
               std::to_string(report.dropped_empty) + " empty or pending rows skipped)");
  });
}

void add_split(CLI::App& app, Globals& g) {
  struct Opts {
    std::string in, train, test;
    double fraction = 0.8;
    bool no_stratify = false;
  };
  auto o = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand("split", "Seeded train/test split of a corpus");
  cmd->add_option("--in", o->in, "Corpus JSONL")->required();
  cmd->add_option("--train", o->train, "Train corpus output")->required();
  cmd->add_option("--test", o->test, "Test corpus output")->required();
  cmd->add_option("--fraction", o->fraction, "Train fraction")->capture_default_str();
  cmd->add_flag("--no-stratify", o->no_stratify, "Split without regard to labels");
  cmd->callback([o, &g] {
    corpus::SplitSpec spec;
    spec.train_fraction = o->fraction;
    spec.seed = g.seed;
    spec.stratified = !o->no_stratify;
    const auto [train, test] = corpus::split(corpus::load_corpus(o->in), spec);
    corpus::save_corpus(train, o->train);
    corpus::save_corpus(test, o->test);
    log(g, "split: " + std::to_string(train.size()) + " train, " + std::to_string(test.size()) + " test");
  });
}

void add_stats(CLI::App& app, Globals&) {
  auto in = std::make_shared<std::string>();
  auto* cmd = app.add_subcommand("stats", "Print label, modality and synthetic counts");
  cmd->add_option("--in", *in, "Corpus JSONL")->required();
  cmd->callback([in] { std::cout << corpus::stats_to_json(corpus::stats(corpus::load_corpus(*in))) << '\n'; });
}

void add_augment(CLI::App& app, Globals& g) {
  struct Opts {
    std::string in, out;
    int n = augmentation::kDefaultVariants;
    bool stub = false;
    double balance = 0.0;
    int retries = 2;
  };
  auto o = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand(
      "augment", "Paraphrase texts, or with --balance grow the minority class of a corpus");
  cmd->add_option("--in", o->in, "JSONL of {id, text}, or a corpus with --balance")->required();
  cmd->add_option("--out", o->out, "Output JSONL")->required();
  cmd->add_option("--n", o->n, "Variants per text")->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_flag("--stub", o->stub, "Use the offline deterministic client");
  cmd->add_option("--balance", o->balance, "Target minority/majority ratio in (0, 1]");
  cmd->add_option("--retries", o->retries, "Retries on malformed responses")->capture_default_str();
  cmd->callback([o, &g] {
    auto client = make_llm(o->stub, g.seed, o->retries);
    if (o->balance > 0.0) {
      augmentation::BalanceReport report;
      const auto balanced = augmentation::balance_corpus(corpus::load_corpus(o->in), *client, o->balance, &report);
      corpus::save_corpus(balanced, o->out);
      log(g, "augment: added " + std::to_string(report.added) + " of " +
                 std::to_string(report.requested) + " synthetic examples" +
                 (report.exhausted ? " (variants exhausted)" : ""));
      return;
    }
    std::string out;
    for_each_jsonl(o->in, [&](const json& j, std::size_t line) {
      const auto id = required_string(j, "id", line);
      const auto text = textprep::clean_text(required_string(j, "text", line));
      const auto r = augmentation::rephrase(*client, text, o->n);
      ordered_json rec;
      rec["id"] = id;
      rec["text"] = text.str();
      rec["variants"] = r.variants;
      if (!r.raw_response.empty()) rec["raw_response"] = r.raw_response;
      out += rec.dump() + "\n";
    });
    write_text_file(o->out, out);
  });
}

void add_keywords(CLI::App& app, Globals& g) {
  struct Opts {
    std::string in, out;
    bool stub = false;
    int retries = 2;
  };
  auto o = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand("keywords", "Extract image-search keywords from texts");
  cmd->add_option("--in", o->in, "JSONL of {id, text}")->required();
  cmd->add_option("--out", o->out, "Output JSONL of {id, text, keywords}")->required();
  cmd->add_flag("--stub", o->stub, "Use the offline deterministic client");
  cmd->add_option("--retries", o->retries, "Retries on malformed responses")->capture_default_str();
  cmd->callback([o, &g] {
    auto client = make_llm(o->stub, g.seed, o->retries);
    std::string out;
    for_each_jsonl(o->in, [&](const json& j, std::size_t line) {
      const auto text = textprep::clean_text(required_string(j, "text", line));
      ordered_json rec;
      rec["id"] = required_string(j, "id", line);
      rec["text"] = text.str();
      rec["keywords"] = augmentation::extract_keywords(*client, text);
      out += rec.dump() + "\n";
    });
    write_text_file(o->out, out);
  });
}

void add_search(CLI::App& app, Globals& g) {
  struct Opts {
    std::string in, query, out, stub;
    std::size_t limit = 10;
  };
  auto o = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand(
      "search", "Image search by keywords and by original text; writes fetch requests");
  cmd->add_option("--in", o->in, "keywords JSONL ({id, text, keywords})");
  cmd->add_option("--query", o->query, "A single query instead of --in");
  cmd->add_option("--out", o->out, "Results JSONL")->required();
  cmd->add_option("--limit", o->limit, "Results per query")->capture_default_str();
  cmd->add_option("--stub", o->stub, "Serve results from a fixture JSONL instead of the API");
  cmd->callback([o, &g] {
    if (o->in.empty() == o->query.empty()) {
      throw Error(ErrorKind::kInvalidInput, "cli", "search needs exactly one of --in or --query");
    }
    std::unique_ptr<corpus::ImageSearchClient> client;
    if (!o->stub.empty()) client = std::make_unique<corpus::StubImageSearch>(o->stub);
    else client = std::make_unique<corpus::GoogleImageSearch>(corpus::GoogleSearchConfig::from_env());

    std::string out;
    auto emit = [&](const std::string& id, const std::string& q, corpus::QueryProvenance p) {
      for (const auto& r : corpus::image_search(*client, q, o->limit, p)) {
        ordered_json rec;
        rec["source_id"] = id;
        rec["query"] = r.query;
        rec["provenance"] = corpus::provenance_name(r.provenance);
        rec["url"] = r.url;
        rec["snippet"] = r.snippet;
        out += rec.dump() + "\n";
      }
    };
    if (!o->query.empty()) {
      emit("", o->query, corpus::QueryProvenance::kKeywords);
    } else {
      for_each_jsonl(o->in, [&](const json& j, std::size_t line) {
        const auto id = required_string(j, "id", line);
        if (j.contains("keywords") && j["keywords"].is_array() && !j["keywords"].empty()) {
          std::string q;
          for (const auto& k : j["keywords"]) {
            if (!k.is_string()) continue;
            if (!q.empty()) q += ' ';
            q += k.get<std::string>();
          }
          if (!q.empty()) emit(id, q, corpus::QueryProvenance::kKeywords);
        }
        if (j.contains("text") && j["text"].is_string() && !j["text"].get<std::string>().empty()) {
          emit(id, j["text"].get<std::string>(), corpus::QueryProvenance::kOriginalComment);
        }
      });
    }
    write_text_file(o->out, out);
    log(g, "search: results written to " + o->out);
  });
}

void add_fetch_images(CLI::App& app, Globals& g) {
  struct Opts {
    std::string in, dir;
    corpus::FetchOptions fetch;
  };
  auto o = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand("fetch-images", "Download search results for manual review");
  cmd->add_option("--in", o->in, "Search results JSONL ({url, query})")->required();
  cmd->add_option("--dir", o->dir, "Output directory")->required();
  cmd->add_option("--concurrency", o->fetch.max_concurrency, "Parallel downloads")->capture_default_str();
  cmd->add_option("--per-host", o->fetch.per_host, "Parallel downloads per host")->capture_default_str();
  cmd->add_option("--timeout", o->fetch.timeout_s, "Per-request timeout in seconds")->capture_default_str();
  cmd->callback([o, &g] {
    std::vector<corpus::FetchRequest> requests;
    for_each_jsonl(o->in, [&](const json& j, std::size_t line) {
      requests.push_back({required_string(j, "url", line), j.value("query", std::string())});
    });
    const auto result = corpus::fetch_images(requests, o->dir, o->fetch);
    for (const auto& f : result.failures) log(g, "fetch-images: failed " + f.url + ": " + f.reason);
    log(g, "fetch-images: " + std::to_string(result.pending.size()) + " images saved, " +
               std::to_string(result.failures.size()) + " failures; review " + result.manifest.string());
  });
}

}  // namespace

void add_data_commands(CLI::App& app, Globals& g) {
  add_preprocess(app, g);
  add_ingest(app, g);
  add_split(app, g);
  add_stats(app, g);
  add_augment(app, g);
  add_keywords(app, g);
  add_search(app, g);
  add_fetch_images(app, g);
}

}  // namespace modguard::cli
