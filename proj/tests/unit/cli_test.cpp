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

#include <netinet/in.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <sstream>
#include <thread>

#include "cli.hpp"
#include "modguard/classifiers.hpp"
#include "modguard/corpus.hpp"
#include "modguard/embedding_store.hpp"
#include "modguard/image.hpp"
#include "temp_dir.hpp"

namespace modguard::cli {
namespace {

using testing::TempDir;
using testing::read_file;
using testing::write_file;

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), {"modguard", "--quiet"});
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Result r;
  r.code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path) {
  std::vector<nlohmann::json> out;
  std::istringstream in(read_file(path));
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) out.push_back(nlohmann::json::parse(line));
  }
  return out;
}

// Twenty short texts, ten per class.
std::string small_corpus() {
  const char* harmful[] = {"you are a stupid idiot", "everyone hates you",   "go away loser",
                           "you people are trash",   "shut up moron",        "nobody wants you here",
                           "what a worthless idiot", "you are so pathetic",  "i hate you all",
                           "you disgusting creep"};
  const char* benign[] = {"what a lovely day",        "thanks for the dinner",  "happy birthday friend",
                          "the weather is nice",      "great game last night",  "my cat is asleep",
                          "see you at the concert",   "good morning everyone",  "this recipe is amazing",
                          "looking forward to friday"};
  std::string out;
  for (int i = 0; i < 10; ++i) {
    out += nlohmann::json{{"id", "h" + std::to_string(i)}, {"modality", "text"}, {"text", harmful[i]}, {"label", 1}}.dump() + "\n";
    out += nlohmann::json{{"id", "n" + std::to_string(i)}, {"modality", "text"}, {"text", benign[i]}, {"label", 0}}.dump() + "\n";
  }
  return out;
}

TEST(Cli, UsageErrors) {
  auto r = run_cli({"frobnicate"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("unknown subcommand 'frobnicate'"), std::string::npos);
  EXPECT_EQ(run_cli({}).code, 2);
  EXPECT_EQ(run_cli({"split", "--in"}).code, 2);
  EXPECT_EQ(run_cli({"reduce", "--store", "x", "--out", "y", "--dim", "5"}).code, 2);
  r = run_cli({"--help"});
  EXPECT_EQ(r.code, 0);
  for (const char* sub : {"preprocess", "embed", "train", "eval", "reduce", "augment", "keywords",
                          "serve", "stats", "split", "ingest", "search", "fetch-images", "pipeline"}) {
    EXPECT_NE(r.out.find(sub), std::string::npos) << sub;
  }
  EXPECT_NE(run_cli({"--version"}).out.find("modguard"), std::string::npos);
}

TEST(Cli, CommandFailureExitsOne) {
  TempDir dir;
  const auto r = run_cli({"stats", "--in", (dir / "missing.jsonl").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("IoError"), std::string::npos);
}

TEST(Cli, BinaryRejectsUnknownSubcommand) {
  const std::string cmd = std::string(MODGUARD_BIN) + " frobnicate >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  ASSERT_TRUE(WIFEXITED(status));
  EXPECT_EQ(WEXITSTATUS(status), 2);
}

TEST(Cli, PreprocessStatsSplit) {
  TempDir dir;
  write_file(dir / "raw.jsonl",
             "{\"id\": \"1\", \"text\": \"RT @bob: look https://t.co/x &amp; #wow\", \"extra\": 5}\n");
  ASSERT_EQ(run_cli({"preprocess", "--in", (dir / "raw.jsonl").string(), "--out",
                     (dir / "clean.jsonl").string()})
                .code,
            0);
  const auto clean = read_jsonl(dir / "clean.jsonl");
  ASSERT_EQ(clean.size(), 1u);
  EXPECT_EQ(clean[0]["text"], "look wow");
  EXPECT_EQ(clean[0]["extra"], 5);

  write_file(dir / "corpus.jsonl", small_corpus());
  auto r = run_cli({"stats", "--in", (dir / "corpus.jsonl").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto stats = nlohmann::json::parse(r.out);
  EXPECT_EQ(stats["label_0"], 10);
  EXPECT_EQ(stats["label_1"], 10);

  r = run_cli({"--seed", "4", "split", "--in", (dir / "corpus.jsonl").string(), "--train",
               (dir / "train.jsonl").string(), "--test", (dir / "test.jsonl").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(corpus::load_corpus(dir / "train.jsonl").size(), 16u);
  EXPECT_EQ(corpus::load_corpus(dir / "test.jsonl").size(), 4u);
}

TEST(Cli, EmbedTrainPredictEvalReduce) {
  TempDir dir;
  write_file(dir / "corpus.jsonl", small_corpus());
  const auto store = (dir / "all.emb").string();
  auto r = run_cli({"embed", "--in", (dir / "corpus.jsonl").string(), "--out", store, "--dim", "64"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto s = embedding::read_store(store);
  EXPECT_EQ(s.count(), 20u);
  EXPECT_EQ(s.dim(), 64u);

  for (const char* algo : {"logreg", "svm", "knn"}) {
    const auto model = (dir / (std::string(algo) + ".json")).string();
    r = run_cli({"train", "--algo", algo, "--k", "3", "--store", store, "--out", model});
    ASSERT_EQ(r.code, 0) << r.err;
    r = run_cli({"predict", "--model", model, "--store", store, "--out", (dir / "pred.jsonl").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto preds = read_jsonl(dir / "pred.jsonl");
    ASSERT_EQ(preds.size(), 20u);
    EXPECT_EQ(preds[0]["id"], "h0");
    r = run_cli({"eval", "--model", model, "--store", store, "--report", (dir / "report.json").string(),
                 "--roc-csv", (dir / "roc.csv").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("auc="), std::string::npos);
    const auto report = nlohmann::json::parse(read_file(dir / "report.json"));
    EXPECT_GE(report["auc"].get<double>(), 0.9) << algo;
    EXPECT_EQ(read_file(dir / "roc.csv").substr(0, 8), "fpr,tpr\n");
  }

  r = run_cli({"train", "--grid", "--store", store, "--out", (dir / "grid.json").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(run_cli({"train", "--algo", "knn", "--k", "2", "--store", store, "--out", (dir / "k.json").string()}).code, 1);

  write_file(dir / "hl.txt", "h0\nn0\nh1\nn1\n");
  r = run_cli({"reduce", "--store", store, "--method", "pca", "--dim", "3", "--out",
               (dir / "pca.csv").string(), "--highlight", (dir / "hl.txt").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto csv = corpus::parse_csv(read_file(dir / "pca.csv"));
  ASSERT_EQ(csv.size(), 21u);
  EXPECT_EQ(csv[0], (std::vector<std::string>{"id", "x", "y", "z", "label", "highlight"}));
  r = run_cli({"reduce", "--store", store, "--method", "umap", "--neighbors", "5", "--out",
               (dir / "umap.csv").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  r = run_cli({"reduce", "--store", store, "--method", "pca", "--out", (dir / "few.csv").string(),
               "--highlight", (dir / "hl.txt").string(), "--highlight-only"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(corpus::parse_csv(read_file(dir / "few.csv")).size(), 5u);
}

TEST(Cli, EmbedImages) {
  TempDir dir;
  write_file(dir / "red.png", encode_png(solid_image(8, 8, 255, 0, 0)));
  write_file(dir / "items.jsonl",
             "{\"id\": \"r\", \"modality\": \"image\", \"image_path\": \"red.png\", \"label\": 1}\n"
             "{\"id\": \"t\", \"text\": \"a red square\", \"label\": 0}\n");
  const auto r = run_cli({"embed", "--in", (dir / "items.jsonl").string(), "--out",
                          (dir / "mixed.emb").string(), "--dim", "32"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto s = embedding::read_store(dir / "mixed.emb");
  EXPECT_EQ(s.count(), 2u);
  EXPECT_EQ(s.ids()[0], "r");
}

TEST(Cli, AugmentKeywordsSearchStub) {
  TempDir dir;
  write_file(dir / "texts.jsonl", "{\"id\": \"a\", \"text\": \"stupid idiots go away\"}\n");
  auto r = run_cli({"augment", "--stub", "--n", "4", "--in", (dir / "texts.jsonl").string(), "--out",
                    (dir / "aug.jsonl").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto aug = read_jsonl(dir / "aug.jsonl");
  ASSERT_EQ(aug.size(), 1u);
  EXPECT_EQ(aug[0]["variants"].size(), 4u);

  r = run_cli({"keywords", "--stub", "--in", (dir / "texts.jsonl").string(), "--out",
               (dir / "kw.jsonl").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto kw = read_jsonl(dir / "kw.jsonl");
  EXPECT_EQ(kw[0]["keywords"], (nlohmann::json{"stupid", "idiots", "go"}));

  // Keyword query "stupid idiots go" has no canned rows; the original text does.
  r = run_cli({"search", "--stub", testing::fixture_path("search/results.jsonl").string(), "--in",
               (dir / "kw.jsonl").string(), "--out", (dir / "results.jsonl").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto results = read_jsonl(dir / "results.jsonl");
  ASSERT_EQ(results.size(), 3u);
  EXPECT_EQ(results[0]["provenance"], "original_comment");
  EXPECT_EQ(results[0]["source_id"], "a");

  write_file(dir / "corpus.jsonl", small_corpus() +
                                       nlohmann::json{{"id", "h10"}, {"modality", "text"}, {"text", "extra insult"}, {"label", 1}}.dump() +
                                       "\n");
  r = run_cli({"augment", "--stub", "--balance", "1.0", "--in", (dir / "corpus.jsonl").string(), "--out",
               (dir / "balanced.jsonl").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto stats = corpus::stats(corpus::load_corpus(dir / "balanced.jsonl"));
  EXPECT_EQ(stats.by_label[0], 11u);
  EXPECT_EQ(stats.synthetic, 1u);

  // Without --stub the client needs an endpoint.
  unsetenv("MODGUARD_LLM_URL");
  EXPECT_EQ(run_cli({"keywords", "--in", (dir / "texts.jsonl").string(), "--out", (dir / "x").string()}).code, 1);
}

TEST(Cli, IngestFormats) {
  TempDir dir;
  write_file(dir / "hs.csv", ",count,class,tweet\n0,3,1,\"@a you idiot\"\n1,3,2,\"fine\"\n");
  auto r = run_cli({"ingest", "--format", "hate-speech-csv", "--in", (dir / "hs.csv").string(), "--out",
                    (dir / "hs.jsonl").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(corpus::load_corpus(dir / "hs.jsonl")[0].content, "you idiot");
  EXPECT_EQ(run_cli({"ingest", "--format", "tsv", "--in", "x", "--out", "y"}).code, 2);
}

TEST(Cli, PipelineSmokeUnderTenSeconds) {
  TempDir dir;
  write_file(dir / "corpus.jsonl", small_corpus());
  const auto start = std::chrono::steady_clock::now();
  const auto r = run_cli({"--seed", "7", "pipeline", "--in", (dir / "corpus.jsonl").string(), "--work",
                          (dir / "work").string(), "--dim", "128"});
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_LT(seconds, 10.0);
  for (const char* f : {"train.jsonl", "test.jsonl", "train.emb", "test.emb", "model.json", "report.json",
                        "roc.csv", "projection.csv"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / "work" / f)) << f;
  }
  EXPECT_NE(r.out.find("precision="), std::string::npos);
  // Same seed, same outputs.
  const auto again = run_cli({"--seed", "7", "pipeline", "--in", (dir / "corpus.jsonl").string(), "--work",
                              (dir / "work2").string(), "--dim", "128"});
  ASSERT_EQ(again.code, 0);
  EXPECT_EQ(read_file(dir / "work" / "model.json"), read_file(dir / "work2" / "model.json"));
  EXPECT_EQ(read_file(dir / "work" / "projection.csv"), read_file(dir / "work2" / "projection.csv"));
}

TEST(Cli, ConfigFileMirrorsFlags) {
  TempDir dir;
  write_file(dir / "corpus.jsonl", small_corpus());
  write_file(dir / "cfg.toml", "seed = 4\n");
  const auto a = run_cli({"--config", (dir / "cfg.toml").string(), "split", "--in", (dir / "corpus.jsonl").string(),
                          "--train", (dir / "a_train.jsonl").string(), "--test", (dir / "a_test.jsonl").string()});
  const auto b = run_cli({"--seed", "4", "split", "--in", (dir / "corpus.jsonl").string(), "--train",
                          (dir / "b_train.jsonl").string(), "--test", (dir / "b_test.jsonl").string()});
  ASSERT_EQ(a.code, 0) << a.err;
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_EQ(read_file(dir / "a_test.jsonl"), read_file(dir / "b_test.jsonl"));
}

int free_port() {
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  ::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr));
  socklen_t len = sizeof(addr);
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
  ::close(fd);
  return ntohs(addr.sin_port);
}

TEST(Cli, ServeAnswersAndStopsOnSigterm) {
  const int port = free_port();
  const std::string model = testing::fixture_path("service/model.json").string();
  const std::string bind = "127.0.0.1:" + std::to_string(port);
  const pid_t pid = fork();
  ASSERT_GE(pid, 0);
  if (pid == 0) {
    execl(MODGUARD_BIN, MODGUARD_BIN, "--quiet", "serve", "--model", model.c_str(), "--bind", bind.c_str(),
          static_cast<char*>(nullptr));
    _exit(127);
  }
  httplib::Client client("127.0.0.1", port);
  httplib::Result health;
  for (int i = 0; i < 200 && !health; ++i) {
    std::this_thread::sleep_for(std::chrono::milliseconds(25));
    health = client.Get("/v1/health");
  }
  ASSERT_TRUE(health);
  EXPECT_EQ(health->status, 200);
  auto res = client.Post("/v1/classify", "{\"text\": \"you are a stupid idiot\"}", "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(nlohmann::json::parse(res->body)["label"], 1);
  kill(pid, SIGTERM);
  int status = 0;
  waitpid(pid, &status, 0);
  ASSERT_TRUE(WIFEXITED(status));
  EXPECT_EQ(WEXITSTATUS(status), 0);
}

}  // namespace
}  // namespace modguard::cli
