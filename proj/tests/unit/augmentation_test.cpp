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

#include <atomic>
#include <chrono>
#include <deque>
#include <thread>

#include "modguard/augmentation.hpp"
#include "modguard/error.hpp"
#include "modguard/hash.hpp"
#include "modguard/textprep.hpp"
#include "response_fuzz.hpp"

namespace modguard::augmentation {
namespace {

using textprep::CleanText;

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

// Returns scripted responses in order, or throws when told to.
class ScriptedTransport : public ChatTransport {
 public:
  explicit ScriptedTransport(std::deque<std::string> replies) : replies_(std::move(replies)) {}
  std::string complete(std::string_view prompt) override {
    ++calls;
    prompts.emplace_back(prompt);
    if (replies_.empty()) throw Error(ErrorKind::kEndpointUnreachable, "test", "connection refused");
    auto r = replies_.front();
    if (replies_.size() > 1) replies_.pop_front();
    return r;
  }
  int calls = 0;
  std::vector<std::string> prompts;

 private:
  std::deque<std::string> replies_;
};

class FixedClient : public AugmentationClient {
 public:
  explicit FixedClient(std::vector<std::string> variants) : variants_(std::move(variants)) {}
  RephraseResult rephrase_candidates(const CleanText& text, int) override {
    return {text, variants_, "raw"};
  }
  std::vector<std::string> keyword_candidates(const CleanText&) override { return variants_; }

 private:
  std::vector<std::string> variants_;
};

LlmClientConfig local_config(const std::string& url = "http://127.0.0.1:1/v1/chat/completions") {
  LlmClientConfig c;
  c.endpoint_url = url;
  c.timeout_s = 5.0;
  return c;
}

TEST(Templates, HashPinned) {
  EXPECT_EQ(sha256_hex(rephrase_template()),
            "035a19cdc7016a45f8648f3ef76a1810cd98de40360e0f320b10dd32b03e9581");
  EXPECT_EQ(sha256_hex(keywords_template()),
            "190cd9dd2138a26d7b9a259904ce43b77eeffbafa6953e60ce999dbdb80b2d4d");
}

TEST(Templates, RenderSubstitutesEveryPlaceholder) {
  EXPECT_EQ(render_template("{{n}} of \"{{text}}\", {{n}} again", "hi {{n}}", 10),
            "10 of \"hi {{n}}\", 10 again");
  const auto prompt = render_template(rephrase_template(), "you are kind", 10);
  EXPECT_NE(prompt.find("you are kind"), std::string::npos);
  EXPECT_EQ(prompt.find("{{"), std::string::npos);
}

TEST(Parser, Examples) {
  using V = std::vector<std::string>;
  EXPECT_EQ(parse_string_array("[\"a\", \"b\"]"), (V{"a", "b"}));
  EXPECT_EQ(parse_string_array("Sure!\n```json\n[\"x ]\", \"y\\\"[\"]\n```\nDone."),
            (V{"x ]", "y\"["}));
  EXPECT_EQ(parse_string_array("[1, 2] then [\"ok\"]"), (V{"ok"}));
  EXPECT_EQ(parse_string_array("note [sic] [\"ok\"]"), (V{"ok"}));
  // A wrong-shape array is skipped whole, not searched inside.
  EXPECT_EQ(kind_of([] { parse_string_array("[[\"inner\"]]"); }), ErrorKind::kMalformedResponse);
  EXPECT_EQ(kind_of([] { parse_string_array("[]"); }), ErrorKind::kMalformedResponse);
  EXPECT_EQ(kind_of([] { parse_string_array("[\"a\", \"b"); }), ErrorKind::kMalformedResponse);
  EXPECT_EQ(kind_of([] { parse_string_array("[\"a\", [\"b\"]"); }), ErrorKind::kMalformedResponse);
  EXPECT_EQ(kind_of([] { parse_string_array("no array at all"); }), ErrorKind::kMalformedResponse);
  EXPECT_EQ(kind_of([] { parse_string_array(""); }), ErrorKind::kMalformedResponse);
}

TEST(Parser, FuzzCorpusClassifiedCorrectly) {
  for (const auto& c : testing::make_response_fuzz(7, 3000)) {
    SCOPED_TRACE(c.category + ": " + c.response);
    std::optional<std::vector<std::string>> got;
    try {
      got = parse_string_array(c.response);
    } catch (const Error& e) {
      ASSERT_EQ(e.kind(), ErrorKind::kMalformedResponse);
    }
    if (c.known) {
      ASSERT_EQ(got, c.expected);
    } else if (got) {
      ASSERT_FALSE(got->empty());
      ASSERT_TRUE(testing::occurs_as_array(c.response, *got));
    }
  }
}

TEST(Stub, DeterministicAndIndependentOfN) {
  StubClient a(3), b(3);
  const CleanText text("you are such a stupid person, really");
  const auto r1 = rephrase(a, text, 3);
  const auto r2 = rephrase(b, text, 3);
  ASSERT_EQ(r1.variants.size(), 3u);
  EXPECT_EQ(r1.variants, r2.variants);
  for (const auto& v : r1.variants) EXPECT_NE(v, text.str());
  const auto r10 = rephrase(a, text, 10);
  ASSERT_EQ(r10.variants.size(), 10u);
  EXPECT_TRUE(std::equal(r1.variants.begin(), r1.variants.end(), r10.variants.begin()));
  StubClient other(4);
  EXPECT_NE(rephrase(other, text, 10).variants, r10.variants);
}

TEST(Stub, ManyVariantsStayDistinct) {
  StubClient stub(0);
  const auto r = rephrase(stub, CleanText("ok"), 200);
  EXPECT_EQ(r.variants.size(), 200u);
}

TEST(Stub, KeywordsAreTopThreeTerms) {
  StubClient stub;
  EXPECT_EQ(extract_keywords(stub, CleanText("the cat sat with the cat and a dog, dog DOG 42")),
            (std::vector<std::string>{"dog", "cat", "sat"}));
  EXPECT_EQ(extract_keywords(stub, CleanText("Zebras")), (std::vector<std::string>{"zebras"}));
  EXPECT_EQ(kind_of([&] { extract_keywords(stub, CleanText("the and of")); }),
            ErrorKind::kEmptyAfterFiltering);
}

TEST(Rephrase, FiltersEmptyDuplicateAndVerbatim) {
  FixedClient client({"", "  ", "you are kind", " you are  kind", "so kind", "so kind ", "nice one",
                      "third"});
  const auto r = rephrase(client, CleanText("you are kind"), 2);
  EXPECT_EQ(r.variants, (std::vector<std::string>{"so kind", "nice one"}));
  EXPECT_EQ(r.original.str(), "you are kind");
  EXPECT_EQ(r.raw_response, "raw");
}

TEST(Rephrase, Errors) {
  FixedClient verbatim({"same", " same "});
  EXPECT_EQ(kind_of([&] { rephrase(verbatim, CleanText("same")); }), ErrorKind::kEmptyAfterFiltering);
  EXPECT_EQ(kind_of([&] { rephrase(verbatim, CleanText("")); }), ErrorKind::kInvalidInput);
  EXPECT_EQ(kind_of([&] { rephrase(verbatim, CleanText("x"), 0); }), ErrorKind::kInvalidInput);
}

TEST(Keywords, LowercasedDedupedCapped) {
  FixedClient client({" Cats ", "cats", "", "DOGS", "a", "b", "c", "d", "e", "f", "g", "h"});
  EXPECT_EQ(extract_keywords(client, CleanText("x")),
            (std::vector<std::string>{"cats", "dogs", "a", "b", "c", "d", "e", "f"}));
  EXPECT_EQ(kind_of([&] { extract_keywords(client, CleanText("")); }), ErrorKind::kInvalidInput);
}

TEST(LlmClient, RetriesUntilArrayAppears) {
  auto transport = std::make_unique<ScriptedTransport>(
      std::deque<std::string>{"I cannot do that.", "[\"broken", "Sure: [\"a kind one\", \"b\"]"});
  auto* t = transport.get();
  LlmClient client(local_config(), std::move(transport));
  const auto r = rephrase(client, CleanText("you are kind"), 10);
  EXPECT_EQ(t->calls, 3);
  EXPECT_EQ(r.variants, (std::vector<std::string>{"a kind one", "b"}));
  EXPECT_EQ(r.raw_response, "Sure: [\"a kind one\", \"b\"]");
  EXPECT_EQ(t->prompts[0], render_template(rephrase_template(), "you are kind", 10));
}

TEST(LlmClient, GivesUpAfterMaxRetries) {
  auto transport = std::make_unique<ScriptedTransport>(std::deque<std::string>{"prose only"});
  auto* t = transport.get();
  auto cfg = local_config();
  cfg.max_retries = 4;
  LlmClient client(cfg, std::move(transport));
  EXPECT_EQ(kind_of([&] { rephrase(client, CleanText("x")); }), ErrorKind::kMalformedResponse);
  EXPECT_EQ(t->calls, 5);
}

TEST(LlmClient, TransportErrorsAreNotRetried) {
  auto transport = std::make_unique<ScriptedTransport>(std::deque<std::string>{});
  auto* t = transport.get();
  LlmClient client(local_config(), std::move(transport));
  EXPECT_EQ(kind_of([&] { extract_keywords(client, CleanText("x")); }),
            ErrorKind::kEndpointUnreachable);
  EXPECT_EQ(t->calls, 1);
}

TEST(LlmClient, RespectsConcurrencyCap) {
  class Slow : public ChatTransport {
   public:
    std::string complete(std::string_view) override {
      const int now = ++active;
      int seen = peak.load();
      while (now > seen && !peak.compare_exchange_weak(seen, now)) {
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
      --active;
      return "[\"k\"]";
    }
    std::atomic<int> active{0};
    std::atomic<int> peak{0};
  };
  auto transport = std::make_unique<Slow>();
  auto* t = transport.get();
  auto cfg = local_config();
  cfg.max_concurrent_requests = 3;
  LlmClient client(cfg, std::move(transport));
  std::vector<std::thread> threads;
  for (int i = 0; i < 12; ++i) {
    threads.emplace_back([&] { extract_keywords(client, CleanText("x")); });
  }
  for (auto& th : threads) th.join();
  EXPECT_LE(t->peak.load(), 3);
  EXPECT_GE(t->peak.load(), 1);
}

TEST(LlmClientConfig, Validation) {
  auto c = local_config();
  EXPECT_NO_THROW(c.validate());
  c.endpoint_url.clear();
  EXPECT_EQ(kind_of([&] { c.validate(); }), ErrorKind::kInvalidInput);
  c = local_config();
  c.timeout_s = 0;
  EXPECT_EQ(kind_of([&] { c.validate(); }), ErrorKind::kInvalidInput);
  c = local_config();
  c.max_retries = -1;
  EXPECT_EQ(kind_of([&] { c.validate(); }), ErrorKind::kInvalidInput);
  EXPECT_EQ(kind_of([] { HttpChatTransport t(local_config("ftp://host/x")); }),
            ErrorKind::kInvalidInput);
}

class ChatServer {
 public:
  ChatServer() {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      last_body = req.body;
      last_auth = req.get_header_value("Authorization");
      res.status = status;
      res.set_content(reply, "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~ChatServer() {
    server_.stop();
    thread_.join();
  }
  std::string url() const {
    return "http://127.0.0.1:" + std::to_string(port_) + "/v1/chat/completions";
  }

  int status = 200;
  std::string reply;
  std::string last_body;
  std::string last_auth;

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

TEST(HttpTransport, SpeaksChatCompletions) {
  ChatServer server;
  server.reply = R"({"choices": [{"message": {"role": "assistant", "content": "[\"so kind\"]"}}]})";
  auto cfg = local_config(server.url());
  cfg.api_key = "secret";
  cfg.temperature = 0.25;
  LlmClient client(cfg);
  const auto r = rephrase(client, CleanText("you are kind"), 10);
  EXPECT_EQ(r.variants, (std::vector<std::string>{"so kind"}));
  const auto body = nlohmann::json::parse(server.last_body);
  EXPECT_EQ(body["model"], "mistral-7b-instruct");
  EXPECT_EQ(body["temperature"], 0.25);
  ASSERT_EQ(body["messages"].size(), 1u);
  EXPECT_EQ(body["messages"][0]["role"], "user");
  EXPECT_EQ(body["messages"][0]["content"], render_template(rephrase_template(), "you are kind", 10));
  EXPECT_EQ(server.last_auth, "Bearer secret");

  server.reply = R"({"choices": [{"text": "[\"legacy\"]"}]})";
  EXPECT_EQ(extract_keywords(client, CleanText("x")), (std::vector<std::string>{"legacy"}));
}

TEST(HttpTransport, ErrorClassification) {
  ChatServer server;
  HttpChatTransport transport(local_config(server.url()));
  server.status = 503;
  server.reply = "{}";
  EXPECT_EQ(kind_of([&] { transport.complete("x"); }), ErrorKind::kEndpointUnreachable);
  server.status = 200;
  server.reply = "not json";
  EXPECT_EQ(kind_of([&] { transport.complete("x"); }), ErrorKind::kMalformedResponse);
  server.reply = R"({"choices": []})";
  EXPECT_EQ(kind_of([&] { transport.complete("x"); }), ErrorKind::kMalformedResponse);

  // Nothing listens on port 1.
  HttpChatTransport dead(local_config());
  EXPECT_EQ(kind_of([&] { dead.complete("x"); }), ErrorKind::kEndpointUnreachable);
}

corpus::LabeledExample text_example(std::string id, std::string text, Label label) {
  corpus::LabeledExample ex;
  ex.id = std::move(id);
  ex.content = std::move(text);
  ex.label = label;
  return ex;
}

TEST(Balance, ToyCorpusFourVersusTwo) {
  const corpus::Corpus input({text_example("h1", "you are trash", Label::kHarmful),
                              text_example("n1", "what a nice day", Label::kNonHarmful),
                              text_example("h2", "go away idiot", Label::kHarmful),
                              text_example("h3", "everyone hates you", Label::kHarmful),
                              text_example("n2", "thanks friend", Label::kNonHarmful),
                              text_example("h4", "so stupid", Label::kHarmful)});
  StubClient stub(1);
  BalanceReport report;
  const auto out = balance_corpus(input, stub, 1.0, &report);
  ASSERT_EQ(out.size(), 8u);
  EXPECT_EQ(report.requested, 2u);
  EXPECT_EQ(report.added, 2u);
  EXPECT_FALSE(report.exhausted);
  for (std::size_t i = 0; i < input.size(); ++i) EXPECT_EQ(out[i], input[i]);
  EXPECT_EQ(out[6].id, "n1#syn1");
  EXPECT_EQ(out[7].id, "n2#syn1");
  std::size_t synthetic = 0, benign = 0;
  for (const auto& ex : out.examples()) {
    synthetic += ex.synthetic;
    benign += ex.label == Label::kNonHarmful;
  }
  EXPECT_EQ(synthetic, 2u);
  EXPECT_EQ(benign, 4u);
  EXPECT_EQ(out[6].source, "n1");
  EXPECT_TRUE(out[6].synthetic);
  EXPECT_EQ(out[6].label, Label::kNonHarmful);
  EXPECT_EQ(out[6].content, textprep::clean_text(out[6].content).str());
  EXPECT_NE(out[6].content, "what a nice day");

  StubClient again(1);
  EXPECT_EQ(balance_corpus(input, again, 1.0), out);
}

TEST(Balance, AlreadyBalancedUnchanged) {
  const corpus::Corpus input({text_example("a", "x y", Label::kHarmful),
                              text_example("b", "y z", Label::kNonHarmful)});
  StubClient stub;
  BalanceReport report;
  EXPECT_EQ(balance_corpus(input, stub, 1.0, &report), input);
  EXPECT_EQ(report.added, 0u);
  // 3 vs 2 with ratio 0.5 already satisfies ceil(1.5) = 2.
  const corpus::Corpus skewed({text_example("a", "a", Label::kHarmful),
                               text_example("b", "b", Label::kHarmful),
                               text_example("c", "c", Label::kHarmful),
                               text_example("d", "d", Label::kNonHarmful),
                               text_example("e", "e", Label::kNonHarmful)});
  EXPECT_EQ(balance_corpus(skewed, stub, 0.5), skewed);
}

TEST(Balance, ExhaustionStopsEarly) {
  const corpus::Corpus input({text_example("a", "one", Label::kHarmful),
                              text_example("b", "two", Label::kHarmful),
                              text_example("c", "three", Label::kHarmful),
                              text_example("d", "four", Label::kNonHarmful)});
  FixedClient client({"only variant"});
  BalanceReport report;
  const auto out = balance_corpus(input, client, 1.0, &report);
  EXPECT_EQ(out.size(), 5u);
  EXPECT_EQ(report.requested, 2u);
  EXPECT_EQ(report.added, 1u);
  EXPECT_TRUE(report.exhausted);
}

TEST(Balance, Errors) {
  const corpus::Corpus input({text_example("a", "one", Label::kHarmful),
                              text_example("b", "two", Label::kHarmful)});
  StubClient stub;
  EXPECT_EQ(kind_of([&] { balance_corpus(input, stub, 0.0); }), ErrorKind::kInvalidInput);
  EXPECT_EQ(kind_of([&] { balance_corpus(input, stub, 1.5); }), ErrorKind::kInvalidInput);
  // The minority class is empty, so there is nothing to rephrase.
  EXPECT_EQ(kind_of([&] { balance_corpus(input, stub, 1.0); }), ErrorKind::kInvalidInput);
}

// 6,252 original non-harmful tweets plus 10,825 paraphrases give 17,077.
TEST(Balance, FullCorpusCountsArithmetic) {
  std::vector<corpus::LabeledExample> examples;
  for (int i = 0; i < 19190; ++i) {
    examples.push_back(text_example("h" + std::to_string(i), "harmful tweet " + std::to_string(i),
                                    Label::kHarmful));
  }
  for (int i = 0; i < 6252; ++i) {
    examples.push_back(text_example("n" + std::to_string(i),
                                    "what a nice day number " + std::to_string(i), Label::kNonHarmful));
  }
  const corpus::Corpus input(std::move(examples));
  StubClient stub(2);
  BalanceReport report;
  const auto out = balance_corpus(input, stub, 17077.0 / 19190.0, &report);
  EXPECT_EQ(report.added, 10825u);
  const auto s = corpus::stats(out);
  EXPECT_EQ(s.by_label[0], 17077u);
  EXPECT_EQ(s.by_label[1], 19190u);
  EXPECT_EQ(s.synthetic, 10825u);
}

}  // namespace
}  // namespace modguard::augmentation
