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

#ifndef MODGUARD_AUGMENTATION_HPP_
#define MODGUARD_AUGMENTATION_HPP_

#include <cstdint>
#include <memory>
#include <mutex>
#include <condition_variable>
#include <string>
#include <string_view>
#include <vector>

#include "modguard/corpus.hpp"
#include "modguard/textprep.hpp"

namespace modguard::augmentation {

inline constexpr int kDefaultVariants = 10;
inline constexpr std::size_t kMaxKeywords = 8;

// Verbatim prompt templates with {{n}} and {{text}} placeholders, compiled in
// from core/data/prompts.
std::string_view rephrase_template();
std::string_view keywords_template();
std::string render_template(std::string_view tmpl, std::string_view text, int n);

// Finds the first bracket-balanced JSON array in a model response that parses
// as a non-empty array of strings. Surrounding prose and code fences are
// ignored. Throws MalformedResponse when there is none.
std::vector<std::string> parse_string_array(std::string_view response);

struct RephraseResult {
  textprep::CleanText original;
  std::vector<std::string> variants;
  std::string raw_response;
};

class AugmentationClient {
 public:
  virtual ~AugmentationClient() = default;
  // Unfiltered candidates; rephrase() below applies the shared filtering.
  virtual RephraseResult rephrase_candidates(const textprep::CleanText& text, int n) = 0;
  virtual std::vector<std::string> keyword_candidates(const textprep::CleanText& text) = 0;
};

// Drops empty, duplicate and verbatim-copy variants and keeps at most n.
// Throws InvalidInput (empty text or n < 1) or EmptyAfterFiltering.
RephraseResult rephrase(AugmentationClient& client, const textprep::CleanText& text,
                        int n = kDefaultVariants);
// Lowercased, trimmed, deduplicated in order, at most 8.
// Throws InvalidInput (empty text) or EmptyAfterFiltering.
std::vector<std::string> extract_keywords(AugmentationClient& client,
                                          const textprep::CleanText& text);

struct LlmClientConfig {
  std::string endpoint_url;  // full chat-completions URL
  std::string model_name = "mistral-7b-instruct";
  std::string api_key;
  double timeout_s = 60.0;
  int max_retries = 2;
  double temperature = 0.7;
  std::size_t max_concurrent_requests = 4;

  // Throws InvalidInput.
  void validate() const;
  // MODGUARD_LLM_URL, MODGUARD_LLM_KEY, MODGUARD_LLM_MODEL.
  static LlmClientConfig from_env();
};

// Sends one user message and returns the first choice's text.
class ChatTransport {
 public:
  virtual ~ChatTransport() = default;
  // Throws EndpointUnreachable or MalformedResponse.
  virtual std::string complete(std::string_view prompt) = 0;
};

// POST {model, messages: [{role: "user", content}], temperature} to an
// OpenAI-compatible chat-completions endpoint.
class HttpChatTransport : public ChatTransport {
 public:
  explicit HttpChatTransport(LlmClientConfig config);
  std::string complete(std::string_view prompt) override;

 private:
  LlmClientConfig config_;
};

// Client for a remote instruction-following model. Thread-safe; at most
// max_concurrent_requests calls are in flight at once. Retries only when the
// response holds no usable array.
class LlmClient : public AugmentationClient {
 public:
  explicit LlmClient(LlmClientConfig config, std::unique_ptr<ChatTransport> transport = nullptr);

  RephraseResult rephrase_candidates(const textprep::CleanText& text, int n) override;
  std::vector<std::string> keyword_candidates(const textprep::CleanText& text) override;

 private:
  // Returns the parsed array and the raw response it came from.
  std::pair<std::vector<std::string>, std::string> ask(const std::string& prompt);

  LlmClientConfig config_;
  std::unique_ptr<ChatTransport> transport_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::size_t in_flight_ = 0;
};

// Offline, deterministic stand-in. Rephrasing substitutes words from a small
// synonym table and adds discourse markers, chosen by a generator seeded from
// (seed, text, variant index), so variant k never depends on n. Keywords are
// the three most frequent non-stopword tokens, ties broken by first
// occurrence.
class StubClient : public AugmentationClient {
 public:
  explicit StubClient(std::uint64_t seed = 0) : seed_(seed) {}

  RephraseResult rephrase_candidates(const textprep::CleanText& text, int n) override;
  std::vector<std::string> keyword_candidates(const textprep::CleanText& text) override;

 private:
  std::uint64_t seed_;
};

// Grows the minority class with synthetic paraphrases of its original text
// examples, round-robin over originals in corpus order, until
// minority >= ceil(target_ratio * majority). Synthetic examples get id
// "<original id>#syn<k>", synthetic = true and source = original id, and are
// appended after the originals. A corpus already within the ratio is
// returned unchanged. Stops early, returning what it has, if every original
// runs out of fresh variants.
struct BalanceReport {
  std::size_t requested = 0;
  std::size_t added = 0;
  bool exhausted = false;
};
corpus::Corpus balance_corpus(const corpus::Corpus& corpus, AugmentationClient& client,
                              double target_ratio = 1.0, BalanceReport* report = nullptr);

}  // namespace modguard::augmentation

#endif  // MODGUARD_AUGMENTATION_HPP_
