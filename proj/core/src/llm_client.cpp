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

#include <json.hpp>

#include <cstdlib>

#include "http_util.hpp"
#include "modguard/augmentation.hpp"
#include "modguard/error.hpp"

namespace modguard::augmentation {
namespace {

constexpr std::string_view kModule = "augmentation";

std::string env_or(const char* name, std::string fallback) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : std::move(fallback);
}

}  // namespace

void LlmClientConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::kInvalidInput, kModule, what); };
  if (endpoint_url.empty()) fail("LLM endpoint URL is not set (MODGUARD_LLM_URL)");
  if (!(timeout_s > 0.0)) fail("timeout must be positive");
  if (max_retries < 0) fail("max_retries must be >= 0");
  if (!(temperature >= 0.0)) fail("temperature must be >= 0");
  if (max_concurrent_requests == 0) fail("max_concurrent_requests must be positive");
}

LlmClientConfig LlmClientConfig::from_env() {
  LlmClientConfig c;
  c.endpoint_url = env_or("MODGUARD_LLM_URL", "");
  c.api_key = env_or("MODGUARD_LLM_KEY", "");
  c.model_name = env_or("MODGUARD_LLM_MODEL", c.model_name);
  return c;
}

HttpChatTransport::HttpChatTransport(LlmClientConfig config) : config_(std::move(config)) {
  config_.validate();
  detail::parse_url(config_.endpoint_url, kModule);
}

std::string HttpChatTransport::complete(std::string_view prompt) {
  const auto url = detail::parse_url(config_.endpoint_url, kModule);
  auto client = detail::make_client(url, config_.timeout_s);
  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

  const nlohmann::json request = {
      {"model", config_.model_name},
      {"messages", nlohmann::json::array({{{"role", "user"}, {"content", std::string(prompt)}}})},
      {"temperature", config_.temperature},
  };
  auto res = client->Post(url.path, headers, request.dump(), "application/json");
  if (!res) {
    throw Error(ErrorKind::kEndpointUnreachable, kModule,
                config_.endpoint_url + ": " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw Error(ErrorKind::kEndpointUnreachable, kModule,
                config_.endpoint_url + " returned HTTP " + std::to_string(res->status));
  }
  const auto j = nlohmann::json::parse(res->body, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("choices") || !j["choices"].is_array() ||
      j["choices"].empty() || !j["choices"][0].is_object()) {
    throw Error(ErrorKind::kMalformedResponse, kModule, "completion response has no choices");
  }
  const auto& choice = j["choices"][0];
  if (choice.contains("message") && choice["message"].is_object() &&
      choice["message"].contains("content") && choice["message"]["content"].is_string()) {
    return choice["message"]["content"].get<std::string>();
  }
  if (choice.contains("text") && choice["text"].is_string()) return choice["text"].get<std::string>();
  throw Error(ErrorKind::kMalformedResponse, kModule, "completion choice has no text");
}

LlmClient::LlmClient(LlmClientConfig config, std::unique_ptr<ChatTransport> transport)
    : config_(std::move(config)), transport_(std::move(transport)) {
  if (!transport_) transport_ = std::make_unique<HttpChatTransport>(config_);
  if (config_.max_retries < 0) throw Error(ErrorKind::kInvalidInput, kModule, "max_retries must be >= 0");
  if (config_.max_concurrent_requests == 0) config_.max_concurrent_requests = 1;
}

std::pair<std::vector<std::string>, std::string> LlmClient::ask(const std::string& prompt) {
  {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return in_flight_ < config_.max_concurrent_requests; });
    ++in_flight_;
  }
  struct Release {
    LlmClient* self;
    ~Release() {
      {
        std::lock_guard lock(self->mu_);
        --self->in_flight_;
      }
      self->cv_.notify_one();
    }
  } release{this};

  std::string last;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    try {
      last = transport_->complete(prompt);
      return {parse_string_array(last), last};
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kMalformedResponse) throw;
    }
  }
  throw Error(ErrorKind::kMalformedResponse, kModule,
              "no JSON array of strings after " + std::to_string(config_.max_retries + 1) +
                  " attempts");
}

RephraseResult LlmClient::rephrase_candidates(const textprep::CleanText& text, int n) {
  auto [variants, raw] = ask(render_template(rephrase_template(), text.str(), n));
  RephraseResult r;
  r.original = text;
  r.variants = std::move(variants);
  r.raw_response = std::move(raw);
  return r;
}

std::vector<std::string> LlmClient::keyword_candidates(const textprep::CleanText& text) {
  return ask(render_template(keywords_template(), text.str(), 0)).first;
}

}  // namespace modguard::augmentation
