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

#include "modguard/image_search.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>
#include <unordered_set>

#include "http_util.hpp"
#include "modguard/error.hpp"
#include "modguard/hash.hpp"
#include "modguard/image.hpp"

namespace modguard::corpus {
namespace {

constexpr std::string_view kModule = "corpus";
using nlohmann::json;

std::string env_or(const char* name, std::string fallback) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : std::move(fallback);
}

// Caps the number of in-flight downloads per host.
class HostGate {
 public:
  explicit HostGate(std::size_t per_host) : per_host_(std::max<std::size_t>(per_host, 1)) {}

  void acquire(const std::string& host) {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return active_[host] < per_host_; });
    ++active_[host];
  }
  void release(const std::string& host) {
    {
      std::lock_guard lock(mu_);
      --active_[host];
    }
    cv_.notify_all();
  }

 private:
  std::size_t per_host_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::map<std::string, std::size_t> active_;
};

struct Outcome {
  std::optional<LabeledExample> example;
  std::string failure;
};

Outcome fetch_one(const FetchRequest& request, const std::filesystem::path& dir,
                  const FetchOptions& options, HostGate& gate) {
  detail::Url url;
  try {
    url = detail::parse_url(request.url, kModule);
  } catch (const Error& e) {
    return {std::nullopt, e.message()};
  }
  std::string body;
  gate.acquire(url.host);
  try {
    auto client = detail::make_client(url, options.timeout_s);
    std::size_t received = 0;
    bool too_big = false;
    auto res = client->Get(url.path, [&](const char* data, std::size_t len) {
      received += len;
      if (received > options.max_bytes) {
        too_big = true;
        return false;
      }
      body.append(data, len);
      return true;
    });
    gate.release(url.host);
    if (too_big) return {std::nullopt, "response larger than " + std::to_string(options.max_bytes) + " bytes"};
    if (!res) return {std::nullopt, "request failed: " + httplib::to_string(res.error())};
    if (res->status != 200) return {std::nullopt, "HTTP status " + std::to_string(res->status)};
  } catch (...) {
    gate.release(url.host);
    return {std::nullopt, "request failed"};
  }

  try {
    const DecodedImage image = decode_image(std::string_view(body));
    const std::string name = sha256_hex(request.url).substr(0, 20);
    const std::filesystem::path path = dir / (name + ".png");
    const std::string png = encode_png(image);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(png.data(), static_cast<std::streamsize>(png.size()));
    if (!out) return {std::nullopt, "cannot write " + path.string()};
    LabeledExample ex;
    ex.id = "img-" + name;
    ex.modality = Modality::kImage;
    ex.content = path.generic_string();
    ex.source = "search:" + request.query + " <" + request.url + ">";
    return {std::move(ex), {}};
  } catch (const Error& e) {
    return {std::nullopt, std::string(error_kind_name(e.kind())) + ": " + e.message()};
  }
}

}  // namespace

std::string_view provenance_name(QueryProvenance p) {
  return p == QueryProvenance::kKeywords ? "keywords" : "original_comment";
}

std::optional<QueryProvenance> provenance_from_name(std::string_view name) {
  if (name == "keywords") return QueryProvenance::kKeywords;
  if (name == "original_comment" || name == "original") return QueryProvenance::kOriginalComment;
  return std::nullopt;
}

GoogleSearchConfig GoogleSearchConfig::from_env() {
  GoogleSearchConfig c;
  c.base_url = env_or("MODGUARD_SEARCH_URL", c.base_url);
  c.api_key = env_or("MODGUARD_SEARCH_KEY", "");
  c.engine_id = env_or("MODGUARD_SEARCH_CX", "");
  return c;
}

GoogleImageSearch::GoogleImageSearch(GoogleSearchConfig config) : config_(std::move(config)) {
  if (config_.api_key.empty() || config_.engine_id.empty()) {
    throw Error(ErrorKind::kInvalidInput, kModule, "image search needs an API key and engine id");
  }
  if (!(config_.timeout_s > 0.0)) throw Error(ErrorKind::kInvalidInput, kModule, "timeout must be positive");
}

std::vector<std::pair<std::string, std::string>> GoogleImageSearch::query(std::string_view q,
                                                                          std::size_t limit) {
  const auto base = detail::parse_url(config_.base_url, kModule);
  auto client = detail::make_client(base, config_.timeout_s);
  std::string prefix = base.path == "/" ? "" : base.path;
  if (!prefix.empty() && prefix.back() == '/') prefix.pop_back();

  std::vector<std::pair<std::string, std::string>> out;
  // The API pages by 10 and stops at result 100.
  for (std::size_t start = 1; out.size() < limit && start <= 91; start += 10) {
    const std::size_t num = std::min<std::size_t>(10, limit - out.size());
    const std::string path = prefix + "/customsearch/v1?searchType=image&key=" +
                             detail::percent_encode(config_.api_key) +
                             "&cx=" + detail::percent_encode(config_.engine_id) +
                             "&q=" + detail::percent_encode(q) + "&num=" + std::to_string(num) +
                             "&start=" + std::to_string(start);
    auto res = client->Get(path);
    if (!res) {
      throw Error(ErrorKind::kEndpointUnreachable, kModule,
                  "image search: " + httplib::to_string(res.error()));
    }
    if (res->status == 429 || (res->status == 403 && res->body.find("uota") != std::string::npos)) {
      throw Error(ErrorKind::kQuotaExceeded, kModule, "image search quota exhausted");
    }
    if (res->status != 200) {
      throw Error(ErrorKind::kEndpointUnreachable, kModule,
                  "image search returned HTTP " + std::to_string(res->status));
    }
    const json j = json::parse(res->body, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      throw Error(ErrorKind::kMalformedResponse, kModule, "image search returned invalid JSON");
    }
    const auto items = j.find("items");
    if (items == j.end() || !items->is_array() || items->empty()) break;
    for (const auto& item : *items) {
      if (!item.is_object() || !item.contains("link") || !item["link"].is_string()) continue;
      std::string snippet;
      if (item.contains("snippet") && item["snippet"].is_string()) snippet = item["snippet"].get<std::string>();
      out.emplace_back(item["link"].get<std::string>(), std::move(snippet));
    }
    if (items->size() < num) break;
  }
  return out;
}

StubImageSearch::StubImageSearch(const std::filesystem::path& fixture) {
  std::ifstream in(fixture, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIoError, kModule, "cannot open " + fixture.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("query") || !j["query"].is_string() ||
        !j.contains("url") || !j["url"].is_string()) {
      throw Error(ErrorKind::kSchemaError, kModule,
                  "search fixture line " + std::to_string(line_no) + " needs string query and url");
    }
    rows_.push_back({j["query"].get<std::string>(), j["url"].get<std::string>(),
                     j.value("snippet", std::string())});
  }
}

std::vector<std::pair<std::string, std::string>> StubImageSearch::query(std::string_view q,
                                                                        std::size_t limit) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& row : rows_) {
    if (out.size() >= limit) break;
    if (row.query == q) out.emplace_back(row.url, row.snippet);
  }
  return out;
}

std::vector<SearchResult> image_search(ImageSearchClient& client, std::string_view query,
                                       std::size_t limit, QueryProvenance provenance) {
  if (query.find_first_not_of(" \t\r\n") == std::string_view::npos) {
    throw Error(ErrorKind::kInvalidInput, kModule, "empty search query");
  }
  std::vector<SearchResult> out;
  if (limit == 0) return out;
  std::unordered_set<std::string> seen;
  for (auto& [url, snippet] : client.query(query, limit)) {
    if (out.size() >= limit) break;
    if (!seen.insert(url).second) continue;
    out.push_back({std::move(url), std::move(snippet), std::string(query), provenance});
  }
  return out;
}

FetchResult fetch_images(const std::vector<FetchRequest>& requests,
                         const std::filesystem::path& dir, const FetchOptions& options) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  const std::filesystem::path manifest = dir / "review_manifest.csv";
  std::ofstream out(manifest, std::ios::binary | std::ios::trunc);
  if (ec || !out) throw Error(ErrorKind::kIoError, kModule, "cannot write into " + dir.string());

  // The same URL is fetched once; repeats keep the first query.
  std::vector<std::size_t> unique;
  {
    std::unordered_set<std::string> seen;
    for (std::size_t i = 0; i < requests.size(); ++i) {
      if (seen.insert(requests[i].url).second) unique.push_back(i);
    }
  }

  std::vector<Outcome> outcomes(unique.size());
  HostGate gate(options.per_host);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < unique.size(); k = next++) {
      outcomes[k] = fetch_one(requests[unique[k]], dir, options, gate);
    }
  };
  const std::size_t workers = std::clamp<std::size_t>(options.max_concurrency, 1, std::max<std::size_t>(unique.size(), 1));
  std::vector<std::thread> threads;
  for (std::size_t w = 0; w < workers; ++w) threads.emplace_back(worker);
  for (auto& t : threads) t.join();

  FetchResult result;
  result.manifest = manifest;
  out << "image_path,proposed_query,label\n";
  for (std::size_t k = 0; k < unique.size(); ++k) {
    const auto& request = requests[unique[k]];
    if (outcomes[k].example) {
      out << csv_escape(outcomes[k].example->content) << ',' << csv_escape(request.query) << ",\n";
      result.pending.push_back(std::move(*outcomes[k].example));
    } else {
      result.failures.push_back({request.url, outcomes[k].failure});
    }
  }
  if (!out) throw Error(ErrorKind::kIoError, kModule, "short write to " + manifest.string());
  return result;
}

}  // namespace modguard::corpus
