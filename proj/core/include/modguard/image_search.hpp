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

#ifndef MODGUARD_IMAGE_SEARCH_HPP_
#define MODGUARD_IMAGE_SEARCH_HPP_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "modguard/corpus.hpp"

namespace modguard::corpus {

// Where a search query came from. Harmful-image retrieval used both the
// extracted keywords and the original comment, so results keep track.
enum class QueryProvenance { kKeywords, kOriginalComment };
std::string_view provenance_name(QueryProvenance p);
std::optional<QueryProvenance> provenance_from_name(std::string_view name);

struct SearchResult {
  std::string url;
  std::string snippet;
  std::string query;
  QueryProvenance provenance = QueryProvenance::kKeywords;
};

class ImageSearchClient {
 public:
  virtual ~ImageSearchClient() = default;
  // Raw results for one query, at most `limit`. Throws EndpointUnreachable or
  // QuotaExceeded.
  virtual std::vector<std::pair<std::string, std::string>> query(std::string_view q,
                                                                 std::size_t limit) = 0;
};

// Google Custom Search JSON API, image search mode.
struct GoogleSearchConfig {
  std::string base_url = "https://www.googleapis.com";
  std::string api_key;
  std::string engine_id;  // the "cx" parameter
  double timeout_s = 20.0;

  // MODGUARD_SEARCH_URL, MODGUARD_SEARCH_KEY, MODGUARD_SEARCH_CX.
  static GoogleSearchConfig from_env();
};

class GoogleImageSearch : public ImageSearchClient {
 public:
  explicit GoogleImageSearch(GoogleSearchConfig config);
  std::vector<std::pair<std::string, std::string>> query(std::string_view q,
                                                         std::size_t limit) override;

 private:
  GoogleSearchConfig config_;
};

// Serves canned rows from a fixture file. Each JSONL line is
// {"query": ..., "url": ..., "snippet": ...}; rows for the query are returned
// verbatim in file order.
class StubImageSearch : public ImageSearchClient {
 public:
  explicit StubImageSearch(const std::filesystem::path& fixture);
  std::vector<std::pair<std::string, std::string>> query(std::string_view q,
                                                         std::size_t limit) override;

 private:
  struct Row {
    std::string query;
    std::string url;
    std::string snippet;
  };
  std::vector<Row> rows_;
};

// Runs the query and returns at most `limit` results with duplicate URLs
// removed, each tagged with the query and its provenance. limit 0 returns
// nothing. Throws InvalidInput for an empty query.
std::vector<SearchResult> image_search(ImageSearchClient& client, std::string_view query,
                                       std::size_t limit, QueryProvenance provenance);

struct FetchRequest {
  std::string url;
  std::string query;
};

struct FetchOptions {
  std::size_t max_concurrency = 8;
  std::size_t per_host = 2;
  double timeout_s = 20.0;
  std::size_t max_bytes = 20u << 20;
};

struct FetchFailure {
  std::string url;
  std::string reason;
};

struct FetchResult {
  // Unlabelled image examples awaiting review, in request order.
  std::vector<LabeledExample> pending;
  std::vector<FetchFailure> failures;
  std::filesystem::path manifest;
};

// Downloads each URL, decodes it and re-encodes it as PNG under `dir`
// (file name derived from the URL hash), then writes `dir`/review_manifest.csv
// with columns image_path, proposed_query, label (left blank for the
// reviewer). Per-URL failures are collected. Throws IoError when `dir` is
// not writable.
FetchResult fetch_images(const std::vector<FetchRequest>& requests,
                         const std::filesystem::path& dir, const FetchOptions& options = {});

}  // namespace modguard::corpus

#endif  // MODGUARD_IMAGE_SEARCH_HPP_
