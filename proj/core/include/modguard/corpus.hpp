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

#ifndef MODGUARD_CORPUS_HPP_
#define MODGUARD_CORPUS_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "modguard/types.hpp"

namespace modguard::corpus {

// One corpus record. `content` is the cleaned text for text examples and the
// image path for image examples. The label is empty only for images that are
// still waiting for manual review; a loaded corpus always has labels.
struct LabeledExample {
  std::string id;
  Modality modality = Modality::kText;
  std::string content;
  std::optional<Label> label;
  bool synthetic = false;
  std::string source;

  friend bool operator==(const LabeledExample&, const LabeledExample&) = default;
};

class Corpus {
 public:
  Corpus() = default;
  // Throws DuplicateId.
  explicit Corpus(std::vector<LabeledExample> examples);

  const std::vector<LabeledExample>& examples() const noexcept { return examples_; }
  std::size_t size() const noexcept { return examples_.size(); }
  bool empty() const noexcept { return examples_.empty(); }
  const LabeledExample& operator[](std::size_t i) const { return examples_.at(i); }
  const LabeledExample* find(std::string_view id) const;

  friend bool operator==(const Corpus& a, const Corpus& b) { return a.examples_ == b.examples_; }

 private:
  std::vector<LabeledExample> examples_;
  std::unordered_map<std::string, std::size_t> index_;
};

// JSONL, one object per line:
//   {"id", "modality": "text"|"image", "text" | "image_path", "label": 0|1,
//    "synthetic": bool, "source": string}
// Blank lines are skipped. Throws SchemaError naming the 1-based line,
// DuplicateId or IoError.
Corpus parse_corpus(std::istream& in);
Corpus load_corpus(const std::filesystem::path& path);
std::string corpus_to_jsonl(const Corpus& corpus);
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);

struct SplitSpec {
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
  bool stratified = true;

  // Throws InvalidInput.
  void validate() const;
};

// Seeded partition into (train, test). Each class (or the whole corpus when
// not stratified) contributes round(f * n) examples to train, clamped so both
// sides get at least one. Both halves keep the corpus order. Throws
// TooFewExamples when a class has fewer than 2 examples.
std::pair<Corpus, Corpus> split(const Corpus& corpus, const SplitSpec& spec);

struct CorpusStats {
  std::size_t total = 0;
  std::array<std::size_t, 2> by_label{};  // indexed by label value
  std::size_t unlabeled = 0;
  std::size_t synthetic = 0;
  // (modality, label) -> count, label -1 for unlabeled.
  std::map<std::pair<std::string, int>, std::size_t> by_modality_label;
};
CorpusStats stats(const Corpus& corpus);
std::string stats_to_json(const CorpusStats& stats);

// RFC 4180 CSV: quoted fields may contain commas, quotes ("") and newlines.
// Throws FormatError for an unterminated quote.
std::vector<std::vector<std::string>> parse_csv(std::string_view text);
std::string csv_escape(std::string_view field);

// Hate-speech tweet CSV with header columns including "class" and "tweet".
// Rows with class 1 become label-1 text examples (cleaned); every other
// class is dropped, as are rows whose text is empty after cleaning.
struct IngestReport {
  std::size_t rows = 0;
  std::size_t kept = 0;
  std::size_t dropped_class = 0;
  std::size_t dropped_empty = 0;
};
Corpus ingest_hate_speech_csv(std::string_view csv, IngestReport* report = nullptr);

// RedCaps annotation JSON ({"annotations": [{"image_id", "subreddit", ...}]}).
// Every entry becomes a label-0 image example pointing at
// <images_dir>/<subreddit>/<image_id>.jpg, the layout of the RedCaps
// downloader.
Corpus ingest_redcaps(std::string_view json, const std::filesystem::path& images_dir);

// Review manifest CSV (image_path, proposed_query, label). Rows whose label
// has been filled in become image examples; blank rows are still pending and
// are skipped. Throws SchemaError for labels other than blank, 0 or 1.
Corpus ingest_review_manifest(std::string_view csv, IngestReport* report = nullptr);

}  // namespace modguard::corpus

#endif  // MODGUARD_CORPUS_HPP_
