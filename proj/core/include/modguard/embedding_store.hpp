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

#ifndef MODGUARD_EMBEDDING_STORE_HPP_
#define MODGUARD_EMBEDDING_STORE_HPP_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "modguard/embedding.hpp"
#include "modguard/types.hpp"

namespace modguard::embedding {

// Dense row-major matrix of unit-norm embeddings with unique row ids and an
// optional label per row.
//
// On disk: `<path>` holds the binary matrix
//   "EMBS" | u16 version (=1) | u32 dim | u64 count | count*dim f32, all LE
// and `<path>.meta` holds one JSON line per row: {"row":i,"id":...,"label":0|1}.
class EmbeddingStore {
 public:
  static constexpr std::uint16_t kFormatVersion = 1;

  explicit EmbeddingStore(std::size_t dim);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t count() const noexcept { return ids_.size(); }
  bool empty() const noexcept { return ids_.empty(); }

  std::span<const float> row(std::size_t i) const {
    return std::span<const float>(rows_).subspan(i * dim_, dim_);
  }
  std::span<const float> data() const noexcept { return rows_; }
  const std::vector<std::string>& ids() const noexcept { return ids_; }
  const std::vector<std::optional<Label>>& labels() const noexcept { return labels_; }

  // Throws DimMismatch, DuplicateId, or InvalidInput (row not unit-norm).
  void append(std::string id, const EmbeddingVector& v,
              std::optional<Label> label = std::nullopt);
  void append_row(std::string id, std::span<const float> unit_row,
                  std::optional<Label> label = std::nullopt);
  void set_label(std::size_t i, std::optional<Label> label) { labels_.at(i) = label; }

  std::optional<std::size_t> find(std::string_view id) const;
  bool fully_labeled() const;
  // All labels; throws InvalidInput naming the first unlabeled row.
  std::vector<Label> required_labels() const;

  // Rows at the given indices, in that order.
  EmbeddingStore subset(std::span<const std::size_t> indices) const;

  friend bool operator==(const EmbeddingStore& a, const EmbeddingStore& b);

 private:
  std::size_t dim_;
  std::vector<std::string> ids_;
  std::vector<float> rows_;
  std::vector<std::optional<Label>> labels_;
  std::unordered_map<std::string, std::size_t> index_;
};

std::filesystem::path meta_path(const std::filesystem::path& store_path);

// Writes via a temporary file and rename. Throws IoError.
void write_store(const EmbeddingStore& store, const std::filesystem::path& path);
// Throws IoError or FormatError.
EmbeddingStore read_store(const std::filesystem::path& path);
// Reads only `<path>.meta`-style labels from an arbitrary meta file and applies
// them to `store` by id. Throws FormatError for unknown ids.
void apply_labels(EmbeddingStore& store, const std::filesystem::path& meta);

}  // namespace modguard::embedding

#endif  // MODGUARD_EMBEDDING_STORE_HPP_
