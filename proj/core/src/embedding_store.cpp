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

#include "modguard/embedding_store.hpp"

#include <json.hpp>

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <limits>
#include <type_traits>
#include <fstream>
#include <sstream>

#include "modguard/error.hpp"

namespace modguard::embedding {
namespace {

constexpr std::string_view kModule = "embedding";
constexpr std::array<char, 4> kMagic = {'E', 'M', 'B', 'S'};
constexpr std::size_t kHeaderBytes = 4 + 2 + 4 + 8;

template <typename T>
void put_le(std::string& out, T value) {
  using U = std::make_unsigned_t<T>;
  auto bits = static_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>(bits & 0xff));
    bits = static_cast<U>(bits >> 8);
  }
}

template <typename T>
T get_le(const char* p) {
  std::make_unsigned_t<T> bits = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    bits |= static_cast<std::make_unsigned_t<T>>(static_cast<unsigned char>(p[i])) << (8 * i);
  }
  return static_cast<T>(bits);
}

Error format_error(const std::filesystem::path& path, const std::string& what) {
  return Error(ErrorKind::kFormatError, kModule, path.string() + ": " + what);
}

void check_unit_row(std::span<const float> row) {
  double sq = 0.0;
  for (float x : row) {
    if (!std::isfinite(x)) throw Error(ErrorKind::kInvalidInput, kModule, "non-finite component");
    sq += static_cast<double>(x) * x;
  }
  if (std::abs(std::sqrt(sq) - 1.0) > kUnitNormTolerance) {
    throw Error(ErrorKind::kInvalidInput, kModule, "row is not unit-norm");
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIoError, kModule, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return std::move(buffer).str();
}

void write_file_atomically(const std::filesystem::path& path, const std::string& bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::kIoError, kModule, "cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorKind::kIoError, kModule, "short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorKind::kIoError, kModule, "cannot rename to " + path.string());
}

}  // namespace

EmbeddingStore::EmbeddingStore(std::size_t dim) : dim_(dim) {
  if (dim == 0) throw Error(ErrorKind::kInvalidInput, kModule, "store dim must be positive");
}

void EmbeddingStore::append(std::string id, const EmbeddingVector& v, std::optional<Label> label) {
  append_row(std::move(id), v.values(), label);
}

void EmbeddingStore::append_row(std::string id, std::span<const float> unit_row,
                                std::optional<Label> label) {
  if (unit_row.size() != dim_) {
    throw Error(ErrorKind::kDimMismatch, kModule,
                "row of width " + std::to_string(unit_row.size()) + " in store of dim " +
                    std::to_string(dim_));
  }
  check_unit_row(unit_row);
  if (index_.contains(id)) throw Error(ErrorKind::kDuplicateId, kModule, "duplicate id " + id);
  index_.emplace(id, ids_.size());
  ids_.push_back(std::move(id));
  rows_.insert(rows_.end(), unit_row.begin(), unit_row.end());
  labels_.push_back(label);
}

std::optional<std::size_t> EmbeddingStore::find(std::string_view id) const {
  const auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

bool EmbeddingStore::fully_labeled() const {
  for (const auto& l : labels_) {
    if (!l) return false;
  }
  return true;
}

std::vector<Label> EmbeddingStore::required_labels() const {
  std::vector<Label> out;
  out.reserve(labels_.size());
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (!labels_[i]) {
      throw Error(ErrorKind::kInvalidInput, kModule, "row " + std::to_string(i) + " (" + ids_[i] +
                                                         ") has no label");
    }
    out.push_back(*labels_[i]);
  }
  return out;
}

EmbeddingStore EmbeddingStore::subset(std::span<const std::size_t> indices) const {
  EmbeddingStore out(dim_);
  out.ids_.reserve(indices.size());
  out.rows_.reserve(indices.size() * dim_);
  for (std::size_t i : indices) {
    if (i >= count()) throw Error(ErrorKind::kInvalidInput, kModule, "subset index out of range");
    if (out.index_.contains(ids_[i])) {
      throw Error(ErrorKind::kDuplicateId, kModule, "duplicate id " + ids_[i]);
    }
    out.index_.emplace(ids_[i], out.ids_.size());
    out.ids_.push_back(ids_[i]);
    const auto r = row(i);
    out.rows_.insert(out.rows_.end(), r.begin(), r.end());
    out.labels_.push_back(labels_[i]);
  }
  return out;
}

bool operator==(const EmbeddingStore& a, const EmbeddingStore& b) {
  if (a.dim_ != b.dim_ || a.ids_ != b.ids_ || a.labels_ != b.labels_) return false;
  if (a.rows_.size() != b.rows_.size()) return false;
  // Bitwise, so -0.0f and NaN payloads are compared exactly.
  return a.rows_.empty() ||
         std::memcmp(a.rows_.data(), b.rows_.data(), a.rows_.size() * sizeof(float)) == 0;
}

std::filesystem::path meta_path(const std::filesystem::path& store_path) {
  std::filesystem::path p = store_path;
  p += ".meta";
  return p;
}

void write_store(const EmbeddingStore& store, const std::filesystem::path& path) {
  static_assert(std::numeric_limits<float>::is_iec559);
  std::string bytes;
  bytes.reserve(kHeaderBytes + store.data().size() * 4);
  bytes.append(kMagic.data(), kMagic.size());
  put_le<std::uint16_t>(bytes, EmbeddingStore::kFormatVersion);
  put_le<std::uint32_t>(bytes, static_cast<std::uint32_t>(store.dim()));
  put_le<std::uint64_t>(bytes, static_cast<std::uint64_t>(store.count()));
  for (float x : store.data()) put_le<std::uint32_t>(bytes, std::bit_cast<std::uint32_t>(x));

  std::string meta;
  for (std::size_t i = 0; i < store.count(); ++i) {
    nlohmann::json line = {{"row", i}, {"id", store.ids()[i]}};
    if (const auto& label = store.labels()[i]) line["label"] = to_int(*label);
    meta += line.dump();
    meta += '\n';
  }
  write_file_atomically(path, bytes);
  write_file_atomically(meta_path(path), meta);
}

EmbeddingStore read_store(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  if (bytes.size() < kHeaderBytes) throw format_error(path, "truncated header");
  if (!std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
    throw format_error(path, "bad magic");
  }
  const auto version = get_le<std::uint16_t>(bytes.data() + 4);
  if (version != EmbeddingStore::kFormatVersion) {
    throw format_error(path, "unsupported format version " + std::to_string(version));
  }
  const auto dim = get_le<std::uint32_t>(bytes.data() + 6);
  const auto count = get_le<std::uint64_t>(bytes.data() + 10);
  if (dim == 0) throw format_error(path, "dim is zero");
  const std::uint64_t payload = bytes.size() - kHeaderBytes;
  if (count > payload / (4ULL * dim) || payload != count * dim * 4ULL) {
    throw format_error(path, "payload size does not match dim/count");
  }

  std::ifstream meta_in(meta_path(path));
  if (!meta_in) throw Error(ErrorKind::kIoError, kModule, "cannot open " + meta_path(path).string());

  EmbeddingStore store(dim);
  std::vector<float> row(dim);
  std::string line;
  std::uint64_t next_row = 0;
  while (std::getline(meta_in, line)) {
    if (line.empty()) continue;
    if (next_row >= count) throw format_error(meta_path(path), "more meta rows than vectors");
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw format_error(meta_path(path), "line " + std::to_string(next_row + 1) + ": " + e.what());
    }
    if (!j.is_object() || !j.contains("row") || !j["row"].is_number_unsigned() ||
        j["row"].get<std::uint64_t>() != next_row || !j.contains("id") || !j["id"].is_string()) {
      throw format_error(meta_path(path), "bad record for row " + std::to_string(next_row));
    }
    std::optional<Label> label;
    if (j.contains("label") && !j["label"].is_null()) {
      if (!j["label"].is_number_integer() ||
          !(label = label_from_int(j["label"].get<long long>()))) {
        throw format_error(meta_path(path), "bad label for row " + std::to_string(next_row));
      }
    }
    const char* p = bytes.data() + kHeaderBytes + next_row * dim * 4ULL;
    for (std::uint32_t k = 0; k < dim; ++k) {
      row[k] = std::bit_cast<float>(get_le<std::uint32_t>(p + 4ULL * k));
    }
    try {
      store.append_row(j["id"].get<std::string>(), row, label);
    } catch (const Error& e) {
      throw format_error(path, "row " + std::to_string(next_row) + ": " + e.message());
    }
    ++next_row;
  }
  if (next_row != count) throw format_error(meta_path(path), "fewer meta rows than vectors");
  return store;
}

void apply_labels(EmbeddingStore& store, const std::filesystem::path& meta) {
  std::ifstream in(meta);
  if (!in) throw Error(ErrorKind::kIoError, kModule, "cannot open " + meta.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      const auto id = j.at("id").get<std::string>();
      const auto row = store.find(id);
      if (!row) throw format_error(meta, "line " + std::to_string(line_no) + ": unknown id " + id);
      if (!j.contains("label") || j["label"].is_null()) continue;
      const auto label = label_from_int(j["label"].get<long long>());
      if (!label) throw format_error(meta, "line " + std::to_string(line_no) + ": bad label");
      store.set_label(*row, label);
    } catch (const nlohmann::json::exception& e) {
      throw format_error(meta, "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

}  // namespace modguard::embedding
