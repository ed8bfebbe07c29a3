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

#include "modguard/clip_tokenizer.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <limits>

#include "modguard/error.hpp"

namespace modguard::embedding {
namespace {

constexpr std::string_view kModule = "embedding";
constexpr std::string_view kEndOfWord = "</w>";

std::string utf8_encode(char32_t cp) {
  std::string out;
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
  return out;
}

struct CodePoint {
  char32_t value;
  std::size_t begin;
  std::size_t end;
};

// Lenient UTF-8 decoding: an invalid byte decodes as U+FFFD covering one byte.
std::vector<CodePoint> decode_utf8(std::string_view s) {
  std::vector<CodePoint> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t len = 1;
    char32_t cp = 0xFFFD;
    if (c < 0x80) {
      cp = c;
    } else if ((c >> 5) == 0x6) {
      len = 2;
      cp = c & 0x1F;
    } else if ((c >> 4) == 0xE) {
      len = 3;
      cp = c & 0x0F;
    } else if ((c >> 3) == 0x1E) {
      len = 4;
      cp = c & 0x07;
    } else {
      len = 0;
    }
    bool ok = len > 0 && i + len <= s.size();
    for (std::size_t k = 1; ok && k < len; ++k) {
      const auto cc = static_cast<unsigned char>(s[i + k]);
      if ((cc >> 6) != 0x2) {
        ok = false;
      } else {
        cp = (cp << 6) | (cc & 0x3F);
      }
    }
    if (!ok) {
      out.push_back({0xFFFD, i, i + 1});
      ++i;
      continue;
    }
    out.push_back({cp, i, i + len});
    i += len;
  }
  return out;
}

bool is_space(char32_t cp) {
  return cp == ' ' || (cp >= 0x09 && cp <= 0x0D) || cp == 0x85 || cp == 0xA0 || cp == 0x1680 ||
         (cp >= 0x2000 && cp <= 0x200A) || cp == 0x2028 || cp == 0x2029 || cp == 0x202F ||
         cp == 0x205F || cp == 0x3000;
}

bool is_number(char32_t cp) { return cp >= '0' && cp <= '9'; }

// Approximates \p{L} with the scripts that carry letters; symbol and
// punctuation blocks (including emoji) are excluded.
bool is_letter(char32_t cp) {
  if (cp < 0x80) return (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z');
  if (cp == 0xAA || cp == 0xB5 || cp == 0xBA) return true;
  if (cp >= 0xC0 && cp <= 0x24F) return cp != 0xD7 && cp != 0xF7;
  if (cp >= 0x250 && cp <= 0x2FF) return true;   // IPA, modifier letters
  if (cp >= 0x370 && cp <= 0x1FFF) return true;  // Greek .. Greek extended
  if (cp >= 0x3040 && cp <= 0x9FFF) return true;  // kana, CJK
  if (cp >= 0xAC00 && cp <= 0xD7AF) return true;  // Hangul
  if (cp >= 0xF900 && cp <= 0xFAFF) return true;
  if (cp >= 0x20000 && cp <= 0x2FFFF) return true;
  return false;
}

std::string normalize(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool in_space = false;
  for (const auto& cp : decode_utf8(text)) {
    if (is_space(cp.value)) {
      if (!in_space) out.push_back(' ');
      in_space = true;
      continue;
    }
    in_space = false;
    if (cp.value >= 'A' && cp.value <= 'Z') {
      out.push_back(static_cast<char>(cp.value - 'A' + 'a'));
    } else {
      out.append(text.substr(cp.begin, cp.end - cp.begin));
    }
  }
  return out;
}

bool starts_with_at(const std::string& s, std::size_t pos, std::string_view lit) {
  return s.compare(pos, lit.size(), lit) == 0;
}

// Splits normalised text the way CLIP's pre-tokenizer regex does:
//   <|startoftext|>|<|endoftext|>|'s|'t|'re|'ve|'m|'ll|'d|\p{L}+|\p{N}|[^\s\p{L}\p{N}]+
std::vector<std::string> pre_tokenize(const std::string& s, const std::string& bos,
                                      const std::string& eos) {
  static constexpr std::string_view kContractions[] = {"'s", "'t", "'re", "'ve", "'m", "'ll", "'d"};
  const auto cps = decode_utf8(s);
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < cps.size()) {
    const std::size_t byte = cps[i].begin;
    const char32_t cp = cps[i].value;
    if (is_space(cp)) {
      ++i;
      continue;
    }
    auto take_literal = [&](std::string_view lit) {
      if (!starts_with_at(s, byte, lit)) return false;
      out.emplace_back(lit);
      const std::size_t end_byte = byte + lit.size();
      while (i < cps.size() && cps[i].begin < end_byte) ++i;
      return true;
    };
    if (take_literal(bos) || take_literal(eos)) continue;
    bool matched = false;
    for (auto lit : kContractions) {
      if (take_literal(lit)) {
        matched = true;
        break;
      }
    }
    if (matched) continue;
    std::size_t j = i;
    if (is_letter(cp)) {
      while (j < cps.size() && is_letter(cps[j].value)) ++j;
    } else if (is_number(cp)) {
      j = i + 1;
    } else {
      while (j < cps.size() && !is_space(cps[j].value) && !is_letter(cps[j].value) &&
             !is_number(cps[j].value)) {
        ++j;
      }
    }
    const std::size_t end_byte = j < cps.size() ? cps[j].begin : s.size();
    out.push_back(s.substr(byte, end_byte - byte));
    i = j;
  }
  return out;
}

std::vector<std::string> make_byte_symbols() {
  std::vector<int> bs;
  for (int b = '!'; b <= '~'; ++b) bs.push_back(b);
  for (int b = 0xA1; b <= 0xAC; ++b) bs.push_back(b);
  for (int b = 0xAE; b <= 0xFF; ++b) bs.push_back(b);
  std::vector<std::string> symbols(256);
  for (int b : bs) symbols[b] = utf8_encode(static_cast<char32_t>(b));
  int n = 0;
  for (int b = 0; b < 256; ++b) {
    if (std::find(bs.begin(), bs.end(), b) == bs.end()) {
      symbols[b] = utf8_encode(static_cast<char32_t>(256 + n));
      ++n;
    }
  }
  return symbols;
}

}  // namespace

ClipTokenizer::ClipTokenizer(std::unordered_map<std::string, std::int32_t> vocab,
                             std::vector<std::pair<std::string, std::string>> merges,
                             Options options)
    : vocab_(std::move(vocab)), options_(std::move(options)), byte_symbols_(make_byte_symbols()) {
  for (std::size_t r = 0; r < merges.size(); ++r) ranks_.emplace(std::move(merges[r]), r);
  auto special = [&](const std::string& token) {
    const auto it = vocab_.find(token);
    if (it == vocab_.end()) {
      throw Error(ErrorKind::kFormatError, kModule, "vocabulary lacks special token " + token);
    }
    return it->second;
  };
  bos_id_ = special(options_.bos_token);
  eos_id_ = special(options_.eos_token);
  if (options_.context_length < 2) {
    throw Error(ErrorKind::kFormatError, kModule, "context length must be at least 2");
  }
}

ClipTokenizer ClipTokenizer::from_files(const std::filesystem::path& vocab_json,
                                        const std::filesystem::path& merges_txt,
                                        Options options) {
  std::ifstream vocab_in(vocab_json);
  if (!vocab_in) throw Error(ErrorKind::kIoError, kModule, "cannot open " + vocab_json.string());
  std::unordered_map<std::string, std::int32_t> vocab;
  try {
    const auto j = nlohmann::json::parse(vocab_in);
    for (const auto& [token, id] : j.items()) vocab.emplace(token, id.get<std::int32_t>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kFormatError, kModule, vocab_json.string() + ": " + e.what());
  }
  std::ifstream merges_in(merges_txt);
  if (!merges_in) throw Error(ErrorKind::kIoError, kModule, "cannot open " + merges_txt.string());
  std::vector<std::pair<std::string, std::string>> merges;
  std::string line;
  while (std::getline(merges_in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.starts_with("#version")) continue;
    const auto space = line.find(' ');
    if (space == std::string::npos || space == 0 || space + 1 == line.size()) {
      throw Error(ErrorKind::kFormatError, kModule, merges_txt.string() + ": bad merge line " + line);
    }
    merges.emplace_back(line.substr(0, space), line.substr(space + 1));
  }
  return ClipTokenizer(std::move(vocab), std::move(merges), std::move(options));
}

std::vector<std::string> ClipTokenizer::bpe(const std::string& word) const {
  {
    std::lock_guard lock(cache_->mu);
    if (const auto it = cache_->words.find(word); it != cache_->words.end()) return it->second;
  }
  std::vector<std::string> symbols;
  for (unsigned char b : word) symbols.push_back(byte_symbols_[b]);
  if (symbols.empty()) return {};
  symbols.back() += kEndOfWord;

  while (symbols.size() > 1) {
    std::size_t best_rank = std::numeric_limits<std::size_t>::max();
    std::pair<std::string, std::string> best;
    for (std::size_t k = 0; k + 1 < symbols.size(); ++k) {
      const auto it = ranks_.find({symbols[k], symbols[k + 1]});
      if (it != ranks_.end() && it->second < best_rank) {
        best_rank = it->second;
        best = it->first;
      }
    }
    if (best_rank == std::numeric_limits<std::size_t>::max()) break;
    std::vector<std::string> merged;
    merged.reserve(symbols.size());
    for (std::size_t k = 0; k < symbols.size();) {
      if (k + 1 < symbols.size() && symbols[k] == best.first && symbols[k + 1] == best.second) {
        merged.push_back(symbols[k] + symbols[k + 1]);
        k += 2;
      } else {
        merged.push_back(symbols[k]);
        ++k;
      }
    }
    symbols = std::move(merged);
  }
  std::lock_guard lock(cache_->mu);
  cache_->words.emplace(word, symbols);
  return symbols;
}

std::vector<std::string> ClipTokenizer::tokenize(std::string_view text) const {
  std::vector<std::string> out;
  for (const auto& piece : pre_tokenize(normalize(text), options_.bos_token, options_.eos_token)) {
    if (piece == options_.bos_token || piece == options_.eos_token) {
      out.push_back(piece);
      continue;
    }
    for (auto& token : bpe(piece)) out.push_back(std::move(token));
  }
  return out;
}

TokenizedText ClipTokenizer::encode(std::string_view text) const {
  TokenizedText out;
  out.ids.reserve(options_.context_length);
  out.ids.push_back(bos_id_);
  for (const auto& token : tokenize(text)) {
    if (out.ids.size() + 1 >= options_.context_length) break;
    const auto it = vocab_.find(token);
    out.ids.push_back(it == vocab_.end() ? eos_id_ : it->second);
  }
  out.eos_position = out.ids.size();
  out.ids.push_back(eos_id_);
  out.ids.resize(options_.context_length, options_.pad_id);
  return out;
}

}  // namespace modguard::embedding
