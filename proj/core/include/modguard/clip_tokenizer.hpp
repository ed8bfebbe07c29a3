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

#ifndef MODGUARD_CLIP_TOKENIZER_HPP_
#define MODGUARD_CLIP_TOKENIZER_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace modguard::embedding {

struct TokenizedText {
  std::vector<std::int32_t> ids;  // exactly context_length entries
  std::size_t eos_position = 0;
};

// Byte-level BPE tokenizer compatible with the CLIP text encoder vocabulary
// (vocab.json + merges.txt). Normalisation collapses whitespace and lowercases
// ASCII; input is assumed to be NFC.
class ClipTokenizer {
 public:
  struct Options {
    std::size_t context_length = 77;
    std::string bos_token = "<|startoftext|>";
    std::string eos_token = "<|endoftext|>";
    std::int32_t pad_id = 0;
  };

  ClipTokenizer(std::unordered_map<std::string, std::int32_t> vocab,
                std::vector<std::pair<std::string, std::string>> merges, Options options);
  static ClipTokenizer from_files(const std::filesystem::path& vocab_json,
                                  const std::filesystem::path& merges_txt, Options options);

  // BPE tokens (without special tokens) for `text`.
  std::vector<std::string> tokenize(std::string_view text) const;
  // [bos] tokens [eos] padded/truncated to context_length.
  TokenizedText encode(std::string_view text) const;

  std::int32_t bos_id() const noexcept { return bos_id_; }
  std::int32_t eos_id() const noexcept { return eos_id_; }
  std::size_t vocab_size() const noexcept { return vocab_.size(); }

 private:
  std::vector<std::string> bpe(const std::string& word) const;

  std::unordered_map<std::string, std::int32_t> vocab_;
  std::map<std::pair<std::string, std::string>, std::size_t> ranks_;
  Options options_;
  std::int32_t bos_id_;
  std::int32_t eos_id_;
  std::vector<std::string> byte_symbols_;
  struct Cache {
    std::mutex mu;
    std::unordered_map<std::string, std::vector<std::string>> words;
  };
  // Shared so the tokenizer stays movable.
  std::shared_ptr<Cache> cache_ = std::make_shared<Cache>();
};

}  // namespace modguard::embedding

#endif  // MODGUARD_CLIP_TOKENIZER_HPP_
