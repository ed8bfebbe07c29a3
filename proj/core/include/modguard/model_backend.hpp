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

#ifndef MODGUARD_MODEL_BACKEND_HPP_
#define MODGUARD_MODEL_BACKEND_HPP_

#include <array>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "modguard/embedding.hpp"

namespace modguard::embedding {

// Contents of the JSON sidecar written next to an exported encoder pair.
//
// {
//   "format_version": 1, "checkpoint": "...", "dim": 768,
//   "text": {"graph": "text.onnx", "token_embedding": "tokens.f32",
//            "vocab_size": 49408, "width": 768, "context_length": 77,
//            "vocab": "vocab.json", "merges": "merges.txt",
//            "bos_token": "<|startoftext|>", "eos_token": "<|endoftext|>",
//            "pad_id": 0, "embeddings_input": "token_embeddings",
//            "output": "token_features"},
//   "image": {"graph": "image.onnx", "input": "pixel_values", "output": "image_embeds",
//             "resize_shorter": 224, "crop": 224,
//             "mean": [r, g, b], "std": [r, g, b]}
// }
//
// The text graph consumes token embeddings [B, L, width], looked up on the
// host from the raw little-endian f32 table [vocab_size, width], and emits
// projected per-position features [B, L, dim]; the host keeps the row at the
// end-of-text position. (CLIP's final norm and projection act per position,
// so this equals pooling inside the graph.) The image graph consumes
// standardised CHW pixels [B, 3, crop, crop] and emits [B, dim].
// Relative paths resolve against the sidecar's directory.
struct ModelSidecar {
  struct Text {
    std::filesystem::path graph;
    std::filesystem::path token_embedding;
    std::size_t vocab_size = 0;
    std::size_t width = 0;
    std::size_t context_length = 77;
    std::filesystem::path vocab;
    std::filesystem::path merges;
    std::string bos_token = "<|startoftext|>";
    std::string eos_token = "<|endoftext|>";
    std::int32_t pad_id = 0;
    std::string embeddings_input = "token_embeddings";
    std::string output;
  };
  struct Image {
    std::filesystem::path graph;
    std::string input = "pixel_values";
    std::string output;
    int resize_shorter = 224;
    int crop = 224;
    std::array<float, 3> mean{};
    std::array<float, 3> std{};
  };

  std::string checkpoint;
  std::size_t dim = 0;
  std::optional<Text> text;
  std::optional<Image> image;

  // Throws IoError / FormatError.
  static ModelSidecar load(const std::filesystem::path& sidecar_json);
};

// Interchange-model backend running exported encoders through OpenCV DNN.
// Inference calls are serialised internally; the object is safe to share.
class ModelBackend final : public EmbeddingBackend {
 public:
  explicit ModelBackend(const std::filesystem::path& sidecar_json);
  ~ModelBackend() override;

  std::string name() const override;
  std::size_t dim() const override;
  bool supports(Modality modality) const override;

  std::vector<std::vector<float>> encode_texts(
      std::span<const textprep::CleanText> batch) const override;
  std::vector<std::vector<float>> encode_images(
      std::span<const DecodedImage> batch) const override;

  const ModelSidecar& sidecar() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace modguard::embedding

#endif  // MODGUARD_MODEL_BACKEND_HPP_
