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

#ifndef MODGUARD_MOCK_BACKEND_HPP_
#define MODGUARD_MOCK_BACKEND_HPP_

#include "modguard/embedding.hpp"

namespace modguard::embedding {

// Deterministic stand-in for a vision-language model.
//
// Text: the UTF-8 bytes, padded with two start and two end sentinels, are cut
// into overlapping byte 3-grams; each 3-gram adds 1 to bucket
// fnv1a64(3-gram) % dim. Strings that differ by one character share all but
// at most three 3-grams, so near-duplicates land close in cosine.
//
// Image: the picture is box-averaged onto an 8x8 grid; each cell's colour is
// quantised to 4 levels per channel and the (cell, colour) token is hashed
// the same way. Images and texts therefore share one dim-sized space.
class MockBackend final : public EmbeddingBackend {
 public:
  explicit MockBackend(std::size_t dim = kDefaultDim);

  std::string name() const override { return "mock"; }
  std::size_t dim() const override { return dim_; }
  bool supports(Modality) const override { return true; }

  std::vector<std::vector<float>> encode_texts(
      std::span<const textprep::CleanText> batch) const override;
  std::vector<std::vector<float>> encode_images(
      std::span<const DecodedImage> batch) const override;

 private:
  std::size_t dim_;
};

}  // namespace modguard::embedding

#endif  // MODGUARD_MOCK_BACKEND_HPP_
