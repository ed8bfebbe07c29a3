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

#include "modguard/mock_backend.hpp"

#include <algorithm>
#include <array>
#include <string>

#include "modguard/error.hpp"
#include "modguard/random.hpp"

namespace modguard::embedding {
namespace {

constexpr int kGrid = 8;
constexpr int kLevels = 4;

std::vector<float> text_counts(const std::string& text, std::size_t dim) {
  std::string padded;
  padded.reserve(text.size() + 4);
  padded.append("\x02\x02").append(text).append("\x03\x03");
  std::vector<float> counts(dim, 0.0f);
  for (std::size_t i = 0; i + 3 <= padded.size(); ++i) {
    counts[fnv1a64(std::string_view(padded).substr(i, 3)) % dim] += 1.0f;
  }
  return counts;
}

std::vector<float> image_counts(const DecodedImage& image, std::size_t dim) {
  if (image.width <= 0 || image.height <= 0 ||
      image.rgb.size() != static_cast<std::size_t>(image.width) * image.height * 3) {
    throw Error(ErrorKind::kInvalidInput, "embedding", "malformed image buffer");
  }
  std::vector<float> counts(dim, 0.0f);
  for (int gy = 0; gy < kGrid; ++gy) {
    const int y0 = gy * image.height / kGrid;
    const int y1 = std::max(y0 + 1, (gy + 1) * image.height / kGrid);
    for (int gx = 0; gx < kGrid; ++gx) {
      const int x0 = gx * image.width / kGrid;
      const int x1 = std::max(x0 + 1, (gx + 1) * image.width / kGrid);
      std::array<std::uint64_t, 3> sum{};
      std::uint64_t n = 0;
      for (int y = y0; y < std::min(y1, image.height); ++y) {
        for (int x = x0; x < std::min(x1, image.width); ++x) {
          for (int c = 0; c < 3; ++c) sum[c] += image.at(x, y, c);
          ++n;
        }
      }
      std::string token = "img";
      token.push_back(static_cast<char>(gy * kGrid + gx));
      for (int c = 0; c < 3; ++c) {
        const auto mean = n == 0 ? 0 : sum[c] / n;
        token.push_back(static_cast<char>(mean * kLevels / 256));
      }
      counts[fnv1a64(token) % dim] += 1.0f;
    }
  }
  return counts;
}

}  // namespace

MockBackend::MockBackend(std::size_t dim) : dim_(dim) {
  if (dim == 0) throw Error(ErrorKind::kInvalidInput, "embedding", "mock dim must be positive");
}

std::vector<std::vector<float>> MockBackend::encode_texts(
    std::span<const textprep::CleanText> batch) const {
  std::vector<std::vector<float>> out;
  out.reserve(batch.size());
  for (const auto& text : batch) out.push_back(text_counts(text.str(), dim_));
  return out;
}

std::vector<std::vector<float>> MockBackend::encode_images(
    std::span<const DecodedImage> batch) const {
  std::vector<std::vector<float>> out;
  out.reserve(batch.size());
  for (const auto& image : batch) out.push_back(image_counts(image, dim_));
  return out;
}

}  // namespace modguard::embedding
