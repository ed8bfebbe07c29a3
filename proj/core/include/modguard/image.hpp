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

#ifndef MODGUARD_IMAGE_HPP_
#define MODGUARD_IMAGE_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace modguard {

// 8-bit interleaved RGB pixels, row-major.
struct DecodedImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;

  std::uint8_t at(int x, int y, int channel) const {
    return rgb[(static_cast<std::size_t>(y) * width + x) * 3 + channel];
  }
  friend bool operator==(const DecodedImage&, const DecodedImage&) = default;
};

DecodedImage solid_image(int width, int height, std::uint8_t r, std::uint8_t g,
                         std::uint8_t b);

// Decodes PNG/JPEG/BMP/... bytes. Throws ImageDecodeError.
DecodedImage decode_image(std::span<const std::byte> encoded);
DecodedImage decode_image(std::string_view encoded);
DecodedImage load_image(const std::filesystem::path& path);

// Lossless canonical encoding used for stored images.
std::string encode_png(const DecodedImage& image);

// Resize shorter side to `shorter_side` (bicubic), then center-crop a square
// of `crop` pixels.
DecodedImage resize_and_center_crop(const DecodedImage& image, int shorter_side, int crop);

// RFC 4648 base64. decode throws InvalidInput on malformed input.
std::string base64_encode(std::string_view bytes);
std::string base64_decode(std::string_view text);

}  // namespace modguard

#endif  // MODGUARD_IMAGE_HPP_
