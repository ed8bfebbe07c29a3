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

#include "modguard/image.hpp"

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include <array>
#include <cmath>
#include <fstream>
#include <iterator>

#include "modguard/error.hpp"

namespace modguard {
namespace {

constexpr std::string_view kModule = "embedding";

DecodedImage from_mat(const cv::Mat& bgr) {
  cv::Mat rgb;
  cv::cvtColor(bgr, rgb, cv::COLOR_BGR2RGB);
  DecodedImage out;
  out.width = rgb.cols;
  out.height = rgb.rows;
  out.rgb.resize(static_cast<std::size_t>(rgb.cols) * rgb.rows * 3);
  for (int y = 0; y < rgb.rows; ++y) {
    const auto* row = rgb.ptr<std::uint8_t>(y);
    std::copy(row, row + rgb.cols * 3, out.rgb.begin() + static_cast<std::ptrdiff_t>(y) * rgb.cols * 3);
  }
  return out;
}

cv::Mat to_mat_rgb(const DecodedImage& image) {
  cv::Mat rgb(image.height, image.width, CV_8UC3);
  for (int y = 0; y < image.height; ++y) {
    std::copy_n(image.rgb.begin() + static_cast<std::ptrdiff_t>(y) * image.width * 3,
                image.width * 3, rgb.ptr<std::uint8_t>(y));
  }
  return rgb;
}

}  // namespace

DecodedImage solid_image(int width, int height, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  DecodedImage out;
  out.width = width;
  out.height = height;
  out.rgb.reserve(static_cast<std::size_t>(width) * height * 3);
  for (int i = 0; i < width * height; ++i) {
    out.rgb.push_back(r);
    out.rgb.push_back(g);
    out.rgb.push_back(b);
  }
  return out;
}

DecodedImage decode_image(std::span<const std::byte> encoded) {
  if (encoded.empty()) throw Error(ErrorKind::kImageDecodeError, kModule, "empty image data");
  const cv::Mat buffer(1, static_cast<int>(encoded.size()), CV_8UC1,
                       const_cast<std::byte*>(encoded.data()));
  cv::Mat bgr;
  try {
    bgr = cv::imdecode(buffer, cv::IMREAD_COLOR);
  } catch (const cv::Exception& e) {
    throw Error(ErrorKind::kImageDecodeError, kModule, e.what());
  }
  if (bgr.empty() || bgr.cols <= 0 || bgr.rows <= 0) {
    throw Error(ErrorKind::kImageDecodeError, kModule, "unrecognised image data");
  }
  return from_mat(bgr);
}

DecodedImage decode_image(std::string_view encoded) {
  return decode_image(std::as_bytes(std::span(encoded.data(), encoded.size())));
}

DecodedImage load_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIoError, kModule, "cannot open " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return decode_image(std::string_view(bytes));
  } catch (const Error& e) {
    throw Error(e.kind(), kModule, path.string() + ": " + e.message());
  }
}

std::string encode_png(const DecodedImage& image) {
  cv::Mat bgr;
  cv::cvtColor(to_mat_rgb(image), bgr, cv::COLOR_RGB2BGR);
  std::vector<std::uint8_t> buffer;
  if (!cv::imencode(".png", bgr, buffer, {cv::IMWRITE_PNG_COMPRESSION, 6})) {
    throw Error(ErrorKind::kIoError, kModule, "PNG encoding failed");
  }
  return std::string(buffer.begin(), buffer.end());
}

DecodedImage resize_and_center_crop(const DecodedImage& image, int shorter_side, int crop) {
  if (image.width <= 0 || image.height <= 0) {
    throw Error(ErrorKind::kInvalidInput, kModule, "empty image");
  }
  const double scale = static_cast<double>(shorter_side) / std::min(image.width, image.height);
  const int w = std::max(crop, static_cast<int>(std::lround(image.width * scale)));
  const int h = std::max(crop, static_cast<int>(std::lround(image.height * scale)));
  cv::Mat resized;
  cv::resize(to_mat_rgb(image), resized, cv::Size(w, h), 0, 0, cv::INTER_CUBIC);
  const int x0 = (w - crop) / 2;
  const int y0 = (h - crop) / 2;
  cv::Mat cropped = resized(cv::Rect(x0, y0, crop, crop));
  DecodedImage out;
  out.width = crop;
  out.height = crop;
  out.rgb.resize(static_cast<std::size_t>(crop) * crop * 3);
  for (int y = 0; y < crop; ++y) {
    std::copy_n(cropped.ptr<std::uint8_t>(y), crop * 3,
                out.rgb.begin() + static_cast<std::ptrdiff_t>(y) * crop * 3);
  }
  return out;
}

std::string base64_encode(std::string_view bytes) {
  static constexpr char kAlphabet[] =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    const unsigned v = (static_cast<unsigned char>(bytes[i]) << 16) |
                       (static_cast<unsigned char>(bytes[i + 1]) << 8) |
                       static_cast<unsigned char>(bytes[i + 2]);
    out.push_back(kAlphabet[(v >> 18) & 63]);
    out.push_back(kAlphabet[(v >> 12) & 63]);
    out.push_back(kAlphabet[(v >> 6) & 63]);
    out.push_back(kAlphabet[v & 63]);
  }
  if (const std::size_t rest = bytes.size() - i; rest > 0) {
    unsigned v = static_cast<unsigned char>(bytes[i]) << 16;
    if (rest == 2) v |= static_cast<unsigned char>(bytes[i + 1]) << 8;
    out.push_back(kAlphabet[(v >> 18) & 63]);
    out.push_back(kAlphabet[(v >> 12) & 63]);
    out.push_back(rest == 2 ? kAlphabet[(v >> 6) & 63] : '=');
    out.push_back('=');
  }
  return out;
}

std::string base64_decode(std::string_view text) {
  auto value_of = [](char c) -> int {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    return -1;
  };
  std::string clean;
  clean.reserve(text.size());
  for (char c : text) {
    if (c == '\n' || c == '\r' || c == ' ' || c == '\t') continue;
    clean.push_back(c);
  }
  if (clean.size() % 4 != 0) {
    throw Error(ErrorKind::kInvalidInput, kModule, "base64 length is not a multiple of 4");
  }
  std::string out;
  out.reserve(clean.size() / 4 * 3);
  for (std::size_t i = 0; i < clean.size(); i += 4) {
    std::array<int, 4> v{};
    int padding = 0;
    for (int k = 0; k < 4; ++k) {
      const char c = clean[i + k];
      const bool last_group = i + 4 == clean.size();
      if (c == '=' && last_group && k >= 2) {
        ++padding;
        v[k] = 0;
        continue;
      }
      if (padding > 0 || (v[k] = value_of(c)) < 0) {
        throw Error(ErrorKind::kInvalidInput, kModule, "invalid base64 character");
      }
    }
    const unsigned bits = (v[0] << 18) | (v[1] << 12) | (v[2] << 6) | v[3];
    out.push_back(static_cast<char>((bits >> 16) & 0xff));
    if (padding < 2) out.push_back(static_cast<char>((bits >> 8) & 0xff));
    if (padding < 1) out.push_back(static_cast<char>(bits & 0xff));
  }
  return out;
}

}  // namespace modguard
