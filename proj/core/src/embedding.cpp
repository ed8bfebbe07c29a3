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

#include "modguard/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <exception>

#include "modguard/error.hpp"

namespace modguard::embedding {
namespace {

constexpr std::string_view kModule = "embedding";

void check_unit(std::span<const float> values) {
  if (values.empty()) throw Error(ErrorKind::kInvalidInput, kModule, "empty vector");
  double sq = 0.0;
  for (float x : values) {
    if (!std::isfinite(x)) throw Error(ErrorKind::kInvalidInput, kModule, "non-finite component");
    sq += static_cast<double>(x) * x;
  }
  if (std::abs(std::sqrt(sq) - 1.0) > kUnitNormTolerance) {
    throw Error(ErrorKind::kInvalidInput, kModule,
                "vector norm " + std::to_string(std::sqrt(sq)) + " is not 1");
  }
}

template <typename Item, typename Encode>
std::vector<EmbeddingVector> embed_batched(const EmbeddingBackend& backend,
                                           std::span<const Item> items,
                                           std::size_t batch_size, Encode encode) {
  if (batch_size == 0) batch_size = kDefaultBatchSize;
  std::vector<EmbeddingVector> out;
  out.reserve(items.size());
  for (std::size_t begin = 0; begin < items.size(); begin += batch_size) {
    const std::size_t n = std::min(batch_size, items.size() - begin);
    const auto batch = items.subspan(begin, n);
    std::vector<std::vector<float>> raw;
    try {
      raw = encode(batch);
      if (raw.size() != n) {
        throw Error(ErrorKind::kBackendFailure, kModule,
                    "backend returned " + std::to_string(raw.size()) + " rows for " +
                        std::to_string(n) + " inputs");
      }
    } catch (const std::exception& batch_error) {
      // Re-run item by item to name the failing input.
      for (std::size_t k = 0; k < n; ++k) {
        try {
          (void)encode(batch.subspan(k, 1));
        } catch (const std::exception& e) {
          throw Error(ErrorKind::kBackendFailure, kModule,
                      backend.name() + ": " + e.what(), begin + k);
        }
      }
      throw Error(ErrorKind::kBackendFailure, kModule,
                  backend.name() + ": " + batch_error.what(), begin);
    }
    for (std::size_t k = 0; k < n; ++k) {
      if (raw[k].size() != backend.dim()) {
        throw Error(ErrorKind::kBackendFailure, kModule,
                    "backend returned width " + std::to_string(raw[k].size()) +
                        ", expected " + std::to_string(backend.dim()),
                    begin + k);
      }
      try {
        out.push_back(normalize(raw[k]));
      } catch (const Error& e) {
        throw Error(ErrorKind::kBackendFailure, kModule, e.what(), begin + k);
      }
    }
  }
  return out;
}

}  // namespace

EmbeddingVector::EmbeddingVector(std::vector<float> values) : values_(std::move(values)) {
  check_unit(values_);
}

EmbeddingVector normalize(std::span<const float> v) {
  if (v.empty()) throw Error(ErrorKind::kInvalidInput, kModule, "empty vector");
  double sq = 0.0;
  for (float x : v) {
    if (!std::isfinite(x)) throw Error(ErrorKind::kInvalidInput, kModule, "non-finite component");
    sq += static_cast<double>(x) * x;
  }
  if (sq == 0.0) throw Error(ErrorKind::kZeroVector, kModule, "cannot normalize a zero vector");
  const double norm = std::sqrt(sq);
  std::vector<float> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = static_cast<float>(static_cast<double>(v[i]) / norm);
  }
  return EmbeddingVector(std::move(out));
}

double dot(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorKind::kDimMismatch, kModule,
                std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<double>(a[i]) * b[i];
  return s;
}

double cosine(std::span<const float> a, std::span<const float> b) {
  const double na = std::sqrt(dot(a, a));
  const double nb = std::sqrt(dot(b, b));
  if (na == 0.0 || nb == 0.0) throw Error(ErrorKind::kZeroVector, kModule, "cosine of zero vector");
  return dot(a, b) / (na * nb);
}

std::vector<EmbeddingVector> embed_texts(const EmbeddingBackend& backend,
                                         std::span<const textprep::CleanText> texts,
                                         std::size_t batch_size) {
  if (!backend.supports(Modality::kText)) {
    throw Error(ErrorKind::kInvalidInput, kModule, backend.name() + " does not embed text");
  }
  if (texts.empty()) throw Error(ErrorKind::kInvalidInput, kModule, "no texts to embed");
  return embed_batched(backend, texts, batch_size,
                       [&](std::span<const textprep::CleanText> b) { return backend.encode_texts(b); });
}

std::vector<EmbeddingVector> embed_images(const EmbeddingBackend& backend,
                                          std::span<const DecodedImage> images,
                                          std::size_t batch_size) {
  if (!backend.supports(Modality::kImage)) {
    throw Error(ErrorKind::kInvalidInput, kModule, backend.name() + " does not embed images");
  }
  if (images.empty()) throw Error(ErrorKind::kInvalidInput, kModule, "no images to embed");
  return embed_batched(backend, images, batch_size,
                       [&](std::span<const DecodedImage> b) { return backend.encode_images(b); });
}

}  // namespace modguard::embedding
