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

#ifndef MODGUARD_EMBEDDING_HPP_
#define MODGUARD_EMBEDDING_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "modguard/image.hpp"
#include "modguard/textprep.hpp"
#include "modguard/types.hpp"

namespace modguard::embedding {

inline constexpr double kUnitNormTolerance = 1e-5;
inline constexpr std::size_t kDefaultDim = 768;
inline constexpr std::size_t kDefaultBatchSize = 32;

// Finite, unit-L2-norm float vector in the shared text/image space.
class EmbeddingVector {
 public:
  // Validates the invariants; throws InvalidInput.
  explicit EmbeddingVector(std::vector<float> values);

  std::span<const float> values() const noexcept { return values_; }
  std::size_t dim() const noexcept { return values_.size(); }

  friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;

 private:
  std::vector<float> values_;
};

// Scales v to unit L2 norm. Throws ZeroVector for all-zero input and
// InvalidInput for empty or non-finite input.
EmbeddingVector normalize(std::span<const float> v);

// Dot product accumulated in double.
double dot(std::span<const float> a, std::span<const float> b);
double cosine(std::span<const float> a, std::span<const float> b);

// A model mapping texts and/or images into one dim-sized space. Implementations
// are read-only after construction and return identical vectors for identical
// inputs. encode_* return raw (unnormalized) rows; callers go through
// embed_texts / embed_images which batch, validate and normalize.
class EmbeddingBackend {
 public:
  virtual ~EmbeddingBackend() = default;

  virtual std::string name() const = 0;
  virtual std::size_t dim() const = 0;
  virtual bool supports(Modality modality) const = 0;

  virtual std::vector<std::vector<float>> encode_texts(
      std::span<const textprep::CleanText> batch) const = 0;
  virtual std::vector<std::vector<float>> encode_images(
      std::span<const DecodedImage> batch) const = 0;
};

// Both throw InvalidInput for an empty list or unsupported modality and
// BackendFailure (carrying the failing item index) when inference fails.
std::vector<EmbeddingVector> embed_texts(const EmbeddingBackend& backend,
                                         std::span<const textprep::CleanText> texts,
                                         std::size_t batch_size = kDefaultBatchSize);
std::vector<EmbeddingVector> embed_images(const EmbeddingBackend& backend,
                                          std::span<const DecodedImage> images,
                                          std::size_t batch_size = kDefaultBatchSize);

}  // namespace modguard::embedding

#endif  // MODGUARD_EMBEDDING_HPP_
