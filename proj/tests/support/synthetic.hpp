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

#ifndef MODGUARD_TESTS_SYNTHETIC_HPP_
#define MODGUARD_TESTS_SYNTHETIC_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "modguard/embedding_store.hpp"
#include "modguard/random.hpp"
#include "modguard/types.hpp"

namespace modguard::testing {

std::vector<float> random_unit(Rng& rng, std::size_t dim);

// `count` mutually orthogonal random unit vectors.
std::vector<std::vector<float>> orthonormal_directions(Rng& rng, std::size_t dim,
                                                       std::size_t count);

std::vector<float> normalized(std::vector<float> v);

// Appends `count` points drawn as normalize(centroid + N(0, sigma^2 I)).
void sample_cluster(embedding::EmbeddingStore& store, std::vector<Label>& labels,
                    const std::vector<float>& centroid, double sigma, std::size_t count,
                    Label label, const std::string& id_prefix, Rng& rng);

struct LabeledStore {
  embedding::EmbeddingStore x{1};
  std::vector<Label> y;
};

// Two unit-norm Gaussian clusters: label 0 around centroids[0], label 1
// around centroids[1].
struct TwoClusters {
  std::vector<std::vector<float>> centroids;
  LabeledStore data;
};

// dim 64, orthonormal centroids (separation sqrt(2)), per-coordinate noise
// 0.0375 so the within-class standard deviation is 0.3.
inline constexpr std::size_t kD1Dim = 64;
inline constexpr double kD1Sigma = 0.0375;
TwoClusters make_d1(std::uint64_t seed, std::size_t per_class = 1000);

// D1's centroids re-sampled with 1.5x noise.
LabeledStore make_d2(const TwoClusters& d1, std::uint64_t seed, std::size_t per_class = 200);

// Seeded stratified split through corpus::split.
std::pair<LabeledStore, LabeledStore> split_store(const LabeledStore& data, double fraction,
                                                  std::uint64_t seed);

LabeledStore concat(const LabeledStore& a, const LabeledStore& b);

// Random unit rows with random labels (both classes present).
LabeledStore random_labeled(Rng& rng, std::size_t count, std::size_t dim);

// Mean within-class distance to the class mean, and the distance between
// the two class means.
struct ClusterGeometry {
  double within_std = 0.0;
  double separation = 0.0;
};
ClusterGeometry measure_geometry(const LabeledStore& data);

}  // namespace modguard::testing

#endif  // MODGUARD_TESTS_SYNTHETIC_HPP_
