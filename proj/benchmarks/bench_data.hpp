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

#ifndef MODGUARD_BENCHMARKS_BENCH_DATA_HPP_
#define MODGUARD_BENCHMARKS_BENCH_DATA_HPP_

#include <cstdint>
#include <vector>

#include "modguard/embedding_store.hpp"
#include "modguard/types.hpp"

namespace modguard::bench {

struct Labeled {
  embedding::EmbeddingStore x;
  std::vector<Label> y;
};

// Two unit-norm Gaussian clusters, alternating labels.
Labeled two_clusters(std::size_t count, std::size_t dim, std::uint64_t seed);

}  // namespace modguard::bench

#endif  // MODGUARD_BENCHMARKS_BENCH_DATA_HPP_
