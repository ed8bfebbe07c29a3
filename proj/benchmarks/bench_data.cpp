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

#include "bench_data.hpp"

#include <cmath>
#include <string>

#include "modguard/random.hpp"

namespace modguard::bench {

Labeled two_clusters(std::size_t count, std::size_t dim, std::uint64_t seed) {
  Rng rng(seed);
  Labeled out{embedding::EmbeddingStore(dim), {}};
  std::vector<float> row(dim);
  for (std::size_t i = 0; i < count; ++i) {
    const bool harmful = i % 2 == 0;
    double norm = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
      const double centre = j == (harmful ? 0u : 1u) ? 1.0 : 0.0;
      row[j] = static_cast<float>(centre + 0.1 * rng.normal());
      norm += static_cast<double>(row[j]) * row[j];
    }
    for (auto& v : row) v = static_cast<float>(v / std::sqrt(norm));
    const Label label = harmful ? Label::kHarmful : Label::kNonHarmful;
    out.x.append_row("r" + std::to_string(i), row, label);
    out.y.push_back(label);
  }
  return out;
}

}  // namespace modguard::bench
