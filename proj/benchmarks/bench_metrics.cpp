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

#include <benchmark/benchmark.h>

#include <vector>

#include "modguard/metrics.hpp"
#include "modguard/random.hpp"

namespace modguard {
namespace {

void BM_RocAuc(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  std::vector<double> scores(n);
  std::vector<Label> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    scores[i] = rng.normal();
    labels[i] = i % 3 == 0 ? Label::kHarmful : Label::kNonHarmful;
  }
  for (auto _ : state) benchmark::DoNotOptimize(metrics::roc_auc(scores, labels).auc);
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_RocAuc)->Range(1 << 8, 1 << 16);

void BM_Prf1(benchmark::State& state) {
  std::uint64_t tp = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(metrics::prf1({tp, 7, 11, 13}));
    tp = (tp + 1) & 1023;
  }
}
BENCHMARK(BM_Prf1);

}  // namespace
}  // namespace modguard
