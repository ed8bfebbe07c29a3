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

#include "bench_data.hpp"
#include "modguard/projection.hpp"

namespace modguard {
namespace {

void BM_KnnGraph(benchmark::State& state) {
  const auto d = bench::two_clusters(static_cast<std::size_t>(state.range(0)), 768, 6);
  for (auto _ : state) benchmark::DoNotOptimize(projection::knn_graph(d.x, 15).indices.data());
}
BENCHMARK(BM_KnnGraph)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_Umap(benchmark::State& state) {
  const auto d = bench::two_clusters(static_cast<std::size_t>(state.range(0)), 768, 7);
  projection::ProjectionConfig cfg;
  cfg.seed = 7;
  for (auto _ : state) benchmark::DoNotOptimize(projection::umap(d.x, cfg).coords.data());
}
BENCHMARK(BM_Umap)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_Pca(benchmark::State& state) {
  const auto d = bench::two_clusters(2000, 768, 8);
  for (auto _ : state) benchmark::DoNotOptimize(projection::pca(d.x, 3).coords.data());
}
BENCHMARK(BM_Pca)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace modguard
