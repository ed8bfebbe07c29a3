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
#include "modguard/classifiers.hpp"

namespace modguard {
namespace {

void BM_TrainLogistic(benchmark::State& state) {
  const auto d = bench::two_clusters(static_cast<std::size_t>(state.range(0)), 768, 2);
  classifiers::TrainConfig cfg;
  cfg.epochs = 20;
  for (auto _ : state) benchmark::DoNotOptimize(classifiers::train_logistic(d.x, d.y, cfg).bias);
}
BENCHMARK(BM_TrainLogistic)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);

void BM_TrainSvm(benchmark::State& state) {
  const auto d = bench::two_clusters(static_cast<std::size_t>(state.range(0)), 768, 3);
  classifiers::TrainConfig cfg;
  cfg.epochs = 20;
  for (auto _ : state) benchmark::DoNotOptimize(classifiers::train_svm(d.x, d.y, cfg).bias);
}
BENCHMARK(BM_TrainSvm)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);

void BM_PredictLinear(benchmark::State& state) {
  const auto d = bench::two_clusters(2000, 768, 4);
  classifiers::TrainConfig cfg;
  cfg.epochs = 5;
  const auto model = classifiers::train_logistic(d.x, d.y, cfg);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(classifiers::predict(model, d.x.row(i)).score);
    i = (i + 1) % d.x.count();
  }
}
BENCHMARK(BM_PredictLinear);

void BM_PredictKnn(benchmark::State& state) {
  const auto d = bench::two_clusters(static_cast<std::size_t>(state.range(0)), 768, 5);
  const auto model = classifiers::train_knn(d.x, d.y, 5);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(classifiers::predict(model, d.x.row(i)).score);
    i = (i + 1) % d.x.count();
  }
}
BENCHMARK(BM_PredictKnn)->Arg(1000)->Arg(10000)->Unit(benchmark::kMicrosecond);

}  // namespace
}  // namespace modguard
