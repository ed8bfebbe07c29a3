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

#include <string>

#include "modguard/textprep.hpp"

namespace modguard {
namespace {

void BM_CleanTweet(benchmark::State& state) {
  const std::string raw =
      "RT @someone: can't believe this &amp; that http://t.co/abc123 #wow   so   annoying!!! @other";
  for (auto _ : state) benchmark::DoNotOptimize(textprep::clean_text(raw).str().size());
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(raw.size()));
}
BENCHMARK(BM_CleanTweet);

void BM_CleanLong(benchmark::State& state) {
  std::string raw;
  while (raw.size() < 64 * 1024) raw += "plain words with a link www.example.com/x and @mention ";
  for (auto _ : state) benchmark::DoNotOptimize(textprep::clean_text(raw).str().size());
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(raw.size()));
}
BENCHMARK(BM_CleanLong);

}  // namespace
}  // namespace modguard
