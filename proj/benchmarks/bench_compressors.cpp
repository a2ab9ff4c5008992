// Copyright 2026 The ecvr Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// =============================================================================


#include <benchmark/benchmark.h>

#include "ecvr/compressors.hpp"
#include "ecvr/rng.hpp"

namespace {

using ecvr::CompressorSpec;

void Run(benchmark::State& state, const CompressorSpec& spec) {
  const std::size_t d = static_cast<std::size_t>(state.range(0));
  ecvr::RngStream rng(1);
  ecvr::Vec x(d);
  for (double& v : x) v = rng.Normal();
  for (auto _ : state) {
    auto y = ecvr::Compress(spec, x, rng);
    benchmark::DoNotOptimize(y.values.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(d));
}

void BM_Top1(benchmark::State& s) { Run(s, CompressorSpec::TopK(1)); }
void BM_Top5(benchmark::State& s) { Run(s, CompressorSpec::TopK(5)); }
void BM_Rand5(benchmark::State& s) { Run(s, CompressorSpec::RandK(5)); }
void BM_Dither(benchmark::State& s) { Run(s, CompressorSpec::Parse("dither")); }
void BM_Natural(benchmark::State& s) { Run(s, CompressorSpec::Parse("natural")); }
void BM_NTop5(benchmark::State& s) { Run(s, CompressorSpec::NTopK(5)); }

BENCHMARK(BM_Top1)->Arg(100)->Arg(10000);
BENCHMARK(BM_Top5)->Arg(100)->Arg(10000);
BENCHMARK(BM_Rand5)->Arg(100)->Arg(10000);
BENCHMARK(BM_Dither)->Arg(100)->Arg(10000);
BENCHMARK(BM_Natural)->Arg(100)->Arg(10000);
BENCHMARK(BM_NTop5)->Arg(100)->Arg(10000);

}  // namespace

BENCHMARK_MAIN();
