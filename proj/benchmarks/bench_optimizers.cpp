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

#include <memory>

#include "ecvr/algorithms.hpp"
#include "ecvr/dataset.hpp"
#include "ecvr/problem.hpp"
#include "ecvr/synth.hpp"

namespace {

using namespace ecvr;

// N = 2000 examples, d = 500 features, 5% density, 8 nodes.
const Problem& BenchProblem() {
  static const Problem problem = [] {
    SynthSpec s;
    s.examples = 2000;
    s.features = 500;
    s.density = 0.05;
    auto data = std::make_shared<Dataset>(SynthesizeDataset(s));
    NormalizeColumns(*data);
    return Problem(data, MakePartition(*data, 8), 1e-3, 1e-3, ObjectiveMode::kComposite);
  }();
  return problem;
}

void BM_EcLsvrgStep(benchmark::State& state) {
  LsvrgOptions o;
  o.eta = 1.0;
  o.q = o.q1 = CompressorSpec::TopK(1);
  EcLsvrg opt(BenchProblem(), o, 1);
  for (auto _ : state) opt.Step();
}

void BM_LsvrgStep(benchmark::State& state) {
  Lsvrg opt(BenchProblem(), 1.0, 1.0 / 250.0, 1);
  for (auto _ : state) opt.Step();
}

void BM_EcQuartzStep(benchmark::State& state) {
  static const DualProblem dual(BenchProblem());
  DualOptions o;
  o.theta = 1e-3;
  o.q = CompressorSpec::TopK(1);
  EcDual opt(dual, o, 1);
  for (auto _ : state) opt.Step();
}

void BM_EcGdStep(benchmark::State& state) {
  EcGd opt(BenchProblem(), 1.0, CompressorSpec::TopK(1), 1);
  for (auto _ : state) opt.Step();
}

void BM_FullGradient(benchmark::State& state) {
  const Vec x(BenchProblem().dim(), 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(BenchProblem().FullGradient(x).data());
}

BENCHMARK(BM_EcLsvrgStep);
BENCHMARK(BM_LsvrgStep);
BENCHMARK(BM_EcQuartzStep);
BENCHMARK(BM_EcGdStep);
BENCHMARK(BM_FullGradient);

}  // namespace

BENCHMARK_MAIN();
