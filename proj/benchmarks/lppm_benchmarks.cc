// Copyright 2026 The LPPM Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <random>
#include <vector>

#include "benchmark/benchmark.h"
#include "lppm/ingest.h"
#include "lppm/mechanisms.h"
#include "lppm/monte_carlo.h"
#include "lppm/remap.h"
#include "lppm/shokri.h"

namespace lppm {
namespace {

void BM_Weiszfeld(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  std::vector<PlanePoint> points(n);
  std::vector<double> weights(n);
  for (int i = 0; i < n; ++i) {
    points[i] = {u(rng), u(rng)};
    weights[i] = u(rng) + 0.1;
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(RunWeiszfeld(points, weights, {}));
  }
}
BENCHMARK(BM_Weiszfeld)->Arg(25)->Arg(1000);

void BM_BlahutArimoto(benchmark::State& state) {
  Prior prior = *BuildSyntheticCity(static_cast<int>(state.range(0)), 3);
  const std::vector<Location> outputs = prior.poi().Locations();
  BaParams params;
  params.b = 2.0;
  params.extrapolate = state.range(1) != 0;
  params.max_iterations = 10000000;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        RunBlahutArimoto(prior, outputs, DistanceFn::Euclidean(), params));
  }
}
BENCHMARK(BM_BlahutArimoto)
    ->ArgNames({"pois", "extrapolate"})
    ->ArgsProduct({{25, 100}, {0, 1}})
    ->Unit(benchmark::kMillisecond);

void BM_ShokriGrid(benchmark::State& state) {
  Prior prior = *BuildGridScenario();
  const DistanceFn d = DistanceFn::Euclidean();
  const double q_star = OptimalConstantOutput(prior, d)->q_star;
  for (auto _ : state) {
    benchmark::DoNotOptimize(SolveShokri(ShokriInstance{prior, d, d, 0.5 * q_star}));
  }
}
BENCHMARK(BM_ShokriGrid)->Unit(benchmark::kMillisecond);

void BM_LaplaceMonteCarlo(benchmark::State& state) {
  Prior prior = *BuildSyntheticCity(200, 5);
  auto sampler = *LaplaceSampler::Create(2.0);
  McConfig cfg;
  cfg.samples = 500;
  cfg.remap = RemapMode::kOptimal;
  const DistanceFn d = DistanceFn::Euclidean();
  for (auto _ : state) {
    benchmark::DoNotOptimize(McEvaluate(*sampler, prior, d, d, cfg));
  }
}
BENCHMARK(BM_LaplaceMonteCarlo)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace lppm
BENCHMARK_MAIN();
