/*
 Copyright 2026 trajtopo contributors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "trajtopo/clustering.hpp"
#include "trajtopo/datagen.hpp"
#include "trajtopo/geometry.hpp"
#include "trajtopo/persistence.hpp"

namespace {

using namespace trajtopo;

std::vector<Trajectory> sine_family(int n, int t_knots) {
  std::vector<Trajectory> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    auto [up, down] = toy_sine_pair(i % 2 == 0, t_knots);
    Trajectory t = (i % 4 < 2) ? up : down;
    for (auto& s : t.states) s.array() += 1e-3 * (i + 1);
    out.push_back(embed(t, ScalingWeights::defaults(4, 2), EmbedOptions{}));
  }
  return out;
}

void BM_SegmentDistance(benchmark::State& state) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> gauss;
  Eigen::VectorXd a(4), b(4), c(4), d(4);
  for (auto* v : {&a, &b, &c, &d})
    for (int i = 0; i < 4; ++i) (*v)(i) = gauss(rng);
  const Segment s1{a, b}, s2{c, d};
  for (auto _ : state) benchmark::DoNotOptimize(segment_distance(s1, s2));
}
BENCHMARK(BM_SegmentDistance);

void BM_FiltrationMatrix(benchmark::State& state) {
  const auto trajs = sine_family(static_cast<int>(state.range(0)), 9);
  for (auto _ : state) benchmark::DoNotOptimize(build_filtration_matrix(trajs, true, 1));
  state.SetComplexityN(state.range(0) * 8);
}
BENCHMARK(BM_FiltrationMatrix)->Arg(8)->Arg(16)->Arg(32)->Arg(64)->Complexity();

void BM_RipsPersistence(benchmark::State& state) {
  const auto trajs = sine_family(static_cast<int>(state.range(0)), 9);
  const FiltrationMatrix m = build_filtration_matrix(trajs, true, 1);
  for (auto _ : state) benchmark::DoNotOptimize(rips_persistence(m, 1, kAutoThreshold));
}
BENCHMARK(BM_RipsPersistence)->Arg(8)->Arg(16)->Arg(32);

void BM_ClusterDataset(benchmark::State& state) {
  const auto trajs = sine_family(static_cast<int>(state.range(0)), 41);
  ClusterPipelineOptions opts;
  opts.weights = ScalingWeights::ones(4);
  opts.connect_endpoints = true;
  opts.filtration_T = 9;
  for (auto _ : state) benchmark::DoNotOptimize(cluster_dataset(trajs, opts));
}
BENCHMARK(BM_ClusterDataset)->Arg(16)->Arg(64);

}  // namespace

BENCHMARK_MAIN();
