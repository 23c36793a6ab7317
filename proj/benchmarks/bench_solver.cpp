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

#include <benchmark/benchmark.h>

#include "trajtopo/dynamics.hpp"
#include "trajtopo/ocp.hpp"
#include "trajtopo/solver.hpp"

namespace {

using namespace trajtopo;

void BM_BoxQp(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::mt19937_64 rng(11);
  std::normal_distribution<double> gauss;
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = gauss(rng);
  const Eigen::MatrixXd h =
      a.transpose() * a + Eigen::MatrixXd::Identity(n, n) * 0.1;
  Eigen::VectorXd g(n);
  for (int i = 0; i < n; ++i) g(i) = gauss(rng);
  const Eigen::VectorXd lo = Eigen::VectorXd::Constant(n, -1.0);
  const Eigen::VectorXd hi = Eigen::VectorXd::Constant(n, 1.0);
  const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(n);
  for (auto _ : state) benchmark::DoNotOptimize(solve_boxqp(h, g, lo, hi, x0));
}
BENCHMARK(BM_BoxQp)->Arg(4)->Arg(16);

void BM_CartpoleStep(benchmark::State& state) {
  const CartpoleModel model{CartpoleParams{}};
  Eigen::VectorXd x(4), u(1);
  x << 0.1, 0.5, -0.2, 0.3;
  u << 2.0;
  for (auto _ : state) benchmark::DoNotOptimize(model.step(x, u));
}
BENCHMARK(BM_CartpoleStep);

void BM_CartpoleSwingUp(benchmark::State& state) {
  Eigen::VectorXd x0(4);
  x0 << 0.0, 0.1, 0.0, 0.0;
  const OCProblem p = make_cartpole_problem(x0);
  SolverOptions opts;
  opts.max_iterations = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(solve(p, {}, {}, opts));
}
BENCHMARK(BM_CartpoleSwingUp)->Arg(1)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_QuadrotorIteration(benchmark::State& state) {
  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(12);
  x0.head<3>() << -2.0, -2.0, -2.0;
  ObstacleSet obstacles;
  const OCProblem p =
      make_quadrotor_problem(x0, Eigen::Vector3d(1.75, 1.75, 1.75), obstacles);
  SolverOptions opts;
  opts.max_iterations = 1;
  for (auto _ : state) benchmark::DoNotOptimize(solve(p, {}, {}, opts));
}
BENCHMARK(BM_QuadrotorIteration)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
