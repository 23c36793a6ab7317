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

#ifndef TRAJTOPO_BENCH_HPP
#define TRAJTOPO_BENCH_HPP

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "trajtopo/config.hpp"
#include "trajtopo/datagen.hpp"
#include "trajtopo/learn.hpp"
#include "trajtopo/ocp.hpp"

namespace trajtopo {

enum class WarmStartMethod { kCold = 0, kMlp = 1, kKnn = 2, kMoe = 3 };
inline constexpr int kNumWarmStartMethods = 4;
std::string method_name(WarmStartMethod m);

/// The no-model baseline: X is x0 held over the whole horizon and U repeats
/// the problem's control setpoint (hover for the quadrotor, zero for the
/// cartpole).
std::pair<std::vector<Eigen::VectorXd>, std::vector<Eigen::VectorXd>> cold_start(
    const OCProblem& p);

/// Model inputs/targets extracted from a dataset: one row per record, input
/// is the start state, target is the flattened (states, controls) sequence.
/// Throws std::invalid_argument on an empty or shape-inconsistent dataset.
struct WarmStartData {
  Eigen::MatrixXd inputs;
  Eigen::MatrixXd targets;
  WarmStartShape shape;
};
WarmStartData warm_start_training_data(const std::vector<DatasetRecord>& records);

struct WarmStartModels {
  MlpRegressor mlp;
  KnnModel knn;
  MoeModel moe;
};

/// Trains the three learned initializers on a labeled dataset with shared
/// 70/15/15 splits: a single MLP (train.mlp_hidden), a KNN with k selected
/// on the validation split, and a Mixture of Experts with one expert per
/// cluster. `labels[i]` in [0, k) is record i's cluster.
WarmStartModels train_warm_start_models(const std::vector<DatasetRecord>& records,
                                        const std::vector<int>& labels, int k,
                                        const RunConfig& cfg);

struct SolveRecord {
  int instance = 0;
  WarmStartMethod method = WarmStartMethod::kCold;
  bool converged = false;
  bool collision_free = true;
  bool success = false;
  int iterations = 0;
  double final_cost = 0.0;
  std::vector<double> cost_trace;  // accepted-iteration costs, monotone
  std::vector<double> time_trace;  // elapsed seconds per accepted iteration
};

struct MethodStats {
  std::string method;
  int successes = 0;
  double success_rate = 0.0;
  // Statistics over successful solves only (population std, 0 when empty).
  double iterations_mean = 0.0;
  double iterations_std = 0.0;
  double final_cost_mean = 0.0;
  double final_cost_std = 0.0;
};

struct BenchmarkReport {
  std::string task;
  int instances = 0;
  std::uint64_t config_hash = 0;
  std::array<MethodStats, kNumWarmStartMethods> stats;
  std::vector<SolveRecord> records;  // ordered (instance, method)
};

/// FNV-1a 64-bit hash; the report stores the hash of the serialized config
/// (with paths and jobs normalized, since neither changes the solves) so
/// "all methods ran under identical options" is checkable.
std::uint64_t fnv1a64(const std::string& text);

/// Samples cfg.bench.instances fresh start states (collision-free for the
/// quadrotor), builds all four initializations per instance, solves each
/// with identical solver options, and aggregates per-method statistics.
/// success = converged AND final cost < cfg.bench.success_cost_threshold
/// AND (quadrotor) every knot point outside every obstacle. Solve failures
/// are recorded, never thrown. Deterministic apart from the time traces.
BenchmarkReport run_benchmark(const RunConfig& cfg, const QuadrotorEnvironment& env,
                              const WarmStartModels& models);

/// Recomputes the per-method statistics from the raw records (the report
/// invariant: aggregates are reproducible from records alone).
std::array<MethodStats, kNumWarmStartMethods> aggregate_records(
    const std::vector<SolveRecord>& records, int instances);

std::string benchmark_report_to_json(const BenchmarkReport& report);
void write_benchmark_json(const std::string& path, const BenchmarkReport& report);
/// One row per (method, instance, iteration): cost and elapsed seconds.
void write_benchmark_csv(const std::string& path, const BenchmarkReport& report);

/// One scalability measurement: N trajectories resampled to T knots give
/// N*(T-1) filtration points.
struct ScalingRow {
  int n = 0;
  int t = 0;
  int points = 0;
  double filtration_seconds = 0.0;
  double persistence_seconds = 0.0;
  int h1_retained = 0;
};

/// Times build_filtration_matrix and rips_persistence for every (N, T) in
/// the cross product, resampling (cubic) to T and subsetting to the first N
/// trajectories. Each timing is averaged over enough repetitions to
/// accumulate a measurable interval. Throws std::invalid_argument when the
/// base dataset is smaller than max(Ns).
std::vector<ScalingRow> scalability_study(const std::vector<Trajectory>& base,
                                          const std::vector<int>& Ns,
                                          const std::vector<int>& Ts,
                                          const EmbedConfig& embedding,
                                          const ClusterConfig& cluster, int jobs = 1);

void write_scaling_csv(const std::string& path, const std::vector<ScalingRow>& rows);

struct PowerFit {
  double slope = 0.0;
  double intercept = 0.0;  // log-log space
  double r2 = 0.0;
};

/// Least-squares line through (log x, log y); at least two points.
PowerFit fit_loglog(const std::vector<std::pair<double, double>>& xy);

}  // namespace trajtopo

#endif  // TRAJTOPO_BENCH_HPP
