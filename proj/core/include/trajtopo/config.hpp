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

#ifndef TRAJTOPO_CONFIG_HPP
#define TRAJTOPO_CONFIG_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "trajtopo/clustering.hpp"
#include "trajtopo/learn.hpp"
#include "trajtopo/solver.hpp"

namespace trajtopo {

/// Artifact file names, resolved relative to out_dir unless absolute.
struct RunPaths {
  std::string out_dir = "out";
  std::string dataset = "dataset.jsonl";
  std::string filtration = "filtration.twfm";
  std::string diagram = "diagram.json";
  std::string labels = "labels.json";
  std::string mlp_model = "mlp.twml";
  std::string knn_model = "knn.twml";
  std::string moe_model = "moe.twml";
  std::string report_json = "bench.json";
  std::string report_csv = "bench.csv";
  std::string scaling_csv = "scaling.csv";

  std::string resolve(const std::string& name) const;
};

/// Embedding recipe applied before the filtration, stored in serializable
/// form (enum and weights as plain values).
struct EmbedConfig {
  std::string mode = "full_state";  // full_state | position_only | pose_only
  std::vector<int> angle_dims;
  std::vector<double> weights;  // empty: all ones for the embedded dim
  bool connect_endpoints = true;
  int filtration_T = 9;

  EmbedOptions embed_options() const;
  /// Weights for a raw state dimension, honoring the explicit list if set.
  ScalingWeights scaling_weights(int state_dim) const;
};

struct DatagenConfig {
  int count = 200;               // starts (cartpole) or instances (quadrotor)
  int solutions_per_start = 10;  // cartpole only
  double control_seed_range = 1.0;
  double control_noise_sigma = 0.1;
  int max_retries = 20;
};

struct TrainConfig {
  int mlp_hidden = 200;
  int expert_hidden = 50;
  int gating_hidden = 50;
  int knn_k_max = 10;
  double lr = 1e-3;
  int epochs = 3000;
  int batch = 64;
  int patience = 200;

  TrainOptions train_options(std::uint64_t seed) const;
};

struct BenchConfig {
  int instances = 100;
  double success_cost_threshold = 100.0;
  std::vector<int> scaling_N = {1, 8, 16, 32, 64, 100};
  std::vector<int> scaling_T = {9};
};

/// One self-contained description of a pipeline run. Round-trips through
/// JSON losslessly: save(load(file)) writes byte-identical content.
struct RunConfig {
  std::string task = "quadrotor";  // cartpole | quadrotor
  std::uint64_t seed = 0;
  int jobs = 1;
  RunPaths paths;
  ClusterConfig cluster;
  EmbedConfig embedding;
  SolverOptions solver;
  DatagenConfig datagen;
  TrainConfig train;
  BenchConfig bench;

  static RunConfig cartpole_defaults();
  static RunConfig quadrotor_defaults();
};

std::string run_config_to_json(const RunConfig& cfg);
/// Throws std::runtime_error naming the offending key on malformed input.
RunConfig run_config_from_json(const std::string& text);

void save_run_config(const std::string& path, const RunConfig& cfg);
RunConfig load_run_config(const std::string& path);

}  // namespace trajtopo

#endif  // TRAJTOPO_CONFIG_HPP
