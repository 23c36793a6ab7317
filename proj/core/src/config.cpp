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

#include "trajtopo/config.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace trajtopo {

namespace {

using Json = nlohmann::ordered_json;

template <typename T>
void get_to(const nlohmann::json& j, const char* key, T& out) {
  try {
    j.at(key).get_to(out);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("config key '") + key + "': " + e.what());
  }
}

const nlohmann::json& section(const nlohmann::json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end())
    throw std::runtime_error(std::string("config section '") + key + "' is missing");
  return *it;
}

}  // namespace

std::string RunPaths::resolve(const std::string& name) const {
  const std::filesystem::path p(name);
  if (p.is_absolute() || out_dir.empty()) return name;
  return (std::filesystem::path(out_dir) / p).string();
}

EmbedOptions EmbedConfig::embed_options() const {
  EmbedOptions opts;
  if (mode == "full_state")
    opts.mode = EmbedMode::kFullState;
  else if (mode == "position_only")
    opts.mode = EmbedMode::kPositionOnly;
  else if (mode == "pose_only")
    opts.mode = EmbedMode::kPoseOnly;
  else
    throw std::runtime_error("config key 'mode': unknown embed mode '" + mode + "'");
  opts.angle_dims = angle_dims;
  return opts;
}

ScalingWeights EmbedConfig::scaling_weights(int state_dim) const {
  const int dim = embedded_dim(state_dim, embed_options());
  if (weights.empty()) return ScalingWeights::ones(dim);
  if (static_cast<int>(weights.size()) != dim)
    throw std::runtime_error("config key 'weights': expected " + std::to_string(dim) +
                             " entries, got " + std::to_string(weights.size()));
  ScalingWeights w;
  w.w = Eigen::Map<const Eigen::VectorXd>(weights.data(), dim);
  return w;
}

TrainOptions TrainConfig::train_options(std::uint64_t seed) const {
  TrainOptions opts;
  opts.lr = lr;
  opts.epochs = epochs;
  opts.batch = batch;
  opts.patience = patience;
  opts.seed = seed;
  return opts;
}

RunConfig RunConfig::cartpole_defaults() {
  RunConfig cfg;
  cfg.task = "cartpole";
  cfg.embedding.mode = "full_state";
  cfg.embedding.angle_dims = {1};
  cfg.embedding.weights = {1.0, 1.0, 1.0, 0.5, 0.5};  // x, cos, sin, xdot, adot
  cfg.embedding.connect_endpoints = true;
  cfg.embedding.filtration_T = 9;
  cfg.datagen.count = 10;
  cfg.datagen.solutions_per_start = 10;
  cfg.bench.success_cost_threshold = 2000.0;
  cfg.bench.scaling_N = {1, 8, 16, 32, 64, 100};
  return cfg;
}

RunConfig RunConfig::quadrotor_defaults() {
  RunConfig cfg;
  cfg.task = "quadrotor";
  cfg.embedding.mode = "position_only";
  cfg.embedding.weights = {1.0, 1.0, 1.0};
  cfg.embedding.connect_endpoints = true;
  cfg.embedding.filtration_T = 9;
  cfg.datagen.count = 200;
  cfg.bench.success_cost_threshold = 100.0;
  cfg.bench.scaling_N = {1, 8, 16, 32, 64, 128};
  return cfg;
}

std::string run_config_to_json(const RunConfig& cfg) {
  Json j;
  j["task"] = cfg.task;
  j["seed"] = cfg.seed;
  j["jobs"] = cfg.jobs;
  j["paths"] = {{"out_dir", cfg.paths.out_dir},
                {"dataset", cfg.paths.dataset},
                {"filtration", cfg.paths.filtration},
                {"diagram", cfg.paths.diagram},
                {"labels", cfg.paths.labels},
                {"mlp_model", cfg.paths.mlp_model},
                {"knn_model", cfg.paths.knn_model},
                {"moe_model", cfg.paths.moe_model},
                {"report_json", cfg.paths.report_json},
                {"report_csv", cfg.paths.report_csv},
                {"scaling_csv", cfg.paths.scaling_csv}};
  j["cluster"] = {{"cutoff_ratio", cfg.cluster.cutoff_ratio},
                  {"min_lifetime", cfg.cluster.min_lifetime}};
  j["embedding"] = {{"mode", cfg.embedding.mode},
                    {"angle_dims", cfg.embedding.angle_dims},
                    {"weights", cfg.embedding.weights},
                    {"connect_endpoints", cfg.embedding.connect_endpoints},
                    {"filtration_T", cfg.embedding.filtration_T}};
  j["solver"] = {{"max_iterations", cfg.solver.max_iterations},
                 {"cost_tolerance", cfg.solver.cost_tolerance},
                 {"gradient_tolerance", cfg.solver.gradient_tolerance},
                 {"gap_tolerance", cfg.solver.gap_tolerance},
                 {"reg_init", cfg.solver.reg_init},
                 {"reg_min", cfg.solver.reg_min},
                 {"reg_max", cfg.solver.reg_max},
                 {"line_search_steps", cfg.solver.line_search_steps}};
  j["datagen"] = {{"count", cfg.datagen.count},
                  {"solutions_per_start", cfg.datagen.solutions_per_start},
                  {"control_seed_range", cfg.datagen.control_seed_range},
                  {"control_noise_sigma", cfg.datagen.control_noise_sigma},
                  {"max_retries", cfg.datagen.max_retries}};
  j["train"] = {{"mlp_hidden", cfg.train.mlp_hidden},
                {"expert_hidden", cfg.train.expert_hidden},
                {"gating_hidden", cfg.train.gating_hidden},
                {"knn_k_max", cfg.train.knn_k_max},
                {"lr", cfg.train.lr},
                {"epochs", cfg.train.epochs},
                {"batch", cfg.train.batch},
                {"patience", cfg.train.patience}};
  j["bench"] = {{"instances", cfg.bench.instances},
                {"success_cost_threshold", cfg.bench.success_cost_threshold},
                {"scaling_N", cfg.bench.scaling_N},
                {"scaling_T", cfg.bench.scaling_T}};
  return j.dump(2) + "\n";
}

RunConfig run_config_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("config parse: ") + e.what());
  }
  RunConfig cfg;
  get_to(j, "task", cfg.task);
  get_to(j, "seed", cfg.seed);
  get_to(j, "jobs", cfg.jobs);
  const auto& paths = section(j, "paths");
  get_to(paths, "out_dir", cfg.paths.out_dir);
  get_to(paths, "dataset", cfg.paths.dataset);
  get_to(paths, "filtration", cfg.paths.filtration);
  get_to(paths, "diagram", cfg.paths.diagram);
  get_to(paths, "labels", cfg.paths.labels);
  get_to(paths, "mlp_model", cfg.paths.mlp_model);
  get_to(paths, "knn_model", cfg.paths.knn_model);
  get_to(paths, "moe_model", cfg.paths.moe_model);
  get_to(paths, "report_json", cfg.paths.report_json);
  get_to(paths, "report_csv", cfg.paths.report_csv);
  get_to(paths, "scaling_csv", cfg.paths.scaling_csv);
  const auto& cluster = section(j, "cluster");
  get_to(cluster, "cutoff_ratio", cfg.cluster.cutoff_ratio);
  get_to(cluster, "min_lifetime", cfg.cluster.min_lifetime);
  const auto& embedding = section(j, "embedding");
  get_to(embedding, "mode", cfg.embedding.mode);
  get_to(embedding, "angle_dims", cfg.embedding.angle_dims);
  get_to(embedding, "weights", cfg.embedding.weights);
  get_to(embedding, "connect_endpoints", cfg.embedding.connect_endpoints);
  get_to(embedding, "filtration_T", cfg.embedding.filtration_T);
  const auto& solver = section(j, "solver");
  get_to(solver, "max_iterations", cfg.solver.max_iterations);
  get_to(solver, "cost_tolerance", cfg.solver.cost_tolerance);
  get_to(solver, "gradient_tolerance", cfg.solver.gradient_tolerance);
  get_to(solver, "gap_tolerance", cfg.solver.gap_tolerance);
  get_to(solver, "reg_init", cfg.solver.reg_init);
  get_to(solver, "reg_min", cfg.solver.reg_min);
  get_to(solver, "reg_max", cfg.solver.reg_max);
  get_to(solver, "line_search_steps", cfg.solver.line_search_steps);
  const auto& datagen = section(j, "datagen");
  get_to(datagen, "count", cfg.datagen.count);
  get_to(datagen, "solutions_per_start", cfg.datagen.solutions_per_start);
  get_to(datagen, "control_seed_range", cfg.datagen.control_seed_range);
  get_to(datagen, "control_noise_sigma", cfg.datagen.control_noise_sigma);
  get_to(datagen, "max_retries", cfg.datagen.max_retries);
  const auto& train = section(j, "train");
  get_to(train, "mlp_hidden", cfg.train.mlp_hidden);
  get_to(train, "expert_hidden", cfg.train.expert_hidden);
  get_to(train, "gating_hidden", cfg.train.gating_hidden);
  get_to(train, "knn_k_max", cfg.train.knn_k_max);
  get_to(train, "lr", cfg.train.lr);
  get_to(train, "epochs", cfg.train.epochs);
  get_to(train, "batch", cfg.train.batch);
  get_to(train, "patience", cfg.train.patience);
  const auto& bench = section(j, "bench");
  get_to(bench, "instances", cfg.bench.instances);
  get_to(bench, "success_cost_threshold", cfg.bench.success_cost_threshold);
  get_to(bench, "scaling_N", cfg.bench.scaling_N);
  get_to(bench, "scaling_T", cfg.bench.scaling_T);
  return cfg;
}

void save_run_config(const std::string& path, const RunConfig& cfg) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("open for write failed: " + path);
  out << run_config_to_json(cfg);
  if (!out) throw std::runtime_error("write failed: " + path);
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("open for read failed: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return run_config_from_json(ss.str());
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

}  // namespace trajtopo
