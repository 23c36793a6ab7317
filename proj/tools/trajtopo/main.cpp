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

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "trajtopo/bench.hpp"
#include "trajtopo/clustering.hpp"
#include "trajtopo/config.hpp"
#include "trajtopo/datagen.hpp"
#include "trajtopo/learn.hpp"
#include "trajtopo/persistence.hpp"
#include "trajtopo/serialization.hpp"

namespace fs = std::filesystem;
using namespace trajtopo;

namespace {

struct CommonArgs {
  std::string config;
  std::string task = "quadrotor";
  std::uint64_t seed = 0;
  std::string out;
  int jobs = 0;
};

void add_common(CLI::App* sub, CommonArgs* a) {
  sub->add_option("--config", a->config, "run config JSON; omit for task defaults")
      ->check(CLI::ExistingFile);
  sub->add_option("--task", a->task, "cartpole | quadrotor (ignored with --config)");
  sub->add_option("--seed", a->seed, "override the config seed");
  sub->add_option("--out", a->out, "override the output directory");
  sub->add_option("--jobs", a->jobs, "override the worker count")->check(CLI::PositiveNumber);
}

RunConfig resolve_config(const CLI::App* sub, const CommonArgs& a) {
  RunConfig cfg;
  if (!a.config.empty()) {
    cfg = load_run_config(a.config);
  } else if (a.task == "cartpole") {
    cfg = RunConfig::cartpole_defaults();
  } else if (a.task == "quadrotor") {
    cfg = RunConfig::quadrotor_defaults();
  } else {
    throw std::runtime_error("unknown task '" + a.task + "' (expected cartpole or quadrotor)");
  }
  if (sub->count("--seed") > 0) cfg.seed = a.seed;
  if (!a.out.empty()) cfg.paths.out_dir = a.out;
  if (a.jobs > 0) cfg.jobs = a.jobs;
  fs::create_directories(cfg.paths.out_dir);
  return cfg;
}

void require_artifact(const std::string& path, const std::string& producer) {
  if (!fs::exists(path))
    throw std::runtime_error("missing artifact " + path + " (run 'trajtopo " + producer +
                             "' first)");
}

QuadrotorEnvironment make_environment(const std::string& name) {
  if (name == "single") return QuadrotorEnvironment::single_cylinder();
  if (name == "three") return QuadrotorEnvironment::three_cylinders();
  throw std::runtime_error("unknown environment '" + name + "' (expected single or three)");
}

ClusterPipelineOptions pipeline_options(const RunConfig& cfg, int state_dim) {
  ClusterPipelineOptions opts;
  opts.cluster = cfg.cluster;
  opts.weights = cfg.embedding.scaling_weights(state_dim);
  opts.embed = cfg.embedding.embed_options();
  opts.connect_endpoints = cfg.embedding.connect_endpoints;
  opts.filtration_T = cfg.embedding.filtration_T;
  opts.jobs = cfg.jobs;
  return opts;
}

std::vector<DatasetRecord> read_dataset(const RunConfig& cfg) {
  const std::string path = cfg.paths.resolve(cfg.paths.dataset);
  require_artifact(path, "generate");
  std::vector<DatasetRecord> records = read_dataset_jsonl(path);
  if (records.empty()) throw std::runtime_error("dataset " + path + " has no records");
  return records;
}

int cmd_toy(const RunConfig& cfg) {
  ClusterPipelineOptions opts;
  opts.cluster = cfg.cluster;
  opts.weights = ScalingWeights::defaults(4, 2);
  opts.connect_endpoints = true;
  for (const bool touching : {true, false}) {
    const char* name = touching ? "touching" : "crossing";
    auto [up, down] = toy_sine_pair(touching);
    const ClusterResult res = cluster_dataset({up, down}, opts);
    const int retained =
        retained_h1_count(res.diagram.h1_lifetimes(), cfg.cluster.cutoff_ratio,
                          cfg.cluster.min_lifetime);
    auto [up5, down5] = toy_sine_pair(touching, 5);
    const ClusterResult coarse = cluster_dataset({up5, down5}, opts);
    const int retained5 =
        retained_h1_count(coarse.diagram.h1_lifetimes(), cfg.cluster.cutoff_ratio,
                          cfg.cluster.min_lifetime);
    const std::string path = cfg.paths.resolve(std::string("toy_") + name + "_diagram.json");
    write_diagram_json(path, res.diagram);
    std::cout << name << " pair: retained H1 = " << retained
              << ", separating distance = " << res.separating_distance
              << ", retained H1 at T=5 = " << retained5 << "\n";
    std::cout << "wrote " << path << "\n";
  }
  return 0;
}

int cmd_generate(const RunConfig& cfg, const std::string& env_name) {
  SampleSpec spec = (cfg.task == "cartpole") ? SampleSpec::cartpole_defaults()
                                             : SampleSpec::quadrotor_defaults();
  spec.count = cfg.datagen.count;
  spec.solutions_per_start = cfg.datagen.solutions_per_start;
  spec.control_seed_range = cfg.datagen.control_seed_range;
  spec.control_noise_sigma = cfg.datagen.control_noise_sigma;
  spec.max_retries = cfg.datagen.max_retries;
  spec.seed = cfg.seed;
  spec.jobs = cfg.jobs;
  const std::vector<DatasetRecord> records =
      (cfg.task == "cartpole") ? generate_cartpole(spec)
                               : generate_quadrotor(spec, make_environment(env_name));
  if (records.empty()) throw std::runtime_error("no converged solutions; nothing to write");
  const std::string path = cfg.paths.resolve(cfg.paths.dataset);
  write_dataset_jsonl(path, records);
  std::cout << "wrote " << records.size() << " " << cfg.task << " records to " << path << "\n";
  return 0;
}

int cmd_persist(const RunConfig& cfg) {
  const std::vector<DatasetRecord> records = read_dataset(cfg);
  const std::vector<Trajectory> trajs = dataset_trajectories(records);
  const int state_dim = static_cast<int>(trajs.front().states.front().size());
  const ClusterResult res = cluster_dataset(trajs, pipeline_options(cfg, state_dim));
  const std::string fpath = cfg.paths.resolve(cfg.paths.filtration);
  const std::string dpath = cfg.paths.resolve(cfg.paths.diagram);
  write_filtration_matrix(fpath, res.filtration);
  write_diagram_json(dpath, res.diagram);
  const int retained = retained_h1_count(res.diagram.h1_lifetimes(), cfg.cluster.cutoff_ratio,
                                         cfg.cluster.min_lifetime);
  std::cout << trajs.size() << " trajectories, " << res.filtration.size()
            << " filtration points\n";
  std::cout << "retained H1 = " << retained
            << ", separating distance = " << res.separating_distance << "\n";
  std::cout << "wrote " << fpath << "\n";
  std::cout << "wrote " << dpath << "\n";
  return 0;
}

int cmd_cluster(const RunConfig& cfg) {
  const std::vector<DatasetRecord> records = read_dataset(cfg);
  const std::vector<Trajectory> trajs = dataset_trajectories(records);
  const int state_dim = static_cast<int>(trajs.front().states.front().size());
  const ClusterResult res = cluster_dataset(trajs, pipeline_options(cfg, state_dim));
  const std::string lpath = cfg.paths.resolve(cfg.paths.labels);
  const std::string dpath = cfg.paths.resolve(cfg.paths.diagram);
  const std::string fpath = cfg.paths.resolve(cfg.paths.filtration);
  write_labels_json(lpath, res.labels);
  write_diagram_json(dpath, res.diagram);
  write_filtration_matrix(fpath, res.filtration);
  std::vector<int> sizes(res.labels.k, 0);
  for (const int label : res.labels.labels) ++sizes[label];
  std::cout << "k = " << res.labels.k << ", class sizes:";
  for (const int s : sizes) std::cout << " " << s;
  std::cout << "\n";
  std::cout << "wrote " << lpath << "\n";
  std::cout << "wrote " << dpath << "\n";
  std::cout << "wrote " << fpath << "\n";
  return 0;
}

int cmd_train(const RunConfig& cfg) {
  const std::vector<DatasetRecord> records = read_dataset(cfg);
  const std::string lpath = cfg.paths.resolve(cfg.paths.labels);
  require_artifact(lpath, "cluster");
  const ClusterLabels labels = read_labels_json(lpath);
  if (labels.labels.size() != records.size())
    throw std::runtime_error("labels " + lpath + " cover " +
                             std::to_string(labels.labels.size()) + " records, dataset has " +
                             std::to_string(records.size()));
  const WarmStartModels models =
      train_warm_start_models(records, labels.labels, labels.k, cfg);
  const std::string mpath = cfg.paths.resolve(cfg.paths.mlp_model);
  const std::string kpath = cfg.paths.resolve(cfg.paths.knn_model);
  const std::string opath = cfg.paths.resolve(cfg.paths.moe_model);
  save_mlp_regressor(mpath, models.mlp);
  save_knn_model(kpath, models.knn);
  save_moe_model(opath, models.moe);
  int moe_params = models.moe.gating.parameter_count();
  for (const Mlp& e : models.moe.experts) moe_params += e.parameter_count();
  std::cout << "mlp: " << models.mlp.net.parameter_count() << " parameters\n";
  std::cout << "knn: k = " << models.knn.k << ", " << models.knn.inputs.rows() << " samples\n";
  std::cout << "moe: " << models.moe.k << " experts, " << moe_params << " parameters\n";
  std::cout << "wrote " << mpath << "\n";
  std::cout << "wrote " << kpath << "\n";
  std::cout << "wrote " << opath << "\n";
  return 0;
}

int cmd_bench(const RunConfig& cfg, const std::string& env_name) {
  const std::string mpath = cfg.paths.resolve(cfg.paths.mlp_model);
  const std::string kpath = cfg.paths.resolve(cfg.paths.knn_model);
  const std::string opath = cfg.paths.resolve(cfg.paths.moe_model);
  require_artifact(mpath, "train");
  require_artifact(kpath, "train");
  require_artifact(opath, "train");
  WarmStartModels models;
  models.mlp = load_mlp_regressor(mpath);
  models.knn = load_knn_model(kpath);
  models.moe = load_moe_model(opath);
  const BenchmarkReport report = run_benchmark(cfg, make_environment(env_name), models);
  const std::string jpath = cfg.paths.resolve(cfg.paths.report_json);
  const std::string cpath = cfg.paths.resolve(cfg.paths.report_csv);
  write_benchmark_json(jpath, report);
  write_benchmark_csv(cpath, report);
  std::printf("%-6s %10s %13s %18s %18s\n", "method", "successes", "success rate",
              "iterations", "final cost");
  for (const MethodStats& s : report.stats) {
    std::printf("%-6s %6d/%-3d %13.3f %10.2f +- %5.2f %10.3f +- %6.3f\n", s.method.c_str(),
                s.successes, report.instances, s.success_rate, s.iterations_mean,
                s.iterations_std, s.final_cost_mean, s.final_cost_std);
  }
  std::cout << "wrote " << jpath << "\n";
  std::cout << "wrote " << cpath << "\n";
  return 0;
}

int cmd_scale(const RunConfig& cfg) {
  const std::vector<DatasetRecord> records = read_dataset(cfg);
  const std::vector<Trajectory> trajs = dataset_trajectories(records);
  const std::vector<ScalingRow> rows = scalability_study(
      trajs, cfg.bench.scaling_N, cfg.bench.scaling_T, cfg.embedding, cfg.cluster, cfg.jobs);
  const std::string path = cfg.paths.resolve(cfg.paths.scaling_csv);
  write_scaling_csv(path, rows);
  std::vector<std::pair<double, double>> xy;
  for (const ScalingRow& r : rows)
    if (r.n >= 2) xy.emplace_back(r.points, r.filtration_seconds);
  for (const ScalingRow& r : rows)
    std::printf("N=%-4d T=%-3d points=%-6d filtration=%.6fs persistence=%.6fs H1=%d\n", r.n,
                r.t, r.points, r.filtration_seconds, r.persistence_seconds, r.h1_retained);
  if (xy.size() >= 2) {
    const PowerFit fit = fit_loglog(xy);
    std::printf("filtration time ~ points^%.3f (R^2 = %.4f)\n", fit.slope, fit.r2);
  }
  std::cout << "wrote " << path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"topological clustering and warm-start benchmarking for trajectory datasets"};
  app.require_subcommand(1);

  CommonArgs args;
  std::string env_name = "single";

  CLI::App* toy = app.add_subcommand("toy", "run the sine-pair sanity example");
  add_common(toy, &args);
  CLI::App* generate = app.add_subcommand("generate", "solve instances into a dataset");
  add_common(generate, &args);
  generate->add_option("--env", env_name, "quadrotor obstacles: single | three");
  CLI::App* persist = app.add_subcommand("persist", "compute the filtration and diagram");
  add_common(persist, &args);
  CLI::App* cluster = app.add_subcommand("cluster", "label the dataset by topological class");
  add_common(cluster, &args);
  CLI::App* train = app.add_subcommand("train", "fit the warm-start models");
  add_common(train, &args);
  CLI::App* bench = app.add_subcommand("bench", "compare warm starts on fresh instances");
  add_common(bench, &args);
  bench->add_option("--env", env_name, "quadrotor obstacles: single | three");
  CLI::App* scale = app.add_subcommand("scale", "time the filtration across dataset sizes");
  add_common(scale, &args);

  CLI11_PARSE(app, argc, argv);

  try {
    const CLI::App* sub = app.get_subcommands().front();
    const RunConfig cfg = resolve_config(sub, args);
    if (sub == toy) return cmd_toy(cfg);
    if (sub == generate) return cmd_generate(cfg, env_name);
    if (sub == persist) return cmd_persist(cfg);
    if (sub == cluster) return cmd_cluster(cfg);
    if (sub == train) return cmd_train(cfg);
    if (sub == bench) return cmd_bench(cfg, env_name);
    if (sub == scale) return cmd_scale(cfg);
    throw std::logic_error("unhandled subcommand");
  } catch (const std::exception& e) {
    std::cerr << "trajtopo: " << e.what() << "\n";
    return 1;
  }
}
