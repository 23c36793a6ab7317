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

#include "trajtopo/bench.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>

#include <json.hpp>

#include "trajtopo/parallel.hpp"
#include "trajtopo/solver.hpp"

namespace trajtopo {

namespace {

/// SplitMix64 step; the xor tag keeps benchmark instances on a different
/// substream family than dataset generation under the same user seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
constexpr std::uint64_t kBenchStreamTag = 0x62656e6368ULL;  // "bench"

bool collision_free_states(const ObstacleSet& obstacles,
                           const std::vector<Eigen::VectorXd>& X) {
  for (const auto& x : X)
    for (const auto& c : obstacles.cylinders)
      if (c.signed_distance(x.head<3>()) <= 0.0) return false;
  return true;
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v, double mean) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return std::sqrt(s / static_cast<double>(v.size()));
}

}  // namespace

std::string method_name(WarmStartMethod m) {
  switch (m) {
    case WarmStartMethod::kCold: return "cold";
    case WarmStartMethod::kMlp: return "mlp";
    case WarmStartMethod::kKnn: return "knn";
    case WarmStartMethod::kMoe: return "moe";
  }
  throw std::invalid_argument("unknown warm-start method");
}

std::pair<std::vector<Eigen::VectorXd>, std::vector<Eigen::VectorXd>> cold_start(
    const OCProblem& p) {
  validate_problem(p);
  std::vector<Eigen::VectorXd> X(p.T, p.x0);
  std::vector<Eigen::VectorXd> U(p.T - 1, p.cost.u_ref);
  return {std::move(X), std::move(U)};
}

WarmStartData warm_start_training_data(const std::vector<DatasetRecord>& records) {
  if (records.empty()) throw std::invalid_argument("empty dataset");
  WarmStartData data;
  data.shape.state_dim = records.front().traj.state_dim();
  data.shape.control_dim = records.front().traj.control_dim();
  data.shape.horizon = records.front().traj.length();
  const int n = static_cast<int>(records.size());
  data.inputs.resize(n, data.shape.state_dim);
  data.targets.resize(n, data.shape.flat_dim());
  for (int i = 0; i < n; ++i) {
    const auto& traj = records[i].traj;
    if (traj.state_dim() != data.shape.state_dim ||
        traj.control_dim() != data.shape.control_dim ||
        traj.length() != data.shape.horizon)
      throw std::invalid_argument("dataset records disagree on trajectory shape");
    data.inputs.row(i) = traj.start.transpose();
    data.targets.row(i) = flatten_warm_start(traj.states, traj.controls).transpose();
  }
  return data;
}

WarmStartModels train_warm_start_models(const std::vector<DatasetRecord>& records,
                                        const std::vector<int>& labels, int k,
                                        const RunConfig& cfg) {
  const WarmStartData data = warm_start_training_data(records);
  const int n = static_cast<int>(records.size());
  if (static_cast<int>(labels.size()) != n)
    throw std::invalid_argument("labels size must match dataset size");
  const SplitIndices splits = make_splits(n, cfg.seed);
  const TrainOptions train_opts = cfg.train.train_options(cfg.seed);

  WarmStartModels models;

  const Eigen::MatrixXd in_train = take_rows(data.inputs, splits.train);
  const Eigen::MatrixXd out_train = take_rows(data.targets, splits.train);
  const Eigen::MatrixXd in_val = take_rows(data.inputs, splits.val);
  const Eigen::MatrixXd out_val = take_rows(data.targets, splits.val);

  const Standardizer in_norm = Standardizer::fit(in_train);
  const Standardizer out_norm = Standardizer::fit(out_train);
  const Eigen::MatrixXd in_train_n = in_norm.apply_rows(in_train);
  const Eigen::MatrixXd out_train_n = out_norm.apply_rows(out_train);
  const Eigen::MatrixXd in_val_n = in_norm.apply_rows(in_val);
  const Eigen::MatrixXd out_val_n = out_norm.apply_rows(out_val);

  models.mlp.net = make_mlp(
      {data.shape.state_dim, cfg.train.mlp_hidden, data.shape.flat_dim()}, cfg.seed);
  train_mlp(models.mlp.net, in_train_n, out_train_n, in_val_n, out_val_n, train_opts);
  models.mlp.in_norm = in_norm;
  models.mlp.out_norm = out_norm;
  models.mlp.shape = data.shape;

  models.knn.inputs = in_train_n;
  models.knn.targets = out_train;
  models.knn.in_norm = in_norm;
  models.knn.k = knn_select_k(in_train_n, out_train, in_val_n, out_val, cfg.train.knn_k_max);
  models.knn.shape = data.shape;

  MoeOptions moe_opts;
  moe_opts.expert_hidden = cfg.train.expert_hidden;
  moe_opts.gating_hidden = cfg.train.gating_hidden;
  moe_opts.train = train_opts;
  models.moe = train_moe(data.inputs, data.targets, labels, k, splits, data.shape, moe_opts);
  return models;
}

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

BenchmarkReport run_benchmark(const RunConfig& cfg, const QuadrotorEnvironment& env,
                              const WarmStartModels& models) {
  if (cfg.bench.instances < 1) throw std::invalid_argument("bench.instances must be >= 1");
  const bool quadrotor = cfg.task == "quadrotor";
  if (!quadrotor && cfg.task != "cartpole")
    throw std::invalid_argument("unknown task '" + cfg.task + "'");
  const SampleSpec box =
      quadrotor ? SampleSpec::quadrotor_defaults() : SampleSpec::cartpole_defaults();

  BenchmarkReport report;
  report.task = cfg.task;
  report.instances = cfg.bench.instances;
  RunConfig hashed = cfg;
  hashed.paths = RunPaths{};  // where artifacts live does not change the run
  hashed.jobs = 1;
  report.config_hash = fnv1a64(run_config_to_json(hashed));
  report.records.resize(static_cast<std::size_t>(cfg.bench.instances) * kNumWarmStartMethods);

  parallel_for(cfg.bench.instances, cfg.jobs, [&](int i) {
    std::mt19937_64 rng(mix_seed(cfg.seed ^ kBenchStreamTag, static_cast<std::uint64_t>(i)));
    Eigen::VectorXd x0(box.start_lo.size());
    for (int tries = 0;; ++tries) {
      for (Eigen::Index d = 0; d < x0.size(); ++d) {
        std::uniform_real_distribution<double> dist(box.start_lo(d), box.start_hi(d));
        x0(d) = dist(rng);
      }
      if (!quadrotor || collision_free_states(env.obstacles, {x0})) break;
      if (tries > 200) throw std::runtime_error("no collision-free benchmark start found");
    }
    const OCProblem p = quadrotor
                            ? make_quadrotor_problem(x0, env.goal, env.obstacles)
                            : make_cartpole_problem(x0);

    for (int m = 0; m < kNumWarmStartMethods; ++m) {
      const auto method = static_cast<WarmStartMethod>(m);
      std::vector<Eigen::VectorXd> X, U;
      switch (method) {
        case WarmStartMethod::kCold:
          std::tie(X, U) = cold_start(p);
          break;
        case WarmStartMethod::kMlp:
          std::tie(X, U) =
              unflatten_warm_start(regressor_predict(models.mlp, x0), models.mlp.shape);
          break;
        case WarmStartMethod::kKnn:
          std::tie(X, U) =
              unflatten_warm_start(knn_model_predict(models.knn, x0), models.knn.shape);
          break;
        case WarmStartMethod::kMoe:
          std::tie(X, U) = moe_predict(models.moe, x0);
          break;
      }
      const SolverResult res = solve(p, X, U, cfg.solver);

      SolveRecord rec;
      rec.instance = i;
      rec.method = method;
      rec.converged = res.converged;
      rec.collision_free = quadrotor ? collision_free_states(env.obstacles, res.X) : true;
      rec.iterations = res.iterations;
      rec.final_cost = res.final_cost();
      rec.success = rec.converged && rec.collision_free &&
                    rec.final_cost < cfg.bench.success_cost_threshold;
      rec.cost_trace = res.cost_trace;
      rec.time_trace = res.time_trace;
      report.records[static_cast<std::size_t>(i) * kNumWarmStartMethods + m] = std::move(rec);
    }
  });

  report.stats = aggregate_records(report.records, report.instances);
  return report;
}

std::array<MethodStats, kNumWarmStartMethods> aggregate_records(
    const std::vector<SolveRecord>& records, int instances) {
  std::array<MethodStats, kNumWarmStartMethods> stats;
  for (int m = 0; m < kNumWarmStartMethods; ++m) {
    MethodStats& s = stats[m];
    s.method = method_name(static_cast<WarmStartMethod>(m));
    std::vector<double> iters, costs;
    for (const auto& rec : records) {
      if (static_cast<int>(rec.method) != m || !rec.success) continue;
      iters.push_back(static_cast<double>(rec.iterations));
      costs.push_back(rec.final_cost);
    }
    s.successes = static_cast<int>(iters.size());
    s.success_rate = instances > 0 ? static_cast<double>(s.successes) / instances : 0.0;
    s.iterations_mean = mean_of(iters);
    s.iterations_std = std_of(iters, s.iterations_mean);
    s.final_cost_mean = mean_of(costs);
    s.final_cost_std = std_of(costs, s.final_cost_mean);
  }
  return stats;
}

std::string benchmark_report_to_json(const BenchmarkReport& report) {
  nlohmann::ordered_json j;
  j["task"] = report.task;
  j["instances"] = report.instances;
  j["config_hash"] = report.config_hash;
  j["stats"] = nlohmann::ordered_json::array();
  for (const auto& s : report.stats)
    j["stats"].push_back({{"method", s.method},
                          {"successes", s.successes},
                          {"success_rate", s.success_rate},
                          {"iterations_mean", s.iterations_mean},
                          {"iterations_std", s.iterations_std},
                          {"final_cost_mean", s.final_cost_mean},
                          {"final_cost_std", s.final_cost_std}});
  j["records"] = nlohmann::ordered_json::array();
  for (const auto& r : report.records)
    j["records"].push_back({{"instance", r.instance},
                            {"method", method_name(r.method)},
                            {"converged", r.converged},
                            {"collision_free", r.collision_free},
                            {"success", r.success},
                            {"iterations", r.iterations},
                            {"final_cost", r.final_cost},
                            {"cost_trace", r.cost_trace},
                            {"time_trace", r.time_trace}});
  return j.dump(2) + "\n";
}

void write_benchmark_json(const std::string& path, const BenchmarkReport& report) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("open for write failed: " + path);
  out << benchmark_report_to_json(report);
  if (!out) throw std::runtime_error("write failed: " + path);
}

void write_benchmark_csv(const std::string& path, const BenchmarkReport& report) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("open for write failed: " + path);
  out << "method,instance,iteration,cost,elapsed_seconds\n";
  char line[128];
  for (const auto& r : report.records)
    for (std::size_t it = 0; it < r.cost_trace.size(); ++it) {
      const double elapsed = it < r.time_trace.size() ? r.time_trace[it] : 0.0;
      std::snprintf(line, sizeof(line), "%s,%d,%zu,%.17g,%.17g\n",
                    method_name(r.method).c_str(), r.instance, it, r.cost_trace[it], elapsed);
      out << line;
    }
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<ScalingRow> scalability_study(const std::vector<Trajectory>& base,
                                          const std::vector<int>& Ns,
                                          const std::vector<int>& Ts,
                                          const EmbedConfig& embedding,
                                          const ClusterConfig& cluster, int jobs) {
  if (base.empty() || Ns.empty() || Ts.empty())
    throw std::invalid_argument("scalability_study needs data and size lists");
  int max_n = 0;
  for (int n : Ns) {
    if (n < 1) throw std::invalid_argument("N values must be >= 1");
    max_n = std::max(max_n, n);
  }
  if (max_n > static_cast<int>(base.size()))
    throw std::invalid_argument("base dataset smaller than the largest N");

  const EmbedOptions embed_opts = embedding.embed_options();
  const ScalingWeights weights = embedding.scaling_weights(base.front().state_dim());

  auto timed = [](auto&& fn) {
    // Repeat fast measurements until ~20 ms accumulates so small sizes are
    // not pure clock overhead.
    double acc = 0.0;
    int reps = 0;
    do {
      const auto t0 = std::chrono::steady_clock::now();
      fn();
      acc += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      ++reps;
    } while (acc < 0.02 && reps < 64);
    return acc / reps;
  };

  std::vector<ScalingRow> rows;
  for (int t : Ts) {
    std::vector<Trajectory> embedded(max_n);
    for (int i = 0; i < max_n; ++i)
      embedded[i] = embed(resample(base[i], t), weights, embed_opts);
    for (int n : Ns) {
      const std::vector<Trajectory> subset(embedded.begin(), embedded.begin() + n);
      ScalingRow row;
      row.n = n;
      row.t = t;
      row.points = n * (t - 1);
      FiltrationMatrix m;
      row.filtration_seconds =
          timed([&] { m = build_filtration_matrix(subset, embedding.connect_endpoints, jobs); });
      PersistenceDiagram diag;
      row.persistence_seconds = timed([&] { diag = rips_persistence(m); });
      row.h1_retained =
          retained_h1_count(diag.h1_lifetimes(), cluster.cutoff_ratio, cluster.min_lifetime);
      rows.push_back(row);
    }
  }
  return rows;
}

void write_scaling_csv(const std::string& path, const std::vector<ScalingRow>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("open for write failed: " + path);
  out << "n,t,points,filtration_seconds,persistence_seconds,h1_retained\n";
  char line[160];
  for (const auto& r : rows) {
    std::snprintf(line, sizeof(line), "%d,%d,%d,%.17g,%.17g,%d\n", r.n, r.t, r.points,
                  r.filtration_seconds, r.persistence_seconds, r.h1_retained);
    out << line;
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

PowerFit fit_loglog(const std::vector<std::pair<double, double>>& xy) {
  if (xy.size() < 2) throw std::invalid_argument("fit needs >= 2 points");
  const int n = static_cast<int>(xy.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& [x, y] : xy) {
    if (x <= 0.0 || y <= 0.0) throw std::invalid_argument("log-log fit needs positive data");
    const double lx = std::log(x);
    const double ly = std::log(y);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    syy += ly * ly;
  }
  PowerFit fit;
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw std::invalid_argument("degenerate abscissae");
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;
  double ss_res = 0.0;
  const double mean_y = sy / n;
  double ss_tot = 0.0;
  for (const auto& [x, y] : xy) {
    const double pred = fit.intercept + fit.slope * std::log(x);
    ss_res += (std::log(y) - pred) * (std::log(y) - pred);
    ss_tot += (std::log(y) - mean_y) * (std::log(y) - mean_y);
  }
  fit.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

}  // namespace trajtopo
