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

#include "trajtopo/datagen.hpp"

#include <cmath>
#include <fstream>
#include <optional>
#include <random>
#include <stdexcept>

#include <json.hpp>

#include "trajtopo/parallel.hpp"
#include "trajtopo/solver.hpp"

namespace trajtopo {

namespace {

Trajectory sine_trajectory(int t_knots, double sign, bool squared) {
  Trajectory traj;
  traj.dt = 2.0 * M_PI / (t_knots - 1);
  for (int k = 0; k < t_knots; ++k) {
    const double x = k * traj.dt;
    Eigen::VectorXd s(4);
    if (squared) {
      const double sx = std::sin(x);
      s << x, sign * sx * sx, 1.0, sign * std::sin(2.0 * x);
    } else {
      s << x, sign * std::sin(x), 1.0, sign * std::cos(x);
    }
    traj.states.push_back(s);
    if (k + 1 < t_knots) traj.controls.push_back(Eigen::VectorXd::Zero(1));
  }
  traj.start = traj.states.front();
  traj.goal = traj.states.back();
  return traj;
}

/// SplitMix64 step; decorrelates per-instance RNG substreams.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Eigen::VectorXd sample_box(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                           std::mt19937_64& rng) {
  Eigen::VectorXd x(lo.size());
  for (Eigen::Index i = 0; i < lo.size(); ++i) {
    std::uniform_real_distribution<double> dist(lo(i), hi(i));
    x(i) = dist(rng);
  }
  return x;
}

void check_spec(const SampleSpec& spec, const std::string& task, int state_dim) {
  if (spec.task != task) throw std::invalid_argument("spec.task must be '" + task + "'");
  if (spec.start_lo.size() != state_dim || spec.start_hi.size() != state_dim)
    throw std::invalid_argument("start range dimension mismatch");
  if ((spec.start_lo.array() > spec.start_hi.array()).any())
    throw std::invalid_argument("start range has lo > hi");
  if (spec.count < 1 || spec.solutions_per_start < 1 || spec.max_retries < 1)
    throw std::invalid_argument("counts must be >= 1");
}

nlohmann::ordered_json vector_json(const Eigen::VectorXd& v) {
  nlohmann::ordered_json a = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Eigen::VectorXd vector_from_json(const nlohmann::json& a) {
  Eigen::VectorXd v(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) v(static_cast<Eigen::Index>(i)) = a[i].get<double>();
  return v;
}

bool collision_free_point(const ObstacleSet& obstacles, const Eigen::Vector3d& p) {
  for (const auto& c : obstacles.cylinders)
    if (c.signed_distance(p) <= 0.0) return false;
  return true;
}

bool collision_free_edge(const ObstacleSet& obstacles, const Eigen::Vector3d& a,
                         const Eigen::Vector3d& b, double resolution) {
  const double len = (b - a).norm();
  const int steps = std::max(1, static_cast<int>(std::ceil(len / resolution)));
  for (int i = 0; i <= steps; ++i) {
    const double t = static_cast<double>(i) / steps;
    if (!collision_free_point(obstacles, a + t * (b - a))) return false;
  }
  return true;
}

}  // namespace

std::pair<Trajectory, Trajectory> toy_sine_pair(bool touching, int t_knots) {
  if (t_knots < 3 || t_knots % 2 == 0)
    throw std::invalid_argument("t_knots must be odd and >= 3");
  return {sine_trajectory(t_knots, 1.0, touching), sine_trajectory(t_knots, -1.0, touching)};
}

SampleSpec SampleSpec::cartpole_defaults() {
  SampleSpec spec;
  spec.task = "cartpole";
  spec.start_lo = Eigen::Vector4d(-1.0, -M_PI, -1.0, -0.5 * M_PI);
  spec.start_hi = -spec.start_lo;
  spec.count = 10;
  spec.solutions_per_start = 10;
  return spec;
}

SampleSpec SampleSpec::quadrotor_defaults() {
  SampleSpec spec;
  spec.task = "quadrotor";
  spec.start_lo = Eigen::VectorXd::Zero(12);
  spec.start_hi = Eigen::VectorXd::Zero(12);
  spec.start_lo.head<3>().setConstant(-3.25);
  spec.start_hi.head<3>().setConstant(-0.25);
  spec.count = 200;
  return spec;
}

QuadrotorEnvironment QuadrotorEnvironment::single_cylinder() {
  QuadrotorEnvironment env;
  env.obstacles.cylinders.push_back(Cylinder{2, Eigen::Vector3d::Zero(), 0.5});
  return env;
}

QuadrotorEnvironment QuadrotorEnvironment::three_cylinders() {
  QuadrotorEnvironment env;
  for (int axis : {0, 1, 2})
    env.obstacles.cylinders.push_back(Cylinder{axis, Eigen::Vector3d::Zero(), 0.5});
  return env;
}

void write_dataset_jsonl(const std::string& path, const std::vector<DatasetRecord>& records) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("open for write failed: " + path);
  for (const auto& r : records) {
    nlohmann::ordered_json j;
    nlohmann::ordered_json states = nlohmann::ordered_json::array();
    for (const auto& s : r.traj.states) states.push_back(vector_json(s));
    nlohmann::ordered_json controls = nlohmann::ordered_json::array();
    for (const auto& u : r.traj.controls) controls.push_back(vector_json(u));
    j["states"] = std::move(states);
    j["controls"] = std::move(controls);
    j["dt"] = r.traj.dt;
    j["start"] = vector_json(r.traj.start);
    j["goal"] = vector_json(r.traj.goal);
    if (r.label >= 0) j["label"] = r.label;
    j["solve_meta"] = {{"iterations", r.meta.iterations},
                       {"converged", r.meta.converged},
                       {"final_cost", r.meta.final_cost}};
    out << j.dump() << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<DatasetRecord> read_dataset_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("open for read failed: " + path);
  std::vector<DatasetRecord> records;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
    DatasetRecord r;
    for (const auto& s : j.at("states")) r.traj.states.push_back(vector_from_json(s));
    for (const auto& u : j.at("controls")) r.traj.controls.push_back(vector_from_json(u));
    r.traj.dt = j.at("dt").get<double>();
    r.traj.start = vector_from_json(j.at("start"));
    r.traj.goal = vector_from_json(j.at("goal"));
    if (j.contains("label")) r.label = j.at("label").get<int>();
    const auto& meta = j.at("solve_meta");
    r.meta.iterations = meta.at("iterations").get<int>();
    r.meta.converged = meta.at("converged").get<bool>();
    r.meta.final_cost = meta.at("final_cost").get<double>();
    r.traj.validate();
    if (!records.empty() && (r.traj.state_dim() != records.front().traj.state_dim() ||
                             r.traj.control_dim() != records.front().traj.control_dim()))
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": record dimensions differ from the first record");
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<Trajectory> dataset_trajectories(const std::vector<DatasetRecord>& records) {
  std::vector<Trajectory> trajs;
  trajs.reserve(records.size());
  for (const auto& r : records) trajs.push_back(r.traj);
  return trajs;
}

std::vector<DatasetRecord> generate_cartpole(const SampleSpec& spec) {
  check_spec(spec, "cartpole", 4);
  std::mt19937_64 start_rng(spec.seed);
  std::vector<Eigen::VectorXd> starts;
  for (int i = 0; i < spec.count; ++i)
    starts.push_back(sample_box(spec.start_lo, spec.start_hi, start_rng));

  const int instances = spec.count * spec.solutions_per_start;
  std::vector<std::optional<DatasetRecord>> slots(instances);
  parallel_for(instances, spec.jobs, [&](int idx) {
    const Eigen::VectorXd& x0 = starts[idx / spec.solutions_per_start];
    const OCProblem p = make_cartpole_problem(x0);
    std::mt19937_64 rng(mix_seed(spec.seed, static_cast<std::uint64_t>(idx)));
    std::uniform_real_distribution<double> seed_u(-spec.control_seed_range,
                                                  spec.control_seed_range);
    for (int attempt = 0; attempt < spec.max_retries; ++attempt) {
      std::vector<Eigen::VectorXd> U(p.T - 1);
      for (auto& u : U) u = Eigen::VectorXd::Constant(1, seed_u(rng));
      std::vector<Eigen::VectorXd> X(p.T);
      X[0] = p.x0;
      for (int t = 0; t + 1 < p.T; ++t) X[t + 1] = p.model->step(X[t], U[t]);
      const SolverResult res = solve(p, X, U);
      if (!res.converged) continue;
      DatasetRecord r;
      r.traj.states = res.X;
      r.traj.controls = res.U;
      r.traj.dt = p.model->dt();
      r.traj.start = x0;
      r.traj.goal = Eigen::VectorXd();
      r.meta = {res.iterations, true, res.final_cost()};
      slots[idx] = std::move(r);
      return;
    }
  });

  std::vector<DatasetRecord> records;
  for (auto& slot : slots)
    if (slot) records.push_back(std::move(*slot));
  return records;
}

std::vector<Eigen::Vector3d> rrt_connect(const Eigen::Vector3d& start,
                                         const Eigen::Vector3d& goal,
                                         const ObstacleSet& obstacles, const RrtOptions& opts) {
  if (!collision_free_point(obstacles, start) || !collision_free_point(obstacles, goal))
    throw std::invalid_argument("rrt_connect start and goal must be collision-free");

  struct Node {
    Eigen::Vector3d p;
    int parent;
  };
  std::array<std::vector<Node>, 2> trees;
  trees[0].push_back({start, -1});
  trees[1].push_back({goal, -1});
  std::mt19937_64 rng(opts.seed);

  auto nearest = [](const std::vector<Node>& tree, const Eigen::Vector3d& q) {
    int best = 0;
    double best_d = (tree[0].p - q).squaredNorm();
    for (int i = 1; i < static_cast<int>(tree.size()); ++i) {
      const double d = (tree[i].p - q).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    return best;
  };
  enum class Extend { kTrapped, kAdvanced, kReached };
  auto extend = [&](std::vector<Node>& tree, const Eigen::Vector3d& q) {
    const int near = nearest(tree, q);
    const Eigen::Vector3d from = tree[near].p;
    const double d = (q - from).norm();
    const Eigen::Vector3d to = d <= opts.step ? q : Eigen::Vector3d(from + opts.step / d * (q - from));
    if (!collision_free_edge(obstacles, from, to, opts.collision_resolution))
      return Extend::kTrapped;
    tree.push_back({to, near});
    return d <= opts.step ? Extend::kReached : Extend::kAdvanced;
  };

  int node_count = 2;
  int active = 0;
  std::vector<Eigen::Vector3d> path;
  while (node_count < opts.max_nodes) {
    const Eigen::Vector3d q_rand = sample_box(opts.sample_lo, opts.sample_hi, rng).head<3>();
    if (extend(trees[active], q_rand) != Extend::kTrapped) {
      ++node_count;
      const Eigen::Vector3d q_new = trees[active].back().p;
      Extend status = Extend::kAdvanced;
      while (status == Extend::kAdvanced && node_count < opts.max_nodes) {
        status = extend(trees[1 - active], q_new);
        if (status != Extend::kTrapped) ++node_count;
      }
      if (status == Extend::kReached) {
        // Walk both trees back to their roots and join at q_new.
        std::vector<Eigen::Vector3d> half;
        for (int i = static_cast<int>(trees[active].size()) - 1; i >= 0; i = trees[active][i].parent)
          half.push_back(trees[active][i].p);
        std::reverse(half.begin(), half.end());
        std::vector<Eigen::Vector3d> other;
        for (int i = static_cast<int>(trees[1 - active].size()) - 1; i >= 0;
             i = trees[1 - active][i].parent)
          other.push_back(trees[1 - active][i].p);
        path = std::move(half);
        path.insert(path.end(), other.begin(), other.end());
        if (active == 1) std::reverse(path.begin(), path.end());
        break;
      }
    }
    active = 1 - active;
  }
  if (path.empty()) throw std::runtime_error("rrt_connect: no path within the node budget");

  std::uniform_int_distribution<int> pick(0, 1 << 30);
  for (int iter = 0; iter < opts.shortcut_iterations && path.size() > 2; ++iter) {
    const int i = pick(rng) % (static_cast<int>(path.size()) - 1);
    const int j = i + 1 + pick(rng) % (static_cast<int>(path.size()) - i - 1);
    if (j <= i + 1) continue;
    if (collision_free_edge(obstacles, path[i], path[j], opts.collision_resolution))
      path.erase(path.begin() + i + 1, path.begin() + j);
  }
  return path;
}

std::vector<Eigen::VectorXd> lift_path_to_states(const std::vector<Eigen::Vector3d>& path,
                                                 int t_knots, double dt) {
  if (path.size() < 2) throw std::invalid_argument("path needs >= 2 points");
  if (t_knots < 2 || dt <= 0.0) throw std::invalid_argument("bad knot count or dt");
  std::vector<double> arc(path.size(), 0.0);
  for (std::size_t i = 1; i < path.size(); ++i)
    arc[i] = arc[i - 1] + (path[i] - path[i - 1]).norm();
  const double total = arc.back();

  std::vector<Eigen::Vector3d> knots(t_knots);
  for (int k = 0; k < t_knots; ++k) {
    const double s = total * k / (t_knots - 1);
    std::size_t seg = 1;
    while (seg + 1 < path.size() && arc[seg] < s) ++seg;
    const double span = arc[seg] - arc[seg - 1];
    const double t = span > 0.0 ? (s - arc[seg - 1]) / span : 0.0;
    knots[k] = path[seg - 1] + t * (path[seg] - path[seg - 1]);
  }
  knots.front() = path.front();
  knots.back() = path.back();

  std::vector<Eigen::VectorXd> states(t_knots, Eigen::VectorXd::Zero(12));
  for (int k = 0; k < t_knots; ++k) {
    states[k].head<3>() = knots[k];
    if (k == 0)
      states[k].segment<3>(6) = (knots[1] - knots[0]) / dt;
    else if (k == t_knots - 1)
      states[k].segment<3>(6) = (knots[k] - knots[k - 1]) / dt;
    else
      states[k].segment<3>(6) = (knots[k + 1] - knots[k - 1]) / (2.0 * dt);
  }
  return states;
}

std::vector<DatasetRecord> generate_quadrotor(const SampleSpec& spec,
                                              const QuadrotorEnvironment& env) {
  check_spec(spec, "quadrotor", 12);
  std::vector<std::optional<DatasetRecord>> slots(spec.count);
  parallel_for(spec.count, spec.jobs, [&](int idx) {
    std::mt19937_64 rng(mix_seed(spec.seed, static_cast<std::uint64_t>(idx)));
    Eigen::VectorXd x0;
    for (int tries = 0;; ++tries) {
      x0 = sample_box(spec.start_lo, spec.start_hi, rng);
      if (collision_free_point(env.obstacles, x0.head<3>())) break;
      if (tries > 200)
        throw std::runtime_error("could not sample a collision-free start state");
    }
    const OCProblem p = make_quadrotor_problem(x0, env.goal, env.obstacles);
    const auto* model = static_cast<const QuadrotorModel*>(p.model.get());
    const double hover = model->hover_thrust();
    std::normal_distribution<double> noise(0.0, spec.control_noise_sigma);

    for (int attempt = 0; attempt < spec.max_retries; ++attempt) {
      RrtOptions rrt;
      rrt.seed = rng();
      std::vector<Eigen::Vector3d> path;
      try {
        path = rrt_connect(x0.head<3>(), env.goal, env.obstacles, rrt);
      } catch (const std::runtime_error&) {
        continue;
      }
      std::vector<Eigen::VectorXd> X = lift_path_to_states(path, p.T, p.model->dt());
      X[0] = p.x0;
      std::vector<Eigen::VectorXd> U(p.T - 1);
      for (auto& u : U) {
        u = Eigen::VectorXd::Constant(4, hover);
        for (int i = 0; i < 4; ++i) u(i) += noise(rng);
        u = p.model->clamp_control(u);
      }
      const SolverResult res = solve(p, X, U);
      if (!res.converged) continue;
      bool collision_free = true;
      for (const auto& x : res.X)
        if (!collision_free_point(env.obstacles, x.head<3>())) {
          collision_free = false;
          break;
        }
      if (!collision_free) continue;
      DatasetRecord r;
      r.traj.states = res.X;
      r.traj.controls = res.U;
      r.traj.dt = p.model->dt();
      r.traj.start = x0;
      r.traj.goal = env.goal;
      r.meta = {res.iterations, true, res.final_cost()};
      slots[idx] = std::move(r);
      return;
    }
  });

  std::vector<DatasetRecord> records;
  for (auto& slot : slots)
    if (slot) records.push_back(std::move(*slot));
  return records;
}

}  // namespace trajtopo
