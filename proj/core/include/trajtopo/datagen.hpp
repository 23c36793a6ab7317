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

#ifndef TRAJTOPO_DATAGEN_HPP
#define TRAJTOPO_DATAGEN_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "trajtopo/geometry.hpp"
#include "trajtopo/ocp.hpp"

namespace trajtopo {

/// Planar sine-wave example pair on x in [0, 2pi] with 4-D states
/// (x, y, xdot = 1, ydot). `touching`: y = +/- sin^2(x), the two curves meet
/// tangentially (equal velocities) at x = 0, pi, 2pi. Otherwise y = +/-
/// sin(x): the position crossings have opposite velocities, so the state
/// curves are disjoint. t_knots must be odd so that pi lies on a knot.
std::pair<Trajectory, Trajectory> toy_sine_pair(bool touching, int t_knots = 41);

/// Sampling plan for offline dataset generation.
struct SampleSpec {
  std::string task = "cartpole";       // "cartpole" | "quadrotor"
  Eigen::VectorXd start_lo, start_hi;  // uniform start-state box
  int count = 10;                      // start states (cartpole) / records (quadrotor)
  int solutions_per_start = 10;        // converged solutions kept per start (cartpole)
  double control_seed_range = 1.0;     // cartpole seeds uniform in +/- this
  double control_noise_sigma = 0.1;    // quadrotor hover-noise std dev
  int max_retries = 20;                // fresh seeds per instance before skipping
  std::uint64_t seed = 0;
  int jobs = 1;

  static SampleSpec cartpole_defaults();
  static SampleSpec quadrotor_defaults();
};

/// Obstacle course shared by dataset generation and benchmarking.
struct QuadrotorEnvironment {
  Eigen::Vector3d goal{1.75, 1.75, 1.75};
  ObstacleSet obstacles;

  /// One vertical cylinder at the origin blocking the start-goal diagonal.
  static QuadrotorEnvironment single_cylinder();
  /// Three axis-aligned cylinders intersecting at the origin.
  static QuadrotorEnvironment three_cylinders();
};

struct SolveMeta {
  int iterations = 0;
  bool converged = false;
  double final_cost = 0.0;
};

struct DatasetRecord {
  Trajectory traj;
  SolveMeta meta;
  int label = -1;  // cluster id; -1 before clustering
};

/// JSON-lines dataset: one record per line with fixed key order, so equal
/// records serialize to identical bytes. Malformed lines throw.
void write_dataset_jsonl(const std::string& path, const std::vector<DatasetRecord>& records);
std::vector<DatasetRecord> read_dataset_jsonl(const std::string& path);

std::vector<Trajectory> dataset_trajectories(const std::vector<DatasetRecord>& records);

/// Samples starts in the spec box, seeds controls uniformly at random, rolls
/// them out for a dynamically consistent initial guess, and keeps converged
/// swing-up solves: spec.solutions_per_start records per start, each retried
/// with fresh seeds at most spec.max_retries times, then skipped.
std::vector<DatasetRecord> generate_cartpole(const SampleSpec& spec);

struct RrtOptions {
  double step = 0.15;                  // extension step length
  double collision_resolution = 0.02;  // edge sampling interval
  int max_nodes = 20000;               // total nodes across both trees
  int shortcut_iterations = 100;
  Eigen::Vector3d sample_lo{-4.0, -4.0, -4.0};
  Eigen::Vector3d sample_hi{3.0, 3.0, 3.0};
  std::uint64_t seed = 0;
};

/// Bidirectional RRT with the connect heuristic in translation space, then
/// shortcut smoothing. Endpoints are returned exactly. Throws
/// std::runtime_error when no path is found within the node budget and
/// std::invalid_argument when start or goal is already in collision.
std::vector<Eigen::Vector3d> rrt_connect(const Eigen::Vector3d& start,
                                         const Eigen::Vector3d& goal,
                                         const ObstacleSet& obstacles, const RrtOptions& opts);

/// Full quadrotor state seed from a translation path: arc-length uniform
/// knots, level attitude, finite-difference linear velocities.
std::vector<Eigen::VectorXd> lift_path_to_states(const std::vector<Eigen::Vector3d>& path,
                                                 int t_knots, double dt);

/// Samples collision-free starts, seeds states from an RRT-Connect path and
/// controls from hover plus Gaussian noise, and keeps converged solves whose
/// knot points are all collision-free.
std::vector<DatasetRecord> generate_quadrotor(const SampleSpec& spec,
                                              const QuadrotorEnvironment& env);

}  // namespace trajtopo

#endif  // TRAJTOPO_DATAGEN_HPP
