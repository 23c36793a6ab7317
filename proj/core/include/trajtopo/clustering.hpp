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

#ifndef TRAJTOPO_CLUSTERING_HPP
#define TRAJTOPO_CLUSTERING_HPP

#include <Eigen/Dense>
#include <vector>

#include "trajtopo/geometry.hpp"
#include "trajtopo/persistence.hpp"

namespace trajtopo {

struct ClusterConfig {
  double cutoff_ratio = 0.8;   // in (0, 1]
  double min_lifetime = 0.1;   // >= 0
};

struct TrajectoryDistanceMatrix {
  Eigen::MatrixXd d;  // symmetric, zero diagonal

  int size() const { return static_cast<int>(d.rows()); }
};

struct ClusterLabels {
  std::vector<int> labels;  // values in [0, k)
  int k = 0;
};

/// Number of classes from the H1 lifetimes of `diag` (half-life rule + 1).
/// Result is in [1, |H1| + 1].
int extract_num_classes(const PersistenceDiagram& diag, const ClusterConfig& cfg);

/// Max over segments of one trajectory of the min post-processed segment
/// distance to the other, symmetrized by taking the larger directed value.
/// Throws std::invalid_argument on state-dimension mismatch.
double pairwise_trajectory_distance(const Trajectory& t1, const Trajectory& t2,
                                    bool connect_endpoints);

/// All-pairs pairwise_trajectory_distance, computed as a parallel map.
TrajectoryDistanceMatrix trajectory_distance_matrix(const std::vector<Trajectory>& trajs,
                                                    bool connect_endpoints, int jobs = 1);

/// Single-linkage agglomeration to k clusters (equivalently: cut the k-1
/// largest minimum-spanning-tree edges). Equal distances merge in
/// lexicographically smallest (i, j) order; cluster ids are assigned by
/// ascending smallest member index. Throws std::invalid_argument when
/// k < 1 or k > N.
ClusterLabels single_linkage(const TrajectoryDistanceMatrix& m, int k);

struct ClusterPipelineOptions {
  ClusterConfig cluster;
  ScalingWeights weights;
  EmbedOptions embed;
  bool connect_endpoints = false;
  int filtration_T = 0;  // >= 2: resample before filtration; 0: keep as-is
  int jobs = 1;
};

struct ClusterResult {
  ClusterLabels labels;
  PersistenceDiagram diagram;
  TrajectoryDistanceMatrix distances;
  FiltrationMatrix filtration;
  int num_classes = 0;
  double separating_distance = 0.0;
};

/// End-to-end pipeline: (resample) -> embed -> filtration matrix -> Rips
/// persistence -> class count -> pairwise distances -> single linkage.
/// Throws std::invalid_argument for datasets of fewer than 2 trajectories.
ClusterResult cluster_dataset(const std::vector<Trajectory>& trajs,
                              const ClusterPipelineOptions& opts);

}  // namespace trajtopo

#endif  // TRAJTOPO_CLUSTERING_HPP
