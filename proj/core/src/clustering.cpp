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

#include "trajtopo/clustering.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>
#include <tuple>

#include "trajtopo/parallel.hpp"

namespace trajtopo {

int extract_num_classes(const PersistenceDiagram& diag, const ClusterConfig& cfg) {
  if (!(cfg.cutoff_ratio > 0.0 && cfg.cutoff_ratio <= 1.0))
    throw std::invalid_argument("cutoff_ratio must be in (0, 1]");
  if (cfg.min_lifetime < 0.0) throw std::invalid_argument("min_lifetime must be >= 0");
  return 1 + retained_h1_count(diag.h1_lifetimes(), cfg.cutoff_ratio, cfg.min_lifetime);
}

double pairwise_trajectory_distance(const Trajectory& t1, const Trajectory& t2,
                                    bool connect_endpoints) {
  if (t1.state_dim() != t2.state_dim())
    throw std::invalid_argument("state dimension mismatch");
  const FiltrationMatrix m = build_filtration_matrix({t1, t2}, connect_endpoints, 1);
  const int n1 = t1.length() - 1;
  const int n2 = t2.length() - 1;
  const auto cross = m.d.block(0, n1, n1, n2);

  double directed12 = 0.0;
  for (int i = 0; i < n1; ++i) directed12 = std::max(directed12, cross.row(i).minCoeff());
  double directed21 = 0.0;
  for (int j = 0; j < n2; ++j) directed21 = std::max(directed21, cross.col(j).minCoeff());
  return std::max(directed12, directed21);
}

TrajectoryDistanceMatrix trajectory_distance_matrix(const std::vector<Trajectory>& trajs,
                                                    bool connect_endpoints, int jobs) {
  const int n = static_cast<int>(trajs.size());
  TrajectoryDistanceMatrix out;
  out.d = Eigen::MatrixXd::Zero(n, n);

  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) pairs.emplace_back(i, j);

  parallel_for(static_cast<int>(pairs.size()), jobs, [&](int p) {
    const auto [i, j] = pairs[p];
    out.d(i, j) = pairwise_trajectory_distance(trajs[i], trajs[j], connect_endpoints);
  });
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) out.d(j, i) = out.d(i, j);
  return out;
}

ClusterLabels single_linkage(const TrajectoryDistanceMatrix& m, int k) {
  const int n = m.size();
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  if (k > n) throw std::invalid_argument("k must not exceed the number of points");

  struct MergeEdge {
    double d;
    int i, j;
  };
  std::vector<MergeEdge> edges;
  edges.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) edges.push_back({m.d(i, j), i, j});
  std::sort(edges.begin(), edges.end(), [](const MergeEdge& a, const MergeEdge& b) {
    return std::tie(a.d, a.i, a.j) < std::tie(b.d, b.i, b.j);
  });

  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };

  int components = n;
  for (const auto& e : edges) {
    if (components == k) break;
    const int ri = find(e.i), rj = find(e.j);
    if (ri == rj) continue;
    parent[std::max(ri, rj)] = std::min(ri, rj);
    --components;
  }

  // order clusters by their smallest member index
  std::map<int, int> root_to_label;
  for (int i = 0; i < n; ++i) {
    const int r = find(i);
    if (!root_to_label.count(r)) {
      const int next = static_cast<int>(root_to_label.size());
      root_to_label[r] = next;
    }
  }
  ClusterLabels out;
  out.k = k;
  out.labels.resize(n);
  for (int i = 0; i < n; ++i) out.labels[i] = root_to_label[find(i)];
  return out;
}

ClusterResult cluster_dataset(const std::vector<Trajectory>& trajs,
                              const ClusterPipelineOptions& opts) {
  if (trajs.size() < 2) throw std::invalid_argument("cluster_dataset needs >= 2 trajectories");

  std::vector<Trajectory> prepared;
  prepared.reserve(trajs.size());
  for (const auto& t : trajs) {
    Trajectory p = (opts.filtration_T >= 2) ? resample(t, opts.filtration_T) : t;
    prepared.push_back(embed(p, opts.weights, opts.embed));
  }

  ClusterResult result;
  result.filtration = build_filtration_matrix(prepared, opts.connect_endpoints, opts.jobs);
  result.diagram = rips_persistence(result.filtration, 1, kAutoThreshold);
  result.num_classes = extract_num_classes(result.diagram, opts.cluster);
  result.separating_distance =
      separating_distance(result.diagram, opts.cluster.cutoff_ratio, opts.cluster.min_lifetime);
  result.distances = trajectory_distance_matrix(prepared, opts.connect_endpoints, opts.jobs);
  const int k = std::min<int>(result.num_classes, static_cast<int>(trajs.size()));
  result.labels = single_linkage(result.distances, k);
  return result;
}

}  // namespace trajtopo
