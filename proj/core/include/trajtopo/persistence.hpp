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

#ifndef TRAJTOPO_PERSISTENCE_HPP
#define TRAJTOPO_PERSISTENCE_HPP

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "trajtopo/geometry.hpp"

namespace trajtopo {

/// Dense symmetric segment-distance matrix with time-series post-processing
/// applied. Row i corresponds to index_map[i] = (trajectory id, segment id).
struct FiltrationMatrix {
  Eigen::MatrixXd d;
  std::vector<std::pair<int, int>> index_map;

  int size() const { return static_cast<int>(d.rows()); }
};

struct PersistenceFeature {
  int dim = 0;      // 0 or 1
  double birth = 0.0;
  double death = 0.0;  // +inf for essential classes

  double lifetime() const { return death - birth; }
};

struct PersistenceDiagram {
  std::vector<PersistenceFeature> features;
  double threshold = 0.0;  // filtration scale actually used

  std::vector<PersistenceFeature> h(int dim) const;
  /// Finite-or-infinite H1 lifetimes, sorted descending.
  std::vector<double> h1_lifetimes() const;
};

/// Pass as `threshold` to rips_persistence to use the enclosing radius.
inline constexpr double kAutoThreshold = -1.0;

/// Segment-distance matrix over all trajectory segments. Consecutive
/// same-trajectory segment pairs are forced to 0; with connect_endpoints the
/// first segments of all trajectories are mutually forced to 0 and likewise
/// the last segments. Throws std::invalid_argument on an empty dataset or a
/// state-dimension mismatch.
FiltrationMatrix build_filtration_matrix(const std::vector<Trajectory>& trajs,
                                         bool connect_endpoints, int jobs = 1);

/// min over i of max over j of d(i, j); Rips persistence cannot change
/// beyond this scale.
double enclosing_radius(const Eigen::MatrixXd& d);

/// H0/H1 persistence pairs of the Vietoris-Rips filtration of m, up to
/// `threshold` (kAutoThreshold: enclosing radius). A simplex enters the
/// filtration at its diameter; simplices with diameter > threshold are
/// excluded. Features with lifetime < 1e-12 are dropped as numerical noise.
/// Throws std::invalid_argument when m is not symmetric, has a nonzero
/// diagonal, or has negative entries.
PersistenceDiagram rips_persistence(const FiltrationMatrix& m, int max_dim = 1,
                                    double threshold = kAutoThreshold);

/// Number of leading lifetimes (sorted descending) accepted by the half-life
/// rule: accept while lifetime >= min_lifetime and, once a previous lifetime
/// exists, lifetime >= cutoff_ratio * previous.
int retained_h1_count(const std::vector<double>& lifetimes_desc,
                      double cutoff_ratio, double min_lifetime);

/// Scale separating short-lived H1 noise from the retained long-lived H1
/// features: the midpoint between the largest non-retained lifetime (0 when
/// none) and the smallest retained lifetime. Returns diag.threshold when no
/// H1 feature is retained.
double separating_distance(const PersistenceDiagram& diag,
                           double cutoff_ratio = 0.8,
                           double min_lifetime = 0.1);

}  // namespace trajtopo

#endif  // TRAJTOPO_PERSISTENCE_HPP
