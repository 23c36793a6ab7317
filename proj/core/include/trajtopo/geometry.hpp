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

#ifndef TRAJTOPO_GEOMETRY_HPP
#define TRAJTOPO_GEOMETRY_HPP

#include <Eigen/Dense>
#include <vector>

namespace trajtopo {

/// Time-indexed state/control sequences; the atomic dataset element.
/// len(states) == len(controls) + 1, dt > 0.
struct Trajectory {
  std::vector<Eigen::VectorXd> states;
  std::vector<Eigen::VectorXd> controls;
  double dt = 0.0;
  Eigen::VectorXd start;  // problem parameters: initial state
  Eigen::VectorXd goal;   // problem parameters: goal (may be empty)

  int length() const { return static_cast<int>(states.size()); }
  int state_dim() const { return states.empty() ? 0 : static_cast<int>(states.front().size()); }
  int control_dim() const { return controls.empty() ? 0 : static_cast<int>(controls.front().size()); }

  /// Throws std::invalid_argument when the shape invariants are violated.
  void validate() const;
};

/// Closed line segment between two points of equal dimension.
/// Degenerate (a == b) segments are permitted.
struct Segment {
  Eigen::VectorXd a;
  Eigen::VectorXd b;
};

/// Per-dimension positive scale factors applied after embedding.
struct ScalingWeights {
  Eigen::VectorXd w;

  static ScalingWeights ones(int dim);
  /// Default scaling: 1 for the first pos_dims entries, 0.5 for the rest.
  static ScalingWeights defaults(int dim, int pos_dims);
};

enum class EmbedMode { kFullState, kPositionOnly, kPoseOnly };

/// Controls sub-dimension selection and angle handling for embed().
struct EmbedOptions {
  EmbedMode mode = EmbedMode::kFullState;
  int position_dims = 3;  // leading dims kept by kPositionOnly
  int pose_dims = 6;      // leading dims kept by kPoseOnly
  /// State indices expanded to (cos, sin) pairs before weighting.
  std::vector<int> angle_dims;
};

/// Minimum Euclidean distance between two closed segments (closed-form
/// clamped-parameter method). Symmetric; zero iff the segments intersect.
/// Throws std::invalid_argument on dimension mismatch.
double segment_distance(const Segment& s1, const Segment& s2);

/// Cubic-spline resampling of states and controls onto a uniform grid of
/// t_new knots spanning the original duration; endpoints preserved exactly.
/// Throws std::invalid_argument when t_new < 2 or the input is degenerate.
Trajectory resample(const Trajectory& traj, int t_new);

/// Selects sub-dimensions per opts.mode, expands opts.angle_dims to
/// (cos, sin) pairs, then multiplies elementwise by weights. Controls pass
/// through. weights.w must match the embedded dimension.
Trajectory embed(const Trajectory& traj, const ScalingWeights& weights,
                 const EmbedOptions& opts);

/// Dimension of the state produced by embed() for a given input dimension.
int embedded_dim(int state_dim, const EmbedOptions& opts);

}  // namespace trajtopo

#endif  // TRAJTOPO_GEOMETRY_HPP
