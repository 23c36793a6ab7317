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

#include "trajtopo/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace trajtopo {

void Trajectory::validate() const {
  if (states.size() < 2) throw std::invalid_argument("trajectory needs at least 2 states");
  if (controls.size() + 1 != states.size())
    throw std::invalid_argument("len(states) must equal len(controls)+1");
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  const auto m = states.front().size();
  for (const auto& x : states) {
    if (x.size() != m) throw std::invalid_argument("inconsistent state dimension");
    if (!x.allFinite()) throw std::invalid_argument("non-finite state entry");
  }
  if (!controls.empty()) {
    const auto c = controls.front().size();
    for (const auto& u : controls) {
      if (u.size() != c) throw std::invalid_argument("inconsistent control dimension");
      if (!u.allFinite()) throw std::invalid_argument("non-finite control entry");
    }
  }
}

ScalingWeights ScalingWeights::ones(int dim) {
  return {Eigen::VectorXd::Ones(dim)};
}

ScalingWeights ScalingWeights::defaults(int dim, int pos_dims) {
  Eigen::VectorXd w = Eigen::VectorXd::Constant(dim, 0.5);
  w.head(std::min(pos_dims, dim)).setOnes();
  return {w};
}

double segment_distance(const Segment& s1, const Segment& s2) {
  if (s1.a.size() != s1.b.size() || s2.a.size() != s2.b.size() || s1.a.size() != s2.a.size())
    throw std::invalid_argument("segment dimension mismatch");

  const Eigen::VectorXd d1 = s1.b - s1.a;
  const Eigen::VectorXd d2 = s2.b - s2.a;
  const Eigen::VectorXd r = s1.a - s2.a;
  const double a = d1.squaredNorm();
  const double e = d2.squaredNorm();
  const double f = d2.dot(r);
  constexpr double kEps = 1e-14;

  double t = 0.0, u = 0.0;
  if (a <= kEps && e <= kEps) {
    // both segments degenerate to points
  } else if (a <= kEps) {
    u = std::clamp(f / e, 0.0, 1.0);
  } else {
    const double c = d1.dot(r);
    if (e <= kEps) {
      t = std::clamp(-c / a, 0.0, 1.0);
    } else {
      const double b = d1.dot(d2);
      const double denom = a * e - b * b;
      // parallel directions: tie-break at t = 0, re-clamp below
      if (denom > kEps * a * e)
        t = std::clamp((b * f - c * e) / denom, 0.0, 1.0);
      u = (b * t + f) / e;
      if (u < 0.0) {
        u = 0.0;
        t = std::clamp(-c / a, 0.0, 1.0);
      } else if (u > 1.0) {
        u = 1.0;
        t = std::clamp((b - c) / a, 0.0, 1.0);
      }
    }
  }
  return (s1.a + t * d1 - (s2.a + u * d2)).norm();
}

namespace {

// Natural cubic spline through n uniformly spaced samples; evaluates at
// fractional index x in [0, n-1].
class UniformSpline {
 public:
  explicit UniformSpline(std::vector<double> y) : y_(std::move(y)) {
    const int n = static_cast<int>(y_.size());
    m_.assign(n, 0.0);
    if (n < 3) return;
    // tridiagonal system 1,4,1 for interior second derivatives
    std::vector<double> diag(n - 2, 4.0), rhs(n - 2);
    for (int i = 1; i <= n - 2; ++i) rhs[i - 1] = 6.0 * (y_[i + 1] - 2.0 * y_[i] + y_[i - 1]);
    for (int i = 1; i < n - 2; ++i) {
      const double w = 1.0 / diag[i - 1];
      diag[i] -= w;
      rhs[i] -= w * rhs[i - 1];
    }
    for (int i = n - 3; i >= 0; --i) {
      double v = rhs[i];
      if (i + 1 <= n - 3) v -= m_[i + 2] * 1.0;
      m_[i + 1] = v / diag[i];
    }
  }

  double eval(double x) const {
    const int n = static_cast<int>(y_.size());
    if (n == 1) return y_[0];
    int j = std::clamp(static_cast<int>(std::floor(x)), 0, n - 2);
    const double s = x - j;
    const double a = 1.0 - s;
    return m_[j] * a * a * a / 6.0 + m_[j + 1] * s * s * s / 6.0 +
           (y_[j] - m_[j] / 6.0) * a + (y_[j + 1] - m_[j + 1] / 6.0) * s;
  }

 private:
  std::vector<double> y_;
  std::vector<double> m_;
};

std::vector<Eigen::VectorXd> resample_rows(const std::vector<Eigen::VectorXd>& rows, int count) {
  const int n = static_cast<int>(rows.size());
  const int dim = static_cast<int>(rows.front().size());
  std::vector<Eigen::VectorXd> out(count, Eigen::VectorXd::Zero(dim));
  for (int d = 0; d < dim; ++d) {
    std::vector<double> y(n);
    for (int i = 0; i < n; ++i) y[i] = rows[i](d);
    UniformSpline sp(std::move(y));
    for (int k = 0; k < count; ++k) {
      const double x = (count == 1) ? 0.0 : static_cast<double>(k) * (n - 1) / (count - 1);
      out[k](d) = sp.eval(x);
    }
  }
  // endpoints are knots; pin them against accumulated round-off
  out.front() = rows.front();
  out.back() = rows.back();
  return out;
}

}  // namespace

Trajectory resample(const Trajectory& traj, int t_new) {
  if (t_new < 2) throw std::invalid_argument("resample requires t_new >= 2");
  if (traj.states.size() < 2) throw std::invalid_argument("resample requires >= 2 states");
  Trajectory out;
  out.states = resample_rows(traj.states, t_new);
  if (!traj.controls.empty()) out.controls = resample_rows(traj.controls, t_new - 1);
  const double duration = traj.dt * static_cast<double>(traj.states.size() - 1);
  out.dt = duration / static_cast<double>(t_new - 1);
  out.start = traj.start;
  out.goal = traj.goal;
  return out;
}

int embedded_dim(int state_dim, const EmbedOptions& opts) {
  int selected;
  switch (opts.mode) {
    case EmbedMode::kFullState: selected = state_dim; break;
    case EmbedMode::kPositionOnly: selected = std::min(opts.position_dims, state_dim); break;
    case EmbedMode::kPoseOnly: selected = std::min(opts.pose_dims, state_dim); break;
    default: throw std::invalid_argument("unknown embed mode");
  }
  int extra = 0;
  for (int idx : opts.angle_dims)
    if (idx >= 0 && idx < selected) ++extra;
  return selected + extra;
}

Trajectory embed(const Trajectory& traj, const ScalingWeights& weights,
                 const EmbedOptions& opts) {
  const int m = traj.state_dim();
  const int dim = embedded_dim(m, opts);
  if (weights.w.size() != dim)
    throw std::invalid_argument("weights dimension does not match embedded dimension");
  if ((weights.w.array() <= 0.0).any())
    throw std::invalid_argument("scaling weights must be positive");

  int selected;
  switch (opts.mode) {
    case EmbedMode::kFullState: selected = m; break;
    case EmbedMode::kPositionOnly: selected = std::min(opts.position_dims, m); break;
    case EmbedMode::kPoseOnly: selected = std::min(opts.pose_dims, m); break;
    default: throw std::invalid_argument("unknown embed mode");
  }

  Trajectory out;
  out.controls = traj.controls;
  out.dt = traj.dt;
  out.start = traj.start;
  out.goal = traj.goal;
  out.states.reserve(traj.states.size());
  for (const auto& x : traj.states) {
    Eigen::VectorXd y(dim);
    int k = 0;
    for (int i = 0; i < selected; ++i) {
      const bool is_angle =
          std::find(opts.angle_dims.begin(), opts.angle_dims.end(), i) != opts.angle_dims.end();
      if (is_angle) {
        y(k++) = std::cos(x(i));
        y(k++) = std::sin(x(i));
      } else {
        y(k++) = x(i);
      }
    }
    out.states.push_back(y.cwiseProduct(weights.w));
  }
  return out;
}

}  // namespace trajtopo
