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

#ifndef TRAJTOPO_OCP_HPP
#define TRAJTOPO_OCP_HPP

#include <Eigen/Dense>
#include <memory>
#include <vector>

#include "trajtopo/dynamics.hpp"

namespace trajtopo {

/// Infinite cylinder aligned with one coordinate axis.
struct Cylinder {
  int axis = 2;                               // 0=x, 1=y, 2=z
  Eigen::Vector3d center{0.0, 0.0, 0.0};      // any point on the axis line
  double radius = 0.5;

  /// Signed distance from a point to the surface (< 0 inside).
  double signed_distance(const Eigen::Vector3d& p) const;
};

struct ObstacleSet {
  std::vector<Cylinder> cylinders;
};

enum class GoalResidual {
  kLinear,       // r(x) = x - goal
  kCartpoleSO2,  // angle enters through (cos, sin), goal angle = pi
};

/// Quadratic-plus-penalty stage costs:
///   running  = 1/2 w_u |u - u_ref|^2 + 1/2 w_x r(x)' W r(x) + obstacle penalty
///   terminal = 1/2 w_T r(x)' W r(x)
/// where W = diag(state_scale) and the obstacle penalty is
/// w_obs * max(0, margin - signed_distance)^2 summed over cylinders
/// (running stages only).
struct CostConfig {
  double control_weight = 1e-2;   // w_u
  double state_weight = 0.1;      // w_x
  double terminal_weight = 1e3;   // w_T
  Eigen::VectorXd state_scale;    // residual-dimension diagonal of W
  Eigen::VectorXd u_ref;          // control setpoint (hover / zeros)
  Eigen::VectorXd goal;           // state-dimension goal
  GoalResidual residual = GoalResidual::kLinear;
  ObstacleSet obstacles;          // penalized on position dims 0..2
  double obstacle_weight = 1e3;   // w_obs
  double obstacle_margin = 0.1;   // m
};

struct OCProblem {
  std::shared_ptr<const DynamicsModel> model;
  Eigen::VectorXd x0;
  int T = 0;  // knot points; controls run 0..T-2
  CostConfig cost;
};

struct CostDerivatives {
  Eigen::VectorXd lx, lu;
  Eigen::MatrixXd lxx, luu, lux;
};

double running_cost(const OCProblem& p, const Eigen::VectorXd& x, const Eigen::VectorXd& u);
double terminal_cost(const OCProblem& p, const Eigen::VectorXd& x);

/// Total trajectory cost: sum of running costs plus terminal cost.
/// Throws std::invalid_argument when X/U lengths or dimensions disagree
/// with the problem.
double total_cost(const OCProblem& p, const std::vector<Eigen::VectorXd>& X,
                  const std::vector<Eigen::VectorXd>& U);

/// Exact derivatives of the stage cost. With terminal=true, u is ignored and
/// lu/luu/lux are resized to zero-filled shapes.
CostDerivatives cost_derivatives(const OCProblem& p, const Eigen::VectorXd& x,
                                 const Eigen::VectorXd& u, bool terminal);

/// Throws std::invalid_argument describing the first shape violation, if any.
void validate_problem(const OCProblem& p);

/// Swing-up problem: drive the pole to the upright set from x0.
OCProblem make_cartpole_problem(const Eigen::VectorXd& x0,
                                const CartpoleParams& params = {}, int T = 100);

/// Goal-reaching problem with cylinder obstacles.
OCProblem make_quadrotor_problem(const Eigen::VectorXd& x0, const Eigen::Vector3d& goal,
                                 const ObstacleSet& obstacles,
                                 const QuadrotorParams& params = {}, int T = 50);

}  // namespace trajtopo

#endif  // TRAJTOPO_OCP_HPP
