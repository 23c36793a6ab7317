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

#include "trajtopo/ocp.hpp"

#include <cmath>
#include <stdexcept>

namespace trajtopo {

double Cylinder::signed_distance(const Eigen::Vector3d& p) const {
  Eigen::Vector3d q = p - center;
  q(axis) = 0.0;
  return q.norm() - radius;
}

namespace {

int residual_dim(const OCProblem& p) {
  return p.cost.residual == GoalResidual::kCartpoleSO2 ? 5 : p.model->state_dim();
}

Eigen::VectorXd goal_residual(const OCProblem& p, const Eigen::VectorXd& x) {
  const Eigen::VectorXd& goal = p.cost.goal;
  if (p.cost.residual == GoalResidual::kLinear) return x - goal;
  Eigen::VectorXd r(5);
  r(0) = x(0) - goal(0);
  r(1) = std::cos(x(1)) - std::cos(goal(1));
  r(2) = std::sin(x(1)) - std::sin(goal(1));
  r(3) = x(2) - goal(2);
  r(4) = x(3) - goal(3);
  return r;
}

// Jacobian of the residual, residual_dim x state_dim.
Eigen::MatrixXd goal_residual_jacobian(const OCProblem& p, const Eigen::VectorXd& x) {
  const int n = p.model->state_dim();
  if (p.cost.residual == GoalResidual::kLinear) return Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(5, 4);
  jac(0, 0) = 1.0;
  jac(1, 1) = -std::sin(x(1));
  jac(2, 1) = std::cos(x(1));
  jac(3, 2) = 1.0;
  jac(4, 3) = 1.0;
  return jac;
}

double state_term(const OCProblem& p, const Eigen::VectorXd& x, double weight) {
  const Eigen::VectorXd r = goal_residual(p, x);
  return 0.5 * weight * r.dot(p.cost.state_scale.cwiseProduct(r));
}

// Adds weight * 1/2 r'Wr derivatives into lx/lxx, including the residual
// curvature of the angle embedding so the Hessian is exact.
void add_state_term_derivatives(const OCProblem& p, const Eigen::VectorXd& x, double weight,
                                Eigen::VectorXd& lx, Eigen::MatrixXd& lxx) {
  const Eigen::VectorXd r = goal_residual(p, x);
  const Eigen::MatrixXd jac = goal_residual_jacobian(p, x);
  const Eigen::VectorXd wr = p.cost.state_scale.cwiseProduct(r);
  lx += weight * jac.transpose() * wr;
  lxx += weight * jac.transpose() * p.cost.state_scale.asDiagonal() * jac;
  if (p.cost.residual == GoalResidual::kCartpoleSO2)
    lxx(1, 1) += weight * (wr(1) * -std::cos(x(1)) + wr(2) * -std::sin(x(1)));
}

double obstacle_term(const OCProblem& p, const Eigen::VectorXd& x) {
  double total = 0.0;
  if (p.model->state_dim() < 3) return total;
  const Eigen::Vector3d pos = x.head<3>();
  for (const Cylinder& cyl : p.cost.obstacles.cylinders) {
    const double gap = p.cost.obstacle_margin - cyl.signed_distance(pos);
    if (gap > 0.0) total += p.cost.obstacle_weight * gap * gap;
  }
  return total;
}

void add_obstacle_derivatives(const OCProblem& p, const Eigen::VectorXd& x, Eigen::VectorXd& lx,
                              Eigen::MatrixXd& lxx) {
  if (p.model->state_dim() < 3) return;
  const Eigen::Vector3d pos = x.head<3>();
  for (const Cylinder& cyl : p.cost.obstacles.cylinders) {
    Eigen::Vector3d q = pos - cyl.center;
    q(cyl.axis) = 0.0;
    const double rho = q.norm();
    const double gap = p.cost.obstacle_margin - (rho - cyl.radius);
    if (gap <= 0.0 || rho < 1e-12) continue;  // gradient undefined on the axis
    const Eigen::Vector3d dir = q / rho;
    const double w = p.cost.obstacle_weight;
    lx.head<3>() += -2.0 * w * gap * dir;
    Eigen::Matrix3d plane = Eigen::Matrix3d::Identity();
    plane(cyl.axis, cyl.axis) = 0.0;
    lxx.topLeftCorner<3, 3>() +=
        2.0 * w * (dir * dir.transpose() - (gap / rho) * (plane - dir * dir.transpose()));
  }
}

}  // namespace

double running_cost(const OCProblem& p, const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
  const Eigen::VectorXd du = u - p.cost.u_ref;
  return 0.5 * p.cost.control_weight * du.squaredNorm() +
         state_term(p, x, p.cost.state_weight) + obstacle_term(p, x);
}

double terminal_cost(const OCProblem& p, const Eigen::VectorXd& x) {
  return state_term(p, x, p.cost.terminal_weight);
}

double total_cost(const OCProblem& p, const std::vector<Eigen::VectorXd>& X,
                  const std::vector<Eigen::VectorXd>& U) {
  if (static_cast<int>(X.size()) != p.T || static_cast<int>(U.size()) != p.T - 1)
    throw std::invalid_argument("trajectory length does not match horizon");
  double j = 0.0;
  for (int t = 0; t + 1 < p.T; ++t) {
    if (X[t].size() != p.model->state_dim() || U[t].size() != p.model->control_dim())
      throw std::invalid_argument("state/control dimension mismatch");
    j += running_cost(p, X[t], U[t]);
  }
  return j + terminal_cost(p, X.back());
}

CostDerivatives cost_derivatives(const OCProblem& p, const Eigen::VectorXd& x,
                                 const Eigen::VectorXd& u, bool terminal) {
  const int n = p.model->state_dim();
  const int c = p.model->control_dim();
  CostDerivatives d;
  d.lx = Eigen::VectorXd::Zero(n);
  d.lxx = Eigen::MatrixXd::Zero(n, n);
  d.lu = Eigen::VectorXd::Zero(c);
  d.luu = Eigen::MatrixXd::Zero(c, c);
  d.lux = Eigen::MatrixXd::Zero(c, n);
  if (terminal) {
    add_state_term_derivatives(p, x, p.cost.terminal_weight, d.lx, d.lxx);
    return d;
  }
  add_state_term_derivatives(p, x, p.cost.state_weight, d.lx, d.lxx);
  add_obstacle_derivatives(p, x, d.lx, d.lxx);
  d.lu = p.cost.control_weight * (u - p.cost.u_ref);
  d.luu = p.cost.control_weight * Eigen::MatrixXd::Identity(c, c);
  return d;
}

void validate_problem(const OCProblem& p) {
  if (!p.model) throw std::invalid_argument("problem has no dynamics model");
  if (p.T < 2) throw std::invalid_argument("horizon must be at least 2 knots");
  if (p.x0.size() != p.model->state_dim())
    throw std::invalid_argument("x0 dimension does not match the model");
  if (p.cost.goal.size() != p.model->state_dim())
    throw std::invalid_argument("goal dimension does not match the model");
  if (p.cost.u_ref.size() != p.model->control_dim())
    throw std::invalid_argument("u_ref dimension does not match the model");
  if (p.cost.state_scale.size() != residual_dim(p))
    throw std::invalid_argument("state_scale does not match the residual dimension");
  if (p.cost.residual == GoalResidual::kCartpoleSO2 && p.model->state_dim() != 4)
    throw std::invalid_argument("SO(2) residual requires the 4-dim cartpole state");
  for (const Cylinder& cyl : p.cost.obstacles.cylinders) {
    if (cyl.radius <= 0.0) throw std::invalid_argument("cylinder radius must be positive");
    if (cyl.axis < 0 || cyl.axis > 2) throw std::invalid_argument("cylinder axis must be 0..2");
  }
}

OCProblem make_cartpole_problem(const Eigen::VectorXd& x0, const CartpoleParams& params, int T) {
  OCProblem p;
  p.model = std::make_shared<CartpoleModel>(params);
  p.x0 = x0;
  p.T = T;
  p.cost.u_ref = Eigen::VectorXd::Zero(1);
  p.cost.goal = Eigen::VectorXd::Zero(4);
  p.cost.goal(1) = M_PI;
  p.cost.residual = GoalResidual::kCartpoleSO2;
  p.cost.state_scale = (Eigen::VectorXd(5) << 1.0, 1.0, 1.0, 0.1, 0.1).finished();
  validate_problem(p);
  return p;
}

OCProblem make_quadrotor_problem(const Eigen::VectorXd& x0, const Eigen::Vector3d& goal,
                                 const ObstacleSet& obstacles, const QuadrotorParams& params,
                                 int T) {
  OCProblem p;
  auto model = std::make_shared<QuadrotorModel>(params);
  p.x0 = x0;
  p.T = T;
  p.cost.u_ref = Eigen::VectorXd::Constant(4, model->hover_thrust());
  p.cost.goal = Eigen::VectorXd::Zero(12);
  p.cost.goal.head<3>() = goal;
  p.cost.residual = GoalResidual::kLinear;
  Eigen::VectorXd scale(12);
  scale << 1.0, 1.0, 1.0, 0.5, 0.5, 0.5, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1;
  p.cost.state_scale = scale;
  p.cost.obstacles = obstacles;
  p.model = std::move(model);
  validate_problem(p);
  return p;
}

}  // namespace trajtopo
