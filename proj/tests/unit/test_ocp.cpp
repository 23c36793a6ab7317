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

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "finite_difference.hpp"

namespace trajtopo {
namespace {

using testing::fd_gradient;
using testing::fd_jacobian;
using testing::relative_error;

OCProblem quadrotor_fixture() {
  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(12);
  x0.head<3>() << -2.0, -2.0, -2.0;
  ObstacleSet obs;
  obs.cylinders.push_back({2, Eigen::Vector3d::Zero(), 0.5});
  return make_quadrotor_problem(x0, Eigen::Vector3d(1.75, 1.75, 1.75), obs);
}

TEST(Cylinder, SignedDistance) {
  const Cylinder cyl{2, Eigen::Vector3d::Zero(), 0.5};
  EXPECT_DOUBLE_EQ(cyl.signed_distance({2.0, 0.0, 7.0}), 1.5);  // z ignored
  EXPECT_DOUBLE_EQ(cyl.signed_distance({0.0, 0.0, -3.0}), -0.5);
  EXPECT_NEAR(cyl.signed_distance({0.3, 0.4, 1.0}), 0.0, 1e-15);
}

TEST(Cost, ZeroWeightsGiveZero) {
  OCProblem p = quadrotor_fixture();
  p.cost.control_weight = 0.0;
  p.cost.state_weight = 0.0;
  p.cost.terminal_weight = 0.0;
  p.cost.obstacle_weight = 0.0;
  const std::vector<Eigen::VectorXd> X(p.T, Eigen::VectorXd::Random(12));
  const std::vector<Eigen::VectorXd> U(p.T - 1, Eigen::VectorXd::Random(4));
  EXPECT_DOUBLE_EQ(total_cost(p, X, U), 0.0);
}

TEST(Cost, ZeroAtGoalWithReferenceControls) {
  OCProblem p = quadrotor_fixture();
  p.cost.obstacles.cylinders.clear();
  const std::vector<Eigen::VectorXd> X(p.T, p.cost.goal);
  const std::vector<Eigen::VectorXd> U(p.T - 1, p.cost.u_ref);
  EXPECT_DOUBLE_EQ(total_cost(p, X, U), 0.0);
}

TEST(Cost, MatchesIndependentResummation) {
  const OCProblem p = quadrotor_fixture();
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  std::vector<Eigen::VectorXd> X(p.T), U(p.T - 1);
  for (auto& x : X) {
    x.resize(12);
    for (int i = 0; i < 12; ++i) x(i) = dist(rng);
  }
  for (auto& u : U) {
    u.resize(4);
    for (int i = 0; i < 4; ++i) u(i) = dist(rng);
  }

  double expected = 0.0;
  for (int t = 0; t < p.T; ++t) {
    const bool terminal = t + 1 == p.T;
    const double w = terminal ? p.cost.terminal_weight : p.cost.state_weight;
    const Eigen::VectorXd r = X[t] - p.cost.goal;
    expected += 0.5 * w * r.dot(p.cost.state_scale.cwiseProduct(r));
    if (terminal) continue;
    expected += 0.5 * p.cost.control_weight * (U[t] - p.cost.u_ref).squaredNorm();
    for (const Cylinder& cyl : p.cost.obstacles.cylinders) {
      const double gap = p.cost.obstacle_margin -
                         cyl.signed_distance(Eigen::Vector3d(X[t].head<3>()));
      if (gap > 0.0) expected += p.cost.obstacle_weight * gap * gap;
    }
  }
  EXPECT_NEAR(total_cost(p, X, U), expected, 1e-12 * std::abs(expected));
}

TEST(Cost, DimensionMismatchThrows) {
  const OCProblem p = quadrotor_fixture();
  std::vector<Eigen::VectorXd> X(p.T, Eigen::VectorXd::Zero(12));
  std::vector<Eigen::VectorXd> U(p.T - 1, Eigen::VectorXd::Zero(4));
  EXPECT_THROW(total_cost(p, {X.begin(), X.end() - 1}, U), std::invalid_argument);
  U[3] = Eigen::VectorXd::Zero(3);
  EXPECT_THROW(total_cost(p, X, U), std::invalid_argument);
}

TEST(Cost, PureQuadraticDerivatives) {
  OCProblem p = quadrotor_fixture();
  p.cost.obstacles.cylinders.clear();
  const Eigen::VectorXd x = Eigen::VectorXd::Random(12);
  const Eigen::VectorXd u = Eigen::VectorXd::Random(4);
  const CostDerivatives d = cost_derivatives(p, x, u, false);
  const Eigen::VectorXd expected_lx =
      p.cost.state_weight * p.cost.state_scale.cwiseProduct(x - p.cost.goal);
  EXPECT_LT((d.lx - expected_lx).lpNorm<Eigen::Infinity>(), 1e-14);
  const Eigen::MatrixXd expected_lxx =
      p.cost.state_weight * Eigen::MatrixXd(p.cost.state_scale.asDiagonal());
  EXPECT_LT((d.lxx - expected_lxx).lpNorm<Eigen::Infinity>(), 1e-14);
  EXPECT_LT((d.lu - p.cost.control_weight * (u - p.cost.u_ref)).lpNorm<Eigen::Infinity>(),
            1e-14);
}

TEST(CartpoleResidual, UprightIsZeroForAllWindings) {
  const OCProblem p = make_cartpole_problem(Eigen::VectorXd::Zero(4));
  for (double theta : {M_PI, -M_PI, 3.0 * M_PI}) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(4);
    x(1) = theta;
    EXPECT_NEAR(terminal_cost(p, x), 0.0, 1e-12) << "theta " << theta;
  }
  Eigen::VectorXd hanging = Eigen::VectorXd::Zero(4);
  EXPECT_GT(terminal_cost(p, hanging), 1.0);
}

TEST(CartpoleResidual, FullRotationInvariance) {
  const OCProblem p = make_cartpole_problem(Eigen::VectorXd::Zero(4));
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> dist(-3.0, 3.0);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd x(4);
    for (int i = 0; i < 4; ++i) x(i) = dist(rng);
    Eigen::VectorXd shifted = x;
    shifted(1) += 2.0 * M_PI;
    EXPECT_NEAR(terminal_cost(p, x), terminal_cost(p, shifted), 1e-9);
  }
}

TEST(Obstacle, ZeroOutsideMarginRepulsiveInside) {
  const OCProblem p = quadrotor_fixture();
  Eigen::VectorXd far = Eigen::VectorXd::Zero(12);
  far.head<3>() << 3.0, 3.0, 0.0;
  const CostDerivatives d_far = cost_derivatives(p, far, p.cost.u_ref, false);
  const Eigen::VectorXd quad_only_lx =
      p.cost.state_weight * p.cost.state_scale.cwiseProduct(far - p.cost.goal);
  EXPECT_LT((d_far.lx - quad_only_lx).lpNorm<Eigen::Infinity>(), 1e-14);

  Eigen::VectorXd inside = Eigen::VectorXd::Zero(12);
  inside.head<3>() << 0.3, 0.1, 0.0;
  OCProblem p_pen = p;
  p_pen.cost.state_weight = 0.0;  // isolate the penalty gradient
  const CostDerivatives d_in = cost_derivatives(p_pen, inside, p.cost.u_ref, false);
  const Eigen::Vector3d radial = inside.head<3>().normalized();
  EXPECT_GT(-d_in.lx.head<3>().dot(radial), 0.0);  // descent pushes outward
}

TEST(Obstacle, PenaltyContinuousAtMargin) {
  const OCProblem p = quadrotor_fixture();
  const double r_at_margin = p.cost.obstacles.cylinders[0].radius + p.cost.obstacle_margin;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(12);
  OCProblem p_pen = p;
  p_pen.cost.state_weight = 0.0;
  p_pen.cost.control_weight = 0.0;
  x.head<3>() << r_at_margin + 1e-9, 0.0, 0.0;
  const double just_out = running_cost(p_pen, x, p.cost.u_ref);
  x.head<3>() << r_at_margin - 1e-9, 0.0, 0.0;
  const double just_in = running_cost(p_pen, x, p.cost.u_ref);
  EXPECT_DOUBLE_EQ(just_out, 0.0);
  EXPECT_LT(just_in, 1e-12);
}

void check_cost_derivatives(const OCProblem& p, std::mt19937_64& rng, int points) {
  std::uniform_real_distribution<double> sdist(-3.0, 3.0);
  std::uniform_real_distribution<double> cdist(-5.0, 5.0);
  const int n = p.model->state_dim();
  const int c = p.model->control_dim();
  for (int trial = 0; trial < points; ++trial) {
    Eigen::VectorXd x(n), u(c);
    for (int i = 0; i < n; ++i) x(i) = sdist(rng);
    for (int i = 0; i < c; ++i) u(i) = cdist(rng);
    // the penalty is C1 but not C2 exactly at the margin; step away from it
    bool near_kink = false;
    for (const Cylinder& cyl : p.cost.obstacles.cylinders)
      near_kink |= std::abs(p.cost.obstacle_margin -
                            cyl.signed_distance(Eigen::Vector3d(x.head<3>()))) < 1e-4;
    if (near_kink) continue;

    for (bool terminal : {false, true}) {
      const CostDerivatives d = cost_derivatives(p, x, u, terminal);
      const auto value = [&](const Eigen::VectorXd& xx, const Eigen::VectorXd& uu) {
        return terminal ? terminal_cost(p, xx) : running_cost(p, xx, uu);
      };
      const Eigen::VectorXd lx_fd =
          fd_gradient([&](const Eigen::VectorXd& xx) { return value(xx, u); }, x);
      EXPECT_LT(relative_error(d.lx, lx_fd), 1e-5) << "trial " << trial;
      const Eigen::MatrixXd lxx_fd = fd_jacobian(
          [&](const Eigen::VectorXd& xx) {
            return Eigen::VectorXd(cost_derivatives(p, xx, u, terminal).lx);
          },
          x);
      EXPECT_LT(relative_error(d.lxx, lxx_fd), 1e-5) << "trial " << trial;
      if (terminal) continue;
      const Eigen::VectorXd lu_fd =
          fd_gradient([&](const Eigen::VectorXd& uu) { return value(x, uu); }, u);
      EXPECT_LT(relative_error(d.lu, lu_fd), 1e-5) << "trial " << trial;
      EXPECT_LT(d.lux.lpNorm<Eigen::Infinity>(), 1e-14);  // costs are separable
    }
  }
}

TEST(CostDerivatives, CartpoleMatchesFiniteDifferences) {
  std::mt19937_64 rng(41);
  check_cost_derivatives(make_cartpole_problem(Eigen::VectorXd::Zero(4)), rng, 100);
}

TEST(CostDerivatives, QuadrotorMatchesFiniteDifferences) {
  std::mt19937_64 rng(42);
  check_cost_derivatives(quadrotor_fixture(), rng, 100);
}

TEST(Validation, CatchesShapeErrors) {
  OCProblem p = quadrotor_fixture();
  p.T = 1;
  EXPECT_THROW(validate_problem(p), std::invalid_argument);
  p = quadrotor_fixture();
  p.cost.goal = Eigen::VectorXd::Zero(3);
  EXPECT_THROW(validate_problem(p), std::invalid_argument);
  p = quadrotor_fixture();
  p.cost.obstacles.cylinders[0].radius = -1.0;
  EXPECT_THROW(validate_problem(p), std::invalid_argument);
}

}  // namespace
}  // namespace trajtopo
