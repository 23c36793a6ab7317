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

#include "trajtopo/solver.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "control_oracle.hpp"

namespace trajtopo {
namespace {

using testing::boxqp_enumerate;
using testing::riccati_lqr;

OCProblem lqr_problem() {
  OCProblem p;
  p.model = make_double_integrator(0.1);
  p.x0 = (Eigen::VectorXd(4) << 1.0, -0.5, 0.3, 0.2).finished();
  p.T = 20;
  p.cost.control_weight = 1.0;
  p.cost.state_weight = 1.0;
  p.cost.terminal_weight = 10.0;
  p.cost.state_scale = Eigen::VectorXd::Ones(4);
  p.cost.u_ref = Eigen::VectorXd::Zero(2);
  p.cost.goal = Eigen::VectorXd::Zero(4);
  return p;
}

testing::LqrSolution lqr_oracle(const OCProblem& p) {
  Eigen::MatrixXd ad, bd;
  p.model->step_derivatives(p.x0, p.cost.u_ref, ad, bd);
  const Eigen::MatrixXd q =
      p.cost.state_weight * Eigen::MatrixXd(p.cost.state_scale.asDiagonal());
  const Eigen::MatrixXd r =
      p.cost.control_weight * Eigen::MatrixXd::Identity(2, 2);
  const Eigen::MatrixXd qf =
      p.cost.terminal_weight * Eigen::MatrixXd(p.cost.state_scale.asDiagonal());
  return riccati_lqr(ad, bd, q, r, qf, p.x0, p.T);
}

TEST(BoxQP, InteriorOptimumIsNewtonStep) {
  Eigen::MatrixXd h(2, 2);
  h << 4.0, 1.0, 1.0, 3.0;
  const Eigen::VectorXd g = (Eigen::VectorXd(2) << 1.0, -2.0).finished();
  const Eigen::VectorXd lo = Eigen::VectorXd::Constant(2, -10.0);
  const Eigen::VectorXd hi = Eigen::VectorXd::Constant(2, 10.0);
  const BoxQPResult res = solve_boxqp(h, g, lo, hi, Eigen::VectorXd::Zero(2));
  ASSERT_TRUE(res.converged);
  const Eigen::VectorXd expected = h.llt().solve(-g);
  EXPECT_LT((res.x - expected).lpNorm<Eigen::Infinity>(), 1e-10);
  EXPECT_TRUE(res.free_set[0]);
  EXPECT_TRUE(res.free_set[1]);
}

TEST(BoxQP, ClampsToActiveBound) {
  const Eigen::MatrixXd h = Eigen::MatrixXd::Constant(1, 1, 2.0);
  const Eigen::VectorXd g = Eigen::VectorXd::Constant(1, -8.0);  // optimum at 4
  const BoxQPResult res =
      solve_boxqp(h, g, Eigen::VectorXd::Constant(1, -1.0), Eigen::VectorXd::Constant(1, 1.0),
                  Eigen::VectorXd::Zero(1));
  ASSERT_TRUE(res.converged);
  EXPECT_DOUBLE_EQ(res.x(0), 1.0);
  EXPECT_FALSE(res.free_set[0]);
}

TEST(BoxQP, MatchesEnumerationOracleOn1000RandomInstances) {
  std::mt19937_64 rng(2025);
  std::uniform_real_distribution<double> entry(-1.0, 1.0);
  std::uniform_int_distribution<int> dims(1, 4);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = dims(rng);
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m(i, j) = entry(rng);
    const Eigen::MatrixXd h =
        m.transpose() * m + 0.2 * Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd g(n), lo(n), hi(n), x0(n);
    for (int i = 0; i < n; ++i) {
      g(i) = 2.0 * entry(rng);
      const double a = entry(rng), b = entry(rng);
      lo(i) = std::min(a, b);
      hi(i) = std::max(a, b);
      x0(i) = entry(rng);
    }
    const BoxQPResult res = solve_boxqp(h, g, lo, hi, x0);
    const auto expected = boxqp_enumerate(h, g, lo, hi);
    ASSERT_TRUE(expected.has_value()) << "trial " << trial;
    ASSERT_TRUE(res.converged) << "trial " << trial;
    EXPECT_LT((res.x - *expected).lpNorm<Eigen::Infinity>(), 1e-8)
        << "trial " << trial << "\nH:\n"
        << h << "\ng: " << g.transpose() << "\nlo: " << lo.transpose()
        << "\nhi: " << hi.transpose();
  }
}

TEST(BackwardPass, TerminalOnlyScalarMatchesHandComputation) {
  // x' = a x + b u via dt=1 Euler form, terminal cost 1/2 q x^2
  const double a = 0.9, b = 0.5, q = 2.0, x0 = 1.2, u0 = 0.3;
  OCProblem p;
  p.model = std::make_shared<LinearSystem>(
      Eigen::MatrixXd::Constant(1, 1, a - 1.0), Eigen::MatrixXd::Constant(1, 1, b), 1.0,
      Eigen::VectorXd::Constant(1, -1e6), Eigen::VectorXd::Constant(1, 1e6));
  p.x0 = Eigen::VectorXd::Constant(1, x0);
  p.T = 2;
  p.cost.control_weight = 0.0;
  p.cost.state_weight = 0.0;
  p.cost.terminal_weight = q;
  p.cost.state_scale = Eigen::VectorXd::Ones(1);
  p.cost.u_ref = Eigen::VectorXd::Zero(1);
  p.cost.goal = Eigen::VectorXd::Zero(1);

  std::vector<Eigen::VectorXd> X{p.x0, Eigen::VectorXd()};
  std::vector<Eigen::VectorXd> U{Eigen::VectorXd::Constant(1, u0)};
  X[1] = p.model->step(X[0], U[0]);
  const double x1 = a * x0 + b * u0;
  ASSERT_DOUBLE_EQ(X[1](0), x1);

  const auto terms = backward_pass(p, X, U, compute_gaps(p, X, U), 0.0);
  ASSERT_TRUE(terms.ok);
  // Qu = b q x1, Quu = b^2 q, so k = -x1 / b and K = -a / b
  EXPECT_NEAR(terms.k[0](0), -x1 / b, 1e-12);
  EXPECT_NEAR(terms.K[0](0, 0), -a / b, 1e-12);
}

TEST(BackwardPass, ZeroCostGivesZeroGains) {
  OCProblem p = lqr_problem();
  p.cost.control_weight = 0.0;
  p.cost.state_weight = 0.0;
  p.cost.terminal_weight = 0.0;
  std::vector<Eigen::VectorXd> X(p.T, p.x0);
  std::vector<Eigen::VectorXd> U(p.T - 1, Eigen::VectorXd::Zero(2));
  const auto terms = backward_pass(p, X, U, compute_gaps(p, X, U), 1e-6);
  ASSERT_TRUE(terms.ok);
  for (int t = 0; t < p.T - 1; ++t) {
    EXPECT_LT(terms.k[t].lpNorm<Eigen::Infinity>(), 1e-12);
    EXPECT_LT(terms.K[t].lpNorm<Eigen::Infinity>(), 1e-12);
  }
}

TEST(ForwardPass, AlphaZeroReturnsReferenceExactly) {
  const OCProblem p = make_cartpole_problem(Eigen::VectorXd::Zero(4));
  std::mt19937_64 rng(51);
  std::uniform_real_distribution<double> dist(-0.5, 0.5);
  std::vector<Eigen::VectorXd> U(p.T - 1);
  for (auto& u : U) u = Eigen::VectorXd::Constant(1, dist(rng));
  std::vector<Eigen::VectorXd> X(p.T);
  X[0] = p.x0;
  for (int t = 0; t + 1 < p.T; ++t) X[t + 1] = p.model->step(X[t], U[t]);

  const auto gaps = compute_gaps(p, X, U);
  for (const auto& f : gaps) EXPECT_DOUBLE_EQ(f.lpNorm<Eigen::Infinity>(), 0.0);
  // The swing-up cost has indefinite curvature along this reference, so the
  // backward pass needs regularization just like the solver loop provides.
  BackwardPassTerms terms;
  for (double reg = 1e-9; reg <= 1e10; reg *= 10.0) {
    terms = backward_pass(p, X, U, gaps, reg);
    if (terms.ok) break;
  }
  ASSERT_TRUE(terms.ok);
  const ForwardPassResult fp = forward_pass(p, X, U, gaps, terms, 0.0);
  ASSERT_TRUE(fp.finite);
  for (int t = 0; t < p.T; ++t) EXPECT_EQ(fp.X[t], X[t]);
  for (int t = 0; t + 1 < p.T; ++t) EXPECT_EQ(fp.U[t], U[t]);
  EXPECT_DOUBLE_EQ(fp.cost, total_cost(p, X, U));
}

TEST(ForwardPass, FullStepClosesInfeasibleGaps) {
  const OCProblem p = lqr_problem();
  std::vector<Eigen::VectorXd> X(p.T), U(p.T - 1, Eigen::VectorXd::Zero(2));
  const Eigen::VectorXd target = Eigen::VectorXd::Zero(4);
  for (int t = 0; t < p.T; ++t)
    X[t] = p.x0 + (target - p.x0) * (static_cast<double>(t) / (p.T - 1));

  auto gaps = compute_gaps(p, X, U);
  double gap0 = 0.0;
  for (const auto& f : gaps) gap0 = std::max(gap0, f.lpNorm<Eigen::Infinity>());
  ASSERT_GT(gap0, 1e-3);  // genuinely infeasible reference

  const auto terms = backward_pass(p, X, U, gaps, 1e-9);
  ASSERT_TRUE(terms.ok);
  const ForwardPassResult fp = forward_pass(p, X, U, gaps, terms, 1.0);
  ASSERT_TRUE(fp.finite);
  const auto residual = compute_gaps(p, fp.X, fp.U);
  for (const auto& f : residual) EXPECT_LT(f.lpNorm<Eigen::Infinity>(), 1e-9);
}

TEST(Solve, LqrConvergesInOneIterationToRiccati) {
  const OCProblem p = lqr_problem();
  const SolverResult res = solve(p);
  EXPECT_TRUE(res.converged);
  EXPECT_EQ(res.iterations, 1);

  const testing::LqrSolution oracle = lqr_oracle(p);
  for (int t = 0; t + 1 < p.T; ++t)
    EXPECT_LT((res.U[t] - oracle.U[t]).lpNorm<Eigen::Infinity>(), 1e-8) << "t=" << t;
  for (int t = 0; t < p.T; ++t)
    EXPECT_LT((res.X[t] - oracle.X[t]).lpNorm<Eigen::Infinity>(), 1e-8) << "t=" << t;
  EXPECT_NEAR(res.final_cost(), oracle.cost, 1e-8);
}

TEST(Solve, WarmStartAtOptimumNeedsNoIterations) {
  const OCProblem p = lqr_problem();
  const testing::LqrSolution oracle = lqr_oracle(p);
  const SolverResult res = solve(p, oracle.X, oracle.U);
  EXPECT_TRUE(res.converged);
  EXPECT_EQ(res.iterations, 0);
  EXPECT_NEAR(res.final_cost(), oracle.cost, 1e-10);
}

TEST(Solve, RejectsMismatchedWarmStartLengths) {
  const OCProblem p = lqr_problem();
  std::vector<Eigen::VectorXd> bad_x(p.T - 3, p.x0);
  EXPECT_THROW(solve(p, bad_x), std::invalid_argument);
}

// The exact hanging state is a stationary point of the swing-up cost, so the
// solver is exercised the way the data pipeline uses it: a perturbed start and
// a random control seed rolled out to a dynamically consistent initial guess.
TEST(Solve, CartpoleSwingUpConverges) {
  Eigen::VectorXd x0(4);
  x0 << 0.0, 0.05, 0.0, 0.0;
  const OCProblem p = make_cartpole_problem(x0);
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<Eigen::VectorXd> U(p.T - 1);
  for (auto& u : U) u = Eigen::VectorXd::Constant(1, dist(rng));
  std::vector<Eigen::VectorXd> X(p.T);
  X[0] = p.x0;
  for (int t = 0; t + 1 < p.T; ++t) X[t + 1] = p.model->step(X[t], U[t]);

  const SolverResult res = solve(p, X, U);
  ASSERT_TRUE(res.converged) << res.failure_reason;

  for (std::size_t i = 1; i < res.cost_trace.size(); ++i)
    EXPECT_LT(res.cost_trace[i], res.cost_trace[i - 1]);
  for (const auto& u : res.U) {
    EXPECT_LE(u(0), 10.0);
    EXPECT_GE(u(0), -10.0);
  }
  const Eigen::VectorXd& xf = res.X.back();
  EXPECT_NEAR(std::cos(xf(1)), -1.0, 0.02);  // upright set
  EXPECT_LT(std::abs(xf(2)), 0.5);
  EXPECT_LT(std::abs(xf(3)), 0.5);
}

TEST(Solve, QuadrotorReachesGoalWithoutObstacles) {
  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(12);
  x0.head<3>() << -2.0, -1.5, -2.5;
  const Eigen::Vector3d goal(1.75, 1.75, 1.75);
  const OCProblem p = make_quadrotor_problem(x0, goal, {});
  const SolverResult res = solve(p);
  ASSERT_TRUE(res.converged) << res.failure_reason;
  EXPECT_LT((res.X.back().head<3>() - goal).norm(), 0.2);
  for (const auto& u : res.U) {
    EXPECT_GE(u.minCoeff(), 0.0);
    EXPECT_LE(u.maxCoeff(), 5.0);
  }
}

TEST(Solve, ConvergedSolutionIsLocalMinimum) {
  const OCProblem p = lqr_problem();
  const SolverResult res = solve(p);
  ASSERT_TRUE(res.converged);

  std::mt19937_64 rng(61);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Eigen::VectorXd> U = res.U;
    double norm_sq = 0.0;
    std::vector<Eigen::VectorXd> delta(U.size());
    for (auto& d : delta) {
      d = Eigen::VectorXd::NullaryExpr(2, [&](Eigen::Index) { return noise(rng); });
      norm_sq += d.squaredNorm();
    }
    const double scale = 1e-3 / std::sqrt(norm_sq);
    std::vector<Eigen::VectorXd> X(p.T);
    X[0] = p.x0;
    for (std::size_t t = 0; t < U.size(); ++t) {
      U[t] = p.model->clamp_control(U[t] + scale * delta[t]);
      X[t + 1] = p.model->step(X[t], U[t]);
    }
    EXPECT_GT(total_cost(p, X, U) - res.final_cost(), -1e-9) << "trial " << trial;
  }
}

}  // namespace
}  // namespace trajtopo
