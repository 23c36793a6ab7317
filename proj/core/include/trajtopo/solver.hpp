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

#ifndef TRAJTOPO_SOLVER_HPP
#define TRAJTOPO_SOLVER_HPP

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "trajtopo/ocp.hpp"

namespace trajtopo {

struct BoxQPOptions {
  int max_iterations = 100;
  double gradient_tolerance = 1e-9;
  double armijo = 0.1;
  double step_shrink = 0.6;
  double min_step = 1e-20;
};

struct BoxQPResult {
  Eigen::VectorXd x;
  std::vector<bool> free_set;  // per dimension: not clamped at a bound
  int iterations = 0;
  bool converged = false;
  bool factorization_failed = false;  // Hessian not PD on the free block
};

/// Minimize 1/2 x'Hx + g'x subject to lo <= x <= hi with the projected-Newton
/// active-set method. H must be symmetric positive definite.
BoxQPResult solve_boxqp(const Eigen::MatrixXd& H, const Eigen::VectorXd& g,
                        const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                        const Eigen::VectorXd& x0, const BoxQPOptions& opts = {});

struct BackwardPassTerms {
  std::vector<Eigen::VectorXd> k;  // feedforward, per step
  std::vector<Eigen::MatrixXd> K;  // feedback, per step; clamped rows zeroed
  double dv1 = 0.0;                // sum k'Qu (expected-improvement bookkeeping)
  double dv2 = 0.0;                // sum 1/2 k'Quu k
  double gradient_norm = 0.0;      // projected-gradient norm over all steps
  bool ok = false;                 // false: regularization must increase
};

/// Dynamics defects: gaps[0] = x0 - X[0], gaps[t+1] = f(X[t], U[t]) - X[t+1].
std::vector<Eigen::VectorXd> compute_gaps(const OCProblem& p,
                                          const std::vector<Eigen::VectorXd>& X,
                                          const std::vector<Eigen::VectorXd>& U);

/// Gauss-Newton backward sweep with control bounds; `gaps` folds infeasible
/// reference trajectories into the value expansion.
BackwardPassTerms backward_pass(const OCProblem& p, const std::vector<Eigen::VectorXd>& X,
                                const std::vector<Eigen::VectorXd>& U,
                                const std::vector<Eigen::VectorXd>& gaps, double reg);

struct ForwardPassResult {
  std::vector<Eigen::VectorXd> X, U, gaps;
  double cost = 0.0;
  bool finite = false;
};

/// Rolls out u = U[t] + alpha k + K (x - X[t]) with clamped controls while
/// contracting the defects by (1 - alpha).
ForwardPassResult forward_pass(const OCProblem& p, const std::vector<Eigen::VectorXd>& X,
                               const std::vector<Eigen::VectorXd>& U,
                               const std::vector<Eigen::VectorXd>& gaps,
                               const BackwardPassTerms& terms, double alpha);

struct SolverOptions {
  int max_iterations = 200;
  double cost_tolerance = 1e-6;      // stop when an accepted step improves less
  double gradient_tolerance = 1e-7;  // projected-gradient stop
  double gap_tolerance = 1e-6;       // defects must close before declaring success
  double reg_init = 1e-9;
  double reg_min = 1e-9;
  double reg_max = 1e10;
  int line_search_steps = 11;  // alpha = 1, 1/2, ..., 2^-10
};

struct SolverResult {
  std::vector<Eigen::VectorXd> X, U;
  std::vector<double> cost_trace;  // cost_trace[0] = initial cost, then one entry
  std::vector<double> time_trace;  // per accepted step; seconds from solve start
  int iterations = 0;              // accepted forward passes
  bool converged = false;
  std::string failure_reason;      // empty when converged
  double final_gradient_norm = 0.0;

  double final_cost() const { return cost_trace.back(); }
};

/// Box-FDDP solve. Empty X_init defaults to x0 repeated over the horizon;
/// empty U_init defaults to the problem's control setpoint, so both state
/// and control warm starts (or neither) are usable.
///
/// Acceptance is strict cost decrease, so the cost trace is monotone. A
/// heavily infeasible X_init (e.g. a constant state held over the horizon)
/// can price below every reachable trajectory and then no step is accepted;
/// when seeding with controls alone, pass their rollout as X_init.
SolverResult solve(const OCProblem& p, std::vector<Eigen::VectorXd> X_init = {},
                   std::vector<Eigen::VectorXd> U_init = {}, const SolverOptions& opts = {});

}  // namespace trajtopo

#endif  // TRAJTOPO_SOLVER_HPP
