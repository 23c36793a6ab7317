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

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace trajtopo {

namespace {

double quadratic_value(const Eigen::MatrixXd& H, const Eigen::VectorXd& g,
                       const Eigen::VectorXd& x) {
  return 0.5 * x.dot(H * x) + g.dot(x);
}

// Solve H_ff y = rhs_f on the free subset; returns false when the block is
// not positive definite.
bool solve_free_block(const Eigen::MatrixXd& H, const std::vector<bool>& free_set,
                      const Eigen::MatrixXd& rhs, Eigen::MatrixXd& out) {
  const int n = static_cast<int>(H.rows());
  std::vector<int> idx;
  for (int i = 0; i < n; ++i)
    if (free_set[i]) idx.push_back(i);
  const int nf = static_cast<int>(idx.size());
  Eigen::MatrixXd hff(nf, nf);
  Eigen::MatrixXd rf(nf, rhs.cols());
  for (int a = 0; a < nf; ++a) {
    rf.row(a) = rhs.row(idx[a]);
    for (int b = 0; b < nf; ++b) hff(a, b) = H(idx[a], idx[b]);
  }
  const Eigen::LLT<Eigen::MatrixXd> llt(hff);
  if (llt.info() != Eigen::Success) return false;
  const Eigen::MatrixXd sol = llt.solve(rf);
  out = Eigen::MatrixXd::Zero(n, rhs.cols());
  for (int a = 0; a < nf; ++a) out.row(idx[a]) = sol.row(a);
  return true;
}

}  // namespace

BoxQPResult solve_boxqp(const Eigen::MatrixXd& H, const Eigen::VectorXd& g,
                        const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                        const Eigen::VectorXd& x0, const BoxQPOptions& opts) {
  const int n = static_cast<int>(g.size());
  if (H.rows() != n || H.cols() != n || lo.size() != n || hi.size() != n || x0.size() != n)
    throw std::invalid_argument("boxqp shape mismatch");

  BoxQPResult res;
  res.x = x0.cwiseMax(lo).cwiseMin(hi);
  res.free_set.assign(n, true);
  double value = quadratic_value(H, g, res.x);

  for (res.iterations = 0; res.iterations < opts.max_iterations; ++res.iterations) {
    const Eigen::VectorXd grad = g + H * res.x;
    int num_free = 0;
    for (int i = 0; i < n; ++i) {
      const bool clamped = (res.x(i) == lo(i) && grad(i) > 0.0) ||
                           (res.x(i) == hi(i) && grad(i) < 0.0);
      res.free_set[i] = !clamped;
      num_free += !clamped;
    }
    double free_grad_norm = 0.0;
    for (int i = 0; i < n; ++i)
      if (res.free_set[i]) free_grad_norm = std::max(free_grad_norm, std::abs(grad(i)));
    if (num_free == 0 || free_grad_norm < opts.gradient_tolerance) {
      res.converged = true;
      return res;
    }

    // Newton target on the free block with clamped dimensions held fixed:
    // x_f* = -H_ff^{-1} (g + H x_clamped)_f
    Eigen::VectorXd x_clamped = res.x;
    for (int i = 0; i < n; ++i)
      if (res.free_set[i]) x_clamped(i) = 0.0;
    Eigen::MatrixXd target;
    if (!solve_free_block(H, res.free_set, -(g + H * x_clamped), target)) {
      res.factorization_failed = true;
      return res;
    }
    Eigen::VectorXd search = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i)
      if (res.free_set[i]) search(i) = target(i, 0) - res.x(i);
    if (grad.dot(search) >= 0.0) {  // numerical stall
      res.converged = true;
      return res;
    }

    double step = 1.0;
    bool accepted = false;
    while (step > opts.min_step) {
      const Eigen::VectorXd cand = (res.x + step * search).cwiseMax(lo).cwiseMin(hi);
      const double cand_value = quadratic_value(H, g, cand);
      if (cand_value <= value + opts.armijo * grad.dot(cand - res.x)) {
        res.x = cand;
        value = cand_value;
        accepted = true;
        break;
      }
      step *= opts.step_shrink;
    }
    if (!accepted) {
      res.converged = true;  // no further progress possible at this scale
      return res;
    }
  }
  return res;  // iteration cap; converged stays false
}

std::vector<Eigen::VectorXd> compute_gaps(const OCProblem& p,
                                          const std::vector<Eigen::VectorXd>& X,
                                          const std::vector<Eigen::VectorXd>& U) {
  std::vector<Eigen::VectorXd> gaps(p.T);
  gaps[0] = p.x0 - X[0];
  for (int t = 0; t + 1 < p.T; ++t) gaps[t + 1] = p.model->step(X[t], U[t]) - X[t + 1];
  return gaps;
}

BackwardPassTerms backward_pass(const OCProblem& p, const std::vector<Eigen::VectorXd>& X,
                                const std::vector<Eigen::VectorXd>& U,
                                const std::vector<Eigen::VectorXd>& gaps, double reg) {
  const int n = p.model->state_dim();
  const int c = p.model->control_dim();
  const Eigen::VectorXd& lo = p.model->control_lower();
  const Eigen::VectorXd& hi = p.model->control_upper();

  BackwardPassTerms terms;
  terms.k.assign(p.T - 1, Eigen::VectorXd::Zero(c));
  terms.K.assign(p.T - 1, Eigen::MatrixXd::Zero(c, n));

  const CostDerivatives dterm = cost_derivatives(p, X.back(), Eigen::VectorXd(), true);
  Eigen::VectorXd vx = dterm.lx;
  Eigen::MatrixXd vxx = dterm.lxx;

  Eigen::MatrixXd fx, fu;
  double grad_sq = 0.0;
  for (int t = p.T - 2; t >= 0; --t) {
    const CostDerivatives d = cost_derivatives(p, X[t], U[t], false);
    p.model->step_derivatives(X[t], U[t], fx, fu);

    const Eigen::VectorXd vx_gap = vx + vxx * gaps[t + 1];
    const Eigen::VectorXd qx = d.lx + fx.transpose() * vx_gap;
    const Eigen::VectorXd qu = d.lu + fu.transpose() * vx_gap;
    const Eigen::MatrixXd qxx = d.lxx + fx.transpose() * vxx * fx;
    Eigen::MatrixXd quu = d.luu + fu.transpose() * vxx * fu;
    quu = 0.5 * (quu + quu.transpose()).eval();
    const Eigen::MatrixXd qux = d.lux + fu.transpose() * vxx * fx;

    Eigen::MatrixXd quu_reg = quu;
    quu_reg.diagonal().array() += reg;

    BoxQPOptions qp_opts;
    const BoxQPResult qp = solve_boxqp(quu_reg, qu, lo - U[t], hi - U[t],
                                       Eigen::VectorXd::Zero(c), qp_opts);
    if (qp.factorization_failed || !qp.converged) return terms;  // ok stays false

    terms.k[t] = qp.x;
    Eigen::MatrixXd kfree;
    if (!solve_free_block(quu_reg, qp.free_set, -qux, kfree)) return terms;
    terms.K[t] = kfree;  // clamped rows already zero

    // projected gradient: saturated dimensions pushing outward do not count
    for (int i = 0; i < c; ++i) {
      const bool outward = (U[t](i) <= lo(i) && qu(i) > 0.0) ||
                           (U[t](i) >= hi(i) && qu(i) < 0.0);
      if (!outward) grad_sq += qu(i) * qu(i);
    }

    terms.dv1 += terms.k[t].dot(qu);
    terms.dv2 += 0.5 * terms.k[t].dot(quu * terms.k[t]);

    vx = qx + terms.K[t].transpose() * (quu * terms.k[t] + qu) + qux.transpose() * terms.k[t];
    vxx = qxx + terms.K[t].transpose() * quu * terms.K[t] +
          terms.K[t].transpose() * qux + qux.transpose() * terms.K[t];
    vxx = 0.5 * (vxx + vxx.transpose()).eval();
  }
  terms.gradient_norm = std::sqrt(grad_sq);
  terms.ok = true;
  return terms;
}

ForwardPassResult forward_pass(const OCProblem& p, const std::vector<Eigen::VectorXd>& X,
                               const std::vector<Eigen::VectorXd>& U,
                               const std::vector<Eigen::VectorXd>& gaps,
                               const BackwardPassTerms& terms, double alpha) {
  ForwardPassResult res;
  res.X.resize(p.T);
  res.U.resize(p.T - 1);
  res.gaps.resize(p.T);

  const double keep = 1.0 - alpha;
  res.X[0] = p.x0 - keep * gaps[0];
  res.gaps[0] = keep * gaps[0];
  for (int t = 0; t + 1 < p.T; ++t) {
    res.U[t] = p.model->clamp_control(U[t] + alpha * terms.k[t] +
                                      terms.K[t] * (res.X[t] - X[t]));
    res.X[t + 1] = p.model->step(res.X[t], res.U[t]) - keep * gaps[t + 1];
    res.gaps[t + 1] = keep * gaps[t + 1];
    if (!res.X[t + 1].allFinite()) return res;  // finite stays false
  }
  res.cost = total_cost(p, res.X, res.U);
  res.finite = std::isfinite(res.cost);
  return res;
}

SolverResult solve(const OCProblem& p, std::vector<Eigen::VectorXd> X_init,
                   std::vector<Eigen::VectorXd> U_init, const SolverOptions& opts) {
  validate_problem(p);
  if (X_init.empty()) X_init.assign(p.T, p.x0);
  if (U_init.empty()) U_init.assign(p.T - 1, p.cost.u_ref);
  if (static_cast<int>(X_init.size()) != p.T || static_cast<int>(U_init.size()) != p.T - 1)
    throw std::invalid_argument("warm start length does not match horizon");
  for (auto& u : U_init) u = p.model->clamp_control(u);

  const auto start = std::chrono::steady_clock::now();
  const auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };

  SolverResult res;
  res.X = std::move(X_init);
  res.U = std::move(U_init);
  std::vector<Eigen::VectorXd> gaps = compute_gaps(p, res.X, res.U);
  double cost = total_cost(p, res.X, res.U);
  res.cost_trace.push_back(cost);
  res.time_trace.push_back(elapsed());

  const auto gap_norm = [&] {
    double g = 0.0;
    for (const auto& f : gaps) g = std::max(g, f.lpNorm<Eigen::Infinity>());
    return g;
  };

  double reg = opts.reg_init;
  for (int outer = 0; outer < opts.max_iterations; ++outer) {
    BackwardPassTerms terms;
    while (true) {
      terms = backward_pass(p, res.X, res.U, gaps, reg);
      if (terms.ok) break;
      reg *= 10.0;
      if (reg > opts.reg_max) {
        res.failure_reason = "backward pass failed at maximum regularization";
        res.final_gradient_norm = terms.gradient_norm;
        return res;
      }
    }
    res.final_gradient_norm = terms.gradient_norm;
    if (terms.gradient_norm < opts.gradient_tolerance && gap_norm() < opts.gap_tolerance) {
      res.converged = true;
      return res;
    }

    bool accepted = false;
    double improvement = 0.0;
    for (int i = 0; i < opts.line_search_steps; ++i) {
      const double alpha = std::pow(2.0, -i);
      ForwardPassResult fp = forward_pass(p, res.X, res.U, gaps, terms, alpha);
      if (!fp.finite || fp.cost >= cost) continue;
      improvement = cost - fp.cost;
      cost = fp.cost;
      res.X = std::move(fp.X);
      res.U = std::move(fp.U);
      gaps = std::move(fp.gaps);
      accepted = true;
      break;
    }

    if (!accepted) {
      reg *= 10.0;
      if (reg > opts.reg_max) {
        res.failure_reason = "no cost-reducing step at maximum regularization";
        return res;
      }
      continue;
    }

    ++res.iterations;
    res.cost_trace.push_back(cost);
    res.time_trace.push_back(elapsed());
    reg = std::max(reg / 2.0, opts.reg_min);

    if (improvement < opts.cost_tolerance && gap_norm() < opts.gap_tolerance) {
      res.converged = true;
      return res;
    }
  }
  res.failure_reason = "iteration limit reached";
  return res;
}

}  // namespace trajtopo
