#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "ldltr/factored_ops.hpp"
#include "ldltr/linesearch.hpp"
#include "ldltr/qn_update.hpp"
#include "ldltr/shift_backtrack.hpp"
#include "ldltr/shifted_solve.hpp"
#include "ldltr/subproblem_exact.hpp"
#include "ldltr/subproblem_shift.hpp"
#include "ldltr/types.hpp"

namespace ldltr {

struct SolverConfig {
  double eps = 1e-4;      // gradient-norm tolerance
  long k_max = 6000;      // iteration cap (the initial step counts as one)
  double delta_min = 1e-22;
  Eigen::Index n_max = 100;  // at most this dimension uses the dense exact subsolver

  // Acceptance and radius constants: accept when c1 < rho; grow by c4 when
  // rho > c2 and the step fills more than c3 of the radius; hold when
  // c5 <= rho <= c6; shrink by c7 otherwise.
  double c1 = 1e-4;
  double c2 = 0.75;
  double c3 = 0.8;
  double c4 = 2.0;
  double c5 = 0.1;
  double c6 = 0.75;
  double c7 = 0.5;

  // Shift-backtracking factor and its clamp interval.
  double gamma0 = 0.25;
  double gamma_min = 9.5367431640625e-7;  // 0.25^10
  double gamma_max = 0.25;

  // Subsolver budgets.
  double ms_tol = 1e-8;
  int ms_i_max = 50;
  double shift_tol = 1e-4;
  int shift_i_max = 10;
  int backtrack_i_max = 3;
  double cg_tol = 1e-8;
  int cg_i_max = 15;
  bool cg_jacobi = false;

  // Initial inverse-Hessian scaling H0 = phi*I, phi = clamp(1/||g0||).
  double phi_min = 1e-2;
  double phi_max = 1e4;

  // Apply the BFGS update from rejected trial points too (costs one extra
  // gradient evaluation per rejection).
  bool update_on_rejected = false;

  WolfeParams wolfe{};

  void validate() const {
    if (!(eps > 0.0)) throw std::invalid_argument("SolverConfig: eps must be positive");
    if (k_max < 1) throw std::invalid_argument("SolverConfig: k_max must be >= 1");
    if (!(delta_min > 0.0)) throw std::invalid_argument("SolverConfig: delta_min must be positive");
    if (n_max < 1) throw std::invalid_argument("SolverConfig: n_max must be >= 1");
    if (!(0.0 < c1 && c1 <= c2)) throw std::invalid_argument("SolverConfig: need 0 < c1 <= c2");
    if (!(0.0 < c3 && c3 < 1.0 && 1.0 < c4))
      throw std::invalid_argument("SolverConfig: need 0 < c3 < 1 < c4");
    if (!(0.0 < c5 && c5 <= c6 && c6 <= c2))
      throw std::invalid_argument("SolverConfig: need 0 < c5 <= c6 <= c2");
    if (!(0.0 < c7 && c7 < 1.0)) throw std::invalid_argument("SolverConfig: need 0 < c7 < 1");
    if (!(0.0 < gamma0 && gamma0 < 1.0))
      throw std::invalid_argument("SolverConfig: need 0 < gamma0 < 1");
    if (!(0.0 < gamma_min && gamma_min <= gamma0 && gamma0 <= gamma_max && gamma_max < 1.0))
      throw std::invalid_argument("SolverConfig: need 0 < gamma_min <= gamma0 <= gamma_max < 1");
    if (!(ms_tol > 0.0 && shift_tol > 0.0 && cg_tol > 0.0))
      throw std::invalid_argument("SolverConfig: subsolver tolerances must be positive");
    if (ms_i_max < 1 || shift_i_max < 1 || backtrack_i_max < 1 || cg_i_max < 1)
      throw std::invalid_argument("SolverConfig: subsolver iteration caps must be >= 1");
    if (!(0.0 < phi_min && phi_min <= phi_max))
      throw std::invalid_argument("SolverConfig: need 0 < phi_min <= phi_max");
  }
};

// phi = min(max(phi_min, 1/||g0||), phi_max).
inline double initial_scaling(double g0_norm, const SolverConfig& config = {}) {
  return std::min(std::max(config.phi_min, 1.0 / g0_norm), config.phi_max);
}

struct IterationState {
  Eigen::VectorXd x;
  double f = 0.0;
  Eigen::VectorXd g;
  TriangularFactor T;
  DiagonalFactor G;
  double delta = 0.0;
  double gamma = 0.0;
  long k = 0;
};

struct InitResult {
  IterationState state;
  // proceed == false means the solve already terminated during initialization
  // with the given status (converged, or evaluator-failure when the first
  // line search could not produce a Wolfe point).
  bool proceed = false;
  Status status = Status::evaluator_failure;
  long function_evals = 0;
  long gradient_evals = 0;
};

// First iteration: H0 = phi*I, one strong-Wolfe step along -phi*g0,
// Delta_1 = 2*||x1 - x0||, and the first curvature pair folded into the
// factors when admissible.
inline InitResult initialize(const Objective& problem, const SolverConfig& config = {}) {
  config.validate();
  InitResult out;
  auto fwrap = [&](const Eigen::VectorXd& z) {
    ++out.function_evals;
    return problem.f(z);
  };
  auto gwrap = [&](const Eigen::VectorXd& z) {
    ++out.gradient_evals;
    return problem.grad(z);
  };

  IterationState& st = out.state;
  st.x = problem.x0;
  st.f = fwrap(st.x);
  st.g = gwrap(st.x);
  st.gamma = config.gamma0;
  if (!std::isfinite(st.f) || !st.g.allFinite()) {
    out.status = Status::evaluator_failure;
    return out;
  }
  const double g0n = st.g.norm();
  if (g0n <= config.eps) {
    st.T = TriangularFactor::identity(st.x.size());
    st.G = DiagonalFactor::constant(st.x.size(), 1.0);
    out.status = Status::converged;
    return out;
  }

  const double phi = initial_scaling(g0n, config);
  st.T = TriangularFactor::identity(st.x.size());
  st.G = DiagonalFactor::constant(st.x.size(), phi);

  const Eigen::VectorXd p = -phi * st.g;
  const double dg0 = st.g.dot(p);  // = -phi*||g0||^2 < 0
  WolfeResult ls = strong_wolfe_search(fwrap, gwrap, st.x, p, st.f, dg0, config.wolfe);
  if (!ls.success) {
    out.status = Status::evaluator_failure;
    return out;
  }

  const Eigen::VectorXd step = ls.x - st.x;
  const CurvaturePair pair(step, ls.grad - st.g);
  st.x = ls.x;
  st.f = ls.f;
  st.g = ls.grad;
  st.delta = 2.0 * step.norm();
  st.k = 1;
  if (curvature_admissible(pair)) bfgs_factor_update(st.T, st.G, pair);

  if (st.g.norm() <= config.eps) {
    out.status = Status::converged;
    return out;
  }
  out.proceed = true;
  out.status = Status::iteration_limit;  // placeholder; the main loop decides
  return out;
}

struct DriverDiagnostics {
  std::vector<int> phase1_iterations;       // Newton passes per modified-shift call
  std::vector<int> backtrack_exit_indices;  // exit index per backtracking run
  std::vector<double> delta_history;        // radius after each iteration
  std::vector<double> hnorm1_bound;         // ||T||_1 * max(G) * ||T||_inf per iteration
  std::vector<char> accepted;               // 1 if the trial step was taken
  long exact_subsolves = 0;                 // dense More-Sorensen invocations
  long shift_subsolves = 0;                 // modified-shift invocations
};

// Trust-region driver: full quasi-Newton step when it lies inside the region,
// otherwise the two-phase shifted solve plus shift backtracking; factored
// BFGS updates on accepted steps.
inline SolveReport minimize(const Objective& problem, const SolverConfig& config = {},
                            DriverDiagnostics* diag = nullptr) {
  config.validate();
  const auto t0 = std::chrono::steady_clock::now();
  constexpr double eps_machine = std::numeric_limits<double>::epsilon();

  SolveReport rep;
  InitResult init = initialize(problem, config);
  long fevals = init.function_evals;
  long gevals = init.gradient_evals;
  auto fwrap = [&](const Eigen::VectorXd& z) {
    ++fevals;
    return problem.f(z);
  };
  auto gwrap = [&](const Eigen::VectorXd& z) {
    ++gevals;
    return problem.grad(z);
  };

  IterationState st = std::move(init.state);
  const double f0 = st.f;
  const double g0n = st.g.norm();
  double gn = g0n;

  auto finish = [&](Status raw) {
    rep.status = classify_terminal(raw, f0, st.f, g0n, gn);
    rep.iterations = st.k;
    rep.function_evals = fevals;
    rep.gradient_evals = gevals;
    rep.final_f = st.f;
    rep.final_gnorm = gn;
    rep.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
  };

  if (!init.proceed) return finish(init.status);

  const Eigen::Index n = st.x.size();
  const auto lower = [&]() { return st.T.m.triangularView<Eigen::Lower>(); };

  while (true) {
    if (gn <= config.eps) return finish(Status::converged);
    if (st.k >= config.k_max) return finish(Status::iteration_limit);
    if (st.delta <= config.delta_min) return finish(Status::radius_collapse);
    ++st.k;

    auto log_iteration = [&](bool was_accepted) {
      if (!diag) return;
      diag->delta_history.push_back(st.delta);
      diag->accepted.push_back(was_accepted ? 1 : 0);
      const double t1 = st.T.m.cwiseAbs().colwise().sum().maxCoeff();
      const double tinf = st.T.m.cwiseAbs().rowwise().sum().maxCoeff();
      diag->hnorm1_bound.push_back(t1 * st.G.v.cwiseAbs().maxCoeff() * tinf);
    };

    // (a) Full quasi-Newton step.
    Eigen::VectorXd s = -apply_inverse_factors(st.T, st.G, st.g);
    double ns = s.norm();

    bool ran_backtrack = false;
    int exit_index = 0;
    double f_trial;
    const bool need_phases = st.G.v.minCoeff() <= 0.0 || !(ns <= st.delta) || !s.allFinite();
    if (!need_phases) {
      f_trial = fwrap(st.x + s);
    } else {
      // (b) Shifted boundary step: dense exact solve for small n, the
      // modified-shift Newton iteration otherwise; then shift backtracking,
      // keeping whichever step gives the lower objective value.
      Eigen::VectorXd s_plus;
      double sigma_plus;
      bool phase_ok = true;
      try {
        if (n <= config.n_max) {
          const DirectFactors df = recover_direct_factors(st.T, st.G);
          const Eigen::MatrixXd B =
              df.L * df.D.asDiagonal() * df.L.transpose();
          const SubproblemResult res =
              solve_ms(B, st.g, st.delta, config.ms_tol, config.ms_i_max);
          s_plus = res.s;
          sigma_plus = res.sigma;
          if (diag) ++diag->exact_subsolves;
        } else {
          const DiagonalFactor E = column_norms_sq(st.T);
          const ShiftResult res =
              solve_modified_shift(st.T, st.G, E, st.g, st.delta, 0.0,
                                   config.shift_tol, config.shift_i_max);
          s_plus = res.s_plus;
          sigma_plus = res.sigma_plus;
          if (diag) {
            ++diag->shift_subsolves;
            diag->phase1_iterations.push_back(res.iterations);
          }
        }
      } catch (const std::exception&) {
        phase_ok = false;  // defensive: treat as a failed trial
      }
      if (!phase_ok || !s_plus.allFinite()) {
        st.delta *= config.c7;
        log_iteration(false);
        continue;
      }

      const BacktrackResult bt = backtrack_shift(
          fwrap, st.x, st.f, st.T, st.G, st.g, sigma_plus, st.gamma,
          config.backtrack_i_max, config.cg_tol, config.cg_i_max, config.cg_jacobi);
      ran_backtrack = true;
      exit_index = bt.exit_index;
      if (diag) diag->backtrack_exit_indices.push_back(bt.exit_index);

      const double f_plus = fwrap(st.x + s_plus);
      if (f_plus < bt.f_best) {
        s = s_plus;
        f_trial = f_plus;
      } else {
        s = bt.s_best;
        f_trial = bt.f_best;
      }
      ns = s.norm();
    }

    // Non-finite objective at the trial point: reject and shrink.
    if (!std::isfinite(f_trial) || !std::isfinite(ns) || ns == 0.0) {
      st.delta *= config.c7;
      log_iteration(false);
      continue;
    }

    const double df = st.f - f_trial;
    const double delta_before = st.delta;
    bool accepted;
    Eigen::VectorXd g_new;
    bool have_g_new = false;

    if (std::abs(df) <= 4.0 * eps_machine * std::max(1.0, std::abs(st.f))) {
      // Reduction at round-off level: fall back to requiring a gradient-norm
      // decrease; hold the radius on acceptance, shrink on rejection.
      g_new = gwrap(st.x + s);
      have_g_new = true;
      accepted = g_new.allFinite() && g_new.norm() < gn;
      st.delta = accepted ? st.delta : st.delta * config.c7;
    } else {
      // (c) rho = actual reduction over predicted reduction, with
      // T*G*T' * h = s so that h = B*s.
      Eigen::VectorXd h = lower().solve(s);
      h.array() /= st.G.v.array();
      h = st.T.m.transpose().triangularView<Eigen::Upper>().solve(h);
      const double pred = -(s.dot(st.g) + 0.5 * s.dot(h));
      const double rho = df / pred;
      if (!(pred > 0.0) || !std::isfinite(rho)) {
        st.delta *= config.c7;
        log_iteration(false);
        continue;
      }
      accepted = rho > config.c1;

      // (e) Three-way radius branch.
      if (rho > config.c2) {
        if (!(ns <= config.c3 * st.delta)) st.delta *= config.c4;
      } else if (!(config.c5 <= rho && rho <= config.c6)) {
        st.delta *= config.c7;
      }
    }

    if (accepted && !have_g_new) {
      g_new = gwrap(st.x + s);
      have_g_new = true;
      if (!g_new.allFinite()) {
        // Gradient evaluator failed at the trial point: treat as a rejected
        // trial and shrink from the pre-branch radius.
        accepted = false;
        st.delta = delta_before * config.c7;
      }
    }

    if (accepted) {
      // (d) gamma adaptation from the backtracking exit index.
      if (ran_backtrack) {
        if (exit_index == 2)
          st.gamma = std::min(2.0 * st.gamma, config.gamma_max);
        else if (exit_index == config.backtrack_i_max)
          st.gamma = std::max(0.5 * st.gamma, config.gamma_min);
      }
      // (f) Factored BFGS update from the accepted pair.
      const CurvaturePair pair(s, g_new - st.g);
      if (curvature_admissible(pair)) bfgs_factor_update(st.T, st.G, pair);
      st.x += s;
      st.f = f_trial;
      st.g = g_new;
      gn = st.g.norm();
    } else if (config.update_on_rejected) {
      if (!have_g_new) {
        g_new = gwrap(st.x + s);
        have_g_new = true;
      }
      if (g_new.allFinite()) {
        const CurvaturePair pair(s, g_new - st.g);
        if (curvature_admissible(pair)) bfgs_factor_update(st.T, st.G, pair);
      }
    }
    log_iteration(accepted);
  }
}

}  // namespace ldltr
