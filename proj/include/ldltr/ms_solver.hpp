#pragma once

#include <Eigen/Core>

#include <chrono>
#include <cmath>
#include <limits>

#include "ldltr/driver.hpp"
#include "ldltr/linesearch.hpp"
#include "ldltr/subproblem_exact.hpp"
#include "ldltr/types.hpp"

namespace ldltr {

// Dense More-Sorensen trust-region baseline: keeps an explicit BFGS
// approximation B of the Hessian and solves the subproblem exactly each
// iteration. Shares the initialization, acceptance, radius, and termination
// rules with the factored driver; there is no shift backtracking.
inline SolveReport ms_minimize(const Objective& problem, const SolverConfig& config = {}) {
  config.validate();
  const auto t0 = std::chrono::steady_clock::now();
  constexpr double eps_machine = std::numeric_limits<double>::epsilon();

  SolveReport rep;
  long fevals = 0, gevals = 0;
  auto fwrap = [&](const Eigen::VectorXd& z) { ++fevals; return problem.f(z); };
  auto gwrap = [&](const Eigen::VectorXd& z) { ++gevals; return problem.grad(z); };

  Eigen::VectorXd x = problem.x0;
  double fk = fwrap(x);
  Eigen::VectorXd g = gwrap(x);
  double gn = g.norm();
  long k = 0;
  const double f0 = fk;
  const double g0n = gn;
  auto finish = [&](Status raw) {
    rep.status = classify_terminal(raw, f0, fk, g0n, gn);
    rep.iterations = k;
    rep.function_evals = fevals;
    rep.gradient_evals = gevals;
    rep.final_f = fk;
    rep.final_gnorm = gn;
    rep.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
  };

  if (!std::isfinite(fk) || !g.allFinite()) return finish(Status::evaluator_failure);
  if (gn <= config.eps) return finish(Status::converged);

  const Eigen::Index n = x.size();
  const double phi = initial_scaling(gn, config);
  Eigen::MatrixXd B = (1.0 / phi) * Eigen::MatrixXd::Identity(n, n);

  auto update_B = [&](const Eigen::VectorXd& s, const Eigen::VectorXd& y) {
    const CurvaturePair pair(s, y);
    if (!curvature_admissible(pair)) return;
    const Eigen::VectorXd Bs = B.selfadjointView<Eigen::Lower>() * s;
    const double sBs = s.dot(Bs);
    if (!(sBs > 0.0)) return;
    B += (y * y.transpose()) / pair.sy;
    B -= (Bs * Bs.transpose()) / sBs;
  };

  // First step by strong-Wolfe line search along -phi*g, as in the driver;
  // Delta_1 = 2*||x_1 - x_0||.
  double delta;
  {
    const Eigen::VectorXd p = -phi * g;
    const double dg0 = g.dot(p);
    WolfeResult ls = strong_wolfe_search(fwrap, gwrap, x, p, fk, dg0, config.wolfe);
    if (!ls.success) return finish(Status::evaluator_failure);
    const Eigen::VectorXd step = ls.x - x;
    update_B(step, ls.grad - g);
    x = ls.x;
    fk = ls.f;
    g = ls.grad;
    gn = g.norm();
    k = 1;
    delta = 2.0 * step.norm();
  }

  while (true) {
    if (gn <= config.eps) return finish(Status::converged);
    if (k >= config.k_max) return finish(Status::iteration_limit);
    if (delta <= config.delta_min) return finish(Status::radius_collapse);
    ++k;

    Eigen::VectorXd s;
    bool solved = true;
    try {
      const SubproblemResult sub = solve_ms(B, g, delta, config.ms_tol, config.ms_i_max);
      s = sub.s;
    } catch (const std::exception&) {
      solved = false;
    }
    if (!solved || !s.allFinite() || s.norm() == 0.0) {
      delta *= config.c7;
      continue;
    }

    const double f_trial = fwrap(x + s);
    if (!std::isfinite(f_trial)) {
      delta *= config.c7;
      continue;
    }

    const double df = fk - f_trial;
    const double delta_before = delta;
    bool accepted;
    Eigen::VectorXd g_new;
    bool have_g_new = false;

    if (std::abs(df) <= 4.0 * eps_machine * std::max(1.0, std::abs(fk))) {
      g_new = gwrap(x + s);
      have_g_new = true;
      accepted = g_new.allFinite() && g_new.norm() < gn;
      delta = accepted ? delta : delta * config.c7;
    } else {
      const Eigen::VectorXd Bs = B.selfadjointView<Eigen::Lower>() * s;
      const double pred = -(s.dot(g) + 0.5 * s.dot(Bs));
      const double rho = df / pred;
      if (!(pred > 0.0) || !std::isfinite(rho)) {
        delta *= config.c7;
        continue;
      }
      accepted = rho > config.c1;
      if (rho > config.c2) {
        if (!(s.norm() <= config.c3 * delta)) delta *= config.c4;
      } else if (!(config.c5 <= rho && rho <= config.c6)) {
        delta *= config.c7;
      }
    }

    if (accepted && !have_g_new) {
      g_new = gwrap(x + s);
      have_g_new = true;
      if (!g_new.allFinite()) {
        accepted = false;
        delta = delta_before * config.c7;
      }
    }

    if (accepted) {
      update_B(s, g_new - g);
      x += s;
      fk = f_trial;
      g = g_new;
      gn = g.norm();
    }
  }
}

}  // namespace ldltr
