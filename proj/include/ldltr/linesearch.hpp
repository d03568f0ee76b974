#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include "ldltr/types.hpp"

namespace ldltr {

struct WolfeParams {
  double c_armijo = 1e-4;  // sufficient-decrease constant
  double c_curv = 0.9;     // curvature constant
  double alpha_init = 1.0;
  double alpha_min = 1e-20;
  double alpha_max = 1e20;
  int max_trials = 40;
  double xtol = 1e-14;  // relative interval-width floor
};

struct WolfeResult {
  double alpha = 0.0;
  double f = 0.0;           // f(x + alpha p)
  Eigen::VectorXd x;        // trial point, so callers need not recompute
  Eigen::VectorXd grad;     // gradient at the trial point
  int function_evals = 0;   // paired f/grad evaluations
  bool success = false;
};

namespace detail {

// Safeguarded step chooser: updates the interval of uncertainty and picks the
// next trial by cubic/quadratic interpolation (the classical cstep logic).
inline bool wolfe_cstep(double& stx, double& fx, double& dx, double& sty,
                        double& fy, double& dy, double& stp, double fp,
                        double dp, bool& brackt, double stpmin, double stpmax) {
  if ((brackt && (stp <= std::min(stx, sty) || stp >= std::max(stx, sty))) ||
      dx * (stp - stx) >= 0.0 || stpmax < stpmin)
    return false;

  const double sgnd = dp * (dx / std::abs(dx));
  double stpf = stp;
  bool bound = false;

  if (fp > fx) {
    // Higher value: the minimum is bracketed between stx and stp.
    bound = true;
    const double theta = 3.0 * (fx - fp) / (stp - stx) + dx + dp;
    const double s = std::max({std::abs(theta), std::abs(dx), std::abs(dp)});
    double gamma = s * std::sqrt((theta / s) * (theta / s) - (dx / s) * (dp / s));
    if (stp < stx) gamma = -gamma;
    const double p = (gamma - dx) + theta;
    const double q = ((gamma - dx) + gamma) + dp;
    const double r = p / q;
    const double stpc = stx + r * (stp - stx);
    const double stpq =
        stx + ((dx / ((fx - fp) / (stp - stx) + dx)) / 2.0) * (stp - stx);
    stpf = (std::abs(stpc - stx) < std::abs(stpq - stx)) ? stpc
                                                         : stpc + (stpq - stpc) / 2.0;
    brackt = true;
  } else if (sgnd < 0.0) {
    // Opposite derivative signs: the minimum is bracketed.
    bound = false;
    const double theta = 3.0 * (fx - fp) / (stp - stx) + dx + dp;
    const double s = std::max({std::abs(theta), std::abs(dx), std::abs(dp)});
    double gamma = s * std::sqrt((theta / s) * (theta / s) - (dx / s) * (dp / s));
    if (stp > stx) gamma = -gamma;
    const double p = (gamma - dp) + theta;
    const double q = ((gamma - dp) + gamma) + dx;
    const double r = p / q;
    const double stpc = stp + r * (stx - stp);
    const double stpq = stp + (dp / (dp - dx)) * (stx - stp);
    stpf = (std::abs(stpc - stp) > std::abs(stpq - stp)) ? stpc : stpq;
    brackt = true;
  } else if (std::abs(dp) < std::abs(dx)) {
    // Lower value, same sign, decreasing magnitude.
    bound = true;
    const double theta = 3.0 * (fx - fp) / (stp - stx) + dx + dp;
    const double s = std::max({std::abs(theta), std::abs(dx), std::abs(dp)});
    double gamma =
        s * std::sqrt(std::max(0.0, (theta / s) * (theta / s) - (dx / s) * (dp / s)));
    if (stp > stx) gamma = -gamma;
    const double p = (gamma - dp) + theta;
    const double q = (gamma + (dx - dp)) + gamma;
    const double r = p / q;
    double stpc;
    if (r < 0.0 && gamma != 0.0)
      stpc = stp + r * (stx - stp);
    else
      stpc = (stp > stx) ? stpmax : stpmin;
    const double stpq = stp + (dp / (dp - dx)) * (stx - stp);
    if (brackt) {
      stpf = (std::abs(stp - stpc) < std::abs(stp - stpq)) ? stpc : stpq;
      if (stp > stx)
        stpf = std::min(stp + 0.66 * (sty - stp), stpf);
      else
        stpf = std::max(stp + 0.66 * (sty - stp), stpf);
    } else {
      stpf = (std::abs(stp - stpc) > std::abs(stp - stpq)) ? stpc : stpq;
      stpf = std::clamp(stpf, stpmin, stpmax);
    }
  } else {
    // Lower value, same sign, non-decreasing magnitude.
    bound = false;
    if (brackt) {
      const double theta = 3.0 * (fp - fy) / (sty - stp) + dy + dp;
      const double s = std::max({std::abs(theta), std::abs(dy), std::abs(dp)});
      double gamma = s * std::sqrt((theta / s) * (theta / s) - (dy / s) * (dp / s));
      if (stp > sty) gamma = -gamma;
      const double p = (gamma - dp) + theta;
      const double q = ((gamma - dp) + gamma) + dy;
      const double r = p / q;
      stpf = stp + r * (sty - stp);
    } else {
      stpf = (stp > stx) ? stpmax : stpmin;
    }
  }

  // Interval update.
  if (fp > fx) {
    sty = stp;
    fy = fp;
    dy = dp;
  } else {
    if (sgnd < 0.0) {
      sty = stx;
      fy = fx;
      dy = dx;
    }
    stx = stp;
    fx = fp;
    dx = dp;
  }

  stp = std::clamp(stpf, stpmin, stpmax);
  if (brackt && bound) {
    if (sty > stx)
      stp = std::min(stx + 0.66 * (sty - stx), stp);
    else
      stp = std::max(stx + 0.66 * (sty - stx), stp);
  }
  return true;
}

}  // namespace detail

// More-Thuente style search for a step satisfying the strong Wolfe conditions
//   f(x+ap) <= f0 + c_armijo*a*g0'p   and   |g(x+ap)'p| <= c_curv*|g0'p|.
// On failure the best-effort step is returned with success = false.
inline WolfeResult strong_wolfe_search(
    const std::function<double(const Eigen::VectorXd&)>& f,
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& grad,
    const Eigen::VectorXd& x, const Eigen::VectorXd& p, double f0, double g0tp,
    const WolfeParams& params) {
  if (!(g0tp < 0.0))
    throw std::invalid_argument("strong_wolfe_search: direction is not a descent direction");
  if (!(params.c_armijo > 0.0 && params.c_armijo < params.c_curv && params.c_curv < 1.0))
    throw std::invalid_argument("strong_wolfe_search: need 0 < c_armijo < c_curv < 1");

  WolfeResult out;
  const double dginit = g0tp;
  const double dgtest = params.c_armijo * dginit;

  bool brackt = false;
  bool stage1 = true;
  bool infoc = true;
  double width = params.alpha_max - params.alpha_min;
  double width1 = 2.0 * width;

  double stx = 0.0, fx = f0, dgx = dginit;
  double sty = 0.0, fy = f0, dgy = dginit;
  double stp = std::clamp(params.alpha_init, params.alpha_min, params.alpha_max);

  int info = 0;
  double fp = f0, dg = dginit;
  while (true) {
    double stmin, stmax;
    if (brackt) {
      stmin = std::min(stx, sty);
      stmax = std::max(stx, sty);
    } else {
      stmin = stx;
      stmax = stp + 4.0 * (stp - stx);
    }
    stp = std::clamp(stp, params.alpha_min, params.alpha_max);

    // Fall back to the best point so far when no further progress is possible.
    if ((brackt && (stp <= stmin || stp >= stmax)) ||
        out.function_evals >= params.max_trials - 1 || !infoc ||
        (brackt && stmax - stmin <= params.xtol * stmax))
      stp = stx;

    out.x = x + stp * p;
    fp = f(out.x);
    out.grad = grad(out.x);
    ++out.function_evals;
    dg = std::isfinite(fp) ? out.grad.dot(p) : std::numeric_limits<double>::infinity();
    if (!std::isfinite(fp)) fp = std::numeric_limits<double>::infinity();
    const double ftest1 = f0 + stp * dgtest;

    info = 0;
    if ((brackt && (stp <= stmin || stp >= stmax)) || !infoc) info = 6;
    if (stp == params.alpha_max && fp <= ftest1 && dg <= dgtest) info = 5;
    if (stp == params.alpha_min && (fp > ftest1 || dg >= dgtest)) info = 4;
    if (out.function_evals >= params.max_trials) info = 3;
    if (brackt && stmax - stmin <= params.xtol * stmax) info = 2;
    if (fp <= ftest1 && std::abs(dg) <= params.c_curv * (-dginit)) info = 1;
    if (info != 0) break;

    if (stage1 && fp <= ftest1 && dg >= std::min(params.c_armijo, params.c_curv) * dginit)
      stage1 = false;

    if (stage1 && fp <= fx && fp > ftest1) {
      // Work on the auxiliary (shifted) function until sufficient decrease holds.
      double fm = fp - stp * dgtest;
      double fxm = fx - stx * dgtest;
      double fym = fy - sty * dgtest;
      double dgm = dg - dgtest;
      double dgxm = dgx - dgtest;
      double dgym = dgy - dgtest;
      infoc = detail::wolfe_cstep(stx, fxm, dgxm, sty, fym, dgym, stp, fm, dgm,
                                  brackt, stmin, stmax);
      fx = fxm + stx * dgtest;
      fy = fym + sty * dgtest;
      dgx = dgxm + dgtest;
      dgy = dgym + dgtest;
    } else {
      infoc = detail::wolfe_cstep(stx, fx, dgx, sty, fy, dgy, stp, fp, dg,
                                  brackt, stmin, stmax);
    }

    if (brackt) {
      if (std::abs(sty - stx) >= 0.66 * width1) stp = stx + 0.5 * (sty - stx);
      width1 = width;
      width = std::abs(sty - stx);
    }
  }

  out.alpha = stp;
  out.f = fp;
  // Re-verify the two inequalities at the returned point rather than trusting
  // the termination code.
  out.success = info == 1 && fp <= f0 + params.c_armijo * stp * dginit &&
                std::abs(dg) <= params.c_curv * std::abs(dginit) && stp > 0.0;
  return out;
}

struct BfgsrConfig {
  double eps = 1e-4;
  long k_max = 6000;
  WolfeParams wolfe{};
  double phi_min = 1e-2;
  double phi_max = 1e4;
  // First-iteration trial step min(1, 2(f_guess - f0)/g0'p) with
  // f_guess = f0 - ||g0||; overridable.
  bool scaled_first_step = true;
};

// Dense inverse-Hessian BFGS with a strong-Wolfe line search: the baseline
// solver for head-to-head benchmark comparisons.
inline SolveReport bfgsr_minimize(const Objective& problem, const BfgsrConfig& config = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  SolveReport rep;
  long fevals = 0, gevals = 0;
  auto fwrap = [&](const Eigen::VectorXd& z) { ++fevals; return problem.f(z); };
  auto gwrap = [&](const Eigen::VectorXd& z) { ++gevals; return problem.grad(z); };
  auto finish = [&](Status raw, double f0, double fk, double g0n, double gkn) {
    rep.status = classify_terminal(raw, f0, fk, g0n, gkn);
    rep.function_evals = fevals;
    rep.gradient_evals = gevals;
    rep.final_f = fk;
    rep.final_gnorm = gkn;
    rep.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
  };

  Eigen::VectorXd x = problem.x0;
  double fk = fwrap(x);
  Eigen::VectorXd g = gwrap(x);
  if (!std::isfinite(fk) || !g.allFinite())
    return finish(Status::evaluator_failure, fk, fk, g.norm(), g.norm());
  const double f0 = fk;
  const double g0n = g.norm();
  double gn = g0n;
  if (gn <= config.eps) return finish(Status::converged, f0, fk, g0n, gn);

  const Eigen::Index n = x.size();
  const double phi = std::min(std::max(config.phi_min, 1.0 / g0n), config.phi_max);
  Eigen::MatrixXd H = phi * Eigen::MatrixXd::Identity(n, n);

  for (long k = 1; k <= config.k_max; ++k) {
    Eigen::VectorXd p = -(H.selfadjointView<Eigen::Lower>() * g);
    double dg0 = g.dot(p);
    if (!(dg0 < 0.0)) {
      // Accumulated round-off broke descent; restart from the scaled identity.
      H = phi * Eigen::MatrixXd::Identity(n, n);
      p = -phi * g;
      dg0 = g.dot(p);
      if (!(dg0 < 0.0)) return finish(Status::linesearch_failure, f0, fk, g0n, gn);
    }

    WolfeParams wp = config.wolfe;
    if (k == 1 && config.scaled_first_step)
      wp.alpha_init = std::min(1.0, 2.0 * (-gn) / dg0);
    WolfeResult ls = strong_wolfe_search(fwrap, gwrap, x, p, fk, dg0, wp);
    if (!ls.success) {
      rep.iterations = k - 1;
      return finish(Status::linesearch_failure, f0, fk, g0n, gn);
    }

    const Eigen::VectorXd s = ls.x - x;
    const Eigen::VectorXd y = ls.grad - g;
    const double sy = y.dot(s);
    x = ls.x;
    fk = ls.f;
    g = ls.grad;
    gn = g.norm();
    rep.iterations = k;
    if (gn <= config.eps) return finish(Status::converged, f0, fk, g0n, gn);

    // The Wolfe curvature condition guarantees y's > 0 on successful searches.
    if (sy > 0.0) {
      const Eigen::VectorXd Hy = H.selfadjointView<Eigen::Lower>() * y;
      const double yHy = y.dot(Hy);
      H += ((sy + yHy) / (sy * sy)) * (s * s.transpose());
      H -= (Hy * s.transpose() + s * Hy.transpose()) / sy;
    }
  }
  return finish(Status::iteration_limit, f0, fk, g0n, gn);
}

}  // namespace ldltr
