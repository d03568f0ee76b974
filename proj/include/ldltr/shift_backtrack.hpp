#pragma once

#include <Eigen/Core>

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "ldltr/types.hpp"
#include "ldltr/shifted_solve.hpp"

namespace ldltr {

struct BacktrackResult {
  Eigen::VectorXd s_best;
  double f_best = 0.0;
  double sigma_used = 0.0;
  int exit_index = 0;          // trials evaluated; equals function_evals
  int exit_index_literal = 0;  // first i with f(x) <= f(x + s_i); 0 if none
  int function_evals = 0;
  std::vector<double> trial_sigmas;
};

// Geometric backtracking on the shift: trial i solves the shifted system at
// sigma0 * gamma^(i-1) and the loop continues while each new trial strictly
// improves the best objective value seen so far.  The best evaluated trial is
// returned, never merely the last one.  sigma0 = 0 degenerates to a single
// unshifted solve.
inline BacktrackResult backtrack_shift(
    const std::function<double(const Eigen::VectorXd&)>& objective,
    const Eigen::VectorXd& x, double f_x, const TriangularFactor& T,
    const DiagonalFactor& G, const Eigen::VectorXd& g, double sigma0,
    double gamma, int i_max, double cg_tol = 1e-8, int i_cg_max = 15,
    bool jacobi_precond = false) {
  if (!(sigma0 >= 0.0))
    throw std::invalid_argument("backtrack_shift: sigma0 must be nonnegative");
  if (!(gamma > 0.0 && gamma < 1.0))
    throw std::invalid_argument("backtrack_shift: gamma must lie in (0,1)");
  if (i_max < 1)
    throw std::invalid_argument("backtrack_shift: i_max must be at least 1");

  BacktrackResult res;
  double best = std::numeric_limits<double>::infinity();
  double sigma = sigma0;

  for (int i = 1; i <= i_max; ++i) {
    res.trial_sigmas.push_back(sigma);
    CGReport cg = cg_solve_shifted(T, G, g, sigma, cg_tol, i_cg_max, jacobi_precond);

    double f_trial = std::numeric_limits<double>::infinity();
    if (!cg.breakdown) {
      f_trial = objective(x + cg.s);
      ++res.function_evals;
      if (!std::isfinite(f_trial)) f_trial = std::numeric_limits<double>::infinity();
    } else {
      // Unusable solve: surface a zero step so the caller's keep-better
      // comparison discards this trial.
      cg.s = Eigen::VectorXd::Zero(x.size());
    }
    res.exit_index = i;

    // The first trial is compared against f(x); later trials against the best
    // value seen before them (successive improvement).
    const double reference = (i == 1) ? f_x : best;
    const bool improving = f_trial < reference;

    if (res.exit_index_literal == 0 && f_x <= f_trial) res.exit_index_literal = i;
    if (i == 1 || f_trial < best) {
      best = f_trial;
      res.s_best = cg.s;
      res.f_best = f_trial;
      res.sigma_used = sigma;
    }
    if (!improving || sigma == 0.0) break;
    sigma *= gamma;
  }
  return res;
}

}  // namespace ldltr
