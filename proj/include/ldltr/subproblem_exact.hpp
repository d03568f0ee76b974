#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "ldltr/types.hpp"

namespace ldltr {

struct SubproblemResult {
  Eigen::VectorXd s;
  double sigma = 0.0;
  int iterations = 0;
  double residual = 0.0;      // ||(B + sigma I) s + g||
  double boundary_gap = 0.0;  // | ||s|| - Delta |
  bool converged = true;
  std::vector<double> bracket_widths;  // sigma_U - sigma_L after each iteration
};

// Newton iteration on the secular equation for the two-norm trust-region
// subproblem min g's + s'Bs/2 s.t. ||s|| <= delta, with safeguarding by a
// shrinking bracket [sigma_L, sigma_U] and bisection fallback.  Repeated
// Cholesky factorizations of B + sigma I make this O(n^3) per call; it is
// intended for small n.
inline SubproblemResult solve_ms(const Eigen::MatrixXd& B, const Eigen::VectorXd& g,
                                 double delta, double tol = 1e-8, int i_max = 50) {
  const Eigen::Index n = B.rows();
  if (B.cols() != n || g.size() != n)
    throw std::invalid_argument("solve_ms: dimension mismatch");
  if (!(delta > 0.0))
    throw std::invalid_argument("solve_ms: trust radius must be positive");
  if (!B.allFinite() || !g.allFinite())
    throw std::invalid_argument("solve_ms: non-finite input");

  const Eigen::MatrixXd Bs = 0.5 * (B + B.transpose());  // enforce symmetry
  const double b_norm1 = Bs.cwiseAbs().colwise().sum().maxCoeff();
  const double g_norm = g.norm();
  const double eps = std::numeric_limits<double>::epsilon();

  SubproblemResult res;

  // Interior test: when B itself is positive definite and the unconstrained
  // step fits inside the region, sigma = 0 and no iteration is needed.
  {
    Eigen::LLT<Eigen::MatrixXd> llt(Bs);
    if (llt.info() == Eigen::Success) {
      Eigen::VectorXd s0 = llt.solve(-g);
      if (s0.allFinite() && s0.norm() <= delta) {
        res.s = std::move(s0);
        res.sigma = 0.0;
        res.residual = (Bs * res.s + g).norm();
        res.boundary_gap = std::abs(res.s.norm() - delta);
        return res;
      }
    }
  }

  // Outside sigma_U the step is guaranteed interior: lambda_min + sigma_U >=
  // sigma_U - ||B||_1 >= ||g||/delta, so ||s(sigma_U)|| <= delta.
  double sigma_lo = 0.0;
  double sigma_hi = g_norm / delta + b_norm1;

  // Initial shift: Gershgorin bound on the most negative eigenvalue plus a
  // small margin, doubled until the shifted matrix factors.
  double gersh = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < n; ++j)
    gersh = std::min(gersh, 2.0 * Bs(j, j) - Bs.col(j).cwiseAbs().sum());
  double margin = std::sqrt(eps) * std::max(b_norm1, 1.0);
  double sigma = std::max(0.0, -gersh) + margin;

  Eigen::MatrixXd shifted(n, n);
  Eigen::LLT<Eigen::MatrixXd> llt;
  bool factored = false;
  for (int attempt = 0; attempt < 30; ++attempt) {
    shifted = Bs;
    shifted.diagonal().array() += sigma;
    llt.compute(shifted);
    if (llt.info() == Eigen::Success) { factored = true; break; }
    sigma_lo = std::max(sigma_lo, sigma);
    margin *= 2.0;
    sigma = std::max(0.0, -gersh) + margin;
  }
  if (!factored)
    throw std::runtime_error("solve_ms: could not factor B + sigma I");
  sigma_hi = std::max(sigma_hi, sigma);

  double best_gap = std::numeric_limits<double>::infinity();
  res.converged = false;

  for (int i = 0; i < i_max; ++i) {
    ++res.iterations;
    Eigen::VectorXd s = llt.solve(-g);
    const double ns = s.norm();
    const double gap = std::abs(ns - delta);
    if (gap < best_gap) {
      best_gap = gap;
      res.s = s;
      res.sigma = sigma;
      res.boundary_gap = gap;
    }
    if (gap <= tol * delta) {
      res.converged = true;
      res.bracket_widths.push_back(sigma_hi - sigma_lo);
      break;
    }

    // Bracket maintenance: ||s(sigma)|| decreases in sigma.
    if (ns > delta) sigma_lo = std::max(sigma_lo, sigma);
    else            sigma_hi = std::min(sigma_hi, sigma);

    // Newton step on 1/delta - 1/||s||, safeguarded by bisection.
    const Eigen::MatrixXd& R = llt.matrixLLT();
    Eigen::VectorXd q =
        R.triangularView<Eigen::Lower>().solve(s);  // LLT stores the lower factor
    double next = sigma + (s.squaredNorm() / q.squaredNorm()) * ((ns - delta) / delta);
    if (!(next > sigma_lo && next < sigma_hi) || !std::isfinite(next))
      next = 0.5 * (sigma_lo + sigma_hi);

    sigma = next;
    shifted = Bs;
    shifted.diagonal().array() += sigma;
    llt.compute(shifted);
    while (llt.info() != Eigen::Success) {
      // Newton undershot the smallest feasible shift; move back up.
      sigma_lo = std::max(sigma_lo, sigma);
      sigma = 0.5 * (sigma_lo + sigma_hi);
      shifted = Bs;
      shifted.diagonal().array() += sigma;
      llt.compute(shifted);
    }
    res.bracket_widths.push_back(sigma_hi - sigma_lo);
  }

  res.residual = ((Bs * res.s).eval() + res.sigma * res.s + g).norm();
  res.boundary_gap = std::abs(res.s.norm() - delta);
  return res;
}

}  // namespace ldltr
