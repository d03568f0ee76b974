#pragma once

#include <Eigen/Core>

#include <cmath>
#include <limits>
#include <stdexcept>

#include "ldltr/types.hpp"

namespace ldltr {

struct ShiftResult {
  Eigen::VectorXd s_plus;
  double sigma_plus = 0.0;
  int iterations = 0;          // secular-function evaluations (Newton passes)
  double boundary_gap = 0.0;   // | ||s+|| - delta |
  bool converged = true;
  bool interior = false;       // sigma+ = 0 with the unshifted step inside
};

// Phase 1: Newton iteration on the modified secular equation, using only the
// inverse factors.  Each pass solves the diagonally shifted system in inverse
// form (h = -T'g once; w = (D + sigma E)^-1 h; s+ = T w) and forms the
// derivative vector q+ = T ((D + sigma E)^-1 (-E.w)) from the same diagonal
// solve, so the per-pass cost is two triangular products.
inline ShiftResult solve_modified_shift(const TriangularFactor& T,
                                        const DiagonalFactor& G,
                                        const DiagonalFactor& E,
                                        const Eigen::VectorXd& g, double delta,
                                        double sigma0, double tol = 1e-4,
                                        int i_max = 10) {
  const Eigen::Index n = T.n();
  if (G.n() != n || E.n() != n || g.size() != n)
    throw std::invalid_argument("solve_modified_shift: dimension mismatch");
  if (!(delta > 0.0))
    throw std::invalid_argument("solve_modified_shift: trust radius must be positive");
  if ((G.v.array() <= 0.0).any() || (E.v.array() <= 0.0).any())
    throw std::invalid_argument("solve_modified_shift: G and E must be entrywise positive");
  if (!g.allFinite() || !std::isfinite(sigma0) || sigma0 < 0.0)
    throw std::invalid_argument("solve_modified_shift: non-finite input");

  const Eigen::VectorXd d = G.v.cwiseInverse();  // D = G^-1, entrywise positive
  const Eigen::VectorXd h = -(T.m.transpose().triangularView<Eigen::Upper>() * g);

  // Smallest shift keeping D + sigma E entrywise positive; with D > 0 this is
  // negative and the clamp below reduces to sigma >= 0.
  const double sigma_floor = std::max(0.0, (-d.array() / E.v.array()).maxCoeff());

  ShiftResult res;
  double sigma = std::max(sigma0, sigma_floor);
  double sigma_lo = sigma_floor;  // largest shift seen with ||s+|| > delta
  bool lo_evaluated = false;      // whether sigma_lo comes from an actual pass
  double sigma_hi = std::numeric_limits<double>::infinity();
  double best_gap = std::numeric_limits<double>::infinity();
  res.converged = false;

  Eigen::VectorXd w(n), s(n), q(n);
  for (int i = 0; i < i_max; ++i) {
    ++res.iterations;
    const Eigen::ArrayXd denom = d.array() + sigma * E.v.array();
    w = h.array() / denom;
    s = T.m.triangularView<Eigen::Lower>() * w;
    const double ns = s.norm();
    const double gap = std::abs(ns - delta);

    if (gap < best_gap) {
      best_gap = gap;
      res.s_plus = s;
      res.sigma_plus = sigma;
      res.boundary_gap = gap;
    }
    if (sigma == 0.0 && ns <= delta) {
      // Complementarity holds with a zero shift: interior step, done.
      res.s_plus = s;
      res.sigma_plus = 0.0;
      res.boundary_gap = gap;
      res.converged = true;
      res.interior = true;
      return res;
    }
    if (gap <= tol * delta) {
      res.converged = true;
      return res;
    }
    if (!std::isfinite(ns)) throw std::runtime_error("solve_modified_shift: non-finite step");

    if (ns > delta) { sigma_lo = std::max(sigma_lo, sigma); lo_evaluated = true; }
    else            { sigma_hi = std::min(sigma_hi, sigma); }

    // Newton update; the derivative s+'q+ is negative whenever s+ != 0.
    // A flat or non-finite derivative falls back to bisection on the bracket.
    q = T.m.triangularView<Eigen::Lower>() * (-(E.v.array() * w.array()) / denom).matrix();
    const double sq = s.dot(q);
    double next = std::numeric_limits<double>::quiet_NaN();
    if (sq != 0.0 && std::isfinite(sq)) {
      next = sigma - (s.squaredNorm() / sq) * ((ns - delta) / delta);
      next = std::max(next, sigma_floor);  // keep D + sigma E entrywise >= 0
    }
    const bool below = lo_evaluated ? !(next > sigma_lo) : !(next >= sigma_lo);
    if (!std::isfinite(next) || below || next >= sigma_hi)
      next = std::isfinite(sigma_hi) ? 0.5 * (sigma_lo + sigma_hi)
                                     : 2.0 * sigma + 1.0;
    sigma = next;
  }
  return res;
}

}  // namespace ldltr
