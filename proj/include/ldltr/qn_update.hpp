#pragma once

#include <Eigen/Core>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

#include "ldltr/types.hpp"
#include "ldltr/factored_ops.hpp"

namespace ldltr {

struct CurvaturePair {
  Eigen::VectorXd s;  // x_{k+1} - x_k
  Eigen::VectorXd y;  // g_{k+1} - g_k
  double sy = 0.0;    // y's

  CurvaturePair() = default;
  CurvaturePair(Eigen::VectorXd step, Eigen::VectorXd grad_diff)
      : s(std::move(step)), y(std::move(grad_diff)), sy(y.dot(s)) {}
};

// Admissibility guard: updates are applied only for safely positive curvature.
inline bool curvature_admissible(const CurvaturePair& pair) {
  const double thresh = std::sqrt(std::numeric_limits<double>::epsilon());
  return pair.sy > thresh * pair.y.norm() * pair.s.norm();
}

struct BfgsCoefficients {
  double alpha1 = 0.0;
  Eigen::VectorXd a1;
  double alpha2 = 0.0;
  Eigen::VectorXd a2;
};

// Rank-one decomposition of the rank-two BFGS inverse correction:
// alpha1*a1*a1' + alpha2*a2*a2' equals
// (y's + y'Hy)/(y's)^2 * ss' - (Hy s' + s y'H)/(y's).
inline BfgsCoefficients bfgs_coefficients(const CurvaturePair& pair,
                                          const Eigen::VectorXd& Hy) {
  if (Hy.size() != pair.s.size())
    throw std::invalid_argument("bfgs_coefficients: dimension mismatch");
  if (!(pair.sy > 0.0))
    throw std::invalid_argument("bfgs_coefficients: y's must be positive");
  const double yHy = pair.y.dot(Hy);
  const double beta1 = (pair.sy + yHy) / (pair.sy * pair.sy);

  BfgsCoefficients c;
  c.alpha1 = beta1;
  c.alpha2 = -1.0 / (pair.sy + yHy);  // = -beta2^2/beta1 with beta2 = 1/y's
  c.a1 = pair.s + (pair.sy * c.alpha2) * Hy;
  c.a2 = Hy;
  return c;
}

enum class UpdateOutcome { applied, curvature_rejected, update_failed };

// BFGS update applied directly to the inverse factors as two rank-one
// corrections.  On anything but `applied` the factors are left unchanged.
inline UpdateOutcome bfgs_factor_update(TriangularFactor& T, DiagonalFactor& G,
                                        const CurvaturePair& pair,
                                        UpdateStats* stats = nullptr) {
  if (T.n() != pair.s.size() || G.n() != pair.s.size())
    throw std::invalid_argument("bfgs_factor_update: dimension mismatch");
  if (!curvature_admissible(pair)) return UpdateOutcome::curvature_rejected;

  const Eigen::VectorXd Hy = apply_inverse_factors(T, G, pair.y);
  if (!Hy.allFinite()) return UpdateOutcome::update_failed;
  const BfgsCoefficients c = bfgs_coefficients(pair, Hy);

  const TriangularFactor t_backup = T;
  const DiagonalFactor g_backup = G;
  if (!rank_one_update(T, G, c.alpha1, c.a1, stats) ||
      !rank_one_update(T, G, c.alpha2, c.a2, stats)) {
    T = t_backup;
    G = g_backup;
    return UpdateOutcome::update_failed;
  }

  // Round-off repair: the exact result is positive definite, so any negative
  // diagonal entry is noise and is flipped; an exact zero is unrecoverable.
  for (Eigen::Index j = 0; j < G.n(); ++j) {
    if (G.v(j) < 0.0) G.v(j) = -G.v(j);
    if (G.v(j) == 0.0 || !std::isfinite(G.v(j))) {
      T = t_backup;
      G = g_backup;
      return UpdateOutcome::update_failed;
    }
  }
  return UpdateOutcome::applied;
}

}  // namespace ldltr
