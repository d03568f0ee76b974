#pragma once

#include <Eigen/Core>

#include <cmath>
#include <limits>
#include <stdexcept>

#include "ldltr/types.hpp"

namespace ldltr {

// Rotation annihilating the spike entry b against the column entry a:
// applying (c, s) to the pair (a, b) yields (sqrt(a^2 + b^2), 0).
inline GivensRotation givens_for(double column_entry, double spike_entry) {
  if (column_entry == 0.0 && spike_entry == 0.0)
    throw std::invalid_argument("givens_for: both entries zero (degenerate rotation)");
  const double r = std::hypot(column_entry, spike_entry);
  GivensRotation rot;
  rot.c = column_entry / r;
  rot.s = -spike_entry / r;
  return rot;
}

// In-place rank-one update of a factorization: on return L*D*L^T equals the
// old L*D*L^T + alpha*a*a^T.  L stays lower triangular with unit diagonal
// (columns are renormalized after the rotation sweep); D may change sign when
// the update is indefinite.  Returns false when a non-finite intermediate is
// produced, in which case the factors are left in an unspecified state and the
// caller must restore its own copy.
inline bool rank_one_update(TriangularFactor& L, DiagonalFactor& D, double alpha,
                            const Eigen::VectorXd& a, UpdateStats* stats = nullptr) {
  const Eigen::Index n = L.n();
  if (D.n() != n || a.size() != n)
    throw std::invalid_argument("rank_one_update: dimension mismatch");
  if (alpha == 0.0) return true;

  // Downdates that keep the matrix positive definite take a separate path:
  // the rotation sweep below carries a running border entry whose relative
  // error is amplified by d_j/d'_j at every pivot, which is catastrophic when
  // the downdate nearly annihilates a dominant pivot.  Here each new pivot is
  // instead formed from backward partial sums of positive terms, so no
  // cancellation compounds across columns.
  if (alpha < 0.0 && (D.v.array() > 0.0).all()) {
    const Eigen::VectorXd z = L.m.triangularView<Eigen::Lower>().solve(a);
    Eigen::VectorXd tau(n + 1);  // tau_j = 1 + alpha*sum_{i<j} z_i^2/d_i, from the back
    double run = 0.0;
    tau(n) = 0.0;
    for (Eigen::Index j = n - 1; j >= 0; --j) {
      run += z(j) * z(j) / D.v(j);
      tau(j) = run;
    }
    const double gamma = 1.0 + alpha * run;  // 1 + alpha*a'*H^(-1)*a
    if (gamma > 0.0 && std::isfinite(gamma)) {
      for (Eigen::Index j = 0; j <= n; ++j) tau(j) = gamma - alpha * tau(j);
      if (stats) stats->multiplies += n * (n + 1) / 2 + 3 * n;
      Eigen::VectorXd v = a;  // spike with columns 0..j-1 eliminated
      for (Eigen::Index j = 0; j < n; ++j) {
        const double tjj = L.m(j, j);
        const double zj = z(j);
        const double dnew = D.v(j) * tjj * tjj * tau(j + 1) / tau(j);
        const Eigen::Index tail = n - j - 1;
        if (tail > 0) {
          auto col = L.m.col(j).tail(tail);
          auto vt = v.tail(tail);
          vt -= zj * col;
          col = col / tjj + (alpha * zj / (D.v(j) * tjj * tau(j + 1))) * vt;
          if (stats) stats->multiplies += 2 * tail;
        }
        D.v(j) = dnew;
        L.m(j, j) = 1.0;
        if (stats) stats->multiplies += 8;
      }
      return L.m.allFinite() && D.v.allFinite();
    }
    // gamma <= 0: the result is indefinite or singular; fall through to the
    // general sweep, which tolerates sign changes in D.
  }

  // Sweep of plane rotations against the bordered factor [L a].  Each rotation
  // zeroes one spike entry; a paired 2x2 unit shear restores the middle matrix
  // to diagonal form so the congruence stays exact (the rotation alone leaves
  // a cross term coupling column j to the border).
  Eigen::VectorXd w = a;     // spike column, transformed in place
  double omega = alpha;      // border diagonal entry
  Eigen::VectorXd wnew(n);   // per-column scratch

  for (Eigen::Index j = 0; j < n; ++j) {
    const double ljj = L.m(j, j);
    const double wj = w(j);
    if (wj == 0.0) continue;  // identity rotation, nothing to do

    GivensRotation rot = givens_for(ljj, wj);
    rot.j = j;
    const double r = std::hypot(ljj, wj);
    const double delta = D.v(j);
    const double m11 = rot.c * rot.c * delta + rot.s * rot.s * omega;
    const double m12 = rot.c * rot.s * (delta - omega);
    const double u = m12 / m11;
    D.v(j) = m11;
    omega = delta * omega / m11;
    if (stats) stats->multiplies += 14;

    const Eigen::Index tail = n - j - 1;
    if (tail > 0) {
      auto col = L.m.col(j).tail(tail);
      auto wt = w.tail(tail);
      wnew.head(tail) = rot.s * col + rot.c * wt;
      col = rot.c * col - rot.s * wt + u * wnew.head(tail);
      wt = wnew.head(tail);
      if (stats) stats->multiplies += 5 * tail;
    }
    L.m(j, j) = r;
    if (!std::isfinite(m11) || !std::isfinite(u) || !std::isfinite(omega)) return false;
  }

  // Repair any vanishing pivot before normalization (cannot trigger for a
  // nonsingular input, but the rule is part of the contract).
  const double diag_max = L.m.diagonal().cwiseAbs().maxCoeff();
  const double floor = std::sqrt(std::numeric_limits<double>::epsilon()) * diag_max;
  for (Eigen::Index j = 0; j < n; ++j) {
    double& p = L.m(j, j);
    if (std::abs(p) < floor) p = (p < 0.0) ? -floor : floor;
  }

  // Renormalize to a unit diagonal: column j is divided by its pivot r and the
  // scale moves into D as r^2.
  for (Eigen::Index j = 0; j < n; ++j) {
    const double r = L.m(j, j);
    D.v(j) *= r * r;
    L.m.col(j).tail(n - j) /= r;
    if (stats) stats->multiplies += (n - j) + 2;
  }

  return L.m.allFinite() && D.v.allFinite();
}

// H*g = T*(G*(T^T*g)) via two triangular products and one diagonal scaling.
inline Eigen::VectorXd apply_inverse_factors(const TriangularFactor& T,
                                             const DiagonalFactor& G,
                                             const Eigen::VectorXd& g) {
  if (T.n() != G.n() || T.n() != g.size())
    throw std::invalid_argument("apply_inverse_factors: dimension mismatch");
  Eigen::VectorXd t = T.m.transpose().triangularView<Eigen::Upper>() * g;
  t.array() *= G.v.array();
  return T.m.triangularView<Eigen::Lower>() * t;
}

// E = diag(T^T T): entry j is the squared two-norm of column j of T.
inline DiagonalFactor column_norms_sq(const TriangularFactor& T) {
  DiagonalFactor E;
  E.v = T.m.colwise().squaredNorm().transpose();
  return E;
}

// Factors of B = (T G T^T)^(-1), with L normalized to a unit diagonal.  L is
// unit upper triangular in general (the transpose orientation of the input),
// so it is returned as a plain matrix.  O(n^3); callers gate this on small n.
struct DirectFactors {
  Eigen::MatrixXd L;
  Eigen::VectorXd D;
};

inline DirectFactors recover_direct_factors(const TriangularFactor& T,
                                            const DiagonalFactor& G) {
  const Eigen::Index n = T.n();
  if (G.n() != n)
    throw std::invalid_argument("recover_direct_factors: dimension mismatch");
  const Eigen::VectorXd t_diag = T.m.diagonal();
  if ((t_diag.array() == 0.0).any() || (G.v.array() == 0.0).any())
    throw std::runtime_error("recover_direct_factors: singular factor");

  // B = T^-T G^-1 T^-1 = (T^-T S)(S^-1 G^-1 S^-1)(S T^-1) with S = diag(T).
  DirectFactors out;
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(n, n);
  rhs.diagonal() = t_diag;
  out.L = T.m.triangularView<Eigen::Lower>().solve(rhs).transpose();
  out.D = (G.v.array() * t_diag.array().square()).inverse();
  if (!out.L.allFinite() || !out.D.allFinite())
    throw std::runtime_error("recover_direct_factors: singular factor");
  return out;
}

}  // namespace ldltr
