#pragma once

#include <Eigen/Core>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "ldltr/types.hpp"
#include "ldltr/factored_ops.hpp"

namespace ldltr {

struct CGReport {
  Eigen::VectorXd s;
  int iterations = 0;
  double relative_residual = 0.0;  // ||(D + sigma T'T) v - h|| / ||h||
  bool converged = true;
  bool breakdown = false;  // non-finite operator output or negative curvature
  std::vector<double> residual_history;
};

// Phase 2: solve (L D L^T + sigma I) s = -g using only the inverse factors.
// With h = -T'g, conjugate gradient is applied to (D + sigma T'T) v = h whose
// operator needs two triangular products per iteration; the step is s = T v.
// sigma = 0 collapses to the exact diagonal solve v = G.h, i.e. s = -T G T'g.
inline CGReport cg_solve_shifted(const TriangularFactor& T, const DiagonalFactor& G,
                                 const Eigen::VectorXd& g, double sigma,
                                 double tol = 1e-8, int i_cg_max = 15,
                                 bool jacobi_precond = false) {
  const Eigen::Index n = T.n();
  if (G.n() != n || g.size() != n)
    throw std::invalid_argument("cg_solve_shifted: dimension mismatch");
  if (!(sigma >= 0.0))
    throw std::invalid_argument("cg_solve_shifted: shift must be nonnegative");

  auto lower = T.m.triangularView<Eigen::Lower>();
  auto upper = T.m.transpose().triangularView<Eigen::Upper>();
  const Eigen::VectorXd d = G.v.cwiseInverse();
  const Eigen::VectorXd h = -(upper * g);

  CGReport rep;
  const double h_norm = h.norm();
  if (h_norm == 0.0) {
    rep.s = Eigen::VectorXd::Zero(n);
    return rep;
  }
  if (sigma == 0.0) {
    Eigen::VectorXd v = G.v.cwiseProduct(h);
    rep.s = lower * v;
    rep.relative_residual = 0.0;
    return rep;
  }

  auto apply = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
    Eigen::VectorXd tv = lower * v;
    Eigen::VectorXd ttv = upper * tv;
    return d.cwiseProduct(v) + sigma * ttv;
  };
  // Optional Jacobi preconditioner: diag of the operator is D + sigma E.
  Eigen::VectorXd prec_inv;
  if (jacobi_precond)
    prec_inv = (d.array() + sigma * column_norms_sq(T).v.array()).inverse();

  Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd r = h;
  Eigen::VectorXd z = jacobi_precond ? prec_inv.cwiseProduct(r).eval() : r;
  Eigen::VectorXd p = z;
  double rz = r.dot(z);
  double rel = 1.0;
  rep.residual_history.push_back(rel);
  rep.converged = false;

  for (int i = 0; i < i_cg_max; ++i) {
    Eigen::VectorXd Ap = apply(p);
    if (!Ap.allFinite()) { rep.breakdown = true; break; }
    const double pAp = p.dot(Ap);
    if (!(pAp > 0.0)) { rep.breakdown = true; break; }  // impossible on the main path
    const double alpha = rz / pAp;
    v += alpha * p;
    r -= alpha * Ap;
    ++rep.iterations;
    rel = r.norm() / h_norm;
    rep.residual_history.push_back(rel);
    if (rel <= tol) { rep.converged = true; break; }
    z = jacobi_precond ? prec_inv.cwiseProduct(r).eval() : r;
    const double rz_next = r.dot(z);
    p = z + (rz_next / rz) * p;
    rz = rz_next;
  }

  rep.relative_residual = rel;
  rep.s = lower * v;
  if (!rep.s.allFinite()) rep.breakdown = true;
  return rep;
}

}  // namespace ldltr
