#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

namespace ldltr {

// Dense lower-triangular factor: the T of an inverse factorization H = T G T^T,
// or the L of a direct factorization B = L D L^T.  The strictly upper part is
// kept exactly zero.
struct TriangularFactor {
  Eigen::MatrixXd m;

  TriangularFactor() = default;

  explicit TriangularFactor(const Eigen::MatrixXd& full) {
    if (full.rows() != full.cols())
      throw std::invalid_argument("TriangularFactor: matrix must be square");
    m = full.triangularView<Eigen::Lower>();
  }

  Eigen::Index n() const { return m.rows(); }

  static TriangularFactor identity(Eigen::Index n) {
    TriangularFactor t;
    t.m = Eigen::MatrixXd::Identity(n, n);
    return t;
  }
};

// Diagonal factor stored as a plain vector: D, its inverse G, or the
// column-norm diagonal E = diag(T^T T).
struct DiagonalFactor {
  Eigen::VectorXd v;

  DiagonalFactor() = default;
  explicit DiagonalFactor(Eigen::VectorXd values) : v(std::move(values)) {}

  Eigen::Index n() const { return v.size(); }

  static DiagonalFactor constant(Eigen::Index n, double value) {
    return DiagonalFactor(Eigen::VectorXd::Constant(n, value));
  }
};

// Plane rotation acting on the pair (column j, border column); c^2 + s^2 = 1.
// The pivot index is assigned by the update kernel; givens_for leaves it 0.
struct GivensRotation {
  Eigen::Index j = 0;
  double c = 1.0;
  double s = 0.0;
};

// Floating multiplication tally for the update kernel (divisions counted as
// multiplications), used to check the O(n^2) per-update claim.
struct UpdateStats {
  std::int64_t multiplies = 0;
};

enum class Status {
  converged,
  near_optimal,
  iteration_limit,
  radius_collapse,
  linesearch_failure,
  evaluator_failure,
};

inline const char* to_string(Status s) {
  switch (s) {
    case Status::converged:          return "converged";
    case Status::near_optimal:       return "near-optimal";
    case Status::iteration_limit:    return "iteration-limit";
    case Status::radius_collapse:    return "radius-collapse";
    case Status::linesearch_failure: return "linesearch-failure";
    case Status::evaluator_failure:  return "evaluator-failure";
  }
  return "unknown";
}

inline Status status_from_string(const std::string& s) {
  if (s == "converged")          return Status::converged;
  if (s == "near-optimal")       return Status::near_optimal;
  if (s == "iteration-limit")    return Status::iteration_limit;
  if (s == "radius-collapse")    return Status::radius_collapse;
  if (s == "linesearch-failure") return Status::linesearch_failure;
  if (s == "evaluator-failure")  return Status::evaluator_failure;
  throw std::invalid_argument("status_from_string: unknown status '" + s + "'");
}

// eps_M^(2/3), the near-optimal threshold factor (about 3.7e-11 in double).
inline double near_optimal_factor() {
  return std::pow(std::numeric_limits<double>::epsilon(), 2.0 / 3.0);
}

// Terminal-state rescue test: the run failed to reach the gradient tolerance
// but either |f_k| <= |f_0|*eps_M^(2/3) or ||g_k|| <= ||g_0||*eps_M^(2/3).
inline bool near_optimal(double f0, double fk, double gnorm0, double gnormk) {
  const double c = near_optimal_factor();
  return std::abs(fk) <= std::abs(f0) * c || gnormk <= gnorm0 * c;
}

// Applies the near-optimal rescue to the statuses it is defined for; all
// other statuses pass through unchanged.
inline Status classify_terminal(Status raw, double f0, double fk, double gnorm0,
                                double gnormk) {
  switch (raw) {
    case Status::iteration_limit:
    case Status::radius_collapse:
    case Status::linesearch_failure:
      return near_optimal(f0, fk, gnorm0, gnormk) ? Status::near_optimal : raw;
    default:
      return raw;
  }
}

// Evaluator contract shared by all solvers: value and gradient callables plus
// the standard start point.  Solvers count every call themselves.
struct Objective {
  std::function<double(const Eigen::VectorXd&)> f;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> grad;
  Eigen::VectorXd x0;
};

// Outcome of one solver run; the per-problem benchmark record is built from it.
struct SolveReport {
  Status status = Status::evaluator_failure;
  long iterations = 0;
  long function_evals = 0;
  long gradient_evals = 0;
  double final_f = std::numeric_limits<double>::quiet_NaN();
  double final_gnorm = std::numeric_limits<double>::quiet_NaN();
  double wall_time_s = 0.0;
};

}  // namespace ldltr
