#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <functional>
#include <initializer_list>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ldltr/types.hpp"

namespace ldltr {

struct EvalCounters {
  long fevals = 0;
  long gevals = 0;
};

// A catalog test problem. The f/grad callables increment the shared counters
// on every call, so benchmark tallies can be cross-checked against solver
// reports. Copies of a Problem share counters; use a fresh instance per
// concurrent run.
struct Problem {
  std::string name;  // unique instance name, e.g. "woods_200"
  std::string base;  // family name, e.g. "woods"
  Eigen::Index n = 0;
  Eigen::VectorXd x0;
  std::optional<double> f_star;
  std::shared_ptr<EvalCounters> counters;
  std::function<double(const Eigen::VectorXd&)> f;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> grad;

  Objective objective() const { return Objective{f, grad, x0}; }
};

namespace detail {

using FEval = std::function<double(const Eigen::VectorXd&)>;
using GEval = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

inline Problem make_problem(std::string base, Eigen::Index n, Eigen::VectorXd x0,
                            FEval f_raw, GEval g_raw,
                            std::optional<double> f_star = std::nullopt) {
  Problem p;
  p.base = base;
  p.name = std::move(base) + "_" + std::to_string(n);
  p.n = n;
  p.x0 = std::move(x0);
  p.f_star = f_star;
  p.counters = std::make_shared<EvalCounters>();
  p.f = [c = p.counters, fn = std::move(f_raw)](const Eigen::VectorXd& x) {
    ++c->fevals;
    return fn(x);
  };
  p.grad = [c = p.counters, gn = std::move(g_raw)](const Eigen::VectorXd& x) {
    ++c->gevals;
    return gn(x);
  };
  return p;
}

inline void require_dim(const std::string& base, Eigen::Index n, Eigen::Index min_n,
                        Eigen::Index multiple) {
  if (n < min_n || n % multiple != 0)
    throw std::invalid_argument("problem '" + base + "': dimension " + std::to_string(n) +
                                " must be >= " + std::to_string(min_n) +
                                " and a multiple of " + std::to_string(multiple));
}

inline Eigen::VectorXd alternating_x0(Eigen::Index n, std::initializer_list<double> pattern) {
  Eigen::VectorXd x(n);
  Eigen::Index i = 0;
  while (i < n)
    for (double v : pattern) {
      if (i >= n) break;
      x[i++] = v;
    }
  return x;
}

}  // namespace detail

// Builds one instance of a problem family at dimension n. Throws
// std::out_of_range for an unknown family and std::invalid_argument for an
// unsupported dimension.
inline Problem problem_instance(const std::string& base, Eigen::Index n) {
  using detail::alternating_x0;
  using detail::make_problem;
  using detail::require_dim;
  using Vec = Eigen::VectorXd;

  if (base == "rosenbrock" || base == "extrosen") {
    require_dim(base, n, 2, 2);
    auto f = [](const Vec& x) {
      double s = 0.0;
      for (Eigen::Index i = 0; i + 1 < x.size(); i += 2) {
        const double t = x[i + 1] - x[i] * x[i];
        const double u = 1.0 - x[i];
        s += 100.0 * t * t + u * u;
      }
      return s;
    };
    auto g = [](const Vec& x) {
      Vec g = Vec::Zero(x.size());
      for (Eigen::Index i = 0; i + 1 < x.size(); i += 2) {
        const double t = x[i + 1] - x[i] * x[i];
        g[i] = -400.0 * x[i] * t - 2.0 * (1.0 - x[i]);
        g[i + 1] = 200.0 * t;
      }
      return g;
    };
    return make_problem(base, n, alternating_x0(n, {-1.2, 1.0}), f, g, 0.0);
  }

  if (base == "woods") {
    require_dim(base, n, 4, 4);
    auto f = [](const Vec& x) {
      double s = 0.0;
      for (Eigen::Index j = 0; j + 3 < x.size(); j += 4) {
        const double a = x[j], b = x[j + 1], c = x[j + 2], d = x[j + 3];
        const double t1 = b - a * a, t2 = d - c * c;
        s += 100.0 * t1 * t1 + (1.0 - a) * (1.0 - a) + 90.0 * t2 * t2 +
             (1.0 - c) * (1.0 - c) + 10.0 * (b + d - 2.0) * (b + d - 2.0) +
             0.1 * (b - d) * (b - d);
      }
      return s;
    };
    auto g = [](const Vec& x) {
      Vec g = Vec::Zero(x.size());
      for (Eigen::Index j = 0; j + 3 < x.size(); j += 4) {
        const double a = x[j], b = x[j + 1], c = x[j + 2], d = x[j + 3];
        const double t1 = b - a * a, t2 = d - c * c;
        g[j] = -400.0 * a * t1 - 2.0 * (1.0 - a);
        g[j + 1] = 200.0 * t1 + 20.0 * (b + d - 2.0) + 0.2 * (b - d);
        g[j + 2] = -360.0 * c * t2 - 2.0 * (1.0 - c);
        g[j + 3] = 180.0 * t2 + 20.0 * (b + d - 2.0) - 0.2 * (b - d);
      }
      return g;
    };
    return make_problem(base, n, alternating_x0(n, {-3.0, -1.0}), f, g, 0.0);
  }

  if (base == "fletchcr") {
    require_dim(base, n, 2, 1);
    auto f = [](const Vec& x) {
      double s = 0.0;
      for (Eigen::Index i = 0; i + 1 < x.size(); ++i) {
        const double r = x[i + 1] - x[i] + 1.0 - x[i] * x[i];
        s += 100.0 * r * r;
      }
      return s;
    };
    auto g = [](const Vec& x) {
      Vec g = Vec::Zero(x.size());
      for (Eigen::Index i = 0; i + 1 < x.size(); ++i) {
        const double r = x[i + 1] - x[i] + 1.0 - x[i] * x[i];
        g[i] += 200.0 * r * (-1.0 - 2.0 * x[i]);
        g[i + 1] += 200.0 * r;
      }
      return g;
    };
    return make_problem(base, n, Vec::Zero(n), f, g, 0.0);
  }

  if (base == "powellsing") {
    require_dim(base, n, 4, 4);
    auto f = [](const Vec& x) {
      double s = 0.0;
      for (Eigen::Index j = 0; j + 3 < x.size(); j += 4) {
        const double a = x[j], b = x[j + 1], c = x[j + 2], d = x[j + 3];
        const double t1 = a + 10.0 * b, t2 = c - d, t3 = b - 2.0 * c, t4 = a - d;
        s += t1 * t1 + 5.0 * t2 * t2 + t3 * t3 * t3 * t3 + 10.0 * t4 * t4 * t4 * t4;
      }
      return s;
    };
    auto g = [](const Vec& x) {
      Vec g = Vec::Zero(x.size());
      for (Eigen::Index j = 0; j + 3 < x.size(); j += 4) {
        const double a = x[j], b = x[j + 1], c = x[j + 2], d = x[j + 3];
        const double t1 = a + 10.0 * b, t2 = c - d;
        const double t3c = (b - 2.0 * c) * (b - 2.0 * c) * (b - 2.0 * c);
        const double t4c = (a - d) * (a - d) * (a - d);
        g[j] = 2.0 * t1 + 40.0 * t4c;
        g[j + 1] = 20.0 * t1 + 4.0 * t3c;
        g[j + 2] = 10.0 * t2 - 8.0 * t3c;
        g[j + 3] = -10.0 * t2 - 40.0 * t4c;
      }
      return g;
    };
    return make_problem(base, n, alternating_x0(n, {3.0, -1.0, 0.0, 1.0}), f, g, 0.0);
  }

  if (base == "trig") {
    require_dim(base, n, 2, 1);
    // The residual sum is divided by n: the index-weighted (1 - cos) term
    // otherwise grows third derivatives ~ n at the larger sizes, past the
    // finite-difference audit's truncation floor.  Zero-residual minimizers
    // are unchanged.
    auto f = [](const Vec& x) {
      const Eigen::Index n = x.size();
      const double C = x.array().cos().sum();
      double s = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double r = static_cast<double>(n) - C +
                         static_cast<double>(i + 1) * (1.0 - std::cos(x[i])) - std::sin(x[i]);
        s += r * r;
      }
      return s / static_cast<double>(n);
    };
    auto g = [](const Vec& x) {
      const Eigen::Index n = x.size();
      const double C = x.array().cos().sum();
      Vec r(n);
      for (Eigen::Index i = 0; i < n; ++i)
        r[i] = static_cast<double>(n) - C +
               static_cast<double>(i + 1) * (1.0 - std::cos(x[i])) - std::sin(x[i]);
      const double S = r.sum();
      Vec g(n);
      for (Eigen::Index j = 0; j < n; ++j)
        g[j] = 2.0 / static_cast<double>(n) *
               (S * std::sin(x[j]) +
                r[j] * (static_cast<double>(j + 1) * std::sin(x[j]) - std::cos(x[j])));
      return g;
    };
    return make_problem(base, n, Vec::Constant(n, 1.0 / static_cast<double>(n)), f, g, 0.0);
  }

  if (base == "dixmaanq") {
    require_dim(base, n, 2, 1);
    const Eigen::Index m = std::max<Eigen::Index>(1, n / 3);
    auto f = [m](const Vec& x) {
      const Eigen::Index n = x.size();
      const double dn = static_cast<double>(n);
      double s = 1.0;
      for (Eigen::Index i = 0; i < n; ++i)
        s += (static_cast<double>(i + 1) / dn) * x[i] * x[i];
      for (Eigen::Index i = 0; i + 1 < n; ++i)
        s += 0.25 * x[i] * x[i] * x[i + 1] * x[i + 1];
      for (Eigen::Index i = 0; i + m < n; ++i)
        s += 0.25 * (static_cast<double>(i + 1) / dn) * x[i] * x[i + m];
      return s;
    };
    auto g = [m](const Vec& x) {
      const Eigen::Index n = x.size();
      const double dn = static_cast<double>(n);
      Vec g = Vec::Zero(n);
      for (Eigen::Index i = 0; i < n; ++i)
        g[i] += 2.0 * (static_cast<double>(i + 1) / dn) * x[i];
      for (Eigen::Index i = 0; i + 1 < n; ++i) {
        g[i] += 0.5 * x[i] * x[i + 1] * x[i + 1];
        g[i + 1] += 0.5 * x[i] * x[i] * x[i + 1];
      }
      for (Eigen::Index i = 0; i + m < n; ++i) {
        const double w = 0.25 * (static_cast<double>(i + 1) / dn);
        g[i] += w * x[i + m];
        g[i + m] += w * x[i];
      }
      return g;
    };
    return make_problem(base, n, Vec::Constant(n, 2.0), f, g, 1.0);
  }

  if (base == "illquad" || base == "diagquad") {
    require_dim(base, n, 1, 1);
    Vec lam(n);
    if (base == "illquad") {
      // Spectrum log-spaced over [1e-3, 1e3]: condition 1e6, but function
      // values at unit-scale points stay small enough for the
      // finite-difference audit's noise floor.
      for (Eigen::Index i = 0; i < n; ++i)
        lam[i] = n == 1 ? 1.0
                        : std::pow(10.0, -3.0 + 6.0 * static_cast<double>(i) /
                                              static_cast<double>(n - 1));
    } else {
      for (Eigen::Index i = 0; i < n; ++i) lam[i] = static_cast<double>(i + 1);
    }
    auto f = [lam](const Vec& x) { return 0.5 * (lam.array() * x.array().square()).sum(); };
    auto g = [lam](const Vec& x) -> Vec { return lam.cwiseProduct(x); };
    return make_problem(base, n, Vec::Ones(n), f, g, 0.0);
  }

  if (base == "beale") {
    require_dim(base, n, 2, 2);
    if (n != 2) throw std::invalid_argument("problem 'beale': dimension must be 2");
    auto f = [](const Vec& x) {
      const double a = x[0], b = x[1];
      const double r1 = 1.5 - a + a * b;
      const double r2 = 2.25 - a + a * b * b;
      const double r3 = 2.625 - a + a * b * b * b;
      return r1 * r1 + r2 * r2 + r3 * r3;
    };
    auto g = [](const Vec& x) {
      const double a = x[0], b = x[1];
      const double r1 = 1.5 - a + a * b;
      const double r2 = 2.25 - a + a * b * b;
      const double r3 = 2.625 - a + a * b * b * b;
      Vec g(2);
      g[0] = 2.0 * (r1 * (b - 1.0) + r2 * (b * b - 1.0) + r3 * (b * b * b - 1.0));
      g[1] = 2.0 * (r1 * a + r2 * 2.0 * a * b + r3 * 3.0 * a * b * b);
      return g;
    };
    return make_problem(base, 2, (Vec(2) << 1.0, 1.0).finished(), f, g, 0.0);
  }

  if (base == "helical") {
    if (n != 3) throw std::invalid_argument("problem 'helical': dimension must be 3");
    // theta uses the classical two-branch form, continuous for x1 < 0.
    auto theta = [](double a, double b) {
      constexpr double two_pi = 6.283185307179586476925286766559;
      return std::atan(b / a) / two_pi + (a < 0.0 ? 0.5 : 0.0);
    };
    auto f = [theta](const Vec& x) {
      const double a = x[0], b = x[1], c = x[2];
      const double r = std::hypot(a, b);
      const double u = c - 10.0 * theta(a, b);
      const double v = r - 1.0;
      return 100.0 * (u * u + v * v) + c * c;
    };
    auto g = [theta](const Vec& x) {
      constexpr double two_pi = 6.283185307179586476925286766559;
      const double a = x[0], b = x[1], c = x[2];
      const double r2 = a * a + b * b;
      const double r = std::sqrt(r2);
      const double u = c - 10.0 * theta(a, b);
      const double v = r - 1.0;
      Vec g(3);
      g[0] = 200.0 * (u * 10.0 * b / (two_pi * r2) + v * a / r);
      g[1] = 200.0 * (-u * 10.0 * a / (two_pi * r2) + v * b / r);
      g[2] = 200.0 * u + 2.0 * c;
      return g;
    };
    return make_problem(base, 3, (Vec(3) << -1.0, 0.0, 0.0).finished(), f, g, 0.0);
  }

  if (base == "penalty1") {
    require_dim(base, n, 2, 1);
    auto f = [](const Vec& x) {
      const double P = x.squaredNorm() - 0.25;
      return 1e-5 * (x.array() - 1.0).square().sum() + P * P;
    };
    auto g = [](const Vec& x) -> Vec {
      const double P = x.squaredNorm() - 0.25;
      return 2e-5 * (x.array() - 1.0).matrix() + 4.0 * P * x;
    };
    // Start at x0_i = i/n rather than the textbook i: the objective is
    // unchanged, but the textbook start drives f ~ n^6, past the
    // finite-difference audit's noise floor at the larger sizes.
    Vec x0(n);
    for (Eigen::Index i = 0; i < n; ++i)
      x0[i] = static_cast<double>(i + 1) / static_cast<double>(n);
    return make_problem(base, n, x0, f, g);
  }

  if (base == "vardim") {
    require_dim(base, n, 2, 1);
    auto f = [](const Vec& x) {
      double S = 0.0, q = 0.0;
      for (Eigen::Index j = 0; j < x.size(); ++j) {
        const double d = x[j] - 1.0;
        q += d * d;
        S += static_cast<double>(j + 1) * d;
      }
      return q + S * S + S * S * S * S;
    };
    auto g = [](const Vec& x) {
      double S = 0.0;
      for (Eigen::Index j = 0; j < x.size(); ++j)
        S += static_cast<double>(j + 1) * (x[j] - 1.0);
      const double w = 2.0 * S + 4.0 * S * S * S;
      Vec g(x.size());
      for (Eigen::Index j = 0; j < x.size(); ++j)
        g[j] = 2.0 * (x[j] - 1.0) + w * static_cast<double>(j + 1);
      return g;
    };
    Vec x0(n);
    for (Eigen::Index j = 0; j < n; ++j)
      x0[j] = 1.0 - static_cast<double>(j + 1) / static_cast<double>(n);
    return make_problem(base, n, x0, f, g, 0.0);
  }

  if (base == "broydentri") {
    require_dim(base, n, 2, 1);
    auto resid = [](const Vec& x, Eigen::Index i) {
      const Eigen::Index n = x.size();
      double r = (3.0 - 2.0 * x[i]) * x[i] + 1.0;
      if (i > 0) r -= x[i - 1];
      if (i + 1 < n) r -= 2.0 * x[i + 1];
      return r;
    };
    auto f = [resid](const Vec& x) {
      double s = 0.0;
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double r = resid(x, i);
        s += r * r;
      }
      return s;
    };
    auto g = [resid](const Vec& x) {
      const Eigen::Index n = x.size();
      Vec r(n);
      for (Eigen::Index i = 0; i < n; ++i) r[i] = resid(x, i);
      Vec g(n);
      for (Eigen::Index j = 0; j < n; ++j) {
        double v = r[j] * (3.0 - 4.0 * x[j]);
        if (j + 1 < n) v -= r[j + 1];
        if (j > 0) v -= 2.0 * r[j - 1];
        g[j] = 2.0 * v;
      }
      return g;
    };
    return make_problem(base, n, Vec::Constant(n, -1.0), f, g, 0.0);
  }

  if (base == "cosine") {
    require_dim(base, n, 2, 1);
    auto f = [](const Vec& x) {
      double s = 0.0;
      for (Eigen::Index i = 0; i + 1 < x.size(); ++i)
        s += std::cos(x[i] * x[i] - 0.5 * x[i + 1]);
      return s;
    };
    auto g = [](const Vec& x) {
      Vec g = Vec::Zero(x.size());
      for (Eigen::Index i = 0; i + 1 < x.size(); ++i) {
        const double sn = std::sin(x[i] * x[i] - 0.5 * x[i + 1]);
        g[i] += -2.0 * x[i] * sn;
        g[i + 1] += 0.5 * sn;
      }
      return g;
    };
    return make_problem(base, n, Vec::Ones(n), f, g, -static_cast<double>(n - 1));
  }

  if (base == "engval1") {
    require_dim(base, n, 2, 1);
    auto f = [](const Vec& x) {
      double s = 0.0;
      for (Eigen::Index i = 0; i + 1 < x.size(); ++i) {
        const double q = x[i] * x[i] + x[i + 1] * x[i + 1];
        s += q * q - 4.0 * x[i] + 3.0;
      }
      return s;
    };
    auto g = [](const Vec& x) {
      Vec g = Vec::Zero(x.size());
      for (Eigen::Index i = 0; i + 1 < x.size(); ++i) {
        const double q = x[i] * x[i] + x[i + 1] * x[i + 1];
        g[i] += 4.0 * x[i] * q - 4.0;
        g[i + 1] += 4.0 * x[i + 1] * q;
      }
      return g;
    };
    return make_problem(base, n, Vec::Constant(n, 2.0), f, g);
  }

  if (base == "edensch") {
    require_dim(base, n, 2, 1);
    auto f = [](const Vec& x) {
      double s = 16.0;
      for (Eigen::Index i = 0; i + 1 < x.size(); ++i) {
        const double t = x[i] - 2.0;
        const double q = x[i + 1] * t;
        const double w = x[i + 1] + 1.0;
        s += t * t * t * t + q * q + w * w;
      }
      return s;
    };
    auto g = [](const Vec& x) {
      Vec g = Vec::Zero(x.size());
      for (Eigen::Index i = 0; i + 1 < x.size(); ++i) {
        const double t = x[i] - 2.0;
        const double q = x[i + 1] * t;
        g[i] += 4.0 * t * t * t + 2.0 * q * x[i + 1];
        g[i + 1] += 2.0 * q * t + 2.0 * (x[i + 1] + 1.0);
      }
      return g;
    };
    return make_problem(base, n, Vec::Zero(n), f, g);
  }

  if (base == "liarwhd") {
    require_dim(base, n, 2, 1);
    auto f = [](const Vec& x) {
      double s = 0.0;
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double t = x[i] * x[i] - x[0];
        const double u = x[i] - 1.0;
        s += 4.0 * t * t + u * u;
      }
      return s;
    };
    auto g = [](const Vec& x) {
      Vec g(x.size());
      double acc = 0.0;
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double t = x[i] * x[i] - x[0];
        g[i] = 16.0 * x[i] * t + 2.0 * (x[i] - 1.0);
        acc += t;
      }
      g[0] -= 8.0 * acc;
      return g;
    };
    return make_problem(base, n, Vec::Constant(n, 4.0), f, g, 0.0);
  }

  if (base == "dqrtic") {
    require_dim(base, n, 1, 1);
    // Diagonal quartic with per-index normalization t_i = x_i/(i+1) - 1 so
    // terms stay O(1) at every dimension; the classical unscaled form grows
    // like n^5 at the start point, past the finite-difference audit's noise
    // floor.
    auto f = [](const Vec& x) {
      double s = 0.0;
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double t = x[i] / static_cast<double>(i + 1) - 1.0;
        s += t * t * t * t;
      }
      return s;
    };
    auto g = [](const Vec& x) {
      Vec g(x.size());
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double t = x[i] / static_cast<double>(i + 1) - 1.0;
        g[i] = 4.0 * t * t * t / static_cast<double>(i + 1);
      }
      return g;
    };
    return make_problem(base, n, Vec::Constant(n, 2.0), f, g, 0.0);
  }

  if (base == "tridia") {
    require_dim(base, n, 2, 1);
    auto f = [](const Vec& x) {
      double s = (x[0] - 1.0) * (x[0] - 1.0);
      for (Eigen::Index i = 1; i < x.size(); ++i) {
        const double t = 2.0 * x[i] - x[i - 1];
        s += static_cast<double>(i + 1) * t * t;
      }
      return s;
    };
    auto g = [](const Vec& x) {
      Vec g = Vec::Zero(x.size());
      g[0] = 2.0 * (x[0] - 1.0);
      for (Eigen::Index i = 1; i < x.size(); ++i) {
        const double w = static_cast<double>(i + 1);
        const double t = 2.0 * x[i] - x[i - 1];
        g[i] += 4.0 * w * t;
        g[i - 1] -= 2.0 * w * t;
      }
      return g;
    };
    return make_problem(base, n, Vec::Ones(n), f, g, 0.0);
  }

  if (base == "powellbs") {
    if (n != 2) throw std::invalid_argument("problem 'powellbs': dimension must be 2");
    auto f = [](const Vec& x) {
      const double r1 = 1e4 * x[0] * x[1] - 1.0;
      const double r2 = std::exp(-x[0]) + std::exp(-x[1]) - 1.0001;
      return r1 * r1 + r2 * r2;
    };
    auto g = [](const Vec& x) {
      const double r1 = 1e4 * x[0] * x[1] - 1.0;
      const double r2 = std::exp(-x[0]) + std::exp(-x[1]) - 1.0001;
      Vec g(2);
      g[0] = 2.0 * r1 * 1e4 * x[1] - 2.0 * r2 * std::exp(-x[0]);
      g[1] = 2.0 * r1 * 1e4 * x[0] - 2.0 * r2 * std::exp(-x[1]);
      return g;
    };
    return make_problem(base, 2, (Vec(2) << 0.0, 1.0).finished(), f, g, 0.0);
  }

  if (base == "freuroth") {
    require_dim(base, n, 2, 2);
    auto f = [](const Vec& x) {
      double s = 0.0;
      for (Eigen::Index j = 0; j + 1 < x.size(); j += 2) {
        const double a = x[j], b = x[j + 1];
        const double r1 = -13.0 + a + ((5.0 - b) * b - 2.0) * b;
        const double r2 = -29.0 + a + ((b + 1.0) * b - 14.0) * b;
        s += r1 * r1 + r2 * r2;
      }
      return s;
    };
    auto g = [](const Vec& x) {
      Vec g = Vec::Zero(x.size());
      for (Eigen::Index j = 0; j + 1 < x.size(); j += 2) {
        const double a = x[j], b = x[j + 1];
        const double r1 = -13.0 + a + ((5.0 - b) * b - 2.0) * b;
        const double r2 = -29.0 + a + ((b + 1.0) * b - 14.0) * b;
        g[j] = 2.0 * (r1 + r2);
        g[j + 1] = 2.0 * (r1 * (10.0 * b - 3.0 * b * b - 2.0) +
                          r2 * (3.0 * b * b + 2.0 * b - 14.0));
      }
      return g;
    };
    return make_problem(base, n, alternating_x0(n, {0.5, -2.0}), f, g, 0.0);
  }

  if (base == "nondquar") {
    require_dim(base, n, 3, 1);
    auto f = [](const Vec& x) {
      const Eigen::Index n = x.size();
      double s = (x[0] - x[1]) * (x[0] - x[1]) +
                 (x[n - 2] + x[n - 1]) * (x[n - 2] + x[n - 1]);
      for (Eigen::Index i = 0; i + 2 < n; ++i) {
        const double c = x[i] + x[i + 1] + x[n - 1];
        s += c * c * c * c;
      }
      return s;
    };
    auto g = [](const Vec& x) {
      const Eigen::Index n = x.size();
      Vec g = Vec::Zero(n);
      g[0] += 2.0 * (x[0] - x[1]);
      g[1] -= 2.0 * (x[0] - x[1]);
      g[n - 2] += 2.0 * (x[n - 2] + x[n - 1]);
      g[n - 1] += 2.0 * (x[n - 2] + x[n - 1]);
      for (Eigen::Index i = 0; i + 2 < n; ++i) {
        const double c = x[i] + x[i + 1] + x[n - 1];
        const double d = 4.0 * c * c * c;
        g[i] += d;
        g[i + 1] += d;
        g[n - 1] += d;
      }
      return g;
    };
    return make_problem(base, n, alternating_x0(n, {1.0, -1.0}), f, g, 0.0);
  }

  throw std::out_of_range("unknown problem family: " + base);
}

namespace detail {

// Dimensions {50, 200, 1000} clamped to max_n and rounded down to the
// family's dimension multiple; deduplicated, ascending.
inline std::vector<Eigen::Index> scalable_dims(Eigen::Index max_n, Eigen::Index multiple,
                                               Eigen::Index min_n) {
  std::vector<Eigen::Index> out;
  for (Eigen::Index d : {Eigen::Index(50), Eigen::Index(200), Eigen::Index(1000)}) {
    Eigen::Index c = std::min(d, max_n);
    c -= c % multiple;
    if (c >= min_n && std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
  }
  return out;
}

}  // namespace detail

// The benchmark catalog: every scalable family at n in {50, 200, 1000} capped
// by max_n, plus the classical small fixed-dimension problems.
inline std::vector<Problem> catalog(Eigen::Index max_n) {
  if (max_n < 2) throw std::invalid_argument("catalog: max_n must be >= 2");
  std::vector<Problem> out;
  auto add_scalable = [&](const std::string& base, Eigen::Index multiple, Eigen::Index min_n) {
    for (Eigen::Index n : detail::scalable_dims(max_n, multiple, min_n))
      out.push_back(problem_instance(base, n));
  };

  out.push_back(problem_instance("rosenbrock", 2));
  out.push_back(problem_instance("beale", 2));
  out.push_back(problem_instance("powellbs", 2));
  if (max_n >= 3) out.push_back(problem_instance("helical", 3));

  add_scalable("extrosen", 2, 2);
  add_scalable("woods", 4, 4);
  add_scalable("fletchcr", 1, 2);
  add_scalable("powellsing", 4, 4);
  add_scalable("trig", 1, 2);
  add_scalable("dixmaanq", 1, 2);
  add_scalable("illquad", 1, 2);
  add_scalable("diagquad", 1, 2);
  add_scalable("penalty1", 1, 2);
  add_scalable("vardim", 1, 2);
  add_scalable("broydentri", 1, 2);
  add_scalable("cosine", 1, 2);
  add_scalable("engval1", 1, 2);
  add_scalable("edensch", 1, 2);
  add_scalable("liarwhd", 1, 2);
  add_scalable("dqrtic", 1, 2);
  add_scalable("tridia", 1, 2);
  add_scalable("freuroth", 2, 2);
  add_scalable("nondquar", 1, 3);
  return out;
}

// Central-difference gradient verification: returns the worst relative
// component error over all supplied points, with per-component step
// h_i = eps_M^(1/3) * (1 + |x_i|) and denominator max(1, |analytic|, |fd|).
inline double gradient_check(const Problem& p, const std::vector<Eigen::VectorXd>& points) {
  const double h0 = std::cbrt(std::numeric_limits<double>::epsilon());
  double worst = 0.0;
  for (const Eigen::VectorXd& x : points) {
    if (!x.allFinite()) throw std::invalid_argument("gradient_check: non-finite point");
    const Eigen::VectorXd ga = p.grad(x);
    Eigen::VectorXd xp = x, xm = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double h = h0 * (1.0 + std::abs(x[i]));
      xp[i] = x[i] + h;
      xm[i] = x[i] - h;
      const double gfd = (p.f(xp) - p.f(xm)) / (xp[i] - xm[i]);
      xp[i] = x[i];
      xm[i] = x[i];
      const double denom = std::max({1.0, std::abs(ga[i]), std::abs(gfd)});
      worst = std::max(worst, std::abs(ga[i] - gfd) / denom);
    }
  }
  return worst;
}

}  // namespace ldltr
