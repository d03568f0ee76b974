#include <catch2/catch_amalgamated.hpp>

#include "ldltr/linesearch.hpp"

using ldltr::BfgsrConfig;
using ldltr::Objective;
using ldltr::SolveReport;
using ldltr::Status;
using ldltr::WolfeParams;
using ldltr::WolfeResult;

namespace {

struct Counted {
  std::function<double(const Eigen::VectorXd&)> f;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> g;
  mutable long fevals = 0;
};

bool strong_wolfe_holds(const std::function<double(const Eigen::VectorXd&)>& f,
                        const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& g,
                        const Eigen::VectorXd& x, const Eigen::VectorXd& p,
                        const WolfeResult& res, const WolfeParams& wp) {
  const double f0 = f(x);
  const double d0 = g(x).dot(p);
  const double fa = f(x + res.alpha * p);
  const double da = g(x + res.alpha * p).dot(p);
  return fa <= f0 + wp.c_armijo * res.alpha * d0 &&
         std::abs(da) <= wp.c_curv * std::abs(d0);
}

Objective rosenbrock2() {
  Objective obj;
  obj.f = [](const Eigen::VectorXd& x) {
    const double a = 1.0 - x(0);
    const double b = x(1) - x(0) * x(0);
    return a * a + 100.0 * b * b;
  };
  obj.grad = [](const Eigen::VectorXd& x) {
    Eigen::VectorXd g(2);
    const double b = x(1) - x(0) * x(0);
    g(0) = -2.0 * (1.0 - x(0)) - 400.0 * x(0) * b;
    g(1) = 200.0 * b;
    return g;
  };
  obj.x0 = Eigen::VectorXd(2);
  obj.x0 << -1.2, 1.0;
  return obj;
}

}  // namespace

TEST_CASE("line search accepts the exact quadratic minimizer at once",
          "[linesearch]") {
  auto f = [](const Eigen::VectorXd& z) { return z(0) * z(0); };
  auto g = [](const Eigen::VectorXd& z) {
    return Eigen::VectorXd::Constant(1, 2.0 * z(0)).eval();
  };
  Eigen::VectorXd x = Eigen::VectorXd::Ones(1);
  Eigen::VectorXd p = -Eigen::VectorXd::Ones(1);

  long calls = 0;
  auto fc = [&](const Eigen::VectorXd& z) { ++calls; return f(z); };
  const WolfeResult res =
      ldltr::strong_wolfe_search(fc, g, x, p, f(x), g(x).dot(p), WolfeParams{});
  REQUIRE(res.success);
  CHECK(res.alpha == 1.0);
  CHECK(res.f == 0.0);
  CHECK(res.function_evals == 1);
  CHECK(calls == 1);
  CHECK(res.x(0) == 0.0);
}

TEST_CASE("line search interpolates to an interior quadratic minimizer",
          "[linesearch]") {
  auto f = [](const Eigen::VectorXd& z) {
    return (z(0) - 0.3) * (z(0) - 0.3);
  };
  auto g = [](const Eigen::VectorXd& z) {
    return Eigen::VectorXd::Constant(1, 2.0 * (z(0) - 0.3)).eval();
  };
  Eigen::VectorXd x = Eigen::VectorXd::Zero(1);
  Eigen::VectorXd p = Eigen::VectorXd::Ones(1);

  WolfeParams wp;
  const WolfeResult res =
      ldltr::strong_wolfe_search(f, g, x, p, f(x), g(x).dot(p), wp);
  REQUIRE(res.success);
  // Quadratic interpolation lands exactly on the vertex.
  CHECK(res.alpha == Catch::Approx(0.3).epsilon(1e-10));
  CHECK(strong_wolfe_holds(f, g, x, p, res, wp));
}

TEST_CASE("line search satisfies strong Wolfe on Rosenbrock", "[linesearch]") {
  const Objective obj = rosenbrock2();
  const Eigen::VectorXd x = obj.x0;
  const Eigen::VectorXd p = -obj.grad(x);
  WolfeParams wp;
  const WolfeResult res = ldltr::strong_wolfe_search(
      obj.f, obj.grad, x, p, obj.f(x), obj.grad(x).dot(p), wp);
  REQUIRE(res.success);
  CHECK(res.alpha > 0.0);
  CHECK(strong_wolfe_holds(obj.f, obj.grad, x, p, res, wp));
  CHECK(res.f < obj.f(x));
  // The result carries the trial point and gradient for reuse.
  CHECK((res.x - (x + res.alpha * p)).norm() == 0.0);
  CHECK((res.grad - obj.grad(res.x)).norm() == 0.0);
}

TEST_CASE("line search rejects non-descent directions", "[linesearch]") {
  auto f = [](const Eigen::VectorXd& z) { return z.squaredNorm(); };
  auto g = [](const Eigen::VectorXd& z) { return (2.0 * z).eval(); };
  Eigen::VectorXd x = Eigen::VectorXd::Ones(2);
  Eigen::VectorXd p = Eigen::VectorXd::Ones(2);  // ascent
  CHECK_THROWS_AS(
      ldltr::strong_wolfe_search(f, g, x, p, f(x), g(x).dot(p), WolfeParams{}),
      std::invalid_argument);
}

TEST_CASE("line search validates its constants", "[linesearch]") {
  auto f = [](const Eigen::VectorXd& z) { return z.squaredNorm(); };
  auto g = [](const Eigen::VectorXd& z) { return (2.0 * z).eval(); };
  Eigen::VectorXd x = Eigen::VectorXd::Ones(1);
  Eigen::VectorXd p = -Eigen::VectorXd::Ones(1);
  WolfeParams wp;
  wp.c_armijo = 0.95;  // violates c_armijo < c_curv
  CHECK_THROWS_AS(
      ldltr::strong_wolfe_search(f, g, x, p, f(x), g(x).dot(p), wp),
      std::invalid_argument);
}

TEST_CASE("bfgsr solves a one-dimensional quadratic in two iterations",
          "[linesearch][bfgsr]") {
  Objective obj;
  obj.f = [](const Eigen::VectorXd& z) {
    return 0.5 * (z(0) - 3.0) * (z(0) - 3.0);
  };
  obj.grad = [](const Eigen::VectorXd& z) {
    return Eigen::VectorXd::Constant(1, z(0) - 3.0).eval();
  };
  obj.x0 = Eigen::VectorXd::Zero(1);

  const SolveReport rep = ldltr::bfgsr_minimize(obj);
  CHECK(rep.status == Status::converged);
  CHECK(rep.iterations <= 2);
  CHECK(rep.final_gnorm <= 1e-10);
  CHECK(rep.function_evals == rep.gradient_evals);  // paired evaluations
}

TEST_CASE("bfgsr returns immediately at a stationary start", "[linesearch][bfgsr]") {
  Objective obj;
  obj.f = [](const Eigen::VectorXd& z) { return z.squaredNorm(); };
  obj.grad = [](const Eigen::VectorXd& z) { return (2.0 * z).eval(); };
  obj.x0 = Eigen::VectorXd::Zero(3);

  const SolveReport rep = ldltr::bfgsr_minimize(obj);
  CHECK(rep.status == Status::converged);
  CHECK(rep.iterations == 0);
  CHECK(rep.final_f == 0.0);
}

TEST_CASE("bfgsr solves Rosenbrock", "[linesearch][bfgsr]") {
  const SolveReport rep = ldltr::bfgsr_minimize(rosenbrock2());
  CHECK(rep.status == Status::converged);
  CHECK(rep.iterations <= 150);
  CHECK(rep.final_f <= 1e-8);
  CHECK(rep.final_gnorm <= 1e-4);
}

TEST_CASE("bfgsr reports evaluator failures", "[linesearch][bfgsr]") {
  Objective obj;
  obj.f = [](const Eigen::VectorXd&) {
    return std::numeric_limits<double>::quiet_NaN();
  };
  obj.grad = [](const Eigen::VectorXd& z) { return z; };
  obj.x0 = Eigen::VectorXd::Ones(2);

  const SolveReport rep = ldltr::bfgsr_minimize(obj);
  CHECK(rep.status == Status::evaluator_failure);
  CHECK(rep.iterations == 0);
}

TEST_CASE("bfgsr honors the iteration cap", "[linesearch][bfgsr]") {
  BfgsrConfig cfg;
  cfg.k_max = 3;
  const SolveReport rep = ldltr::bfgsr_minimize(rosenbrock2(), cfg);
  CHECK(rep.status == Status::iteration_limit);
  CHECK(rep.iterations == 3);
}
