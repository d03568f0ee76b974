#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "ldltr/bench.hpp"

using ldltr::BenchConfig;
using ldltr::Metric;
using ldltr::ProfileResult;
using ldltr::RunRecord;
using ldltr::Status;

namespace {

RunRecord record(std::string problem, std::string solver, double time,
                 Status status = Status::converged, long iters = 10) {
  RunRecord r;
  r.problem = std::move(problem);
  r.n = 4;
  r.solver = std::move(solver);
  r.status = status;
  r.iterations = iters;
  r.function_evals = 2 * iters;
  r.gradient_evals = iters;
  r.final_f = 1e-9;
  r.final_gnorm = 1e-6;
  r.wall_time_s = time;
  return r;
}

// Step-function evaluation of a profile curve.
double rho_at(const std::vector<ldltr::ProfilePoint>& curve, double tau) {
  double rho = 0.0;
  for (const auto& pt : curve) {
    if (pt.tau <= tau) rho = pt.rho;
    else break;
  }
  return rho;
}

std::size_t solver_index(const ProfileResult& prof, const std::string& id) {
  for (std::size_t i = 0; i < prof.solvers.size(); ++i)
    if (prof.solvers[i] == id) return i;
  FAIL("solver not found: " << id);
  return 0;
}

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const char* tag)
      : path(std::filesystem::temp_directory_path() /
             (std::string("ldltr_test_") + tag)) {
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

}  // namespace

TEST_CASE("extended profile reproduces the hand-computed table", "[bench]") {
  // Solver a is twice as fast as solver b on every problem.
  std::vector<RunRecord> recs = {
      record("p1", "a", 1.0), record("p1", "b", 2.0),
      record("p2", "a", 2.0), record("p2", "b", 4.0),
      record("p3", "a", 3.0), record("p3", "b", 6.0),
  };
  const ProfileResult prof = ldltr::performance_profile(recs, Metric::time);
  REQUIRE(prof.solvers.size() == 2);
  CHECK(prof.warnings.empty());
  const auto& ca = prof.curves[solver_index(prof, "a")];
  const auto& cb = prof.curves[solver_index(prof, "b")];

  // pi_a = 0.5 and pi_b = 2 on every problem.
  CHECK(rho_at(ca, 0.5) == 1.0);
  CHECK(rho_at(ca, 0.49) == 0.0);
  CHECK(rho_at(cb, 1.99) == 0.0);
  CHECK(rho_at(cb, 2.0) == 1.0);
}

TEST_CASE("profile treats failed runs as infinite ratios", "[bench]") {
  std::vector<RunRecord> recs = {
      record("p1", "a", 1.0),
      record("p1", "b", 2.0, Status::iteration_limit),
      record("p2", "a", 2.0), record("p2", "b", 1.0),
      record("p3", "a", 3.0), record("p3", "b", 6.0),
  };
  const ProfileResult prof = ldltr::performance_profile(recs, Metric::time);
  const auto& ca = prof.curves[solver_index(prof, "a")];
  const auto& cb = prof.curves[solver_index(prof, "b")];

  // b failed p1, so its curve can never reach 1 at a finite tau.
  CHECK(cb.back().rho == Catch::Approx(2.0 / 3.0));
  // a's competitor on p1 failed: pi = t/inf = 0, counted from the start.
  CHECK(ca.front().rho >= 1.0 / 3.0);
  CHECK(ca.back().rho == 1.0);
}

TEST_CASE("profile ties zero against zero", "[bench]") {
  std::vector<RunRecord> recs = {
      record("p1", "a", 0.0, Status::converged, 0),
      record("p1", "b", 0.0, Status::converged, 0),
  };
  const ProfileResult prof = ldltr::performance_profile(recs, Metric::iterations);
  const auto& ca = prof.curves[solver_index(prof, "a")];
  CHECK(rho_at(ca, 1.0) == 1.0);
  CHECK(rho_at(ca, 0.999) == 0.0);
}

TEST_CASE("single-solver profiles fall back to the classical ratio", "[bench]") {
  std::vector<RunRecord> recs = {
      record("p1", "a", 1.0),
      record("p2", "a", 2.0),
  };
  const ProfileResult prof = ldltr::performance_profile(recs, Metric::time);
  REQUIRE(prof.solvers.size() == 1);
  CHECK(!prof.warnings.empty());
  const auto& ca = prof.curves[0];
  CHECK(rho_at(ca, 1.0) == 1.0);  // every problem ties with itself
  CHECK(rho_at(ca, 0.9) == 0.0);
}

TEST_CASE("metric names round trip", "[bench]") {
  CHECK(ldltr::to_string(Metric::time) == "time");
  CHECK(ldltr::to_string(Metric::iterations) == "iters");
  CHECK(ldltr::to_string(Metric::fevals) == "fevals");
  CHECK(ldltr::metric_from_string("time") == Metric::time);
  CHECK(ldltr::metric_from_string("iters") == Metric::iterations);
  CHECK(ldltr::metric_from_string("fevals") == Metric::fevals);
  CHECK_THROWS_AS(ldltr::metric_from_string("walltime"), std::invalid_argument);
}

TEST_CASE("status names round trip with hyphens", "[bench]") {
  const std::vector<Status> all = {
      Status::converged,       Status::near_optimal,
      Status::iteration_limit, Status::radius_collapse,
      Status::linesearch_failure, Status::evaluator_failure,
  };
  for (Status s : all) CHECK(ldltr::status_from_string(ldltr::to_string(s)) == s);
  CHECK(ldltr::to_string(Status::near_optimal) == "near-optimal");
  CHECK(ldltr::to_string(Status::iteration_limit) == "iteration-limit");
  CHECK_THROWS_AS(ldltr::status_from_string("near_optimal"),
                  std::invalid_argument);
}

TEST_CASE("terminal classification upgrades stalled-but-close runs", "[bench]") {
  const double factor = ldltr::near_optimal_factor();
  CHECK(factor ==
        Catch::Approx(std::pow(std::numeric_limits<double>::epsilon(), 2.0 / 3.0))
            .epsilon(1e-12));

  // Objective branch: |f_k| within factor * |f_0|.
  CHECK(ldltr::classify_terminal(Status::iteration_limit, 1.0, 1e-12, 1.0, 1.0) ==
        Status::near_optimal);
  // Gradient branch: ||g_k|| within factor * ||g_0||.
  CHECK(ldltr::classify_terminal(Status::iteration_limit, 1.0, 1.0, 1.0, 1e-12) ==
        Status::near_optimal);
  // Neither branch: the raw status stands.
  CHECK(ldltr::classify_terminal(Status::iteration_limit, 1.0, 0.5, 1.0, 0.5) ==
        Status::iteration_limit);
  CHECK(ldltr::classify_terminal(Status::radius_collapse, 1.0, 1e-12, 1.0, 1.0) ==
        Status::near_optimal);
  CHECK(ldltr::classify_terminal(Status::linesearch_failure, 1.0, 1.0, 1.0,
                                 1e-12) == Status::near_optimal);
  // Converged and failure statuses pass through untouched.
  CHECK(ldltr::classify_terminal(Status::converged, 1.0, 1e-12, 1.0, 1.0) ==
        Status::converged);
  CHECK(ldltr::classify_terminal(Status::evaluator_failure, 1.0, 1e-12, 1.0,
                                 1.0) == Status::evaluator_failure);
}

TEST_CASE("run_succeeded accepts converged and near-optimal only", "[bench]") {
  CHECK(ldltr::run_succeeded(record("p", "s", 1.0, Status::converged)));
  CHECK(ldltr::run_succeeded(record("p", "s", 1.0, Status::near_optimal)));
  CHECK_FALSE(ldltr::run_succeeded(record("p", "s", 1.0, Status::iteration_limit)));
  CHECK_FALSE(ldltr::run_succeeded(record("p", "s", 1.0, Status::radius_collapse)));
  CHECK_FALSE(
      ldltr::run_succeeded(record("p", "s", 1.0, Status::linesearch_failure)));
  CHECK_FALSE(
      ldltr::run_succeeded(record("p", "s", 1.0, Status::evaluator_failure)));
}

TEST_CASE("runs csv lines use shortest round-trip floats", "[bench]") {
  RunRecord r = record("p", "s", 0.125);
  r.n = 2;
  r.iterations = 3;
  r.function_evals = 4;
  r.gradient_evals = 5;
  r.final_f = 0.5;
  r.final_gnorm = 0.25;
  CHECK(ldltr::runs_csv_line(r) == "p,2,s,converged,3,4,5,0.5,0.25,0.125");
  CHECK(ldltr::detail::format_double(0.1) == "0.1");
  CHECK(ldltr::detail::format_double(1e22) == "1e+22");
}

TEST_CASE("runs csv round trips including non-finite fields", "[bench]") {
  TempDir dir("csv");
  std::vector<RunRecord> recs = {
      record("rosenbrock_2", "ldltr", 0.001953125),
      record("woods_4", "bfgsr", 3.5e-5, Status::iteration_limit, 6000),
  };
  recs[1].final_f = std::numeric_limits<double>::quiet_NaN();
  recs[1].final_gnorm = 1e-22;

  const auto path = dir.path / "runs.csv";
  ldltr::write_runs_csv(path, recs);
  const std::vector<RunRecord> back = ldltr::read_runs_csv(path);
  REQUIRE(back.size() == recs.size());
  for (std::size_t i = 0; i < recs.size(); ++i) {
    CHECK(back[i].problem == recs[i].problem);
    CHECK(back[i].n == recs[i].n);
    CHECK(back[i].solver == recs[i].solver);
    CHECK(back[i].status == recs[i].status);
    CHECK(back[i].iterations == recs[i].iterations);
    CHECK(back[i].function_evals == recs[i].function_evals);
    CHECK(back[i].gradient_evals == recs[i].gradient_evals);
    if (std::isnan(recs[i].final_f))
      CHECK(std::isnan(back[i].final_f));
    else
      CHECK(back[i].final_f == recs[i].final_f);
    CHECK(back[i].final_gnorm == recs[i].final_gnorm);
    CHECK(back[i].wall_time_s == recs[i].wall_time_s);
  }
}

TEST_CASE("runs csv reader rejects a mismatched header", "[bench]") {
  TempDir dir("hdr");
  const auto path = dir.path / "runs.csv";
  std::ofstream(path) << "problem,n,solver\nrosenbrock_2,2,ldltr\n";
  CHECK_THROWS_AS(ldltr::read_runs_csv(path), std::runtime_error);
}

TEST_CASE("run_suite produces deterministic problem-major order", "[bench]") {
  const std::vector<std::string> solvers = {"ldltr", "bfgsr", "ms"};
  const std::vector<ldltr::Problem> problems = {
      ldltr::problem_instance("diagquad", 4),
      ldltr::problem_instance("rosenbrock", 2),
  };
  BenchConfig cfg;
  cfg.eps = 1e-5;
  cfg.k_max = 500;

  long seen = 0;
  const std::vector<RunRecord> recs =
      ldltr::run_suite(solvers, problems, cfg,
                       [&](const RunRecord&) { ++seen; });
  REQUIRE(recs.size() == 6);
  CHECK(seen == 6);
  for (std::size_t p = 0; p < problems.size(); ++p)
    for (std::size_t s = 0; s < solvers.size(); ++s) {
      const RunRecord& r = recs[p * solvers.size() + s];
      CHECK(r.problem == problems[p].name);
      CHECK(r.solver == solvers[s]);
      CHECK(r.status == Status::converged);
      CHECK(r.function_evals > 0);
      CHECK(r.gradient_evals > 0);
      CHECK(r.wall_time_s >= 0.0);
    }

  // A parallel run returns records in the same order.
  BenchConfig cfg2 = cfg;
  cfg2.jobs = 2;
  const std::vector<RunRecord> recs2 = ldltr::run_suite(solvers, problems, cfg2);
  REQUIRE(recs2.size() == recs.size());
  for (std::size_t i = 0; i < recs.size(); ++i) {
    CHECK(recs2[i].problem == recs[i].problem);
    CHECK(recs2[i].solver == recs[i].solver);
    CHECK(recs2[i].status == recs[i].status);
    CHECK(recs2[i].iterations == recs[i].iterations);
  }
}

TEST_CASE("run_suite accepts problems outside the catalog", "[bench]") {
  ldltr::Problem p;
  p.name = "flat_3";
  p.base = "flat";
  p.n = 3;
  p.x0 = Eigen::VectorXd::Zero(3);
  p.counters = std::make_shared<ldltr::EvalCounters>();
  p.f = [](const Eigen::VectorXd&) { return 7.0; };
  p.grad = [](const Eigen::VectorXd& x) {
    return Eigen::VectorXd::Zero(x.size()).eval();
  };

  const std::vector<RunRecord> recs =
      ldltr::run_suite({"ldltr"}, {p}, BenchConfig{});
  REQUIRE(recs.size() == 1);
  CHECK(recs[0].status == Status::converged);  // stationary start
  CHECK(recs[0].iterations == 0);
}

TEST_CASE("run_suite validates the solver list", "[bench]") {
  const std::vector<ldltr::Problem> problems = {
      ldltr::problem_instance("diagquad", 4)};
  CHECK_THROWS_AS(ldltr::run_suite({}, problems, BenchConfig{}),
                  std::invalid_argument);
  CHECK_THROWS_AS(ldltr::run_suite({"newton"}, problems, BenchConfig{}),
                  std::invalid_argument);
}

TEST_CASE("emit writes the canonical artifact set", "[bench]") {
  TempDir dir("emit");
  std::vector<RunRecord> recs = {
      record("p1", "a", 1.0), record("p1", "b", 2.0),
      record("p2", "a", 2.0), record("p2", "b", 4.0),
      record("p3", "a", 3.0), record("p3", "b", 6.0),
  };
  const ProfileResult prof = ldltr::performance_profile(recs, Metric::time);
  ldltr::emit(recs, {prof}, dir.path);

  CHECK(std::filesystem::exists(dir.path / "runs.csv"));
  CHECK(std::filesystem::exists(dir.path / "profile_time.csv"));
  CHECK(std::filesystem::exists(dir.path / "profile_time.svg"));

  const std::vector<RunRecord> back = ldltr::read_runs_csv(dir.path / "runs.csv");
  CHECK(back.size() == recs.size());

  std::ifstream svg(dir.path / "profile_time.svg");
  std::string content((std::istreambuf_iterator<char>(svg)),
                      std::istreambuf_iterator<char>());
  CHECK(content.find("<svg") != std::string::npos);
  CHECK(content.find("polyline") != std::string::npos);

  std::ifstream csv(dir.path / "profile_time.csv");
  std::string header;
  std::getline(csv, header);
  CHECK(header == "solver,tau,rho");
}
