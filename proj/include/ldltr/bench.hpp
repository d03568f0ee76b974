#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <thread>
#include <type_traits>
#include <vector>

#include "ldltr/driver.hpp"
#include "ldltr/linesearch.hpp"
#include "ldltr/ms_solver.hpp"
#include "ldltr/problems.hpp"
#include "ldltr/types.hpp"

namespace ldltr {

struct RunRecord {
  std::string problem;
  Eigen::Index n = 0;
  std::string solver;
  Status status = Status::evaluator_failure;
  long iterations = 0;
  long function_evals = 0;
  long gradient_evals = 0;
  double final_f = std::numeric_limits<double>::quiet_NaN();
  double final_gnorm = std::numeric_limits<double>::quiet_NaN();
  double wall_time_s = 0.0;
};

inline bool run_succeeded(const RunRecord& r) {
  return r.status == Status::converged || r.status == Status::near_optimal;
}

struct BenchConfig {
  double eps = 1e-4;
  long k_max = 6000;
  Eigen::Index max_n = 1000;
  int jobs = 1;
  std::uint64_t seed = 0;  // reserved for randomized suite variants
};

inline const std::vector<std::string>& known_solvers() {
  static const std::vector<std::string> ids = {"ldltr", "bfgsr", "ms"};
  return ids;
}

// Runs one solver on one problem instance with the suite-wide tolerances.
inline SolveReport run_one(const std::string& solver, const Problem& problem,
                           const BenchConfig& config) {
  const Objective obj = problem.objective();
  if (solver == "ldltr") {
    SolverConfig c;
    c.eps = config.eps;
    c.k_max = config.k_max;
    return minimize(obj, c);
  }
  if (solver == "bfgsr") {
    BfgsrConfig c;
    c.eps = config.eps;
    c.k_max = config.k_max;
    return bfgsr_minimize(obj, c);
  }
  if (solver == "ms") {
    SolverConfig c;
    c.eps = config.eps;
    c.k_max = config.k_max;
    return ms_minimize(obj, c);
  }
  throw std::invalid_argument("unknown solver id: " + solver);
}

// Runs every (problem, solver) pair once. Records are ordered problem-major,
// solver-minor regardless of the number of worker threads; on_record (if
// given) is invoked once per finished run, serialized, in completion order.
// Each pair re-instantiates its problem from the registry so that evaluation
// counters and solver state are private to the run.
inline std::vector<RunRecord> run_suite(
    const std::vector<std::string>& solvers, const std::vector<Problem>& problems,
    const BenchConfig& config,
    const std::function<void(const RunRecord&)>& on_record = nullptr) {
  if (solvers.empty()) throw std::invalid_argument("run_suite: no solvers given");
  if (problems.empty()) throw std::invalid_argument("run_suite: no problems given");
  for (const std::string& s : solvers) {
    const auto& known = known_solvers();
    if (std::find(known.begin(), known.end(), s) == known.end())
      throw std::invalid_argument("unknown solver id: " + s);
  }

  struct Task {
    const Problem* problem;
    const std::string* solver;
  };
  std::vector<Task> tasks;
  tasks.reserve(problems.size() * solvers.size());
  for (const Problem& p : problems)
    for (const std::string& s : solvers) tasks.push_back({&p, &s});

  std::vector<RunRecord> records(tasks.size());
  std::mutex sink_mutex;

  auto run_task = [&](std::size_t idx) {
    const Problem& base = *tasks[idx].problem;
    const std::string& solver = *tasks[idx].solver;
    Problem inst;
    try {
      inst = problem_instance(base.base, base.n);
    } catch (const std::exception&) {
      inst = base;  // non-catalog problem: run the caller's instance directly
    }
    RunRecord rec;
    rec.problem = inst.name;
    rec.n = inst.n;
    rec.solver = solver;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const SolveReport rep = run_one(solver, inst, config);
      rec.status = rep.status;
      rec.iterations = rep.iterations;
      rec.function_evals = rep.function_evals;
      rec.gradient_evals = rep.gradient_evals;
      rec.final_f = rep.final_f;
      rec.final_gnorm = rep.final_gnorm;
      rec.wall_time_s = rep.wall_time_s;
    } catch (const std::exception&) {
      // A solver failure on one problem must not take down the suite.
      rec.status = Status::evaluator_failure;
      rec.function_evals = inst.counters ? inst.counters->fevals : 0;
      rec.gradient_evals = inst.counters ? inst.counters->gevals : 0;
      rec.wall_time_s =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
    records[idx] = rec;
    if (on_record) {
      const std::lock_guard<std::mutex> lock(sink_mutex);
      on_record(records[idx]);
    }
  };

  const int jobs = std::max(1, config.jobs);
  if (jobs == 1 || tasks.size() <= 1) {
    for (std::size_t i = 0; i < tasks.size(); ++i) run_task(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    const int workers = static_cast<int>(
        std::min<std::size_t>(static_cast<std::size_t>(jobs), tasks.size()));
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < tasks.size(); i = next.fetch_add(1))
          run_task(i);
      });
    for (std::thread& t : pool) t.join();
  }
  return records;
}

enum class Metric { time, iterations, fevals };

inline std::string to_string(Metric m) {
  switch (m) {
    case Metric::time: return "time";
    case Metric::iterations: return "iters";
    case Metric::fevals: return "fevals";
  }
  throw std::logic_error("unreachable metric");
}

inline Metric metric_from_string(const std::string& s) {
  if (s == "time") return Metric::time;
  if (s == "iters") return Metric::iterations;
  if (s == "fevals") return Metric::fevals;
  throw std::invalid_argument("unknown metric: " + s + " (expected time|iters|fevals)");
}

struct ProfilePoint {
  double tau = 0.0;
  double rho = 0.0;
};

struct ProfileResult {
  Metric metric = Metric::time;
  std::vector<std::string> solvers;                // first-appearance order
  std::vector<std::vector<ProfilePoint>> curves;   // parallel to solvers
  std::vector<std::string> warnings;
};

// Extended performance profiles: pi_{p,s} = t_{p,s} / min_{i != s} t_{p,i},
// so ratios below 1 are possible. Failed runs get pi = +inf. With a single
// solver the classical denominator (min over all solvers) is used instead.
inline ProfileResult performance_profile(const std::vector<RunRecord>& records,
                                         Metric metric) {
  ProfileResult out;
  out.metric = metric;

  std::vector<std::string> problems;
  for (const RunRecord& r : records) {
    if (std::find(out.solvers.begin(), out.solvers.end(), r.solver) == out.solvers.end())
      out.solvers.push_back(r.solver);
    if (std::find(problems.begin(), problems.end(), r.problem) == problems.end())
      problems.push_back(r.problem);
  }
  if (out.solvers.empty()) throw std::invalid_argument("performance_profile: no records");
  const std::size_t ns = out.solvers.size();
  const std::size_t np = problems.size();
  const double inf = std::numeric_limits<double>::infinity();

  auto metric_value = [&](const RunRecord& r) -> double {
    switch (metric) {
      case Metric::time: return r.wall_time_s;
      case Metric::iterations: return static_cast<double>(r.iterations);
      case Metric::fevals: return static_cast<double>(r.function_evals);
    }
    return inf;
  };

  // t[p*ns + s]: metric value on success, +inf otherwise (or if the pair is
  // missing from the records).
  std::vector<double> t(np * ns, inf);
  for (const RunRecord& r : records) {
    const auto sp = std::find(out.solvers.begin(), out.solvers.end(), r.solver);
    const auto pp = std::find(problems.begin(), problems.end(), r.problem);
    const std::size_t s = static_cast<std::size_t>(sp - out.solvers.begin());
    const std::size_t p = static_cast<std::size_t>(pp - problems.begin());
    if (run_succeeded(r)) t[p * ns + s] = metric_value(r);
  }

  const bool classical = ns < 2;
  if (classical)
    out.warnings.push_back(
        "single solver: falling back to the classical profile denominator "
        "(min over all solvers)");

  std::vector<double> pi(np * ns, inf);
  for (std::size_t p = 0; p < np; ++p) {
    for (std::size_t s = 0; s < ns; ++s) {
      double denom = inf;
      for (std::size_t i = 0; i < ns; ++i) {
        if (!classical && i == s) continue;
        denom = std::min(denom, t[p * ns + i]);
      }
      const double v = t[p * ns + s];
      double ratio;
      if (std::isinf(v))
        ratio = inf;  // failed run: never counted at finite tau
      else if (v == 0.0 && denom == 0.0)
        ratio = 1.0;  // both instantaneous: tie by convention
      else if (denom == 0.0)
        ratio = inf;  // strictly slower than an instantaneous competitor
      else
        ratio = v / denom;  // v/inf = 0 when every competitor failed
      pi[p * ns + s] = ratio;
    }
  }

  // Log-spaced tau grid covering [min pi / 2, max finite pi * 2].
  double lo = inf, hi = 0.0;
  for (double v : pi) {
    if (std::isfinite(v) && v > 0.0) lo = std::min(lo, v);
    if (std::isfinite(v)) hi = std::max(hi, v);
  }
  if (!std::isfinite(lo) || hi <= 0.0) {
    lo = 0.5;
    hi = 2.0;
  } else {
    lo = lo / 2.0;
    hi = hi * 2.0;
    if (hi <= lo) hi = 2.0 * lo;
  }
  constexpr int grid_points = 512;
  std::vector<double> grid(grid_points);
  const double log_lo = std::log(lo), log_hi = std::log(hi);
  for (int j = 0; j < grid_points; ++j)
    grid[j] = std::exp(log_lo + (log_hi - log_lo) * static_cast<double>(j) /
                                    static_cast<double>(grid_points - 1));
  // Exact breakpoints: every finite ratio joins the grid so the step curve
  // takes its true value at the data points, not only near them.
  for (double v : pi)
    if (std::isfinite(v) && v > 0.0) grid.push_back(v);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  out.curves.assign(ns, {});
  for (std::size_t s = 0; s < ns; ++s) {
    out.curves[s].reserve(grid.size());
    for (double tau : grid) {
      std::size_t count = 0;
      for (std::size_t p = 0; p < np; ++p)
        if (pi[p * ns + s] <= tau) ++count;
      out.curves[s].push_back({tau, static_cast<double>(count) / static_cast<double>(np)});
    }
  }
  return out;
}

namespace detail {

// Shortest round-trip decimal representation.
inline std::string format_double(double v) {
  char buf[64];
  const std::to_chars_result res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

template <typename T>
inline T parse_number(std::string_view field, const char* what) {
  T value{};
  const char* first = field.data();
  const char* last = field.data() + field.size();
  std::from_chars_result res{};
  if constexpr (std::is_floating_point_v<T>)
    res = std::from_chars(first, last, value, std::chars_format::general);
  else
    res = std::from_chars(first, last, value);
  if (res.ec != std::errc{} || res.ptr != last)
    throw std::runtime_error(std::string("malformed CSV field for ") + what + ": " +
                             std::string(field));
  return value;
}

}  // namespace detail

inline constexpr const char* kRunsCsvHeader =
    "problem,n,solver,status,iterations,fevals,gevals,final_f,final_gnorm,wall_time_s";

inline std::string runs_csv_line(const RunRecord& r) {
  using detail::format_double;
  return r.problem + "," + std::to_string(r.n) + "," + r.solver + "," + to_string(r.status) +
         "," + std::to_string(r.iterations) + "," + std::to_string(r.function_evals) + "," +
         std::to_string(r.gradient_evals) + "," + format_double(r.final_f) + "," +
         format_double(r.final_gnorm) + "," + format_double(r.wall_time_s);
}

inline void write_runs_csv(const std::filesystem::path& path,
                           const std::vector<RunRecord>& records) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << kRunsCsvHeader << '\n';
  for (const RunRecord& r : records) out << runs_csv_line(r) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

inline std::vector<RunRecord> read_runs_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty CSV: " + path.string());
  if (line != kRunsCsvHeader)
    throw std::runtime_error("unexpected runs.csv header: " + line);
  std::vector<RunRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = detail::split_csv_line(line);
    if (fields.size() != 10)
      throw std::runtime_error("malformed runs.csv row: " + line);
    RunRecord r;
    r.problem = std::string(fields[0]);
    r.n = detail::parse_number<long>(fields[1], "n");
    r.solver = std::string(fields[2]);
    r.status = status_from_string(std::string(fields[3]));
    r.iterations = detail::parse_number<long>(fields[4], "iterations");
    r.function_evals = detail::parse_number<long>(fields[5], "fevals");
    r.gradient_evals = detail::parse_number<long>(fields[6], "gevals");
    r.final_f = detail::parse_number<double>(fields[7], "final_f");
    r.final_gnorm = detail::parse_number<double>(fields[8], "final_gnorm");
    r.wall_time_s = detail::parse_number<double>(fields[9], "wall_time_s");
    records.push_back(std::move(r));
  }
  return records;
}

inline void write_profile_csv(const std::filesystem::path& path, const ProfileResult& prof) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << "solver,tau,rho\n";
  for (std::size_t s = 0; s < prof.solvers.size(); ++s)
    for (const ProfilePoint& pt : prof.curves[s])
      out << prof.solvers[s] << ',' << detail::format_double(pt.tau) << ','
          << detail::format_double(pt.rho) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

// Dependency-free SVG polyline chart of the profile curves, log-x, with a
// dotted vertical marker at tau = 1.
inline void write_profile_svg(const std::filesystem::path& path, const ProfileResult& prof) {
  constexpr double W = 760.0, H = 520.0;
  constexpr double ML = 70.0, MR = 20.0, MT = 40.0, MB = 60.0;
  const double plot_w = W - ML - MR;
  const double plot_h = H - MT - MB;

  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const auto& curve : prof.curves)
    for (const ProfilePoint& pt : curve) {
      lo = std::min(lo, pt.tau);
      hi = std::max(hi, pt.tau);
    }
  if (!(std::isfinite(lo) && hi > lo)) {
    lo = 0.5;
    hi = 2.0;
  }
  const double llo = std::log10(lo), lhi = std::log10(hi);
  auto xmap = [&](double tau) {
    return ML + plot_w * (std::log10(tau) - llo) / (lhi - llo);
  };
  auto ymap = [&](double rho) { return MT + plot_h * (1.0 - rho); };

  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
  constexpr int n_palette = 5;

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
  out << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
  out << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\""
      << " font-size=\"16\">Performance profile (" << to_string(prof.metric) << ")</text>\n";

  // Frame.
  out << "<rect x=\"" << ML << "\" y=\"" << MT << "\" width=\"" << plot_w << "\" height=\""
      << plot_h << "\" fill=\"none\" stroke=\"#333333\"/>\n";

  // Horizontal grid and y labels.
  for (int i = 0; i <= 4; ++i) {
    const double rho = 0.25 * i;
    const double y = ymap(rho);
    out << "<line x1=\"" << ML << "\" y1=\"" << y << "\" x2=\"" << ML + plot_w << "\" y2=\""
        << y << "\" stroke=\"#dddddd\"/>\n";
    out << "<text x=\"" << ML - 8 << "\" y=\"" << y + 4
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">"
        << detail::format_double(rho) << "</text>\n";
  }
  // Decade ticks on the x axis.
  for (int e = static_cast<int>(std::ceil(llo)); e <= static_cast<int>(std::floor(lhi)); ++e) {
    const double tau = std::pow(10.0, e);
    const double x = xmap(tau);
    out << "<line x1=\"" << x << "\" y1=\"" << MT << "\" x2=\"" << x << "\" y2=\""
        << MT + plot_h << "\" stroke=\"#eeeeee\"/>\n";
    out << "<text x=\"" << x << "\" y=\"" << MT + plot_h + 18
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">1e" << e
        << "</text>\n";
  }
  out << "<text x=\"" << ML + plot_w / 2 << "\" y=\"" << H - 14
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
      << "performance ratio &#964;</text>\n";
  out << "<text x=\"18\" y=\"" << MT + plot_h / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\""
      << " transform=\"rotate(-90 18 " << MT + plot_h / 2 << ")\">fraction of problems</text>\n";

  // Dotted vertical at tau = 1.
  if (lo <= 1.0 && 1.0 <= hi) {
    const double x1 = xmap(1.0);
    out << "<line x1=\"" << x1 << "\" y1=\"" << MT << "\" x2=\"" << x1 << "\" y2=\""
        << MT + plot_h << "\" stroke=\"#555555\" stroke-dasharray=\"4 4\"/>\n";
  }

  for (std::size_t s = 0; s < prof.solvers.size(); ++s) {
    const char* color = palette[s % n_palette];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.8\" points=\"";
    for (const ProfilePoint& pt : prof.curves[s])
      out << xmap(pt.tau) << "," << ymap(pt.rho) << " ";
    out << "\"/>\n";
    // Legend entry.
    const double ly = MT + 16.0 + 18.0 * static_cast<double>(s);
    out << "<line x1=\"" << ML + plot_w - 150 << "\" y1=\"" << ly << "\" x2=\""
        << ML + plot_w - 120 << "\" y2=\"" << ly << "\" stroke=\"" << color
        << "\" stroke-width=\"1.8\"/>\n";
    out << "<text x=\"" << ML + plot_w - 112 << "\" y=\"" << ly + 4
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << prof.solvers[s]
        << "</text>\n";
  }
  out << "</svg>\n";
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

// Writes runs.csv plus profile_<metric>.csv / .svg for each given profile.
inline void emit(const std::vector<RunRecord>& records,
                 const std::vector<ProfileResult>& profiles,
                 const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  write_runs_csv(out_dir / "runs.csv", records);
  for (const ProfileResult& prof : profiles) {
    const std::string stem = "profile_" + to_string(prof.metric);
    write_profile_csv(out_dir / (stem + ".csv"), prof);
    write_profile_svg(out_dir / (stem + ".svg"), prof);
  }
}

}  // namespace ldltr
