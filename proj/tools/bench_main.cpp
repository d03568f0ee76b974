// bench: runs the solver suite over the problem catalog and produces
// performance-profile data.
//
//   bench run --solvers ldltr,bfgsr,ms --max-n 1000 --eps 1e-4 --kmax 6000 \
//             --out DIR [--jobs N] [--seed S]
//   bench profile --metric time|iters|fevals --in DIR
//   bench list-problems
//
// Exit codes: 0 success, 1 usage error, 2 suite completed with at least one
// solver failure.

#include <algorithm>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ldltr/ldltr.hpp"

namespace {

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const std::size_t comma = s.find(',', start);
    if (comma == std::string::npos) {
      if (start < s.size()) out.push_back(s.substr(start));
      break;
    }
    if (comma > start) out.push_back(s.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

int cmd_run(const std::string& solvers_arg, long max_n, double eps, long kmax,
            const std::string& out_dir, int jobs, std::uint64_t seed) {
  const std::vector<std::string> solvers = split_csv(solvers_arg);
  if (solvers.empty()) {
    std::cerr << "bench run: --solvers must name at least one solver\n";
    return 1;
  }
  for (const std::string& s : solvers) {
    const auto& known = ldltr::known_solvers();
    if (std::find(known.begin(), known.end(), s) == known.end()) {
      std::cerr << "bench run: unknown solver '" << s << "' (known: ldltr, bfgsr, ms)\n";
      return 1;
    }
  }
  if (max_n < 2 || eps <= 0.0 || kmax < 1 || jobs < 1) {
    std::cerr << "bench run: need --max-n >= 2, --eps > 0, --kmax >= 1, --jobs >= 1\n";
    return 1;
  }

  ldltr::BenchConfig config;
  config.eps = eps;
  config.k_max = kmax;
  config.max_n = max_n;
  config.jobs = jobs;
  config.seed = seed;  // reserved; recorded for forward compatibility

  std::vector<ldltr::Problem> problems;
  try {
    problems = ldltr::catalog(max_n);
  } catch (const std::exception& e) {
    std::cerr << "bench run: " << e.what() << '\n';
    return 1;
  }

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    std::cerr << "bench run: cannot create output directory " << out_dir << ": "
              << ec.message() << '\n';
    return 1;
  }

  // Stream records as they complete; the canonical (problem-major) file is
  // rewritten once the suite finishes.
  const std::filesystem::path runs_path = std::filesystem::path(out_dir) / "runs.csv";
  std::ofstream stream(runs_path);
  if (!stream) {
    std::cerr << "bench run: cannot open " << runs_path.string() << " for writing\n";
    return 1;
  }
  stream << ldltr::kRunsCsvHeader << '\n';
  std::size_t done = 0;
  const std::size_t total = problems.size() * solvers.size();
  auto on_record = [&](const ldltr::RunRecord& r) {
    stream << ldltr::runs_csv_line(r) << '\n';
    stream.flush();
    ++done;
    std::cout << "[" << done << "/" << total << "] " << r.problem << " " << r.solver << " "
              << ldltr::to_string(r.status) << " iters=" << r.iterations << '\n';
  };

  std::vector<ldltr::RunRecord> records;
  try {
    records = ldltr::run_suite(solvers, problems, config, on_record);
  } catch (const std::exception& e) {
    std::cerr << "bench run: " << e.what() << '\n';
    return 1;
  }
  stream.close();
  ldltr::emit(records, {}, out_dir);

  long failures = 0;
  for (const std::string& s : solvers) {
    long solved = 0, count = 0;
    for (const ldltr::RunRecord& r : records) {
      if (r.solver != s) continue;
      ++count;
      if (ldltr::run_succeeded(r))
        ++solved;
      else
        ++failures;
    }
    std::cout << s << ": solved " << solved << "/" << count << '\n';
  }
  std::cout << "wrote " << runs_path.string() << '\n';
  return failures > 0 ? 2 : 0;
}

int cmd_profile(const std::string& metric_arg, const std::string& in_dir) {
  ldltr::Metric metric;
  try {
    metric = ldltr::metric_from_string(metric_arg);
  } catch (const std::exception& e) {
    std::cerr << "bench profile: " << e.what() << '\n';
    return 1;
  }
  std::vector<ldltr::RunRecord> records;
  try {
    records = ldltr::read_runs_csv(std::filesystem::path(in_dir) / "runs.csv");
  } catch (const std::exception& e) {
    std::cerr << "bench profile: " << e.what() << '\n';
    return 1;
  }
  if (records.empty()) {
    std::cerr << "bench profile: no records in " << in_dir << "/runs.csv\n";
    return 1;
  }
  ldltr::ProfileResult prof;
  try {
    prof = ldltr::performance_profile(records, metric);
  } catch (const std::exception& e) {
    std::cerr << "bench profile: " << e.what() << '\n';
    return 1;
  }
  for (const std::string& w : prof.warnings) std::cerr << "warning: " << w << '\n';

  const std::string stem = "profile_" + ldltr::to_string(metric);
  const std::filesystem::path dir(in_dir);
  ldltr::write_profile_csv(dir / (stem + ".csv"), prof);
  ldltr::write_profile_svg(dir / (stem + ".svg"), prof);
  std::cout << "wrote " << (dir / (stem + ".csv")).string() << " and "
            << (dir / (stem + ".svg")).string() << '\n';
  return 0;
}

int cmd_list_problems() {
  for (const ldltr::Problem& p : ldltr::catalog(1000)) std::cout << p.name << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"benchmark harness for the factored trust-region solver"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run solvers over the problem catalog");
  std::string solvers_arg = "ldltr,bfgsr,ms";
  long max_n = 1000;
  double eps = 1e-4;
  long kmax = 6000;
  std::string out_dir;
  int jobs = 1;
  std::uint64_t seed = 0;
  run->add_option("--solvers", solvers_arg, "comma-separated solver ids (ldltr,bfgsr,ms)");
  run->add_option("--max-n", max_n, "cap on problem dimension");
  run->add_option("--eps", eps, "gradient-norm tolerance");
  run->add_option("--kmax", kmax, "iteration cap");
  run->add_option("--out", out_dir, "output directory")->required();
  run->add_option("--jobs", jobs, "parallel (solver, problem) runs");
  run->add_option("--seed", seed, "RNG seed (reserved)");

  auto* profile = app.add_subcommand("profile", "build performance profiles from runs.csv");
  std::string metric_arg;
  std::string in_dir;
  profile->add_option("--metric", metric_arg, "time|iters|fevals")->required();
  profile->add_option("--in", in_dir, "directory containing runs.csv")->required();

  auto* list = app.add_subcommand("list-problems", "print the catalog problem names");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (run->parsed()) return cmd_run(solvers_arg, max_n, eps, kmax, out_dir, jobs, seed);
    if (profile->parsed()) return cmd_profile(metric_arg, in_dir);
    if (list->parsed()) return cmd_list_problems();
  } catch (const std::exception& e) {
    std::cerr << "bench: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
