#include "sympont/catalog.hpp"
#include "sympont/harness.hpp"
#include "sympont/symplectic.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <sstream>

namespace {

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    try {
      out.push_back(std::stod(item, &used));
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0) throw sympont::PreconditionError(std::string("cannot parse ") + what + " entry '" + item + "'");
  }
  return out;
}

sympont::Vec to_vec(const std::vector<double>& v) {
  return Eigen::Map<const sympont::Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

void print_check(const char* name, const sympont::ConstantCheck& c) {
  std::cout << name << ": declared " << sympont::format_double(c.declared) << ", empirical "
            << sympont::format_double(c.empirical) << (c.pass ? "  ok" : "  VIOLATED") << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Symplectic Pontryagin solver and HJB error-bound experiments"};
  app.require_subcommand(1);

  std::string problem, x0, dt, delta, oracle = "exact", route = "tpbvp", out = "sympont-out";
  std::uint64_t seed = 0;
  int workers = 0;
  auto* run = app.add_subcommand("run", "Run a (dt, delta) sweep and write reports");
  run->add_option("--problem", problem, "Catalog problem id")->required();
  run->add_option("--x0", x0, "Start point, comma-separated")->required();
  run->add_option("--dt", dt, "Time steps, comma-separated and strictly decreasing")->required();
  run->add_option("--delta", delta, "Regularization levels, comma-separated")->required();
  run->add_option("--oracle", oracle, "exact, grid or both")->check(CLI::IsMember({"exact", "grid", "both"}));
  run->add_option("--route", route, "tpbvp, variational or both")
      ->check(CLI::IsMember({"tpbvp", "variational", "both"}));
  run->add_option("--seed", seed, "Seed for multi-start optimization");
  run->add_option("--out", out, "Output directory");
  run->add_option("--workers", workers, "Worker threads (0 = hardware concurrency)");

  app.add_subcommand("list-problems", "List catalog problems");

  int samples = 10000;
  auto* verify = app.add_subcommand("verify-constants", "Check a problem's declared constants empirically");
  verify->add_option("--problem", problem, "Catalog problem id")->required();
  verify->add_option("--samples", samples, "Number of sample points");
  verify->add_option("--seed", seed, "Sampling seed");

  int steps = 10;
  double single_delta = 1e-2;
  std::string csv_path;
  auto* solve = app.add_subcommand("solve", "Solve one discrete problem and print or export the trajectory");
  solve->add_option("--problem", problem, "Catalog problem id")->required();
  solve->add_option("--x0", x0, "Start point, comma-separated")->required();
  solve->add_option("--steps", steps, "Number of time steps N");
  solve->add_option("--delta", single_delta, "Regularization level");
  solve->add_option("--csv", csv_path, "Write the trajectory to this CSV file");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("list-problems")) {
      for (const std::string& id : sympont::catalog::list()) {
        std::cout << id << "  " << sympont::catalog::get(id).description << '\n';
      }
      return 0;
    }

    if (app.got_subcommand("verify-constants")) {
      const auto& p = sympont::catalog::get(problem).problem;
      const sympont::ConstantsReport r = sympont::verify_constants(p, samples, seed);
      std::cout << "problem: " << p.id << " (" << r.sample_count << " samples)\n";
      print_check("C1", r.c1);
      print_check("C2", r.c2);
      print_check("C3", r.c3);
      std::cout << "concavity: worst violation " << sympont::format_double(r.worst_concavity_violation)
                << (r.concave ? "  ok" : "  VIOLATED") << '\n';
      return r.pass() ? 0 : 1;
    }

    if (app.got_subcommand("solve")) {
      const auto& p = sympont::catalog::get(problem).problem;
      const auto method = p.smooth_family ? sympont::RegularizationMethod::problem_supplied
                                          : sympont::RegularizationMethod::smoothed_min;
      const auto h = sympont::regularize(p, single_delta, method);
      sympont::SweepOptions opts;
      opts.fallback = sympont::Fallback::variational;
      const auto traj = sympont::solve_tpbvp(h, to_vec(parse_list(x0, "x0")), steps, opts);
      std::cout << "value: " << sympont::format_double(traj.value) << "\nroute: " << traj.diagnostics.route
                << "\nsweeps: " << traj.diagnostics.iterations << '\n';
      if (!csv_path.empty()) sympont::write_trajectory_csv(traj, csv_path);
      return 0;
    }

    sympont::ExperimentSpec spec;
    spec.problem_id = problem;
    spec.x_s = to_vec(parse_list(x0, "x0"));
    spec.dt_list = parse_list(dt, "dt");
    spec.delta_list = parse_list(delta, "delta");
    spec.oracle = sympont::parse_oracle_kind(oracle);
    spec.route = sympont::parse_solver_route(route);
    spec.seed = seed;
    spec.output_dir = out;
    spec.workers = workers;
    const sympont::ExperimentReport report = sympont::run_sweep(spec);
    sympont::emit_reports(report, out);
    std::cout << report.cells.size() << " cells written to " << out << "; exit code " << report.exit_code()
              << '\n';
    return report.exit_code();
  } catch (const sympont::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
