#include "sympont/harness.hpp"

#include "sympont/catalog.hpp"
#include "sympont/symplectic.hpp"
#include "sympont/variational.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>
#include <thread>

namespace sympont {

const char* const kCellsHeader =
    "problem,dt,delta,route,u_bar,u_oracle,err_signed,lower_bound,upper_bound,lower_ok,upper_ok,"
    "dual_slack,sweeps,residual";

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Task {
  int dt_index;
  int delta_index;
  SolverRoute route;
};

struct Series {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

void write_loglog_svg(const std::string& path, const std::string& title, const std::string& xlabel,
                      const std::vector<Series>& series) {
  constexpr double W = 640, H = 440, L = 80, R = 170, T = 40, B = 60;
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
  for (const Series& s : series) {
    for (auto [x, y] : s.points) {
      if (!(x > 0.0 && y > 0.0 && std::isfinite(x) && std::isfinite(y))) continue;
      xmin = std::min(xmin, std::log10(x));
      xmax = std::max(xmax, std::log10(x));
      ymin = std::min(ymin, std::log10(y));
      ymax = std::max(ymax, std::log10(y));
    }
  }
  std::ofstream f(path);
  if (!f) throw IoError("cannot open plot for writing", path);
  f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">"
    << title << "</text>\n";
  if (!(xmin <= xmax)) {
    f << "<text x=\"" << W / 2 << "\" y=\"" << H / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\">no positive data</text>\n</svg>\n";
    return;
  }
  if (xmax - xmin < 1e-12) xmin -= 0.5, xmax += 0.5;
  if (ymax - ymin < 1e-12) ymin -= 0.5, ymax += 0.5;
  auto px = [&](double lx) { return L + (lx - xmin) / (xmax - xmin) * (W - L - R); };
  auto py = [&](double ly) { return H - B - (ly - ymin) / (ymax - ymin) * (H - T - B); };
  f << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\"" << H - T - B
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  f << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 15
    << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">log10 " << xlabel << "</text>\n";
  f << "<text x=\"20\" y=\"" << (T + H - B) / 2 << "\" transform=\"rotate(-90 20 " << (T + H - B) / 2
    << ")\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">log10 |u - u_bar|</text>\n";
  for (int k = 0; k <= 4; ++k) {
    const double lx = xmin + (xmax - xmin) * k / 4, ly = ymin + (ymax - ymin) * k / 4;
    f << "<text x=\"" << px(lx) << "\" y=\"" << H - B + 16
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">" << std::setprecision(3) << lx
      << "</text>\n";
    f << "<text x=\"" << L - 6 << "\" y=\"" << py(ly) + 4
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" << ly << "</text>\n";
  }
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
                                 "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = colors[s % 10];
    std::ostringstream poly;
    for (auto [x, y] : series[s].points) {
      if (!(x > 0.0 && y > 0.0 && std::isfinite(x) && std::isfinite(y))) continue;
      const double cx = px(std::log10(x)), cy = py(std::log10(y));
      poly << cx << ',' << cy << ' ';
      f << "<circle cx=\"" << cx << "\" cy=\"" << cy << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    }
    f << "<polyline points=\"" << poly.str() << "\" fill=\"none\" stroke=\"" << color << "\"/>\n";
    f << "<text x=\"" << W - R + 10 << "\" y=\"" << T + 16 * (s + 1) << "\" fill=\"" << color
      << "\" font-family=\"sans-serif\" font-size=\"11\">" << series[s].label << "</text>\n";
  }
  f << "</svg>\n";
  if (!f) throw IoError("failed writing plot", path);
}

std::string format_order(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string("unavailable");
}

}  // namespace

OracleKind parse_oracle_kind(const std::string& s) {
  if (s == "exact") return OracleKind::exact;
  if (s == "grid") return OracleKind::grid;
  if (s == "both") return OracleKind::both;
  throw PreconditionError("unknown oracle kind: " + s);
}

SolverRoute parse_solver_route(const std::string& s) {
  if (s == "tpbvp") return SolverRoute::tpbvp;
  if (s == "variational") return SolverRoute::variational;
  if (s == "both") return SolverRoute::both;
  throw PreconditionError("unknown solver route: " + s);
}

std::string to_string(OracleKind k) {
  switch (k) {
    case OracleKind::exact: return "exact";
    case OracleKind::grid: return "grid";
    case OracleKind::both: return "both";
  }
  return "?";
}

std::string to_string(SolverRoute r) {
  switch (r) {
    case SolverRoute::tpbvp: return "tpbvp";
    case SolverRoute::variational: return "variational";
    case SolverRoute::both: return "both";
  }
  return "?";
}

ErrorBounds error_bounds(const ControlProblem& p, double dt, double delta, double oracle_slack) {
  const double c1 = p.lipschitz_lambda, c2 = p.lipschitz_x, c3 = p.terminal_grad_bound;
  const double t = p.horizon;
  const double growth = std::exp(c2 * t) - 1.0;
  ErrorBounds b;
  b.lower = -(0.5 * c1 * c2 * t * (growth * dt + dt * dt) + 0.5 * c1 * c3 * growth * dt + t * delta) -
            oracle_slack;
  b.upper = 0.5 * c1 * c2 * (c3 + 1.0) * std::exp(c2 * t) * t * dt + t * delta + oracle_slack;
  return b;
}

bool ExperimentReport::bounds_ok() const {
  if (!delta_no_blowup) return false;
  return std::all_of(cells.begin(), cells.end(), [](const CellRecord& c) {
    return !c.failure.empty() || (c.lower_ok && c.upper_ok);
  });
}

bool ExperimentReport::infrastructure_ok() const {
  return std::all_of(cells.begin(), cells.end(), [](const CellRecord& c) { return c.failure.empty(); });
}

int ExperimentReport::exit_code() const {
  if (!infrastructure_ok()) return 2;
  return bounds_ok() ? 0 : 1;
}

std::optional<double> fit_order(std::span<const std::pair<double, double>> points) {
  std::vector<std::pair<double, double>> logs;
  for (auto [h, e] : points) {
    if (h > 0.0 && e > 0.0 && std::isfinite(h) && std::isfinite(e)) {
      logs.emplace_back(std::log(h), std::log(e));
    }
  }
  if (logs.size() < 3) return std::nullopt;
  double mx = 0.0, my = 0.0;
  for (auto [x, y] : logs) mx += x, my += y;
  mx /= logs.size();
  my /= logs.size();
  double sxx = 0.0, sxy = 0.0;
  for (auto [x, y] : logs) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  if (sxx == 0.0) return std::nullopt;
  return sxy / sxx;
}

ExperimentReport run_sweep(const ExperimentSpec& spec) {
  return run_sweep(spec, catalog::get(spec.problem_id).problem);
}

ExperimentReport run_sweep(const ExperimentSpec& spec, const ControlProblem& p) {
  if (spec.x_s.size() != p.dim) throw PreconditionError("x0 has the wrong dimension for " + p.id);
  if (spec.dt_list.empty()) throw PreconditionError("dt list is empty");
  if (spec.delta_list.empty()) throw PreconditionError("delta list is empty");
  for (std::size_t i = 1; i < spec.dt_list.size(); ++i) {
    if (!(spec.dt_list[i] < spec.dt_list[i - 1])) {
      throw PreconditionError("dt list must be strictly decreasing");
    }
  }
  std::vector<int> steps;
  for (double dt : spec.dt_list) {
    const long n = std::lround(p.horizon / dt);
    if (n < 1 || std::abs(n * dt - p.horizon) > 1e-9 * p.horizon) {
      throw PreconditionError("dt = " + format_double(dt) + " does not divide the horizon");
    }
    steps.push_back(static_cast<int>(n));
  }
  for (double delta : spec.delta_list) {
    if (!(delta > 0.0)) throw PreconditionError("delta values must be positive");
  }

  ExperimentReport report;
  report.problem_id = p.id;
  report.oracle = spec.oracle;

  // Oracle value at (x_s, 0). Failures here abort the sweep.
  const bool wants_exact = spec.oracle != OracleKind::grid;
  const bool wants_grid = spec.oracle != OracleKind::exact;
  std::optional<RefinedGridValue> grid_value;
  if (wants_grid) {
    grid_value = refined_grid_value(p, spec.x_s, spec.grid.value_or(default_grid_oracle_options(p)));
  }
  if (wants_exact) {
    const auto exact = exact_value(p, spec.x_s, 0.0);
    if (!exact) throw PreconditionError("problem " + p.id + " has no closed-form value; use --oracle grid");
    report.oracle_value = *exact;
    report.oracle_accuracy = 0.0;
    if (grid_value) {
      std::ostringstream os;
      os << "grid oracle cross-check: extrapolated " << format_double(grid_value->value) << " (accuracy "
         << format_double(grid_value->accuracy) << ") vs exact " << format_double(*exact);
      report.notes.push_back(os.str());
    }
  } else {
    report.oracle_value = grid_value->value;
    report.oracle_accuracy = grid_value->accuracy;
  }

  const RegularizationMethod method =
      p.smooth_family ? RegularizationMethod::problem_supplied : RegularizationMethod::smoothed_min;
  std::vector<RegularizedHamiltonian> regularized;
  for (double delta : spec.delta_list) regularized.push_back(regularize(p, delta, method));

  std::vector<SolverRoute> routes;
  if (spec.route != SolverRoute::variational) routes.push_back(SolverRoute::tpbvp);
  if (spec.route != SolverRoute::tpbvp) routes.push_back(SolverRoute::variational);

  std::vector<Task> tasks;
  for (int i = 0; i < static_cast<int>(steps.size()); ++i) {
    for (int j = 0; j < static_cast<int>(spec.delta_list.size()); ++j) {
      for (SolverRoute r : routes) tasks.push_back({i, j, r});
    }
  }

  report.cells.resize(tasks.size());
  auto run_task = [&](std::size_t k) {
    const Task& task = tasks[k];
    const RegularizedHamiltonian& h = regularized[task.delta_index];
    const int n_steps = steps[task.dt_index];
    CellRecord c;
    c.problem = p.id;
    c.dt = spec.dt_list[task.dt_index];
    c.delta = spec.delta_list[task.delta_index];
    c.route = to_string(task.route);
    c.u_oracle = report.oracle_value;
    const ErrorBounds b = error_bounds(p, c.dt, c.delta, report.oracle_accuracy);
    c.lower_bound = b.lower;
    c.upper_bound = b.upper;
    const std::uint64_t seed = spec.seed * 1000003ULL + k;
    try {
      DiscreteTrajectory traj;
      if (task.route == SolverRoute::tpbvp) {
        SweepOptions so;
        so.fallback = Fallback::variational;
        so.seed = seed;
        traj = solve_tpbvp(h, spec.x_s, n_steps, so);
        c.residual = scheme_residuals(traj, h).max();
      } else {
        MinimizeOptions mo;
        mo.seed = seed;
        const DiscreteValue dv = minimize_J(h, spec.x_s, 0, n_steps, mo);
        const Multipliers mult = extract_multipliers(dv, h);
        traj = trajectory_from(dv, mult);
        c.residual = mult.worst_violation;
      }
      c.u_bar = traj.value;
      c.sweeps = traj.diagnostics.iterations;
      c.dual_slack = dual_bound_check(traj, p).slack;
      c.err_signed = c.u_oracle - c.u_bar;
      c.lower_ok = c.err_signed >= c.lower_bound;
      c.upper_ok = c.err_signed <= c.upper_bound;
    } catch (const Error& e) {
      c.failure = e.what();
      c.u_bar = c.err_signed = c.dual_slack = c.residual = kNaN;
    }
    report.cells[k] = std::move(c);
  };

  const int workers = std::max(
      1, std::min<int>(spec.workers > 0 ? spec.workers : static_cast<int>(std::thread::hardware_concurrency()),
                       static_cast<int>(tasks.size())));
  if (workers == 1) {
    for (std::size_t k = 0; k < tasks.size(); ++k) run_task(k);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t k = next++; k < tasks.size(); k = next++) run_task(k);
      });
    }
    for (std::thread& t : pool) t.join();
  }

  // Fits and the δ -> 0 verdict, per route.
  const double min_delta = *std::min_element(spec.delta_list.begin(), spec.delta_list.end());
  const double min_dt = spec.dt_list.back();
  for (SolverRoute r : routes) {
    const std::string name = to_string(r);
    std::vector<std::pair<double, double>> by_dt, by_delta;
    for (const CellRecord& c : report.cells) {
      if (c.route != name || !c.failure.empty()) continue;
      if (c.delta == min_delta) by_dt.emplace_back(c.dt, std::abs(c.err_signed));
      if (c.dt == min_dt) by_delta.emplace_back(c.delta, std::abs(c.err_signed));
    }
    report.dt_order.emplace_back(name, fit_order(by_dt));
    report.delta_sensitivity.emplace_back(name, fit_order(by_delta));
    std::sort(by_delta.begin(), by_delta.end(), [](auto a, auto b) { return a.first > b.first; });
    for (std::size_t i = 1; i < by_delta.size(); ++i) {
      if (by_delta[i].second > by_delta[i - 1].second + 1e-9) {
        report.delta_no_blowup = false;
        std::ostringstream os;
        os << name << ": |error| grows from " << format_double(by_delta[i - 1].second) << " at delta "
           << format_double(by_delta[i - 1].first) << " to " << format_double(by_delta[i].second)
           << " at delta " << format_double(by_delta[i].first);
        report.notes.push_back(os.str());
      }
    }
  }
  return report;
}

void emit_reports(const ExperimentReport& report, const std::string& output_dir) {
  std::error_code ec;
  std::filesystem::create_directories(output_dir, ec);
  if (ec) throw IoError("cannot create output directory (" + ec.message() + ")", output_dir);
  const std::filesystem::path dir(output_dir);

  const std::string cells_path = (dir / "cells.csv").string();
  {
    std::ofstream f(cells_path);
    if (!f) throw IoError("cannot open for writing", cells_path);
    f << kCellsHeader << '\n';
    for (const CellRecord& c : report.cells) {
      f << c.problem << ',' << format_double(c.dt) << ',' << format_double(c.delta) << ',' << c.route << ','
        << format_double(c.u_bar) << ',' << format_double(c.u_oracle) << ',' << format_double(c.err_signed)
        << ',' << format_double(c.lower_bound) << ',' << format_double(c.upper_bound) << ','
        << (c.lower_ok ? 1 : 0) << ',' << (c.upper_ok ? 1 : 0) << ',' << format_double(c.dual_slack) << ','
        << c.sweeps << ',' << format_double(c.residual) << '\n';
    }
    if (!f) throw IoError("failed writing", cells_path);
  }

  const std::string summary_path = (dir / "summary.txt").string();
  {
    std::ofstream f(summary_path);
    if (!f) throw IoError("cannot open for writing", summary_path);
    const auto violations = std::count_if(report.cells.begin(), report.cells.end(), [](const CellRecord& c) {
      return c.failure.empty() && !(c.lower_ok && c.upper_ok);
    });
    const auto failures = std::count_if(report.cells.begin(), report.cells.end(),
                                        [](const CellRecord& c) { return !c.failure.empty(); });
    f << "problem: " << report.problem_id << '\n'
      << "oracle: " << to_string(report.oracle) << '\n'
      << "oracle_value: " << format_double(report.oracle_value) << '\n'
      << "oracle_accuracy: " << format_double(report.oracle_accuracy) << '\n'
      << "cells: " << report.cells.size() << '\n'
      << "bound_violations: " << violations << '\n'
      << "solver_failures: " << failures << '\n';
    for (const auto& [route, order] : report.dt_order) {
      f << "dt_order[" << route << "]: " << format_order(order) << '\n';
    }
    for (const auto& [route, order] : report.delta_sensitivity) {
      f << "delta_sensitivity[" << route << "]: " << format_order(order) << '\n';
    }
    f << "delta_no_blowup: " << (report.delta_no_blowup ? "pass" : "FAIL") << '\n';
    for (const CellRecord& c : report.cells) {
      if (!c.failure.empty()) {
        f << "failure: dt=" << format_double(c.dt) << " delta=" << format_double(c.delta) << " route=" << c.route
          << ": " << c.failure << '\n';
      }
    }
    for (const std::string& note : report.notes) f << "note: " << note << '\n';
    f << "exit_code: " << report.exit_code() << '\n';
    if (!f) throw IoError("failed writing", summary_path);
  }

  std::map<std::string, Series> by_delta, by_dt;
  for (const CellRecord& c : report.cells) {
    if (!c.failure.empty()) continue;
    const std::string delta_label = c.route + " delta=" + format_double(c.delta).substr(0, 8);
    const std::string dt_label = c.route + " dt=" + format_double(c.dt).substr(0, 8);
    by_delta[delta_label].label = delta_label;
    by_delta[delta_label].points.emplace_back(c.dt, std::abs(c.err_signed));
    by_dt[dt_label].label = dt_label;
    by_dt[dt_label].points.emplace_back(c.delta, std::abs(c.err_signed));
  }
  auto sorted_series = [](std::map<std::string, Series>& m) {
    std::vector<Series> out;
    for (auto& [_, s] : m) {
      std::sort(s.points.begin(), s.points.end());
      out.push_back(s);
    }
    return out;
  };
  write_loglog_svg((dir / "error_vs_dt.svg").string(), report.problem_id + ": error vs dt", "dt",
                   sorted_series(by_delta));
  write_loglog_svg((dir / "error_vs_delta.svg").string(), report.problem_id + ": error vs delta", "delta",
                   sorted_series(by_dt));
}

std::vector<CellRecord> read_cells_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open cells file", path);
  std::string line;
  if (!std::getline(f, line) || line != kCellsHeader) throw IoError("unexpected cells.csv header", path);
  std::vector<CellRecord> out;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 14) throw IoError("malformed cells.csv row", path);
    auto num = [](const std::string& s) { return std::strtod(s.c_str(), nullptr); };
    CellRecord c;
    c.problem = fields[0];
    c.dt = num(fields[1]);
    c.delta = num(fields[2]);
    c.route = fields[3];
    c.u_bar = num(fields[4]);
    c.u_oracle = num(fields[5]);
    c.err_signed = num(fields[6]);
    c.lower_bound = num(fields[7]);
    c.upper_bound = num(fields[8]);
    c.lower_ok = fields[9] == "1";
    c.upper_ok = fields[10] == "1";
    c.dual_slack = num(fields[11]);
    c.sweeps = std::stoi(fields[12]);
    c.residual = num(fields[13]);
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace sympont
