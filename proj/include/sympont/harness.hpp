#pragma once

#include "sympont/oracle.hpp"
#include "sympont/problem.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace sympont {

enum class OracleKind { exact, grid, both };
enum class SolverRoute { tpbvp, variational, both };

OracleKind parse_oracle_kind(const std::string& s);
SolverRoute parse_solver_route(const std::string& s);
std::string to_string(OracleKind k);
std::string to_string(SolverRoute r);

struct ExperimentSpec {
  std::string problem_id;
  Vec x_s;
  std::vector<double> dt_list;     // strictly decreasing, each T/N for an integer N
  std::vector<double> delta_list;
  OracleKind oracle = OracleKind::exact;
  SolverRoute route = SolverRoute::tpbvp;
  std::uint64_t seed = 0;
  std::string output_dir;
  /// Worker threads for independent cells; 0 selects hardware concurrency.
  int workers = 0;
  /// Overrides the per-dimension grid oracle defaults.
  std::optional<GridOracleOptions> grid;
};

/// Two-sided bound on u(x_s, 0) - ū(x_s, 0) for a cell.
struct ErrorBounds {
  double lower = 0.0;
  double upper = 0.0;
};

/// lower = -[(C1 C2 T/2)((e^{C2 T} - 1)Δt + Δt²) + (C1 C3/2)(e^{C2 T} - 1)Δt + Tδ] - ε
/// upper =  (1/2) C1 C2 (C3 + 1) e^{C2 T} T Δt + Tδ + ε
ErrorBounds error_bounds(const ControlProblem& p, double dt, double delta, double oracle_slack);

struct CellRecord {
  std::string problem;
  double dt = 0.0;
  double delta = 0.0;
  std::string route;
  double u_bar = 0.0;
  double u_oracle = 0.0;
  double err_signed = 0.0;  // u_oracle - u_bar
  double lower_bound = 0.0;
  double upper_bound = 0.0;
  bool lower_ok = false;
  bool upper_ok = false;
  double dual_slack = 0.0;
  int sweeps = 0;
  double residual = 0.0;
  /// Empty on success, otherwise the solver failure message (not in cells.csv).
  std::string failure;

  friend bool operator==(const CellRecord&, const CellRecord&) = default;
};

struct ExperimentReport {
  std::string problem_id;
  std::vector<CellRecord> cells;
  /// Log-log slope of |error| vs Δt at the smallest δ (per route).
  std::vector<std::pair<std::string, std::optional<double>>> dt_order;
  /// Log-log slope of |error| vs δ at the smallest Δt (per route).
  std::vector<std::pair<std::string, std::optional<double>>> delta_sensitivity;
  /// |error| never grows by more than 1e-9 as δ decreases at the smallest Δt.
  bool delta_no_blowup = true;
  OracleKind oracle = OracleKind::exact;
  double oracle_value = 0.0;
  double oracle_accuracy = 0.0;
  std::vector<std::string> notes;

  [[nodiscard]] bool bounds_ok() const;
  [[nodiscard]] bool infrastructure_ok() const;
  /// 0 all verdicts pass, 1 any bound violated, 2 infrastructure failure.
  [[nodiscard]] int exit_code() const;
};

/// Looks spec.problem_id up in the catalog.
ExperimentReport run_sweep(const ExperimentSpec& spec);
/// Runs the sweep on a caller-supplied problem; spec.problem_id is ignored.
ExperimentReport run_sweep(const ExperimentSpec& spec, const ControlProblem& p);

/// Least-squares slope of log e against log h; nonpositive or non-finite
/// errors are dropped and fewer than three survivors yield no fit.
std::optional<double> fit_order(std::span<const std::pair<double, double>> points);

/// Writes cells.csv, summary.txt, error_vs_dt.svg and error_vs_delta.svg.
void emit_reports(const ExperimentReport& report, const std::string& output_dir);

/// Header line of cells.csv.
extern const char* const kCellsHeader;
std::vector<CellRecord> read_cells_csv(const std::string& path);

}  // namespace sympont
