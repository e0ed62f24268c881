#pragma once

#include "sympont/problem.hpp"
#include "sympont/trajectory.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace sympont {

/// Tensor-product grid on an axis-aligned box.
struct GridSpec {
  Box box;
  std::vector<int> nodes;  // per axis, >= 2

  [[nodiscard]] int dim() const { return box.dim(); }
  [[nodiscard]] double spacing(int axis) const;
  [[nodiscard]] std::size_t node_count() const;
};

/// Samples of u(·, t_n) on a grid, n = 0..N, with multilinear interpolation.
struct GridValueFunction {
  GridSpec grid;
  std::vector<double> times;
  std::vector<std::vector<double>> values;  // values[n][flat node], axis 0 fastest
  double reach_speed = 0.0;                 // C1
  std::string problem_id;
  int control_samples = 0;

  [[nodiscard]] int steps() const { return static_cast<int>(times.size()) - 1; }
  [[nodiscard]] Vec node(std::size_t flat) const;

  /// Region where slice n does not depend on clamped boundary data:
  /// the box shrunk by C1·(T - t_n).
  [[nodiscard]] Box valid_region(int n) const;

  /// Throws DomainError outside valid_region(n).
  [[nodiscard]] double interpolate(const Vec& x, int n) const;
};

/// Control samples spanning the closed ball of the given radius. In 1-D,
/// `samples` uniform points on [-r, r]; in 2-D and 3-D, `samples` points on
/// the sphere of radius r plus three interior shells and the origin.
std::vector<Vec> sample_controls(int dim, double radius, int samples);

/// Backward semi-Lagrangian dynamic programming for the value function:
///   u[·, N] = g,
///   u[x, n] = min_α { Δt L(x, α) + u[x + Δt α, n + 1] }.
/// Uses the problem's own (un-regularized) running cost. Nodes of a slice are
/// split over `workers` threads (0 selects hardware concurrency).
GridValueFunction solve_grid_dp(const ControlProblem& p, const GridSpec& grid, int steps,
                                int control_samples, int workers = 0);

/// Closed-form u(x, t) when the problem carries one.
std::optional<double> exact_value(const ControlProblem& p, const Vec& x, double t);

/// Fine-resolution solve of the forward-backward system (N_fine >= 1e4), on
/// H itself when smooth and on its δ-regularization otherwise.
DiscreteTrajectory continuous_hamiltonian_flow(const ControlProblem& p, const Vec& x_s, int fine_steps,
                                               double delta = 1e-6);

/// Node-coordinate CSV (`x0..,n,value`) plus JSON metadata sidecar.
void export_grid_value_function(const GridValueFunction& u, const std::string& csv_path,
                                const std::string& json_path);

// ---------------------------------------------------------------------------
// Two-resolution grid oracle at a single start point.

struct GridOracleOptions {
  int steps = 400;
  /// grid spacing = C1·Δt / spacing_ratio, so extreme controls land on nodes.
  double spacing_ratio = 2.0;
  int control_samples = 5;
  /// Extra width around x_s ± C1·T.
  double margin = 0.5;
};

GridOracleOptions default_grid_oracle_options(const ControlProblem& p);

/// Grid of the given spacing around x_s covering x_s ± (C1·T + margin), with
/// x_s on a node.
GridSpec grid_around(const ControlProblem& p, const Vec& x_s, double spacing, double margin);

struct RefinedGridValue {
  double value = 0.0;     // Richardson extrapolation 2·fine - coarse
  double accuracy = 0.0;  // |fine - coarse|
  double coarse = 0.0;
  double fine = 0.0;
};

/// Solves at (N, K, h) and (2N, refined K, h/2) and extrapolates.
RefinedGridValue refined_grid_value(const ControlProblem& p, const Vec& x_s,
                                    const GridOracleOptions& opts);

}  // namespace sympont
