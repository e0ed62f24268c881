#pragma once

#include "sympont/types.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace sympont {

struct SolveDiagnostics {
  std::string route;  // "tpbvp", "variational" or "tpbvp->variational"
  int iterations = 0;
  double final_residual = 0.0;
  std::vector<double> residual_history;
  bool used_fallback = false;
};

/// Discrete states x_0..x_N, duals λ_0..λ_N and controls α_0..α_{N-1}.
struct DiscreteTrajectory {
  double dt = 0.0;
  int steps = 0;
  std::vector<Vec> states;
  std::vector<Vec> duals;
  std::vector<Vec> controls;
  double value = 0.0;
  SolveDiagnostics diagnostics;

  [[nodiscard]] int dim() const { return states.empty() ? 0 : static_cast<int>(states.front().size()); }
};

/// Header `n,t_n,x0..,lambda0..,alpha0..`; floats with 17 significant digits.
/// The final row leaves the control columns empty.
void write_trajectory_csv(const DiscreteTrajectory& traj, std::ostream& out);
void write_trajectory_csv(const DiscreteTrajectory& traj, const std::string& path);

/// 17-significant-digit decimal rendering shared by every CSV writer.
std::string format_double(double v);

}  // namespace sympont
