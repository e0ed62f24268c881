#pragma once

#include "sympont/problem.hpp"
#include "sympont/trajectory.hpp"

namespace sympont {

enum class Fallback { none, variational };

struct SweepOptions {
  /// 0 selects 10·N + 100.
  int max_sweeps = 0;
  double residual_tol = 1e-10;
  double relaxation = 0.5;
  Fallback fallback = Fallback::none;
  std::uint64_t seed = 0;  // forwarded to the variational fallback
};

/// Solves the discrete forward-backward system
///   x_{n+1} = x_n + Δt H^δ_λ(x_n, λ_{n+1}),  x_0 = x_s,
///   λ_n     = λ_{n+1} + Δt H^δ_x(x_n, λ_{n+1}),  λ_N = g'(x_N)
/// by damped forward-backward sweeps, and evaluates ū(x_s, 0).
DiscreteTrajectory solve_tpbvp(const RegularizedHamiltonian& h, const Vec& x_s, int steps,
                               const SweepOptions& opts = {});

/// Δt Σ L(x_n, α_n) + g(x_N) with L from the conjugate identity
/// L(x_n, α_n) = -λ_{n+1}·α_n + H^δ(x_n, λ_{n+1}).
double value_of(const DiscreteTrajectory& traj, const RegularizedHamiltonian& h);

/// Max-norm residuals of the scheme recursions evaluated on a trajectory.
struct SchemeResiduals {
  double forward = 0.0;   // x_{n+1} - x_n - Δt H_λ(x_n, λ_{n+1})
  double backward = 0.0;  // λ_n - λ_{n+1} - Δt H_x(x_n, λ_{n+1})
  double terminal = 0.0;  // λ_N - g'(x_N)
  double control = 0.0;   // α_n - H_λ(x_n, λ_{n+1})

  [[nodiscard]] double max() const;
};
SchemeResiduals scheme_residuals(const DiscreteTrajectory& traj, const RegularizedHamiltonian& h);

struct BoundReport {
  double max_abs_dual = 0.0;
  int argmax = 0;
  double bound = 0.0;
  double slack = 0.0;  // bound - max_abs_dual
  bool pass = true;
};

/// Checks |λ_n| <= (C3 + 1) e^{C2 T} - 1 (+1e-8).
BoundReport dual_bound_check(const DiscreteTrajectory& traj, const ControlProblem& p);

}  // namespace sympont
