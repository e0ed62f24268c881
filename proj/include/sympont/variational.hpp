#pragma once

#include "sympont/problem.hpp"
#include "sympont/trajectory.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace sympont {

/// Decision variables α_m..α_{N-1} of the discrete functional J and the
/// Euler rollout x_{n+1} = x_n + Δt α_n, x_m = x_s.
struct ControlVector {
  std::vector<Vec> controls;
  int start_index = 0;
  double dt = 0.0;
  Vec x_s;

  [[nodiscard]] std::vector<Vec> rollout() const;
};

struct MinimizeOptions {
  int starts = 5;
  std::uint64_t seed = 0;
  int max_iterations = 4000;
  double gradient_tol = 1e-13;
};

struct StartDiagnostics {
  double value = 0.0;
  int iterations = 0;
  std::string status;
};

/// ū(x_s, t_m) with the minimizing controls and adjoint multipliers.
struct DiscreteValue {
  double value = 0.0;
  ControlVector minimizer;
  std::vector<Vec> multipliers;
  std::vector<StartDiagnostics> starts;
  int best_start = -1;
};

struct JEvaluation {
  ExtendedReal value;
  std::vector<Vec> gradient;  // dJ/dα_n, empty when value is +inf
  std::vector<Vec> adjoint;   // p_m..p_N from the backward recursion
};

/// J(α) = Δt Σ L(x_n, α_n) + g(x_N).
ExtendedReal evaluate_J(const RegularizedHamiltonian& h, const ControlVector& cv);

/// J and its gradient by the backward (adjoint) recursion
///   p_N = g'(x_N),  p_n = p_{n+1} + Δt L_x(x_n, α_n),
///   dJ/dα_n = Δt (L_α(x_n, α_n) + p_{n+1}).
JEvaluation evaluate_J_with_gradient(const RegularizedHamiltonian& h, const ControlVector& cv);

/// Multi-start projected quasi-Newton minimization of J over the product of
/// closed C1-balls, for steps m..N-1 of an N-step grid on [0, T].
DiscreteValue minimize_J(const RegularizedHamiltonian& h, const Vec& x_s, int m, int steps,
                         const MinimizeOptions& opts = {});

struct Multipliers {
  std::vector<Vec> duals;  // λ_m..λ_N
  double worst_violation = 0.0;
  int worst_index = -1;
};

/// λ_N = g'(x_N), λ_n = λ_{n+1} + Δt H^δ_x(x_n, λ_{n+1}); verifies
/// α_n = H^δ_λ(x_n, λ_{n+1}) to `tol`.
Multipliers extract_multipliers(const DiscreteValue& dv, const RegularizedHamiltonian& h,
                                double tol = 1e-6);

/// Exhaustive minimum of J over a tensor grid of controls in the C1-ball.
double brute_force_value(const RegularizedHamiltonian& h, const Vec& x_s, int steps,
                         int control_grid_points);

/// Assembles a trajectory (states, multipliers, controls, value) from a minimizer.
DiscreteTrajectory trajectory_from(const DiscreteValue& dv, const Multipliers& mult);

}  // namespace sympont
