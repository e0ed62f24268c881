#include "sympont/symplectic.hpp"

#include "sympont/variational.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace sympont {

namespace {

double max_norm_diff(const std::vector<Vec>& a, const std::vector<Vec>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = (a[i] - b[i]).lpNorm<Eigen::Infinity>();
    if (!(d <= m)) m = d;  // propagates NaN
  }
  return m;
}

}  // namespace

DiscreteTrajectory solve_tpbvp(const RegularizedHamiltonian& h, const Vec& x_s, int steps,
                               const SweepOptions& opts) {
  const ControlProblem& p = h.base;
  if (steps < 1) throw PreconditionError("solve_tpbvp needs at least one time step");
  if (x_s.size() != p.dim) throw PreconditionError("start point has the wrong dimension");
  if (!(opts.residual_tol > 0.0)) throw PreconditionError("residual_tol must be positive");
  if (!(opts.relaxation > 0.0 && opts.relaxation <= 1.0)) {
    throw PreconditionError("relaxation must lie in (0, 1]");
  }
  if (!p.domain_box.shrunk(p.reach_radius()).contains(x_s, 1e-12)) {
    throw PreconditionError("start point must lie in the domain box shrunk by the reachable radius C1*T");
  }

  const int n_steps = steps;
  const double dt = p.horizon / n_steps;
  const int max_sweeps = opts.max_sweeps > 0 ? opts.max_sweeps : 10 * n_steps + 100;

  std::vector<Vec> x(n_steps + 1);
  std::vector<Vec> lambda(n_steps + 1);
  std::vector<Vec> candidate(n_steps + 1);

  auto forward = [&](const std::vector<Vec>& duals) {
    x[0] = x_s;
    for (int n = 0; n < n_steps; ++n) x[n + 1] = x[n] + dt * h.grad_lambda(x[n], duals[n + 1]);
  };
  auto backward = [&](std::vector<Vec>& duals) {
    duals[n_steps] = p.terminal_cost_grad(x[n_steps]);
    for (int n = n_steps - 1; n >= 0; --n) {
      duals[n] = duals[n + 1] + dt * h.grad_x(x[n], duals[n + 1]);
    }
  };

  // Zero-dual rollout, then constant duals at g' of its end point.
  std::fill(lambda.begin(), lambda.end(), Vec::Zero(p.dim));
  forward(lambda);
  std::fill(lambda.begin(), lambda.end(), p.terminal_cost_grad(x[n_steps]));

  std::vector<double> history;
  for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
    forward(lambda);
    backward(candidate);
    const double change = max_norm_diff(candidate, lambda);
    history.push_back(change);
    if (!std::isfinite(change)) break;

    if (change <= opts.residual_tol) {
      // `candidate` satisfies the terminal and backward relations exactly for
      // the current states; accept if the forward relation also closes.
      DiscreteTrajectory traj;
      traj.dt = dt;
      traj.steps = n_steps;
      traj.states = x;
      traj.duals = candidate;
      traj.controls.resize(n_steps);
      double forward_residual = 0.0;
      for (int n = 0; n < n_steps; ++n) {
        traj.controls[n] = h.grad_lambda(x[n], candidate[n + 1]);
        forward_residual = std::max(
            forward_residual, (x[n + 1] - x[n] - dt * traj.controls[n]).lpNorm<Eigen::Infinity>());
      }
      if (forward_residual <= opts.residual_tol) {
        traj.diagnostics.route = "tpbvp";
        traj.diagnostics.iterations = sweep;
        traj.diagnostics.final_residual = std::max(change, forward_residual);
        traj.diagnostics.residual_history = std::move(history);
        traj.value = value_of(traj, h);
        return traj;
      }
    }
    for (int n = 0; n <= n_steps; ++n) lambda[n] += opts.relaxation * (candidate[n] - lambda[n]);
  }

  if (opts.fallback == Fallback::variational) {
    MinimizeOptions mo;
    mo.seed = opts.seed;
    const DiscreteValue dv = minimize_J(h, x_s, 0, n_steps, mo);
    const Multipliers mult = extract_multipliers(dv, h);
    DiscreteTrajectory traj = trajectory_from(dv, mult);
    traj.diagnostics.route = "tpbvp->variational";
    traj.diagnostics.used_fallback = true;
    traj.diagnostics.iterations += static_cast<int>(history.size());
    traj.diagnostics.residual_history = std::move(history);
    return traj;
  }

  std::ostringstream os;
  os << "forward-backward sweeps did not converge after " << history.size() << " sweeps (last change "
     << (history.empty() ? 0.0 : history.back()) << ")";
  throw NonConvergenceError(os.str(), std::move(history));
}

double value_of(const DiscreteTrajectory& traj, const RegularizedHamiltonian& h) {
  double running = 0.0;
  for (int n = 0; n < traj.steps; ++n) {
    const Vec& next_dual = traj.duals[n + 1];
    running += -next_dual.dot(traj.controls[n]) + h.value(traj.states[n], next_dual);
  }
  return traj.dt * running + h.base.terminal_cost(traj.states[traj.steps]);
}

double SchemeResiduals::max() const { return std::max({forward, backward, terminal, control}); }

SchemeResiduals scheme_residuals(const DiscreteTrajectory& traj, const RegularizedHamiltonian& h) {
  SchemeResiduals r;
  const double dt = traj.dt;
  const int n_steps = traj.steps;
  for (int n = 0; n < n_steps; ++n) {
    const Vec& xn = traj.states[n];
    const Vec& next_dual = traj.duals[n + 1];
    const Vec velocity = h.grad_lambda(xn, next_dual);
    r.forward = std::max(r.forward, (traj.states[n + 1] - xn - dt * velocity).lpNorm<Eigen::Infinity>());
    r.backward = std::max(
        r.backward,
        (traj.duals[n] - next_dual - dt * h.grad_x(xn, next_dual)).lpNorm<Eigen::Infinity>());
    r.control = std::max(r.control, (traj.controls[n] - velocity).lpNorm<Eigen::Infinity>());
  }
  r.terminal = (traj.duals[n_steps] - h.base.terminal_cost_grad(traj.states[n_steps]))
                   .lpNorm<Eigen::Infinity>();
  return r;
}

BoundReport dual_bound_check(const DiscreteTrajectory& traj, const ControlProblem& p) {
  BoundReport r;
  r.bound = p.dual_bound();
  for (std::size_t n = 0; n < traj.duals.size(); ++n) {
    const double a = traj.duals[n].norm();
    if (a > r.max_abs_dual) {
      r.max_abs_dual = a;
      r.argmax = static_cast<int>(n);
    }
  }
  r.slack = r.bound - r.max_abs_dual;
  r.pass = r.max_abs_dual <= r.bound + 1e-8;
  return r;
}

}  // namespace sympont
