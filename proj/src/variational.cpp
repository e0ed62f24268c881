#include "sympont/variational.hpp"

#include "sympont/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

namespace sympont {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Flattened view of a control sequence: block n holds α_{m+n}.
class FlatControls {
public:
  FlatControls(int blocks, int dim) : blocks_(blocks), dim_(dim) {}

  [[nodiscard]] Vec flatten(const std::vector<Vec>& controls) const {
    Vec z(blocks_ * dim_);
    for (int n = 0; n < blocks_; ++n) z.segment(n * dim_, dim_) = controls[n];
    return z;
  }
  [[nodiscard]] std::vector<Vec> unflatten(const Vec& z) const {
    std::vector<Vec> out(blocks_);
    for (int n = 0; n < blocks_; ++n) out[n] = z.segment(n * dim_, dim_);
    return out;
  }
  /// Projection onto the product of closed balls of the given radius.
  [[nodiscard]] Vec project(Vec z, double radius) const {
    for (int n = 0; n < blocks_; ++n) {
      auto seg = z.segment(n * dim_, dim_);
      const double norm = seg.norm();
      if (norm > radius) seg *= (radius > 0.0 ? radius / norm : 0.0);
    }
    return z;
  }

private:
  int blocks_;
  int dim_;
};

struct LocalResult {
  Vec z;
  double value = kInf;
  int iterations = 0;
  std::string status;
};

// Projected BFGS with Armijo backtracking along the projection arc; falls back
// to projected steepest descent whenever the quasi-Newton direction fails.
LocalResult projected_quasi_newton(const std::function<JEvaluation(const Vec&)>& eval_full,
                                   const std::function<double(const Vec&)>& eval_value,
                                   const FlatControls& layout, double radius, Vec z,
                                   const MinimizeOptions& opts) {
  const Eigen::Index n = z.size();
  JEvaluation cur = eval_full(z);
  double f = cur.value.value();
  Vec g = layout.flatten(cur.gradient);
  Eigen::MatrixXd inv_hessian = Eigen::MatrixXd::Identity(n, n);
  bool identity = true;
  int no_progress = 0;

  LocalResult out;
  int it = 0;
  for (; it < opts.max_iterations; ++it) {
    const Vec pg = layout.project(z - g, radius) - z;
    if (pg.lpNorm<Eigen::Infinity>() <= opts.gradient_tol) {
      out.status = "stationary";
      break;
    }
    Vec dir = -(inv_hessian * g);
    if (g.dot(dir) >= 0.0) {
      inv_hessian.setIdentity();
      identity = true;
      dir = -g;
    }

    bool accepted = false;
    Vec z_new;
    double f_new = kInf;
    for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
      for (double t = 1.0; t >= 1e-20; t *= 0.5) {
        z_new = layout.project(z + t * dir, radius);
        const Vec step = z_new - z;
        if (step.lpNorm<Eigen::Infinity>() == 0.0) break;
        f_new = eval_value(z_new);
        if (std::isfinite(f_new) && f_new <= f + 1e-4 * g.dot(step)) {
          accepted = true;
          break;
        }
      }
      if (!accepted && !identity) {
        inv_hessian.setIdentity();
        identity = true;
        dir = -g;
      } else {
        break;
      }
    }
    if (!accepted) {
      out.status = "line search exhausted";
      break;
    }

    no_progress = (f - f_new <= 1e-16 * (1.0 + std::abs(f))) ? no_progress + 1 : 0;
    const JEvaluation next = eval_full(z_new);
    const Vec g_new = layout.flatten(next.gradient);
    const Vec s = z_new - z;
    const Vec y = g_new - g;
    const double sy = s.dot(y);
    if (sy > 1e-300 && std::isfinite(sy)) {
      if (identity) {
        inv_hessian *= sy / y.squaredNorm();
        identity = false;
      }
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd left = Eigen::MatrixXd::Identity(n, n) - rho * s * y.transpose();
      inv_hessian = left * inv_hessian * left.transpose() + rho * s * s.transpose();
    }
    z = z_new;
    f = next.value.value();
    g = g_new;
    if (no_progress >= 5) {
      out.status = "no progress";
      break;
    }
  }
  if (out.status.empty()) out.status = "iteration limit";
  out.z = std::move(z);
  out.value = f;
  out.iterations = it;
  return out;
}

}  // namespace

std::vector<Vec> ControlVector::rollout() const {
  std::vector<Vec> x(controls.size() + 1);
  x[0] = x_s;
  for (std::size_t n = 0; n < controls.size(); ++n) x[n + 1] = x[n] + dt * controls[n];
  return x;
}

ExtendedReal evaluate_J(const RegularizedHamiltonian& h, const ControlVector& cv) {
  const std::vector<Vec> x = cv.rollout();
  ExtendedReal running = 0.0;
  for (std::size_t n = 0; n < cv.controls.size(); ++n) {
    running = running + evaluate_running_cost(h, x[n], cv.controls[n], false).value;
    if (running.is_infinite()) return running;
  }
  return cv.dt * running + ExtendedReal(h.base.terminal_cost(x.back()));
}

JEvaluation evaluate_J_with_gradient(const RegularizedHamiltonian& h, const ControlVector& cv) {
  const std::vector<Vec> x = cv.rollout();
  const int blocks = static_cast<int>(cv.controls.size());
  JEvaluation out;
  std::vector<RunningCostEval> costs(blocks);
  double running = 0.0;
  for (int n = 0; n < blocks; ++n) {
    costs[n] = evaluate_running_cost(h, x[n], cv.controls[n], true);
    if (costs[n].value.is_infinite()) {
      out.value = ExtendedReal::infinity();
      return out;
    }
    running += costs[n].value.value();
  }
  out.value = cv.dt * running + h.base.terminal_cost(x.back());
  out.adjoint.resize(blocks + 1);
  out.gradient.resize(blocks);
  out.adjoint[blocks] = h.base.terminal_cost_grad(x.back());
  for (int n = blocks - 1; n >= 0; --n) {
    out.gradient[n] = cv.dt * (costs[n].grad_alpha + out.adjoint[n + 1]);
    out.adjoint[n] = out.adjoint[n + 1] + cv.dt * costs[n].grad_x;
  }
  return out;
}

DiscreteValue minimize_J(const RegularizedHamiltonian& h, const Vec& x_s, int m, int steps,
                         const MinimizeOptions& opts) {
  const ControlProblem& p = h.base;
  if (!(m >= 0 && m < steps)) throw PreconditionError("minimize_J needs 0 <= m < N");
  if (x_s.size() != p.dim) throw PreconditionError("start point has the wrong dimension");
  const int blocks = steps - m;
  const int d = p.dim;
  // Stay strictly inside the control ball: smoothed running costs keep their
  // minimizers in the open ball but have unbounded slope on its boundary.
  const double radius = p.lipschitz_lambda * (1.0 - 1e-10);
  const FlatControls layout(blocks, d);

  ControlVector cv;
  cv.start_index = m;
  cv.dt = p.horizon / steps;
  cv.x_s = x_s;
  cv.controls.assign(blocks, Vec::Zero(d));

  auto eval_full = [&](const Vec& z) {
    cv.controls = layout.unflatten(z);
    return evaluate_J_with_gradient(h, cv);
  };
  auto eval_value = [&](const Vec& z) {
    cv.controls = layout.unflatten(z);
    const ExtendedReal v = evaluate_J(h, cv);
    return v.is_infinite() ? kInf : v.value();
  };

  // Zero controls, full speed down g, then seeded random points in the ball.
  std::vector<Vec> starts;
  starts.emplace_back(Vec::Zero(blocks * d));
  {
    const Vec slope = p.terminal_cost_grad(x_s);
    const Vec alpha = slope.norm() > 0.0 ? Vec(-radius * slope / slope.norm()) : Vec(Vec::Zero(d));
    starts.emplace_back(alpha.replicate(blocks, 1));
  }
  Sampler rng(opts.seed);
  while (static_cast<int>(starts.size()) < opts.starts) {
    Vec z(blocks * d);
    for (int n = 0; n < blocks; ++n) z.segment(n * d, d) = rng.in_ball(d, radius);
    starts.push_back(std::move(z));
  }
  starts.resize(std::max(opts.starts, 1));
  for (Vec& z : starts) z = layout.project(std::move(z), radius);

  DiscreteValue best;
  best.value = kInf;
  Vec best_z;
  std::vector<std::string> failures;
  for (std::size_t s = 0; s < starts.size(); ++s) {
    Vec z = starts[s];
    // Pull infeasible starts toward the origin.
    int shrink = 0;
    while (!std::isfinite(eval_value(z)) && shrink < 20) {
      z *= 0.9;
      ++shrink;
    }
    StartDiagnostics diag;
    if (!std::isfinite(eval_value(z))) {
      diag.value = kInf;
      diag.status = "infeasible start";
      failures.push_back("start " + std::to_string(s) + ": infeasible");
      best.starts.push_back(diag);
      continue;
    }
    const LocalResult r = projected_quasi_newton(eval_full, eval_value, layout, radius, z, opts);
    diag.value = r.value;
    diag.iterations = r.iterations;
    diag.status = r.status;
    best.starts.push_back(diag);
    if (r.value < best.value) {
      best.value = r.value;
      best.best_start = static_cast<int>(s);
      best_z = r.z;
    }
  }
  if (best.best_start < 0) {
    throw OptimizationFailedError("all starts of minimize_J failed", failures);
  }

  cv.controls = layout.unflatten(best_z);
  const JEvaluation final_eval = evaluate_J_with_gradient(h, cv);
  best.value = final_eval.value.value();
  best.minimizer = cv;
  best.multipliers = final_eval.adjoint;
  return best;
}

Multipliers extract_multipliers(const DiscreteValue& dv, const RegularizedHamiltonian& h, double tol) {
  const ControlVector& cv = dv.minimizer;
  const std::vector<Vec> x = cv.rollout();
  const int blocks = static_cast<int>(cv.controls.size());
  Multipliers out;
  out.duals.resize(blocks + 1);
  out.duals[blocks] = h.base.terminal_cost_grad(x[blocks]);
  for (int n = blocks - 1; n >= 0; --n) {
    out.duals[n] = out.duals[n + 1] + cv.dt * h.grad_x(x[n], out.duals[n + 1]);
    const double violation =
        (cv.controls[n] - h.grad_lambda(x[n], out.duals[n + 1])).lpNorm<Eigen::Infinity>();
    if (violation > out.worst_violation || out.worst_index < 0) {
      out.worst_violation = violation;
      out.worst_index = cv.start_index + n;
    }
  }
  if (out.worst_violation > tol) {
    std::ostringstream os;
    os << "minimizer is not stationary: |alpha_n - H_lambda(x_n, lambda_{n+1})| = " << out.worst_violation
       << " at n = " << out.worst_index;
    throw ExtractionInconsistentError(os.str(), out.worst_violation, out.worst_index);
  }
  return out;
}

double brute_force_value(const RegularizedHamiltonian& h, const Vec& x_s, int steps,
                         int control_grid_points) {
  const ControlProblem& p = h.base;
  const int d = p.dim;
  if (steps < 1 || control_grid_points < 1) {
    throw PreconditionError("brute_force_value needs N >= 1 and at least one grid point");
  }
  if (static_cast<double>(d) * steps * std::log10(static_cast<double>(control_grid_points)) > 8.0) {
    throw BudgetExceededError("control_grid_points^(d*N) exceeds 1e8");
  }
  const double radius = p.lipschitz_lambda;

  std::vector<double> axis(control_grid_points, 0.0);
  if (control_grid_points > 1) {
    for (int i = 0; i < control_grid_points; ++i) {
      axis[i] = -radius + 2.0 * radius * i / (control_grid_points - 1);
    }
  }
  std::vector<Vec> candidates;
  std::vector<int> idx(d, 0);
  while (true) {
    Vec a(d);
    for (int i = 0; i < d; ++i) a[i] = axis[idx[i]];
    if (a.norm() <= radius * (1.0 + 1e-12)) candidates.push_back(std::move(a));
    int k = 0;
    while (k < d && ++idx[k] == control_grid_points) idx[k++] = 0;
    if (k == d) break;
  }

  const double dt = p.horizon / steps;
  double best = kInf;
  std::function<void(int, const Vec&, double)> descend = [&](int n, const Vec& x, double cost) {
    if (n == steps) {
      best = std::min(best, cost + p.terminal_cost(x));
      return;
    }
    for (const Vec& a : candidates) {
      const ExtendedReal l = evaluate_running_cost(h, x, a, false).value;
      if (l.is_infinite()) continue;
      descend(n + 1, x + dt * a, cost + dt * l.value());
    }
  };
  descend(0, x_s, 0.0);
  return best;
}

DiscreteTrajectory trajectory_from(const DiscreteValue& dv, const Multipliers& mult) {
  DiscreteTrajectory traj;
  traj.dt = dv.minimizer.dt;
  traj.steps = static_cast<int>(dv.minimizer.controls.size());
  traj.states = dv.minimizer.rollout();
  traj.duals = mult.duals;
  traj.controls = dv.minimizer.controls;
  traj.value = dv.value;
  traj.diagnostics.route = "variational";
  for (const StartDiagnostics& s : dv.starts) traj.diagnostics.iterations += s.iterations;
  traj.diagnostics.final_residual = mult.worst_violation;
  return traj;
}

}  // namespace sympont
