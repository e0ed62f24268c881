#include "support/test_problems.hpp"

#include "sympont/symplectic.hpp"
#include "sympont/variational.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <functional>
#include <sstream>

using namespace sympont;
using namespace sympont::testing;
using Catch::Approx;

namespace {

double bisect(const std::function<double(double)>& f, double lo, double hi) {
  double flo = f(lo);
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm < 0) == (flo < 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double g_prime(double x) { return x / std::sqrt(1.0 + x * x); }

}  // namespace

TEST_CASE("eikonal sweep: constant duals and uniform steps toward the origin") {
  const double delta = 1e-2;
  const RegularizedHamiltonian h = smoothed("eikonal-1d", delta);
  const DiscreteTrajectory traj = solve_tpbvp(h, v1(2.0), 10);

  // Independent fixed point x_N = 2 + T·H^δ_λ(g'(x_N)) by bisection.
  const double x_end = bisect(
      [&](double x) {
        const double l = g_prime(x);
        return x - 2.0 + l / std::sqrt(l * l + delta * delta);
      },
      0.5, 2.0);
  CHECK(traj.states.back()[0] == Approx(x_end).margin(1e-10));
  for (int n = 0; n <= traj.steps; ++n) {
    CHECK(traj.duals[n][0] == Approx(g_prime(x_end)).margin(1e-10));
    CHECK(traj.states[n][0] == Approx(2.0 + (x_end - 2.0) * n / 10.0).margin(1e-10));
  }
  CHECK(traj.diagnostics.route == "tpbvp");
  CHECK(traj.dt == Approx(0.1));
  CHECK(traj.controls.size() == 10u);
}

TEST_CASE("x-independent Hamiltonian with linear terminal cost") {
  const double c = 0.5;
  const ControlProblem p = linear_terminal_problem(c);
  const RegularizedHamiltonian h = regularize(p, 1e-3, RegularizationMethod::problem_supplied);
  const DiscreteTrajectory traj = solve_tpbvp(h, v1(0.3), 7);
  const double speed = -c / std::sqrt(1.0 + c * c);
  for (const Vec& l : traj.duals) CHECK(l[0] == Approx(c).margin(1e-14));
  CHECK(traj.states.back()[0] == Approx(0.3 + speed).margin(1e-12));
  const double expected = (-c * speed + 1.0 - std::sqrt(1.0 + c * c)) + c * (0.3 + speed);
  CHECK(traj.value == Approx(expected).margin(1e-12));
  const BoundReport b = dual_bound_check(traj, p);
  CHECK(b.max_abs_dual == Approx(c).margin(1e-14));
  CHECK(b.pass);
}

TEST_CASE("single step solves the scalar fixed point") {
  const double delta = 0.1;
  const RegularizedHamiltonian h = smoothed("eikonal-1d", delta);
  const DiscreteTrajectory traj = solve_tpbvp(h, v1(2.0), 1);
  const double x1 = bisect(
      [&](double x) {
        const double l = g_prime(x);
        return x - 2.0 + l / std::sqrt(l * l + delta * delta);
      },
      0.5, 2.0);
  const double alpha = x1 - 2.0;
  const double running = -delta * std::sqrt(1.0 - alpha * alpha) + delta / 2;
  CHECK(traj.states[1][0] == Approx(x1).margin(1e-10));
  CHECK(traj.value == Approx(running + std::sqrt(1.0 + x1 * x1)).margin(1e-10));
}

TEST_CASE("value_of on a zero-cost problem is the terminal cost") {
  const RegularizedHamiltonian h = unregularized(catalog::get("eikonal-1d").problem);
  const DiscreteTrajectory traj = solve_tpbvp(h, v1(2.0), 5);
  CHECK(value_of(traj, h) == Approx(h.base.terminal_cost(traj.states.back())).margin(1e-15));
  CHECK(traj.value == Approx(std::sqrt(2.0)).margin(1e-12));
}

TEST_CASE("value_of matches the direct sum of running costs at a solution") {
  const RegularizedHamiltonian h = smoothed("eikonal-1d-costed", 1e-2);
  const DiscreteTrajectory traj = solve_tpbvp(h, v1(2.0), 20);
  ControlVector cv;
  cv.controls = traj.controls;
  cv.dt = traj.dt;
  cv.x_s = traj.states.front();
  CHECK(value_of(traj, h) == Approx(evaluate_J(h, cv).value()).epsilon(1e-12));
}

TEST_CASE("dual bound arithmetic") {
  ControlProblem p = linear_terminal_problem(1.0);
  p.lipschitz_x = 1.0;
  // (C3 + 1) e^{C2 T} - 1 with C2 = C3 = T = 1.
  CHECK(p.dual_bound() == Approx(4.43656365691809).epsilon(1e-12));
  const DiscreteTrajectory traj =
      solve_tpbvp(regularize(linear_terminal_problem(1.0), 1e-3, RegularizationMethod::problem_supplied),
                  v1(0.0), 4);
  const BoundReport b = dual_bound_check(traj, p);
  CHECK(b.max_abs_dual == Approx(1.0).margin(1e-14));
  CHECK(b.slack == Approx(4.43656365691809 - 1.0).epsilon(1e-12));
  CHECK(b.pass);
}

TEST_CASE("accepted solves satisfy the scheme and the dual bound") {
  struct Case {
    const char* id;
    Vec x;
  };
  for (const Case& c : {Case{"eikonal-1d", v1(2.0)}, Case{"eikonal-1d-costed", v1(-1.7)},
                        Case{"eikonal-2d", v2(1.5, 1.0)}, Case{"smooth-quadratic-1d", v1(1.0)},
                        Case{"smooth-quadratic-1d", v1(-2.5)}}) {
    for (int n : {1, 3, 16, 64}) {
      const RegularizedHamiltonian h = smoothed(c.id, 1e-3);
      const DiscreteTrajectory traj = solve_tpbvp(h, c.x, n);
      const SchemeResiduals r = scheme_residuals(traj, h);
      INFO(c.id << " N=" << n);
      CHECK(r.forward <= 1e-10);
      CHECK(r.backward <= 1e-10);
      CHECK(r.terminal == 0.0);
      CHECK(r.control == 0.0);
      CHECK(dual_bound_check(traj, h.base).pass);
      for (const Vec& a : traj.controls) CHECK(a.norm() <= h.base.lipschitz_lambda + 1e-12);
    }
  }
}

TEST_CASE("residual checker rejects the wrong symplectic pairing") {
  const RegularizedHamiltonian h = smoothed("eikonal-1d-costed", 1e-1);
  DiscreteTrajectory traj = solve_tpbvp(h, v1(2.0), 10);
  REQUIRE(scheme_residuals(traj, h).max() <= 1e-10);
  // Re-integrate the states with H_λ(x_n, λ_n) instead of H_λ(x_n, λ_{n+1}).
  for (int n = 0; n < traj.steps; ++n) {
    traj.controls[n] = h.grad_lambda(traj.states[n], traj.duals[n]);
    traj.states[n + 1] = traj.states[n] + traj.dt * traj.controls[n];
  }
  const SchemeResiduals r = scheme_residuals(traj, h);
  CHECK(r.max() > 1e-8);
}

TEST_CASE("solves are bitwise deterministic") {
  const RegularizedHamiltonian h = smoothed("eikonal-1d-costed", 1e-4);
  const DiscreteTrajectory a = solve_tpbvp(h, v1(1.3), 40);
  const DiscreteTrajectory b = solve_tpbvp(h, v1(1.3), 40);
  CHECK(a.value == b.value);
  for (int n = 0; n <= 40; ++n) {
    CHECK(a.states[n] == b.states[n]);
    CHECK(a.duals[n] == b.duals[n]);
  }
}

TEST_CASE("solve_tpbvp preconditions") {
  const RegularizedHamiltonian h = smoothed("eikonal-1d", 1e-2);
  CHECK_THROWS_AS(solve_tpbvp(h, v1(2.0), 0), PreconditionError);
  CHECK_THROWS_AS(solve_tpbvp(h, v2(2.0, 0.0), 4), PreconditionError);
  CHECK_THROWS_AS(solve_tpbvp(h, v1(3.5), 4), PreconditionError);
  SweepOptions bad;
  bad.relaxation = 0.0;
  CHECK_THROWS_AS(solve_tpbvp(h, v1(2.0), 4, bad), PreconditionError);
  bad = {};
  bad.residual_tol = 0.0;
  CHECK_THROWS_AS(solve_tpbvp(h, v1(2.0), 4, bad), PreconditionError);
}

TEST_CASE("stalled sweeps fail with history or fall back to the variational route") {
  // Inside |x| < T the optimal end point sits near the kink of g' ∘ H^δ_λ,
  // where the sweep map has slope ~1/δ and the damped iteration oscillates.
  const RegularizedHamiltonian h = smoothed("eikonal-1d", 1e-2);
  SweepOptions opts;
  opts.max_sweeps = 60;
  try {
    (void)solve_tpbvp(h, v1(0.3), 4, opts);
    FAIL("expected non-convergence");
  } catch (const NonConvergenceError& e) {
    CHECK(e.residual_history.size() == 60u);
    CHECK(e.residual_history.back() > 1e-3);
  }
  opts.fallback = Fallback::variational;
  const DiscreteTrajectory traj = solve_tpbvp(h, v1(0.3), 4, opts);
  CHECK(traj.diagnostics.route == "tpbvp->variational");
  CHECK(traj.diagnostics.used_fallback);
  CHECK(traj.diagnostics.residual_history.size() == 60u);
  CHECK(traj.value == Approx(minimize_J(h, v1(0.3), 0, 4).value).margin(1e-12));
  CHECK(scheme_residuals(traj, h).backward <= 1e-12);
  CHECK(scheme_residuals(traj, h).control <= 1e-6);
}

TEST_CASE("trajectory CSV export") {
  const RegularizedHamiltonian h = smoothed("eikonal-2d", 1e-2);
  const DiscreteTrajectory traj = solve_tpbvp(h, v2(1.5, 1.0), 3);
  std::ostringstream os;
  write_trajectory_csv(traj, os);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "n,t_n,x0,x1,lambda0,lambda1,alpha0,alpha1");
  std::vector<std::string> rows;
  while (std::getline(in, line)) rows.push_back(line);
  REQUIRE(rows.size() == 4u);
  CHECK(rows.back().substr(rows.back().size() - 2) == ",,");
  // First row round-trips the start point at 17 significant digits.
  std::istringstream first(rows.front());
  std::string n, t, x0;
  std::getline(first, n, ',');
  std::getline(first, t, ',');
  std::getline(first, x0, ',');
  CHECK(n == "0");
  CHECK(std::stod(t) == 0.0);
  CHECK(std::stod(x0) == traj.states[0][0]);
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK_THROWS_AS(write_trajectory_csv(traj, "/nonexistent-dir/traj.csv"), IoError);
}
