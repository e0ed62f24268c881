#pragma once

// Small hand-built problems with answers that can be worked out by hand.

#include "sympont/catalog.hpp"
#include "sympont/problem.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace sympont::testing {

inline Vec v1(double a) { return Vec::Constant(1, a); }

inline Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

/// H(λ) = 1 - sqrt(1 + λ²): smooth, concave, x-independent, C1 = 1 and
/// L(α) = 1 - sqrt(1 - α²) on |α| <= 1 with L(0) = 0.
inline HamiltonianFunctions soft_speed_hamiltonian() {
  HamiltonianFunctions h;
  h.value = [](const Vec&, const Vec& l) { return 1.0 - std::sqrt(1.0 + l.squaredNorm()); };
  h.grad_lambda = [](const Vec&, const Vec& l) -> Vec { return -l / std::sqrt(1.0 + l.squaredNorm()); };
  h.grad_x = [](const Vec& x, const Vec&) -> Vec { return Vec::Zero(x.size()); };
  return h;
}

inline RunningCost soft_speed_running_cost() {
  RunningCost rc;
  rc.value = [](const Vec&, const Vec& a) -> ExtendedReal {
    const double gap = 1.0 - a.squaredNorm();
    if (gap < 0.0) return ExtendedReal::infinity();
    return 1.0 - std::sqrt(gap);
  };
  rc.grad_alpha = [](const Vec&, const Vec& a) -> Vec {
    return a / std::sqrt(std::max(1.0 - a.squaredNorm(), 1e-300));
  };
  rc.grad_x = [](const Vec& x, const Vec&) -> Vec { return Vec::Zero(x.size()); };
  return rc;
}

/// Smooth problem whose family member is H itself.
inline ControlProblem soft_speed_problem(std::function<double(const Vec&)> g,
                                         std::function<Vec(const Vec&)> g_grad, double c3,
                                         std::string id = "soft-speed") {
  ControlProblem p;
  p.id = std::move(id);
  p.dim = 1;
  p.horizon = 1.0;
  p.domain_box = Box::cube(1, -4.0, 4.0);
  p.lipschitz_lambda = 1.0;
  p.lipschitz_x = 0.0;
  p.terminal_grad_bound = c3;
  p.smooth = true;
  p.hamiltonian = soft_speed_hamiltonian();
  p.running_cost = soft_speed_running_cost();
  p.terminal_cost = std::move(g);
  p.terminal_cost_grad = std::move(g_grad);
  p.smooth_family = [h = p.hamiltonian, rc = p.running_cost](double) { return SmoothFamilyMember{h, rc}; };
  return p;
}

/// g ≡ c with the soft-speed Hamiltonian: u ≡ c.
inline ControlProblem constant_terminal_problem(double c) {
  ControlProblem p = soft_speed_problem([c](const Vec&) { return c; },
                                        [](const Vec& x) -> Vec { return Vec::Zero(x.size()); }, 0.0,
                                        "constant-terminal");
  p.exact_value = [c](const Vec&, double) { return c; };
  return p;
}

/// g(x) = slope·x with the soft-speed Hamiltonian.
inline ControlProblem linear_terminal_problem(double slope) {
  return soft_speed_problem([slope](const Vec& x) { return slope * x[0]; },
                            [slope](const Vec&) -> Vec { return Vec::Constant(1, slope); }, std::abs(slope),
                            "linear-terminal");
}

/// H(x, λ) = -|λ| + amplitude·sin(x) with declared constants.
inline ControlProblem sine_offset_problem(double amplitude, double declared_c1, double declared_c2) {
  ControlProblem p = catalog::get("eikonal-1d-costed").problem;
  p.id = "sine-offset";
  p.hamiltonian.value = [amplitude](const Vec& x, const Vec& l) {
    return -l.norm() + amplitude * std::sin(x[0]);
  };
  p.hamiltonian.grad_x = [amplitude](const Vec& x, const Vec&) -> Vec {
    return Vec::Constant(1, amplitude * std::cos(x[0]));
  };
  p.lipschitz_lambda = declared_c1;
  p.lipschitz_x = declared_c2;
  p.running_cost.reset();
  p.norm_structure.reset();
  p.smooth_family = nullptr;
  return p;
}

/// H(x, λ) = -λ²/2 with analytic L(α) = α²/2. Not globally Lipschitz in λ;
/// C1 is declared for |λ| <= 3.
inline ControlProblem quadratic_problem() {
  ControlProblem p;
  p.id = "quadratic";
  p.dim = 1;
  p.horizon = 1.0;
  p.domain_box = Box::cube(1, -1.0, 1.0);
  p.lipschitz_lambda = 3.0;
  p.terminal_grad_bound = 1.0;
  p.smooth = true;
  p.hamiltonian.value = [](const Vec&, const Vec& l) { return -0.5 * l.squaredNorm(); };
  p.hamiltonian.grad_lambda = [](const Vec&, const Vec& l) -> Vec { return -l; };
  p.hamiltonian.grad_x = [](const Vec& x, const Vec&) -> Vec { return Vec::Zero(x.size()); };
  RunningCost rc;
  rc.value = [](const Vec&, const Vec& a) -> ExtendedReal { return 0.5 * a.squaredNorm(); };
  rc.grad_alpha = [](const Vec&, const Vec& a) -> Vec { return a; };
  rc.grad_x = [](const Vec& x, const Vec&) -> Vec { return Vec::Zero(x.size()); };
  p.running_cost = rc;
  p.terminal_cost = [](const Vec& x) { return std::sqrt(1.0 + x.squaredNorm()); };
  p.terminal_cost_grad = [](const Vec& x) -> Vec { return x / std::sqrt(1.0 + x.squaredNorm()); };
  return p;
}

/// H ≡ c, so L(α) = c at α = 0 and +∞ elsewhere.
inline ControlProblem constant_hamiltonian_problem(double c) {
  ControlProblem p = quadratic_problem();
  p.id = "constant-hamiltonian";
  p.lipschitz_lambda = 0.0;
  p.hamiltonian.value = [c](const Vec&, const Vec&) { return c; };
  p.hamiltonian.grad_lambda = [](const Vec&, const Vec& l) -> Vec { return Vec::Zero(l.size()); };
  p.running_cost.reset();
  return p;
}

/// Hyperbolically smoothed eikonal Hamiltonian on a catalog problem.
inline RegularizedHamiltonian smoothed(const std::string& id, double delta) {
  const ControlProblem& p = catalog::get(id).problem;
  return regularize(p, delta,
                    p.smooth_family ? RegularizationMethod::problem_supplied : RegularizationMethod::smoothed_min);
}

/// Wraps a problem's own Hamiltonian as a zero-δ "regularization".
inline RegularizedHamiltonian unregularized(const ControlProblem& p) {
  RegularizedHamiltonian h;
  h.base = p;
  h.delta = 0.0;
  h.hamiltonian = p.hamiltonian;
  h.running_cost = p.running_cost;
  return h;
}

}  // namespace sympont::testing
