#pragma once

#include "sympont/types.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

namespace sympont {

using ScalarFn = std::function<double(const Vec& x, const Vec& lambda)>;
using VectorFn = std::function<Vec(const Vec& x, const Vec& lambda)>;

/// H(x, λ) together with its partial gradients. For nonsmooth H the
/// gradients are a selection of the superdifferential.
struct HamiltonianFunctions {
  ScalarFn value;
  VectorFn grad_lambda;
  VectorFn grad_x;
};

/// Analytic running cost L(x, α) with gradients valid where L is finite.
struct RunningCost {
  std::function<ExtendedReal(const Vec& x, const Vec& alpha)> value;
  std::function<Vec(const Vec& x, const Vec& alpha)> grad_alpha;
  std::function<Vec(const Vec& x, const Vec& alpha)> grad_x;
};

/// Hamiltonians of the form H(x, λ) = -speed·|λ| + offset(x).
struct NormTypeStructure {
  double speed = 1.0;
  std::function<double(const Vec&)> offset;
  std::function<Vec(const Vec&)> offset_grad;
};

/// One member H^δ of a δ-parametrized differentiable family.
struct SmoothFamilyMember {
  HamiltonianFunctions hamiltonian;
  std::optional<RunningCost> running_cost;
};
using SmoothFamily = std::function<SmoothFamilyMember(double delta)>;

struct ControlProblem {
  std::string id;
  int dim = 1;
  double horizon = 1.0;

  HamiltonianFunctions hamiltonian;
  std::optional<RunningCost> running_cost;

  std::function<double(const Vec&)> terminal_cost;
  std::function<Vec(const Vec&)> terminal_cost_grad;

  double lipschitz_lambda = 0.0;     // C1
  double lipschitz_x = 0.0;          // C2
  double terminal_grad_bound = 0.0;  // C3

  /// Analytic u(x, t) when known.
  std::function<double(const Vec&, double)> exact_value;

  /// Region on which the constants are certified.
  Box domain_box;

  /// H is continuously differentiable.
  bool smooth = false;
  /// k in the lower growth condition g(x) >= -k(1 + |x|).
  double growth_constant = 1.0;

  std::optional<NormTypeStructure> norm_structure;
  SmoothFamily smooth_family;

  /// (C3 + 1) e^{C2 T} - 1, the a priori bound on discrete duals.
  [[nodiscard]] double dual_bound() const;
  /// max(10 C3, 2·dual_bound + 1).
  [[nodiscard]] double default_lambda_search_radius() const;
  /// Reachable radius C1·T.
  [[nodiscard]] double reach_radius() const { return lipschitz_lambda * horizon; }
};

enum class RegularizationMethod { problem_supplied, smoothed_min };

/// Differentiable H^δ with |H - H^δ| <= δ on the sampled domain.
struct RegularizedHamiltonian {
  ControlProblem base;
  double delta = 0.0;
  RegularizationMethod method = RegularizationMethod::problem_supplied;
  HamiltonianFunctions hamiltonian;
  /// L^δ in closed form when the family provides it.
  std::optional<RunningCost> running_cost;
  double certified_sup_error = 0.0;

  [[nodiscard]] double value(const Vec& x, const Vec& lambda) const;
  [[nodiscard]] Vec grad_lambda(const Vec& x, const Vec& lambda) const;
  [[nodiscard]] Vec grad_x(const Vec& x, const Vec& lambda) const;
};

struct ConjugateOptions {
  double tol_recession = 1e-6;
  double gradient_tol = 1e-10;
  int max_iterations = 150;
};

/// sup over |λ| <= radius of -α·λ + H(x, λ), with its maximizer.
struct ConjugatePoint {
  ExtendedReal value;
  Vec maximizer;
  bool on_boundary = false;
};

ConjugatePoint conjugate_sup(const HamiltonianFunctions& h, const Vec& x, const Vec& alpha,
                             double radius, const ConjugateOptions& opts = {});

/// L(x, α) from the Legendre-Fenchel transform of H, computed numerically.
ExtendedReal running_cost_numeric(const ControlProblem& p, const Vec& x, const Vec& alpha,
                                  double lambda_search_radius);

enum class LegendreRoute { analytic_if_available, numeric };

/// H(x, λ) = inf_α {λ·α + L(x, α)} over the α-ball of the given radius
/// (enlarged by 5%).
double recover_hamiltonian(const ControlProblem& p, const Vec& x, const Vec& lambda,
                           double alpha_search_radius,
                           LegendreRoute route = LegendreRoute::analytic_if_available);

/// Running cost of a regularized Hamiltonian with gradients in α and x.
struct RunningCostEval {
  ExtendedReal value;
  Vec grad_alpha;
  Vec grad_x;
};
RunningCostEval evaluate_running_cost(const RegularizedHamiltonian& h, const Vec& x,
                                      const Vec& alpha, bool with_gradient);

RegularizedHamiltonian regularize(const ControlProblem& p, double delta,
                                  RegularizationMethod method);

/// Hyperbolic smoothing -speed·sqrt(|λ|² + (δ/speed)²) + δ/2 + offset(x).
SmoothFamilyMember hyperbolic_smoothing(const NormTypeStructure& s, int dim, double delta);

/// max |H - H^δ| over a dense deterministic sample of domain_box × λ-ball.
struct SupErrorSample {
  double sup_error = 0.0;
  Vec worst_x;
  Vec worst_lambda;
};
SupErrorSample measure_sup_error(const ControlProblem& p, const HamiltonianFunctions& smooth);

struct ConstantWitness {
  Vec x1, x2, lambda1, lambda2;
  double ratio = 0.0;
};

struct ConstantCheck {
  double declared = 0.0;
  double empirical = 0.0;
  bool pass = true;
  ConstantWitness witness;
};

struct ConstantsReport {
  ConstantCheck c1;
  ConstantCheck c2;
  ConstantCheck c3;
  bool concave = true;
  double worst_concavity_violation = 0.0;
  ConstantWitness concavity_witness;
  int sample_count = 0;

  [[nodiscard]] bool pass() const { return c1.pass && c2.pass && c3.pass && concave; }
};

ConstantsReport verify_constants(const ControlProblem& p, int sample_count, std::uint64_t seed);

/// Largest |analytic - central difference| / (1 + |analytic|) over seeded points.
struct GradientReport {
  double worst_lambda = 0.0;
  double worst_x = 0.0;
  double worst_terminal = 0.0;
  int sample_count = 0;
};
GradientReport verify_gradients(const ControlProblem& p, const HamiltonianFunctions& h,
                                int sample_count, std::uint64_t seed, double step = 1e-5);

}  // namespace sympont
