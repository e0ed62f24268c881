#include "sympont/catalog.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace sympont::catalog {

namespace {

// g(x) = sqrt(1 + |x|^2): convex, |g'| < 1, minimum 1 at the origin.
void attach_hyperbolic_terminal_cost(ControlProblem& p) {
  p.terminal_cost = [](const Vec& x) { return std::sqrt(1.0 + x.squaredNorm()); };
  p.terminal_cost_grad = [](const Vec& x) -> Vec {
    return x / std::sqrt(1.0 + x.squaredNorm());
  };
  p.terminal_grad_bound = 1.0;
  p.growth_constant = 1.0;
}

/// H(x, λ) = -|λ| + offset(x), L(x, α) = offset(x) on |α| <= 1.
ControlProblem norm_type_problem(std::string id, int dim, std::function<double(const Vec&)> offset,
                                 std::function<Vec(const Vec&)> offset_grad, double offset_lipschitz) {
  ControlProblem p;
  p.id = std::move(id);
  p.dim = dim;
  p.horizon = 1.0;
  p.domain_box = Box::cube(dim, -4.0, 4.0);
  p.lipschitz_lambda = 1.0;
  p.lipschitz_x = offset_lipschitz;
  p.smooth = false;
  attach_hyperbolic_terminal_cost(p);

  p.hamiltonian.value = [offset](const Vec& x, const Vec& l) { return -l.norm() + offset(x); };
  p.hamiltonian.grad_lambda = [](const Vec& /*x*/, const Vec& l) -> Vec {
    const double n = l.norm();
    return n > 0.0 ? Vec(-l / n) : Vec(Vec::Zero(l.size()));
  };
  p.hamiltonian.grad_x = [offset_grad](const Vec& x, const Vec& /*l*/) -> Vec {
    return offset_grad(x);
  };

  RunningCost rc;
  rc.value = [offset](const Vec& x, const Vec& a) -> ExtendedReal {
    if (a.norm() > 1.0 + 1e-12) return ExtendedReal::infinity();
    return offset(x);
  };
  rc.grad_alpha = [](const Vec& /*x*/, const Vec& a) -> Vec { return Vec::Zero(a.size()); };
  rc.grad_x = [offset_grad](const Vec& x, const Vec& /*a*/) -> Vec { return offset_grad(x); };
  p.running_cost = std::move(rc);

  NormTypeStructure s{1.0, offset, offset_grad};
  p.norm_structure = s;
  p.smooth_family = [s, dim](double delta) { return hyperbolic_smoothing(s, dim, delta); };
  return p;
}

// u(x, t) = g evaluated at the point of the reachable ball closest to the origin.
void attach_eikonal_exact_value(ControlProblem& p) {
  const double horizon = p.horizon;
  p.exact_value = [horizon](const Vec& x, double t) {
    const double r = std::max(x.norm() - (horizon - t), 0.0);
    return std::sqrt(1.0 + r * r);
  };
}

CatalogEntry eikonal_1d() {
  auto zero = [](const Vec&) { return 0.0; };
  auto zero_grad = [](const Vec& x) -> Vec { return Vec::Zero(x.size()); };
  CatalogEntry e;
  e.id = "eikonal-1d";
  e.description = "H = -|lambda|, g = sqrt(1+x^2), T = 1; nonsmooth H with closed-form value";
  e.problem = norm_type_problem(e.id, 1, zero, zero_grad, 0.0);
  attach_eikonal_exact_value(e.problem);
  e.closed_form_notes =
      "Zero running cost on |alpha| <= 1: u(x,t) is the minimum of g over the interval "
      "[x-(T-t), x+(T-t)], i.e. sqrt(1 + max(|x|-(T-t), 0)^2).";
  return e;
}

CatalogEntry eikonal_1d_costed() {
  auto ell = [](const Vec& x) { return 0.1 * std::sin(x[0]); };
  auto ell_grad = [](const Vec& x) -> Vec { return Vec::Constant(1, 0.1 * std::cos(x[0])); };
  CatalogEntry e;
  e.id = "eikonal-1d-costed";
  e.description = "H = -|lambda| + 0.1 sin(x), g = sqrt(1+x^2), T = 1; x-dependent, grid oracle";
  e.problem = norm_type_problem(e.id, 1, ell, ell_grad, 0.1);
  e.closed_form_notes = "No closed form; C2 = 0.1 from |d/dx 0.1 sin x| <= 0.1.";
  return e;
}

CatalogEntry eikonal_2d() {
  auto zero = [](const Vec&) { return 0.0; };
  auto zero_grad = [](const Vec& x) -> Vec { return Vec::Zero(x.size()); };
  CatalogEntry e;
  e.id = "eikonal-2d";
  e.description = "H = -|lambda| in R^2, g = sqrt(1+|x|^2), T = 1; closed-form value";
  e.problem = norm_type_problem(e.id, 2, zero, zero_grad, 0.0);
  attach_eikonal_exact_value(e.problem);
  e.closed_form_notes = "u(x,t) = sqrt(1 + max(|x|-(T-t), 0)^2), as in one dimension.";
  return e;
}

// H(x, λ) = 1 - sqrt(1 + λ^2) + c·λ·sin(x). The linear drift term keeps H
// concave and globally Lipschitz: C1 = 1 + c, C2 = c. The conjugate is
// L(x, α) = 1 - sqrt(1 - β^2) with β = α - c sin(x), finite for |β| <= 1.
CatalogEntry smooth_quadratic_1d() {
  constexpr double c = 0.2;
  ControlProblem p;
  p.id = "smooth-quadratic-1d";
  p.dim = 1;
  p.horizon = 1.0;
  p.domain_box = Box::cube(1, -4.0, 4.0);
  p.lipschitz_lambda = 1.0 + c;
  p.lipschitz_x = c;
  p.smooth = true;
  attach_hyperbolic_terminal_cost(p);

  p.hamiltonian.value = [](const Vec& x, const Vec& l) {
    return 1.0 - std::sqrt(1.0 + l[0] * l[0]) + c * l[0] * std::sin(x[0]);
  };
  p.hamiltonian.grad_lambda = [](const Vec& x, const Vec& l) -> Vec {
    return Vec::Constant(1, -l[0] / std::sqrt(1.0 + l[0] * l[0]) + c * std::sin(x[0]));
  };
  p.hamiltonian.grad_x = [](const Vec& x, const Vec& l) -> Vec {
    return Vec::Constant(1, c * l[0] * std::cos(x[0]));
  };

  RunningCost rc;
  rc.value = [](const Vec& x, const Vec& a) -> ExtendedReal {
    const double beta = a[0] - c * std::sin(x[0]);
    if (std::abs(beta) > 1.0) return ExtendedReal::infinity();
    return 1.0 - std::sqrt(1.0 - beta * beta);
  };
  rc.grad_alpha = [](const Vec& x, const Vec& a) -> Vec {
    const double beta = a[0] - c * std::sin(x[0]);
    return Vec::Constant(1, beta / std::sqrt(std::max(1.0 - beta * beta, 1e-300)));
  };
  rc.grad_x = [](const Vec& x, const Vec& a) -> Vec {
    const double beta = a[0] - c * std::sin(x[0]);
    return Vec::Constant(1, -c * std::cos(x[0]) * beta / std::sqrt(std::max(1.0 - beta * beta, 1e-300)));
  };
  p.running_cost = rc;

  const HamiltonianFunctions h = p.hamiltonian;
  p.smooth_family = [h, rc](double) { return SmoothFamilyMember{h, rc}; };

  CatalogEntry e;
  e.id = p.id;
  e.description = "H = 1 - sqrt(1+lambda^2) + 0.2 lambda sin(x), g = sqrt(1+x^2), T = 1; smooth, grid oracle";
  e.problem = std::move(p);
  e.closed_form_notes = "Smooth and concave; no closed-form value, grid oracle only.";
  return e;
}

const std::map<std::string, CatalogEntry, std::less<>>& entries() {
  static const std::map<std::string, CatalogEntry, std::less<>> all = [] {
    std::map<std::string, CatalogEntry, std::less<>> m;
    for (CatalogEntry e : {eikonal_1d(), eikonal_1d_costed(), eikonal_2d(), smooth_quadratic_1d()}) {
      m.emplace(e.id, std::move(e));
    }
    return m;
  }();
  return all;
}

}  // namespace

const CatalogEntry& get(std::string_view id) {
  const auto& m = entries();
  const auto it = m.find(id);
  if (it == m.end()) throw NotFoundError("unknown problem id: " + std::string(id));
  return it->second;
}

std::vector<std::string> list() {
  std::vector<std::string> ids;
  for (const auto& [id, _] : entries()) ids.push_back(id);
  return ids;
}

}  // namespace sympont::catalog
