#include "sympont/problem.hpp"

#include "sympont/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace sympont {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string describe(const Vec& v) {
  std::ostringstream os;
  os << '(';
  for (int i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  os << ')';
  return os.str();
}

Vec project_to_ball(Vec v, double radius) {
  const double n = v.norm();
  if (n > radius) v *= radius / n;
  return v;
}

struct LineMin {
  double value = kInf;
  double arg = 0.0;
};

// Minimizes a convex extended-real function on [a, b]. A coarse scan locates
// the finite part; golden-section search refines inside the neighbouring
// scan cells, which contain the minimizer by convexity.
LineMin golden_convex(const std::function<double(double)>& f, double a, double b,
                      int scan = 17, int iters = 40) {
  LineMin best;
  auto consider = [&](double t, double v) {
    if (v < best.value) best = {v, t};
  };
  if (!(b > a)) {
    consider(a, f(a));
    return best;
  }
  std::vector<double> pts(scan);
  int k = -1;
  for (int i = 0; i < scan; ++i) {
    pts[i] = a + (b - a) * i / (scan - 1);
    const double v = f(pts[i]);
    if (v < best.value) {
      best = {v, pts[i]};
      k = i;
    }
  }
  if (k < 0) return best;
  double lo = pts[std::max(k - 1, 0)];
  double hi = pts[std::min(k + 1, scan - 1)];
  const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = hi - ratio * (hi - lo);
  double d = lo + ratio * (hi - lo);
  double fc = f(c);
  double fd = f(d);
  consider(c, fc);
  consider(d, fd);
  for (int it = 0; it < iters; ++it) {
    bool move_left;
    if (std::isinf(fc) && std::isinf(fd)) {
      // Both probes outside the effective domain: move toward the best point.
      if (best.arg < c) move_left = true;
      else if (best.arg > d) move_left = false;
      else break;
    } else {
      move_left = fc <= fd;
    }
    if (move_left) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - ratio * (hi - lo);
      fc = f(c);
      consider(c, fc);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + ratio * (hi - lo);
      fd = f(d);
      consider(d, fd);
    }
  }
  return best;
}

// Nested golden-section over the coordinates of a ball. Partial minimization
// of a convex function stays convex, so every level is a convex line search.
std::pair<double, Vec> minimize_convex_in_ball(const std::function<double(const Vec&)>& f, int dim,
                                               double radius) {
  double best_value = kInf;
  Vec best_arg = Vec::Zero(dim);
  Vec point = Vec::Zero(dim);

  std::function<double(int, double)> level_min = [&](int level, double used_sq) -> double {
    const double half = std::sqrt(std::max(radius * radius - used_sq, 0.0));
    auto along = [&](double t) {
      point[level] = t;
      double v;
      if (level == dim - 1) {
        v = f(point);
        if (v < best_value) {
          best_value = v;
          best_arg = point;
        }
      } else {
        v = level_min(level + 1, used_sq + t * t);
      }
      return v;
    };
    const int iters = dim == 1 ? 60 : 24;
    return golden_convex(along, -half, half, 17, iters).value;
  };
  level_min(0, 0.0);
  return {best_value, best_arg};
}

void check_finite(double v, const char* what, const Vec& x, const Vec& lambda) {
  if (!std::isfinite(v)) {
    throw EvaluationError(std::string(what) + " is not finite at x = " + describe(x) +
                              ", lambda = " + describe(lambda),
                          x, lambda);
  }
}

}  // namespace

double ControlProblem::dual_bound() const {
  return (terminal_grad_bound + 1.0) * std::exp(lipschitz_x * horizon) - 1.0;
}

double ControlProblem::default_lambda_search_radius() const {
  return std::max(10.0 * terminal_grad_bound, 2.0 * dual_bound() + 1.0);
}

double RegularizedHamiltonian::value(const Vec& x, const Vec& lambda) const {
  const double v = hamiltonian.value(x, lambda);
  check_finite(v, "regularized Hamiltonian", x, lambda);
  return v;
}

Vec RegularizedHamiltonian::grad_lambda(const Vec& x, const Vec& lambda) const {
  return hamiltonian.grad_lambda(x, lambda);
}

Vec RegularizedHamiltonian::grad_x(const Vec& x, const Vec& lambda) const {
  return hamiltonian.grad_x(x, lambda);
}

// ---------------------------------------------------------------------------
// Legendre-Fenchel transforms

ConjugatePoint conjugate_sup(const HamiltonianFunctions& h, const Vec& x, const Vec& alpha,
                             double radius, const ConjugateOptions& opts) {
  const int dim = static_cast<int>(x.size());
  auto objective = [&](const Vec& mu) {
    const double hv = h.value(x, mu);
    check_finite(hv, "Hamiltonian", x, mu);
    return -alpha.dot(mu) + hv;
  };
  auto ascent_direction = [&](const Vec& mu) -> Vec { return -alpha + h.grad_lambda(x, mu); };

  // Origin plus two radii on each signed axis.
  std::vector<Vec> starts{Vec::Zero(dim)};
  for (int i = 0; i < dim; ++i) {
    for (double s : {radius / 3.0, 2.0 * radius / 3.0}) {
      for (double sign : {1.0, -1.0}) {
        Vec v = Vec::Zero(dim);
        v[i] = sign * s;
        starts.push_back(std::move(v));
      }
    }
  }

  double best_f = -kInf;
  Vec best_mu = Vec::Zero(dim);
  const double min_step = 1e-14 * std::max(1.0, radius);
  for (const Vec& start : starts) {
    Vec mu = start;
    double f = objective(mu);
    double step = 1.0;
    int stalled = 0;
    for (int it = 0; it < opts.max_iterations; ++it) {
      const Vec dir = ascent_direction(mu);
      if ((project_to_ball(mu + dir, radius) - mu).norm() <= opts.gradient_tol) break;
      bool accepted = false;
      while (step > min_step) {
        Vec cand = project_to_ball(mu + step * dir, radius);
        const double fc = objective(cand);
        const double predicted = dir.dot(cand - mu);
        if (predicted > 0.0 && fc >= f + 1e-4 * predicted) {
          stalled = (fc - f <= 1e-14 * (1.0 + std::abs(f))) ? stalled + 1 : 0;
          mu = std::move(cand);
          f = fc;
          step *= 2.0;
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      if (!accepted || stalled >= 3) break;
    }
    if (f > best_f) {
      best_f = f;
      best_mu = mu;
    }
  }

  ConjugatePoint out{best_f, best_mu, false};
  const double n = best_mu.norm();
  if (n >= radius * (1.0 - 1e-9) && n > 0.0) {
    out.on_boundary = true;
    const double outward_slope = ascent_direction(best_mu).dot(best_mu / n);
    if (outward_slope > opts.tol_recession) out.value = ExtendedReal::infinity();
  }
  return out;
}

ExtendedReal running_cost_numeric(const ControlProblem& p, const Vec& x, const Vec& alpha,
                                  double lambda_search_radius) {
  if (lambda_search_radius < 10.0 * p.terminal_grad_bound) {
    throw PreconditionError("lambda search radius must be at least 10*C3");
  }
  return conjugate_sup(p.hamiltonian, x, alpha, lambda_search_radius).value;
}

double recover_hamiltonian(const ControlProblem& p, const Vec& x, const Vec& lambda,
                           double alpha_search_radius, LegendreRoute route) {
  if (alpha_search_radius < p.lipschitz_lambda) {
    throw PreconditionError("alpha search radius must be at least C1");
  }
  const bool analytic = route == LegendreRoute::analytic_if_available && p.running_cost;
  const double lambda_radius = p.default_lambda_search_radius();
  auto objective = [&](const Vec& alpha) {
    const ExtendedReal l = analytic ? p.running_cost->value(x, alpha)
                                    : running_cost_numeric(p, x, alpha, lambda_radius);
    return l.is_infinite() ? kInf : lambda.dot(alpha) + l.value();
  };
  const double radius = 1.05 * alpha_search_radius;
  auto [value, arg] = minimize_convex_in_ball(objective, p.dim, radius);
  if (std::isinf(value)) {
    throw MalformedProblemError("running cost is +inf on the whole alpha search ball for problem " +
                                p.id);
  }
  return value;
}

RunningCostEval evaluate_running_cost(const RegularizedHamiltonian& h, const Vec& x,
                                      const Vec& alpha, bool with_gradient) {
  RunningCostEval out;
  if (h.running_cost) {
    out.value = h.running_cost->value(x, alpha);
    if (with_gradient && out.value.is_finite()) {
      out.grad_alpha = h.running_cost->grad_alpha(x, alpha);
      out.grad_x = h.running_cost->grad_x(x, alpha);
    }
    return out;
  }
  const ConjugatePoint cp =
      conjugate_sup(h.hamiltonian, x, alpha, h.base.default_lambda_search_radius());
  out.value = cp.value;
  if (with_gradient && out.value.is_finite()) {
    // Danskin: L_α = -λ*, L_x = H_x(x, λ*).
    out.grad_alpha = -cp.maximizer;
    out.grad_x = h.hamiltonian.grad_x(x, cp.maximizer);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Regularization

SmoothFamilyMember hyperbolic_smoothing(const NormTypeStructure& s, int dim, double delta) {
  (void)dim;
  const double c = s.speed;
  const double eps = delta / c;
  const auto offset = s.offset;
  const auto offset_grad = s.offset_grad;

  SmoothFamilyMember m;
  m.hamiltonian.value = [=](const Vec& x, const Vec& l) {
    return -c * std::sqrt(l.squaredNorm() + eps * eps) + 0.5 * delta + offset(x);
  };
  m.hamiltonian.grad_lambda = [=](const Vec& /*x*/, const Vec& l) -> Vec {
    return (-c / std::sqrt(l.squaredNorm() + eps * eps)) * l;
  };
  m.hamiltonian.grad_x = [=](const Vec& x, const Vec& /*l*/) -> Vec { return offset_grad(x); };

  RunningCost rc;
  rc.value = [=](const Vec& x, const Vec& a) -> ExtendedReal {
    const double gap = c * c - a.squaredNorm();
    if (gap < 0.0) return ExtendedReal::infinity();
    return -eps * std::sqrt(gap) + 0.5 * delta + offset(x);
  };
  rc.grad_alpha = [=](const Vec& /*x*/, const Vec& a) -> Vec {
    const double gap = std::max(c * c - a.squaredNorm(), 1e-300);
    return (eps / std::sqrt(gap)) * a;
  };
  rc.grad_x = [=](const Vec& x, const Vec& /*a*/) -> Vec { return offset_grad(x); };
  m.running_cost = std::move(rc);
  return m;
}

SupErrorSample measure_sup_error(const ControlProblem& p, const HamiltonianFunctions& smooth) {
  const int d = p.dim;
  const double lambda_radius = p.default_lambda_search_radius();
  const int nx = d == 1 ? 101 : d == 2 ? 21 : 7;
  const int nl = d == 1 ? 401 : d == 2 ? 41 : 13;

  auto grid_points = [d](const Vec& lo, const Vec& hi, int n) {
    std::vector<Vec> pts;
    std::vector<int> idx(d, 0);
    while (true) {
      Vec v(d);
      for (int i = 0; i < d; ++i) v[i] = lo[i] + (hi[i] - lo[i]) * idx[i] / (n - 1);
      pts.push_back(std::move(v));
      int k = 0;
      while (k < d && ++idx[k] == n) idx[k++] = 0;
      if (k == d) break;
    }
    return pts;
  };

  const auto xs = grid_points(p.domain_box.lower, p.domain_box.upper, nx);
  std::vector<Vec> lambdas;
  for (Vec& l : grid_points(Vec::Constant(d, -lambda_radius), Vec::Constant(d, lambda_radius), nl)) {
    if (l.norm() <= lambda_radius * (1.0 + 1e-12)) lambdas.push_back(std::move(l));
  }

  SupErrorSample out{0.0, xs.front(), lambdas.front()};
  for (const Vec& x : xs) {
    for (const Vec& l : lambdas) {
      const double e = std::abs(p.hamiltonian.value(x, l) - smooth.value(x, l));
      if (!std::isfinite(e)) throw EvaluationError("non-finite Hamiltonian difference", x, l);
      if (e > out.sup_error) out = {e, x, l};
    }
  }
  return out;
}

RegularizedHamiltonian regularize(const ControlProblem& p, double delta,
                                  RegularizationMethod method) {
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    throw PreconditionError("regularization parameter delta must be positive and finite");
  }
  SmoothFamilyMember member;
  if (method == RegularizationMethod::problem_supplied) {
    if (!p.smooth_family) {
      throw MalformedProblemError("problem " + p.id + " carries no smooth Hamiltonian family");
    }
    member = p.smooth_family(delta);
  } else {
    if (!p.norm_structure) {
      throw MalformedProblemError("smoothed_min needs a norm-type Hamiltonian; problem " + p.id +
                                  " has none");
    }
    member = hyperbolic_smoothing(*p.norm_structure, p.dim, delta);
  }

  const SupErrorSample sample = measure_sup_error(p, member.hamiltonian);
  if (sample.sup_error > delta * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "regularization of " << p.id << " deviates by " << sample.sup_error << " > delta = " << delta
       << " at x = " << describe(sample.worst_x) << ", lambda = " << describe(sample.worst_lambda);
    throw RegularizationError(os.str(), sample.sup_error, sample.worst_x, sample.worst_lambda);
  }

  RegularizedHamiltonian h;
  h.base = p;
  h.delta = delta;
  h.method = method;
  h.hamiltonian = std::move(member.hamiltonian);
  h.running_cost = std::move(member.running_cost);
  h.certified_sup_error = sample.sup_error;
  return h;
}

// ---------------------------------------------------------------------------
// Certification of the structural constants

ConstantsReport verify_constants(const ControlProblem& p, int sample_count, std::uint64_t seed) {
  if (sample_count < 100) throw PreconditionError("verify_constants needs at least 100 samples");
  Sampler rng(seed);
  const int d = p.dim;
  const double lambda_radius = p.default_lambda_search_radius();
  const double local = 1e-3;
  auto passes = [](double empirical, double declared) {
    return empirical <= declared * (1.0 + 1e-9) + 1e-12;
  };

  ConstantsReport r;
  r.sample_count = sample_count;
  r.c1.declared = p.lipschitz_lambda;
  r.c2.declared = p.lipschitz_x;
  r.c3.declared = p.terminal_grad_bound;

  for (int s = 0; s < sample_count; ++s) {
    // Every other pair is a close pair to probe local slopes.
    const bool close = (s % 2) == 1;

    {
      const Vec x = rng.in_box(p.domain_box);
      const Vec l1 = rng.in_ball(d, lambda_radius);
      const Vec l2 = close ? project_to_ball(l1 + rng.in_ball(d, local * lambda_radius), lambda_radius)
                           : rng.in_ball(d, lambda_radius);
      const double dist = (l1 - l2).norm();
      if (dist > 0.0) {
        const double ratio = std::abs(p.hamiltonian.value(x, l1) - p.hamiltonian.value(x, l2)) / dist;
        if (ratio > r.c1.empirical) {
          r.c1.empirical = ratio;
          r.c1.witness = {x, x, l1, l2, ratio};
        }
      }
    }
    {
      const Vec x1 = rng.in_box(p.domain_box);
      Vec x2 = close ? Vec(x1 + rng.in_ball(d, local)) : rng.in_box(p.domain_box);
      x2 = x2.cwiseMax(p.domain_box.lower).cwiseMin(p.domain_box.upper);
      const Vec l = rng.in_ball(d, lambda_radius);
      const double dist = (x1 - x2).norm();
      if (dist > 0.0) {
        const double ratio = std::abs(p.hamiltonian.value(x1, l) - p.hamiltonian.value(x2, l)) /
                             (dist * (1.0 + l.norm()));
        if (ratio > r.c2.empirical) {
          r.c2.empirical = ratio;
          r.c2.witness = {x1, x2, l, l, ratio};
        }
      }
    }
    {
      const Vec x = rng.in_box(p.domain_box);
      const double gnorm = p.terminal_cost_grad(x).norm();
      if (gnorm > r.c3.empirical) {
          r.c3.empirical = gnorm;
          r.c3.witness = {x, x, Vec(), Vec(), gnorm};
        }
    }
    {
      const Vec x = rng.in_box(p.domain_box);
      const Vec l1 = rng.in_ball(d, lambda_radius);
      const Vec l2 = rng.in_ball(d, lambda_radius);
      const double xi = rng.uniform(0.0, 1.0);
      const double chord = xi * p.hamiltonian.value(x, l1) + (1.0 - xi) * p.hamiltonian.value(x, l2);
      const double violation = chord - p.hamiltonian.value(x, xi * l1 + (1.0 - xi) * l2);
      if (violation > r.worst_concavity_violation) {
        r.worst_concavity_violation = violation;
        r.concavity_witness = {x, x, l1, l2, xi};
      }
    }
  }
  r.c1.pass = passes(r.c1.empirical, r.c1.declared);
  r.c2.pass = passes(r.c2.empirical, r.c2.declared);
  r.c3.pass = passes(r.c3.empirical, r.c3.declared);
  r.concave = r.worst_concavity_violation <= 1e-10;
  return r;
}

GradientReport verify_gradients(const ControlProblem& p, const HamiltonianFunctions& h,
                                int sample_count, std::uint64_t seed, double step) {
  Sampler rng(seed);
  const int d = p.dim;
  const double lambda_radius = p.default_lambda_search_radius();
  GradientReport r;
  r.sample_count = sample_count;
  auto rel = [](double fd, double an) { return std::abs(fd - an) / (1.0 + std::abs(an)); };
  for (int s = 0; s < sample_count; ++s) {
    const Vec x = rng.in_box(p.domain_box);
    const Vec l = rng.in_ball(d, lambda_radius);
    const Vec gl = h.grad_lambda(x, l);
    const Vec gx = h.grad_x(x, l);
    const Vec gg = p.terminal_cost_grad(x);
    for (int i = 0; i < d; ++i) {
      Vec e = Vec::Zero(d);
      e[i] = step;
      const double fd_l = (h.value(x, l + e) - h.value(x, l - e)) / (2.0 * step);
      const double fd_x = (h.value(x + e, l) - h.value(x - e, l)) / (2.0 * step);
      const double fd_g = (p.terminal_cost(x + e) - p.terminal_cost(x - e)) / (2.0 * step);
      r.worst_lambda = std::max(r.worst_lambda, rel(fd_l, gl[i]));
      r.worst_x = std::max(r.worst_x, rel(fd_x, gx[i]));
      r.worst_terminal = std::max(r.worst_terminal, rel(fd_g, gg[i]));
    }
  }
  return r;
}

}  // namespace sympont
