#include "support/test_problems.hpp"

#include "sympont/sampling.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>

using namespace sympont;
using namespace sympont::testing;
using Catch::Approx;

TEST_CASE("ExtendedReal absorbs infinity and orders like the extended line") {
  const ExtendedReal inf = ExtendedReal::infinity();
  const ExtendedReal two = 2.0;
  CHECK((two + inf).is_infinite());
  CHECK((inf + two).is_infinite());
  CHECK((two + 3.0).value() == 5.0);
  CHECK((0.5 * inf).is_infinite());
  CHECK(two < inf);
  CHECK(ExtendedReal(-1e300) < two);
  CHECK(inf == ExtendedReal::infinity());
  CHECK(two.is_finite());
}

TEST_CASE("running_cost_numeric of -|lambda| at alpha = 0 is zero") {
  const ControlProblem& p = catalog::get("eikonal-1d").problem;
  const ExtendedReal l = running_cost_numeric(p, v1(0.7), v1(0.0), 10.0);
  REQUIRE(l.is_finite());

  // Independent check: grid search of -0·λ - |λ| over [-10, 10].
  double best = -1e300;
  for (int i = 0; i <= 20000; ++i) {
    const double lam = -10.0 + 20.0 * i / 20000;
    best = std::max(best, -std::abs(lam));
  }
  CHECK(l.value() == Approx(best).margin(1e-9));
}

TEST_CASE("running_cost_numeric detects alpha outside the domain of L") {
  const ControlProblem& p = catalog::get("eikonal-1d").problem;
  CHECK(running_cost_numeric(p, v1(0.0), v1(2.0), 10.0).is_infinite());
  CHECK(running_cost_numeric(p, v1(0.0), v1(-1.5), 10.0).is_infinite());
  // Slope of -2λ - |λ| on a coarse grid keeps increasing toward λ → -∞.
  double prev = 0.0;
  for (int i = 1; i <= 10; ++i) {
    const double lam = -static_cast<double>(i);
    const double f = -2.0 * lam - std::abs(lam);
    CHECK(f > prev);
    prev = f;
  }
}

TEST_CASE("running_cost_numeric of a constant Hamiltonian") {
  const ControlProblem p = constant_hamiltonian_problem(0.75);
  const ExtendedReal l = running_cost_numeric(p, v1(0.2), v1(0.0), 10.0);
  REQUIRE(l.is_finite());
  CHECK(l.value() == Approx(0.75).margin(1e-12));
  CHECK(running_cost_numeric(p, v1(0.2), v1(0.1), 10.0).is_infinite());
}

TEST_CASE("running_cost_numeric rejects a search radius below 10 C3") {
  const ControlProblem& p = catalog::get("eikonal-1d").problem;
  CHECK_THROWS_AS(running_cost_numeric(p, v1(0.0), v1(0.0), 9.0), PreconditionError);
}

TEST_CASE("non-finite Hamiltonian values carry the offending point") {
  ControlProblem p = catalog::get("eikonal-1d").problem;
  p.hamiltonian.value = [](const Vec&, const Vec& l) {
    return l[0] > 0.5 ? std::numeric_limits<double>::quiet_NaN() : -std::abs(l[0]);
  };
  try {
    (void)running_cost_numeric(p, v1(0.3), v1(-0.5), 10.0);
    FAIL("expected an evaluation error");
  } catch (const EvaluationError& e) {
    CHECK(e.x[0] == 0.3);
    CHECK(e.lambda[0] > 0.5);
  }
}

TEST_CASE("recover_hamiltonian examples") {
  const ControlProblem& eik = catalog::get("eikonal-1d").problem;
  SECTION("-|lambda| at lambda = 1 recovers -1") {
    CHECK(recover_hamiltonian(eik, v1(0.0), v1(1.0), 1.0) == Approx(-1.0).margin(1e-9));
    CHECK(recover_hamiltonian(eik, v1(0.0), v1(1.0), 1.0, LegendreRoute::numeric) ==
          Approx(-1.0).margin(1e-6));
  }
  SECTION("lambda = 0 gives the minimum of L, which is H(x, 0)") {
    const ControlProblem& sq = catalog::get("smooth-quadratic-1d").problem;
    for (double x : {-2.0, 0.0, 1.3}) {
      CHECK(recover_hamiltonian(sq, v1(x), v1(0.0), sq.lipschitz_lambda) ==
            Approx(sq.hamiltonian.value(v1(x), v1(0.0))).margin(1e-9));
    }
  }
  SECTION("quadratic test Hamiltonian at lambda = 2 recovers -2") {
    const ControlProblem q = quadratic_problem();
    // Brute force inf over α of 2α + α²/2 on a fine grid.
    double best = 1e300;
    for (int i = 0; i <= 60000; ++i) {
      const double a = -3.0 + 6.0 * i / 60000;
      best = std::min(best, 2.0 * a + 0.5 * a * a);
    }
    CHECK(best == Approx(-2.0).margin(1e-8));
    CHECK(recover_hamiltonian(q, v1(0.0), v1(2.0), 3.0) == Approx(best).margin(1e-8));
  }
}

TEST_CASE("recover_hamiltonian with L infinite everywhere is malformed") {
  ControlProblem p = quadratic_problem();
  p.running_cost->value = [](const Vec&, const Vec&) { return ExtendedReal::infinity(); };
  CHECK_THROWS_AS(recover_hamiltonian(p, v1(0.0), v1(1.0), 3.0), MalformedProblemError);
}

TEST_CASE("smoothed_min certifies the hyperbolic regularization within delta") {
  const ControlProblem& p = catalog::get("eikonal-1d-costed").problem;
  for (double delta : {1e-1, 1e-2, 1e-4}) {
    const RegularizedHamiltonian h = regularize(p, delta, RegularizationMethod::smoothed_min);
    CHECK(h.certified_sup_error <= delta);
    // 0 <= sqrt(λ² + δ²) - |λ| <= δ, so the shifted form deviates by δ/2 at most.
    CHECK(h.certified_sup_error == Approx(delta / 2).epsilon(1e-9));
  }
}

TEST_CASE("problem_supplied on a smooth H returning H itself certifies zero error") {
  const RegularizedHamiltonian h =
      regularize(catalog::get("smooth-quadratic-1d").problem, 0.3, RegularizationMethod::problem_supplied);
  CHECK(h.certified_sup_error == 0.0);
}

TEST_CASE("regularize preconditions") {
  const ControlProblem& p = catalog::get("eikonal-1d").problem;
  CHECK_THROWS_AS(regularize(p, 0.0, RegularizationMethod::smoothed_min), PreconditionError);
  CHECK_THROWS_AS(regularize(p, -1.0, RegularizationMethod::problem_supplied), PreconditionError);
  const ControlProblem bare = sine_offset_problem(1.0, 1.0, 1.0);
  CHECK_THROWS_AS(regularize(bare, 0.1, RegularizationMethod::problem_supplied), MalformedProblemError);
  CHECK_THROWS_AS(regularize(bare, 0.1, RegularizationMethod::smoothed_min), MalformedProblemError);
}

TEST_CASE("a family that misses the delta budget reports the worst sample") {
  ControlProblem p = catalog::get("smooth-quadratic-1d").problem;
  const HamiltonianFunctions base = p.hamiltonian;
  p.smooth_family = [base](double delta) {
    SmoothFamilyMember m{base, std::nullopt};
    m.hamiltonian.value = [base, delta](const Vec& x, const Vec& l) {
      return base.value(x, l) - 3.0 * delta * std::cos(x[0]);
    };
    return m;
  };
  try {
    (void)regularize(p, 0.01, RegularizationMethod::problem_supplied);
    FAIL("expected a regularization error");
  } catch (const RegularizationError& e) {
    CHECK(e.measured == Approx(0.03).epsilon(1e-6));
    CHECK(std::abs(std::cos(e.worst_x[0])) == Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("regularization error is monotone in delta") {
  const ControlProblem& p = catalog::get("eikonal-2d").problem;
  double previous = 0.0;
  for (double delta : {1e-6, 1e-4, 1e-3, 1e-2, 1e-1, 0.5}) {
    const double e = regularize(p, delta, RegularizationMethod::smoothed_min).certified_sup_error;
    CHECK(e + 1e-12 >= previous);
    previous = e;
  }
}

TEST_CASE("regularized Hamiltonians stay concave in lambda") {
  Sampler rng(3);
  for (const std::string& id : catalog::list()) {
    const RegularizedHamiltonian h = smoothed(id, 1e-2);
    const ControlProblem& p = h.base;
    const double radius = p.default_lambda_search_radius();
    for (int i = 0; i < 500; ++i) {
      const Vec x = rng.in_box(p.domain_box);
      const Vec l1 = rng.in_ball(p.dim, radius);
      const Vec l2 = rng.in_ball(p.dim, radius);
      const double xi = rng.uniform(0.0, 1.0);
      CHECK(h.value(x, xi * l1 + (1 - xi) * l2) >= xi * h.value(x, l1) + (1 - xi) * h.value(x, l2) - 1e-10);
    }
  }
}

TEST_CASE("verify_constants examples") {
  SECTION("-|lambda| with C1 = 1 passes") {
    const ConstantsReport r = verify_constants(catalog::get("eikonal-1d").problem, 2000, 0);
    CHECK(r.pass());
    CHECK(r.c1.empirical <= 1.0 + 1e-12);
  }
  SECTION("-|lambda| + sin(x) with C2 = 1 passes") {
    const ConstantsReport r = verify_constants(sine_offset_problem(1.0, 1.0, 1.0), 2000, 0);
    CHECK(r.c2.pass);
    CHECK(r.pass());
  }
  SECTION("declared C1 = 0.5 for -|lambda| fails with a witness") {
    const ConstantsReport r = verify_constants(sine_offset_problem(0.0, 0.5, 0.0), 2000, 0);
    CHECK_FALSE(r.c1.pass);
    CHECK_FALSE(r.pass());
    CHECK(r.c1.witness.ratio > 0.5);
    const ConstantWitness& w = r.c1.witness;
    CHECK(std::abs(w.lambda1.norm() - w.lambda2.norm()) / (w.lambda1 - w.lambda2).norm() ==
          Approx(w.ratio).epsilon(1e-9));
  }
  SECTION("too few samples is a precondition error") {
    CHECK_THROWS_AS(verify_constants(catalog::get("eikonal-1d").problem, 99, 0), PreconditionError);
  }
}

TEST_CASE("verify_constants is deterministic in its seed") {
  const ControlProblem& p = catalog::get("eikonal-1d-costed").problem;
  const ConstantsReport a = verify_constants(p, 500, 11);
  const ConstantsReport b = verify_constants(p, 500, 11);
  CHECK(a.c2.empirical == b.c2.empirical);
  CHECK(a.c3.empirical == b.c3.empirical);
}

TEST_CASE("Legendre round trip through the numeric conjugate") {
  Sampler rng(0);
  for (const std::string& id : catalog::list()) {
    const ControlProblem& p = catalog::get(id).problem;
    if (!p.running_cost) continue;
    const double lam_radius = p.terminal_grad_bound * std::exp(p.lipschitz_x * p.horizon);
    // The nested numeric transform is slow in 2-D; the acceptance run covers 200 there.
    const int samples = p.dim == 1 ? 200 : 40;
    for (int i = 0; i < samples; ++i) {
      const Vec x = rng.in_box(p.domain_box);
      const Vec lam = rng.in_ball(p.dim, lam_radius);
      const double h = p.hamiltonian.value(x, lam);
      const double recovered = recover_hamiltonian(p, x, lam, p.lipschitz_lambda, LegendreRoute::numeric);
      CHECK(std::abs(recovered - h) <= 1e-4 * (1.0 + std::abs(h)));
    }
  }
}

TEST_CASE("conjugate inequality L(x, a) >= -a.lambda + H(x, lambda)") {
  Sampler rng(1);
  for (const std::string& id : catalog::list()) {
    const ControlProblem& p = catalog::get(id).problem;
    const RegularizedHamiltonian h = smoothed(id, 1e-2);
    const double radius = p.default_lambda_search_radius();
    for (int i = 0; i < 300; ++i) {
      const Vec x = rng.in_box(p.domain_box);
      const Vec a = rng.in_ball(p.dim, 1.2 * p.lipschitz_lambda);
      const Vec lam = rng.in_ball(p.dim, radius);
      const ExtendedReal base_l = running_cost_numeric(p, x, a, radius);
      if (base_l.is_finite()) CHECK(base_l.value() >= -a.dot(lam) + p.hamiltonian.value(x, lam) - 1e-10);
      const ExtendedReal smooth_l = evaluate_running_cost(h, x, a, false).value;
      if (smooth_l.is_finite()) CHECK(smooth_l.value() >= -a.dot(lam) + h.value(x, lam) - 1e-10);
    }
  }
}

TEST_CASE("analytic and numeric running costs agree") {
  Sampler rng(2);
  for (const std::string& id : catalog::list()) {
    const RegularizedHamiltonian h = smoothed(id, 1e-1);
    const ControlProblem& p = h.base;
    REQUIRE(h.running_cost);
    RegularizedHamiltonian numeric = h;
    numeric.running_cost.reset();
    for (int i = 0; i < 50; ++i) {
      const Vec x = rng.in_box(p.domain_box);
      const Vec a = rng.in_ball(p.dim, 0.9 * p.lipschitz_lambda);
      const RunningCostEval an = evaluate_running_cost(h, x, a, true);
      const RunningCostEval nu = evaluate_running_cost(numeric, x, a, true);
      if (an.value.is_infinite()) {
        CHECK(nu.value.is_infinite());
        continue;
      }
      REQUIRE(nu.value.is_finite());
      CHECK(nu.value.value() == Approx(an.value.value()).margin(1e-8));
      CHECK((nu.grad_alpha - an.grad_alpha).norm() <= 1e-5 * (1.0 + an.grad_alpha.norm()));
      CHECK((nu.grad_x - an.grad_x).norm() <= 1e-5 * (1.0 + an.grad_x.norm()));
    }
  }
}

TEST_CASE("eikonal running cost is the offset inside the unit ball and infinite outside") {
  Sampler rng(4);
  for (const char* id : {"eikonal-1d", "eikonal-1d-costed", "eikonal-2d"}) {
    const ControlProblem& p = catalog::get(id).problem;
    for (int i = 0; i < 100; ++i) {
      const Vec x = rng.in_box(p.domain_box);
      const Vec a = rng.in_ball(p.dim, 2.0);
      const ExtendedReal numeric = running_cost_numeric(p, x, a, p.default_lambda_search_radius());
      const ExtendedReal analytic = p.running_cost->value(x, a);
      if (a.norm() < 0.999) {
        REQUIRE(numeric.is_finite());
        CHECK(numeric.value() == Approx(p.hamiltonian.value(x, Vec::Zero(p.dim))).margin(1e-9));
        CHECK(analytic.value() == Approx(numeric.value()).margin(1e-9));
      } else if (a.norm() > 1.001) {
        CHECK(numeric.is_infinite());
        CHECK(analytic.is_infinite());
      }
    }
  }
}

TEST_CASE("gradients match central differences") {
  for (const std::string& id : catalog::list()) {
    const RegularizedHamiltonian h = smoothed(id, 1e-2);
    const GradientReport r = verify_gradients(h.base, h.hamiltonian, 100, 0);
    INFO(id);
    CHECK(r.worst_lambda <= 1e-6);
    CHECK(r.worst_x <= 1e-6);
    CHECK(r.worst_terminal <= 1e-6);
  }
}

TEST_CASE("dual bound and search radius") {
  ControlProblem p = catalog::get("eikonal-1d").problem;
  p.lipschitz_x = 1.0;
  p.terminal_grad_bound = 1.0;
  CHECK(p.dual_bound() == Approx(2.0 * std::exp(1.0) - 1.0).epsilon(1e-15));
  CHECK(p.default_lambda_search_radius() == Approx(std::max(10.0, 2.0 * p.dual_bound() + 1.0)));
}
