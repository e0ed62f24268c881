#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace sympont {

using Vec = Eigen::VectorXd;

/// Real number or +infinity. Running costs obtained from a Legendre-Fenchel
/// transform take values in R ∪ {+∞}.
class ExtendedReal {
public:
  constexpr ExtendedReal() = default;
  constexpr ExtendedReal(double v) : value_(v) {}  // NOLINT: implicit from finite reals

  static constexpr ExtendedReal infinity() {
    return ExtendedReal(std::numeric_limits<double>::infinity());
  }

  [[nodiscard]] constexpr bool is_infinite() const {
    return value_ == std::numeric_limits<double>::infinity();
  }
  [[nodiscard]] constexpr bool is_finite() const { return !is_infinite(); }

  /// Finite value; +inf when infinite.
  [[nodiscard]] constexpr double value() const { return value_; }

  friend constexpr ExtendedReal operator+(ExtendedReal a, ExtendedReal b) {
    if (a.is_infinite() || b.is_infinite()) return infinity();
    return ExtendedReal(a.value_ + b.value_);
  }
  friend constexpr ExtendedReal operator*(double s, ExtendedReal a) {
    // Only nonnegative scalings are meaningful for +inf.
    if (a.is_infinite()) return infinity();
    return ExtendedReal(s * a.value_);
  }
  friend constexpr auto operator<=>(ExtendedReal a, ExtendedReal b) = default;

private:
  double value_ = 0.0;
};

/// Axis-aligned box in R^d.
struct Box {
  Vec lower;
  Vec upper;

  static Box cube(int dim, double lo, double hi) {
    return {Vec::Constant(dim, lo), Vec::Constant(dim, hi)};
  }

  [[nodiscard]] int dim() const { return static_cast<int>(lower.size()); }

  [[nodiscard]] bool contains(const Vec& x, double tol = 0.0) const {
    for (int i = 0; i < dim(); ++i) {
      if (x[i] < lower[i] - tol || x[i] > upper[i] + tol) return false;
    }
    return true;
  }

  /// Box shrunk by r on every side (may become empty).
  [[nodiscard]] Box shrunk(double r) const {
    return {lower.array() + r, upper.array() - r};
  }

  [[nodiscard]] bool empty() const { return (upper.array() < lower.array()).any(); }
};

// ---------------------------------------------------------------------------
// Errors. Every failure surfaced by the library derives from sympont::Error.

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A Hamiltonian, running cost or terminal cost returned a non-finite value.
class EvaluationError : public Error {
public:
  EvaluationError(const std::string& what, Vec x, Vec lambda)
      : Error(what), x(std::move(x)), lambda(std::move(lambda)) {}
  Vec x;
  Vec lambda;
};

class MalformedProblemError : public Error {
public:
  using Error::Error;
};

class PreconditionError : public Error {
public:
  using Error::Error;
};

/// Measured |H - H^δ| exceeded δ at `worst_x`, `worst_lambda`.
class RegularizationError : public Error {
public:
  RegularizationError(const std::string& what, double measured, Vec worst_x, Vec worst_lambda)
      : Error(what), measured(measured), worst_x(std::move(worst_x)),
        worst_lambda(std::move(worst_lambda)) {}
  double measured;
  Vec worst_x;
  Vec worst_lambda;
};

class NonConvergenceError : public Error {
public:
  NonConvergenceError(const std::string& what, std::vector<double> residual_history)
      : Error(what), residual_history(std::move(residual_history)) {}
  std::vector<double> residual_history;
};

class OptimizationFailedError : public Error {
public:
  OptimizationFailedError(const std::string& what, std::vector<std::string> per_start)
      : Error(what), per_start(std::move(per_start)) {}
  std::vector<std::string> per_start;
};

/// Backward-recovered duals do not satisfy α_n = H_λ(x_n, λ_{n+1}).
class ExtractionInconsistentError : public Error {
public:
  ExtractionInconsistentError(const std::string& what, double worst_violation, int worst_index)
      : Error(what), worst_violation(worst_violation), worst_index(worst_index) {}
  double worst_violation;
  int worst_index;
};

class BudgetExceededError : public Error {
public:
  using Error::Error;
};

/// Query outside the region where a grid value function is valid.
class DomainError : public Error {
public:
  using Error::Error;
};

class NotFoundError : public Error {
public:
  using Error::Error;
};

class IoError : public Error {
public:
  IoError(const std::string& what, std::string path) : Error(what + ": " + path), path(std::move(path)) {}
  std::string path;
};

}  // namespace sympont
