#pragma once

#include "sympont/types.hpp"

#include <cmath>
#include <cstdint>
#include <random>

namespace sympont {

/// Seeded sampler used by every randomized check so reports are reproducible.
class Sampler {
public:
  explicit Sampler(std::uint64_t seed) : engine_(seed) {}

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }

  Vec in_box(const Box& box) {
    Vec x(box.dim());
    for (int i = 0; i < box.dim(); ++i) x[i] = uniform(box.lower[i], box.upper[i]);
    return x;
  }

  /// Uniform in the closed Euclidean ball of the given radius.
  Vec in_ball(int dim, double radius) {
    Vec dir(dim);
    std::normal_distribution<double> normal;
    double norm = 0.0;
    do {
      for (int i = 0; i < dim; ++i) dir[i] = normal(engine_);
      norm = dir.norm();
    } while (norm == 0.0);
    const double r = radius * std::pow(uniform(0.0, 1.0), 1.0 / dim);
    return dir * (r / norm);
  }

  std::mt19937_64& engine() { return engine_; }

private:
  std::mt19937_64 engine_;
};

}  // namespace sympont
