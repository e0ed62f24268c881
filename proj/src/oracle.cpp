#include "sympont/oracle.hpp"

#include "sympont/symplectic.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <thread>

namespace sympont {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Multilinear interpolation on one slice with coordinates clamped to the box.
class SliceInterpolator {
public:
  explicit SliceInterpolator(const GridSpec& grid) : grid_(grid), dim_(grid.dim()) {
    stride_.resize(dim_);
    spacing_.resize(dim_);
    std::size_t s = 1;
    for (int i = 0; i < dim_; ++i) {
      stride_[i] = s;
      s *= static_cast<std::size_t>(grid.nodes[i]);
      spacing_[i] = grid.spacing(i);
    }
  }

  double operator()(const std::vector<double>& slice, const Vec& y) const {
    std::size_t base = 0;
    double weights[3];
    for (int i = 0; i < dim_; ++i) {
      const int n = grid_.nodes[i];
      double s = (y[i] - grid_.box.lower[i]) / spacing_[i];
      s = std::clamp(s, 0.0, static_cast<double>(n - 1));
      int i0 = std::min(static_cast<int>(s), n - 2);
      weights[i] = s - i0;
      base += static_cast<std::size_t>(i0) * stride_[i];
    }
    double acc = 0.0;
    for (int corner = 0; corner < (1 << dim_); ++corner) {
      double w = 1.0;
      std::size_t idx = base;
      for (int i = 0; i < dim_; ++i) {
        if (corner & (1 << i)) {
          w *= weights[i];
          idx += stride_[i];
        } else {
          w *= 1.0 - weights[i];
        }
      }
      if (w != 0.0) acc += w * slice[idx];
    }
    return acc;
  }

private:
  const GridSpec& grid_;
  int dim_;
  std::vector<std::size_t> stride_;
  std::vector<double> spacing_;
};

std::string describe(const Vec& v) {
  std::ostringstream os;
  os << '(';
  for (int i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  os << ')';
  return os.str();
}

std::vector<Vec> sphere_points(int dim, double radius, int count) {
  std::vector<Vec> pts;
  if (dim == 2) {
    for (int k = 0; k < count; ++k) {
      const double th = 2.0 * std::numbers::pi * k / count;
      Vec v(2);
      v << radius * std::cos(th), radius * std::sin(th);
      pts.push_back(std::move(v));
    }
  } else {
    // Fibonacci lattice on the sphere.
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int k = 0; k < count; ++k) {
      const double z = 1.0 - 2.0 * (k + 0.5) / count;
      const double r = std::sqrt(std::max(1.0 - z * z, 0.0));
      Vec v(3);
      v << radius * r * std::cos(golden * k), radius * r * std::sin(golden * k), radius * z;
      pts.push_back(std::move(v));
    }
  }
  return pts;
}

}  // namespace

double GridSpec::spacing(int axis) const {
  return (box.upper[axis] - box.lower[axis]) / (nodes[axis] - 1);
}

std::size_t GridSpec::node_count() const {
  std::size_t n = 1;
  for (int k : nodes) n *= static_cast<std::size_t>(k);
  return n;
}

Vec GridValueFunction::node(std::size_t flat) const {
  const int d = grid.dim();
  Vec x(d);
  for (int i = 0; i < d; ++i) {
    const auto n = static_cast<std::size_t>(grid.nodes[i]);
    x[i] = grid.box.lower[i] + grid.spacing(i) * static_cast<double>(flat % n);
    flat /= n;
  }
  return x;
}

Box GridValueFunction::valid_region(int n) const {
  return grid.box.shrunk(reach_speed * (times.back() - times[n]));
}

double GridValueFunction::interpolate(const Vec& x, int n) const {
  if (n < 0 || n > steps()) throw DomainError("time index out of range");
  if (!valid_region(n).contains(x, 1e-12)) {
    throw DomainError("query " + describe(x) + " at time index " + std::to_string(n) +
                      " lies outside the reachable-safe region of the grid");
  }
  return SliceInterpolator(grid)(values[n], x);
}

std::vector<Vec> sample_controls(int dim, double radius, int samples) {
  if (samples < 1) throw PreconditionError("need at least one control sample");
  if (dim < 1 || dim > 3) throw PreconditionError("control sampling supports 1 <= d <= 3");
  std::vector<Vec> out;
  if (radius == 0.0) {
    out.emplace_back(Vec::Zero(dim));
    return out;
  }
  if (dim == 1) {
    if (samples == 1) {
      out.emplace_back(Vec::Zero(1));
      return out;
    }
    for (int k = 0; k < samples; ++k) {
      out.emplace_back(Vec::Constant(1, -radius + 2.0 * radius * k / (samples - 1)));
    }
    return out;
  }
  constexpr int kShells = 4;
  for (int j = kShells; j >= 1; --j) {
    const int count = j == kShells ? samples : std::max(4, samples * j / kShells);
    for (Vec& v : sphere_points(dim, radius * j / kShells, count)) out.push_back(std::move(v));
  }
  out.emplace_back(Vec::Zero(dim));
  return out;
}

GridValueFunction solve_grid_dp(const ControlProblem& p, const GridSpec& grid, int steps,
                                int control_samples, int workers) {
  const int d = p.dim;
  if (grid.dim() != d || static_cast<int>(grid.nodes.size()) != d) {
    throw PreconditionError("grid dimension does not match the problem");
  }
  if (d > 3) throw PreconditionError("grid oracle supports d <= 3");
  for (int k : grid.nodes) {
    if (k < 2) throw PreconditionError("every grid axis needs at least two nodes");
  }
  if (steps < 0) throw PreconditionError("number of time steps must be nonnegative");

  GridValueFunction u;
  u.grid = grid;
  u.reach_speed = p.lipschitz_lambda;
  u.problem_id = p.id;
  u.control_samples = control_samples;
  u.times.resize(steps + 1);
  const double dt = steps > 0 ? p.horizon / steps : 0.0;
  for (int n = 0; n <= steps; ++n) u.times[n] = steps > 0 ? n * dt : p.horizon;
  u.values.assign(steps + 1, std::vector<double>(grid.node_count()));

  const std::size_t nodes = grid.node_count();
  std::vector<Vec> coords(nodes);
  for (std::size_t k = 0; k < nodes; ++k) {
    coords[k] = u.node(k);
    u.values[steps][k] = p.terminal_cost(coords[k]);
  }
  if (steps == 0) return u;

  const std::vector<Vec> controls = sample_controls(d, p.lipschitz_lambda, control_samples);
  const std::size_t nc = controls.size();
  const double lambda_radius = p.default_lambda_search_radius();
  auto running_cost = [&](const Vec& x, const Vec& a) {
    return p.running_cost ? p.running_cost->value(x, a) : running_cost_numeric(p, x, a, lambda_radius);
  };

  // L does not depend on time; tabulate it once when the table is small.
  const bool tabulate = nodes * nc <= 8'000'000;
  std::vector<double> table;
  if (tabulate) {
    table.resize(nodes * nc);
    for (std::size_t k = 0; k < nodes; ++k) {
      for (std::size_t c = 0; c < nc; ++c) {
        const ExtendedReal l = running_cost(coords[k], controls[c]);
        table[k * nc + c] = l.is_infinite() ? kInf : l.value();
      }
    }
  }

  const SliceInterpolator interp(u.grid);
  // Nodes of a slice are independent and each writes only its own entry, so
  // splitting them across threads leaves the result bit-identical.
  const std::size_t requested = workers > 0 ? static_cast<std::size_t>(workers) : std::thread::hardware_concurrency();
  const std::size_t threads = std::clamp<std::size_t>(requested, 1, nodes / 256 + 1);
  for (int n = steps - 1; n >= 0; --n) {
    const std::vector<double>& next = u.values[n + 1];
    std::vector<double>& cur = u.values[n];
    std::vector<std::size_t> dead(threads, nodes);
    auto sweep = [&](std::size_t w) {
      Vec target(d);
      for (std::size_t k = w * nodes / threads; k < (w + 1) * nodes / threads; ++k) {
        double best = kInf;
        for (std::size_t c = 0; c < nc; ++c) {
          double l;
          if (tabulate) {
            l = table[k * nc + c];
          } else {
            const ExtendedReal e = running_cost(coords[k], controls[c]);
            l = e.is_infinite() ? kInf : e.value();
          }
          if (std::isinf(l)) continue;
          target = coords[k] + dt * controls[c];
          best = std::min(best, dt * l + interp(next, target));
        }
        if (std::isinf(best)) {
          dead[w] = k;
          return;
        }
        cur[k] = best;
      }
    };
    if (threads == 1) {
      sweep(0);
    } else {
      std::vector<std::thread> pool;
      for (std::size_t w = 0; w < threads; ++w) pool.emplace_back(sweep, w);
      for (std::thread& t : pool) t.join();
    }
    const std::size_t first_dead = *std::min_element(dead.begin(), dead.end());
    if (first_dead < nodes) {
      throw MalformedProblemError("running cost is +inf for every sampled control at node " +
                                  describe(coords[first_dead]));
    }
  }
  return u;
}

std::optional<double> exact_value(const ControlProblem& p, const Vec& x, double t) {
  if (!p.exact_value) return std::nullopt;
  return p.exact_value(x, t);
}

DiscreteTrajectory continuous_hamiltonian_flow(const ControlProblem& p, const Vec& x_s, int fine_steps,
                                               double delta) {
  if (fine_steps < 10'000) throw PreconditionError("reference flow needs at least 1e4 steps");
  RegularizedHamiltonian h;
  if (p.smooth) {
    h.base = p;
    h.delta = 0.0;
    h.hamiltonian = p.hamiltonian;
    h.running_cost = p.running_cost;
  } else {
    h = regularize(p, delta,
                   p.smooth_family ? RegularizationMethod::problem_supplied : RegularizationMethod::smoothed_min);
  }
  return solve_tpbvp(h, x_s, fine_steps);
}

void export_grid_value_function(const GridValueFunction& u, const std::string& csv_path,
                                const std::string& json_path) {
  std::ofstream csv(csv_path);
  if (!csv) throw IoError("cannot open grid CSV for writing", csv_path);
  const int d = u.grid.dim();
  for (int i = 0; i < d; ++i) csv << 'x' << i << ',';
  csv << "n,value\n";
  for (int n = 0; n <= u.steps(); ++n) {
    for (std::size_t k = 0; k < u.values[n].size(); ++k) {
      const Vec x = u.node(k);
      for (int i = 0; i < d; ++i) csv << format_double(x[i]) << ',';
      csv << n << ',' << format_double(u.values[n][k]) << '\n';
    }
  }
  if (!csv) throw IoError("failed writing grid CSV", csv_path);

  nlohmann::json meta;
  meta["problem_id"] = u.problem_id;
  meta["dim"] = d;
  meta["box_lower"] = std::vector<double>(u.grid.box.lower.data(), u.grid.box.lower.data() + d);
  meta["box_upper"] = std::vector<double>(u.grid.box.upper.data(), u.grid.box.upper.data() + d);
  meta["nodes"] = u.grid.nodes;
  meta["steps"] = u.steps();
  meta["horizon"] = u.times.back();
  meta["control_samples"] = u.control_samples;
  meta["reach_speed"] = u.reach_speed;
  meta["interpolation"] = "multilinear";
  std::ofstream js(json_path);
  if (!js) throw IoError("cannot open grid metadata for writing", json_path);
  js << meta.dump(2) << '\n';
  if (!js) throw IoError("failed writing grid metadata", json_path);
}

GridOracleOptions default_grid_oracle_options(const ControlProblem& p) {
  GridOracleOptions o;
  if (p.dim == 1) {
    o.steps = 400;
    o.control_samples = 5;
  } else {
    o.steps = 10;
    o.control_samples = 64;
  }
  return o;
}

GridSpec grid_around(const ControlProblem& p, const Vec& x_s, double spacing, double margin) {
  if (!(spacing > 0.0)) throw PreconditionError("grid spacing must be positive");
  const int d = p.dim;
  const double half_width = p.reach_radius() + margin;
  const int half_nodes = static_cast<int>(std::ceil(half_width / spacing - 1e-9));
  GridSpec g;
  g.box.lower = x_s.array() - half_nodes * spacing;
  g.box.upper = x_s.array() + half_nodes * spacing;
  g.nodes.assign(d, 2 * half_nodes + 1);
  return g;
}

RefinedGridValue refined_grid_value(const ControlProblem& p, const Vec& x_s,
                                    const GridOracleOptions& opts) {
  const double speed = p.lipschitz_lambda > 0.0 ? p.lipschitz_lambda : 1.0;
  auto solve_at = [&](int steps, int samples) {
    const double spacing = speed * (p.horizon / steps) / opts.spacing_ratio;
    const GridSpec grid = grid_around(p, x_s, spacing, opts.margin);
    return solve_grid_dp(p, grid, steps, samples).interpolate(x_s, 0);
  };
  const int fine_samples = p.dim == 1 ? 2 * opts.control_samples - 1 : 2 * opts.control_samples;
  RefinedGridValue r;
  r.coarse = solve_at(opts.steps, opts.control_samples);
  r.fine = solve_at(2 * opts.steps, fine_samples);
  r.value = 2.0 * r.fine - r.coarse;
  r.accuracy = std::abs(r.fine - r.coarse);
  return r;
}

}  // namespace sympont
