#include "sympont/catalog.hpp"
#include "sympont/harness.hpp"
#include "sympont/oracle.hpp"
#include "sympont/symplectic.hpp"
#include "sympont/variational.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace sympont;

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Stacks per-step vectors into an (n, d) array.
RowMatrix stack(const std::vector<Vec>& rows, int dim) {
  RowMatrix m(static_cast<Eigen::Index>(rows.size()), dim);
  for (std::size_t i = 0; i < rows.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  return m;
}

const ControlProblem& problem(const std::string& id) { return catalog::get(id).problem; }

py::dict cell_dict(const CellRecord& c) {
  py::dict d;
  d["problem"] = c.problem;
  d["dt"] = c.dt;
  d["delta"] = c.delta;
  d["route"] = c.route;
  d["u_bar"] = c.u_bar;
  d["u_oracle"] = c.u_oracle;
  d["err_signed"] = c.err_signed;
  d["lower_bound"] = c.lower_bound;
  d["upper_bound"] = c.upper_bound;
  d["lower_ok"] = c.lower_ok;
  d["upper_ok"] = c.upper_ok;
  d["dual_slack"] = c.dual_slack;
  d["sweeps"] = c.sweeps;
  d["residual"] = c.residual;
  d["failure"] = c.failure;
  return d;
}

}  // namespace

PYBIND11_MODULE(sympont, m) {
  m.doc() = "Symplectic Pontryagin approximations of Hamilton-Jacobi-Bellman value functions";

  py::register_exception<Error>(m, "SympontError", PyExc_RuntimeError);

  m.def("list_problems", [] {
    std::vector<std::pair<std::string, std::string>> out;
    for (const std::string& id : catalog::list()) out.emplace_back(id, catalog::get(id).description);
    return out;
  });

  m.def(
      "problem_constants",
      [](const std::string& id) {
        const ControlProblem& p = problem(id);
        py::dict d;
        d["dim"] = p.dim;
        d["horizon"] = p.horizon;
        d["C1"] = p.lipschitz_lambda;
        d["C2"] = p.lipschitz_x;
        d["C3"] = p.terminal_grad_bound;
        d["smooth"] = p.smooth;
        d["has_exact_value"] = static_cast<bool>(p.exact_value);
        return d;
      },
      py::arg("problem"));

  m.def(
      "verify_constants",
      [](const std::string& id, int samples, std::uint64_t seed) {
        const ConstantsReport r = verify_constants(problem(id), samples, seed);
        py::dict d;
        for (auto [name, c] : {std::pair{"C1", &r.c1}, std::pair{"C2", &r.c2}, std::pair{"C3", &r.c3}}) {
          d[name] = py::dict(py::arg("declared") = c->declared, py::arg("empirical") = c->empirical,
                             py::arg("pass") = c->pass);
        }
        d["concave"] = r.concave;
        d["pass"] = r.pass();
        return d;
      },
      py::arg("problem"), py::arg("samples") = 10000, py::arg("seed") = 0);

  py::class_<RegularizedHamiltonian>(m, "RegularizedHamiltonian")
      .def_property_readonly("problem", [](const RegularizedHamiltonian& h) { return h.base.id; })
      .def_readonly("delta", &RegularizedHamiltonian::delta)
      .def_readonly("certified_sup_error", &RegularizedHamiltonian::certified_sup_error)
      .def("value", &RegularizedHamiltonian::value, py::arg("x"), py::arg("lam"))
      .def("grad_lambda", &RegularizedHamiltonian::grad_lambda, py::arg("x"), py::arg("lam"))
      .def("grad_x", &RegularizedHamiltonian::grad_x, py::arg("x"), py::arg("lam"));

  m.def(
      "regularize",
      [](const std::string& id, double delta) {
        const ControlProblem& p = problem(id);
        return regularize(p, delta,
                          p.smooth_family ? RegularizationMethod::problem_supplied
                                          : RegularizationMethod::smoothed_min);
      },
      py::arg("problem"), py::arg("delta"));

  py::class_<DiscreteTrajectory>(m, "Trajectory")
      .def_readonly("dt", &DiscreteTrajectory::dt)
      .def_readonly("steps", &DiscreteTrajectory::steps)
      .def_readonly("value", &DiscreteTrajectory::value)
      .def_property_readonly("states", [](const DiscreteTrajectory& t) { return stack(t.states, t.dim()); })
      .def_property_readonly("duals", [](const DiscreteTrajectory& t) { return stack(t.duals, t.dim()); })
      .def_property_readonly("controls", [](const DiscreteTrajectory& t) { return stack(t.controls, t.dim()); })
      .def_property_readonly("route", [](const DiscreteTrajectory& t) { return t.diagnostics.route; })
      .def_property_readonly("iterations", [](const DiscreteTrajectory& t) { return t.diagnostics.iterations; });

  m.def(
      "solve_tpbvp",
      [](const RegularizedHamiltonian& h, const Vec& x0, int steps, bool fallback) {
        SweepOptions opts;
        opts.fallback = fallback ? Fallback::variational : Fallback::none;
        return solve_tpbvp(h, x0, steps, opts);
      },
      py::arg("h"), py::arg("x0"), py::arg("steps"), py::arg("fallback") = false);

  m.def(
      "minimize_J",
      [](const RegularizedHamiltonian& h, const Vec& x0, int steps, int start, std::uint64_t seed) {
        MinimizeOptions opts;
        opts.seed = seed;
        const DiscreteValue dv = minimize_J(h, x0, start, steps, opts);
        py::dict d;
        d["value"] = dv.value;
        d["controls"] = stack(dv.minimizer.controls, h.base.dim);
        d["states"] = stack(dv.minimizer.rollout(), h.base.dim);
        return d;
      },
      py::arg("h"), py::arg("x0"), py::arg("steps"), py::arg("start") = 0, py::arg("seed") = 0);

  m.def(
      "brute_force_value",
      [](const RegularizedHamiltonian& h, const Vec& x0, int steps, int points) {
        return brute_force_value(h, x0, steps, points);
      },
      py::arg("h"), py::arg("x0"), py::arg("steps"), py::arg("points"));

  m.def(
      "exact_value",
      [](const std::string& id, const Vec& x, double t) { return exact_value(problem(id), x, t); },
      py::arg("problem"), py::arg("x"), py::arg("t") = 0.0);

  m.def(
      "grid_value",
      [](const std::string& id, const Vec& x) {
        const ControlProblem& p = problem(id);
        const RefinedGridValue r = refined_grid_value(p, x, default_grid_oracle_options(p));
        return py::dict(py::arg("value") = r.value, py::arg("accuracy") = r.accuracy, py::arg("coarse") = r.coarse,
                        py::arg("fine") = r.fine);
      },
      py::arg("problem"), py::arg("x"));

  m.def(
      "run_sweep",
      [](const std::string& id, const Vec& x0, std::vector<double> dt, std::vector<double> delta,
         const std::string& oracle, const std::string& route, std::uint64_t seed, int workers,
         const std::string& output_dir) {
        ExperimentSpec spec;
        spec.problem_id = id;
        spec.x_s = x0;
        spec.dt_list = std::move(dt);
        spec.delta_list = std::move(delta);
        spec.oracle = parse_oracle_kind(oracle);
        spec.route = parse_solver_route(route);
        spec.seed = seed;
        spec.workers = workers;
        spec.output_dir = output_dir;
        ExperimentReport r;
        {
          py::gil_scoped_release release;
          r = run_sweep(spec);
          if (!output_dir.empty()) emit_reports(r, output_dir);
        }
        py::list cells;
        for (const CellRecord& c : r.cells) cells.append(cell_dict(c));
        py::dict d;
        d["cells"] = cells;
        d["oracle_value"] = r.oracle_value;
        d["oracle_accuracy"] = r.oracle_accuracy;
        d["dt_order"] = r.dt_order;
        d["delta_sensitivity"] = r.delta_sensitivity;
        d["delta_no_blowup"] = r.delta_no_blowup;
        d["notes"] = r.notes;
        d["exit_code"] = r.exit_code();
        return d;
      },
      py::arg("problem"), py::arg("x0"), py::arg("dt"), py::arg("delta"), py::arg("oracle") = "exact",
      py::arg("route") = "tpbvp", py::arg("seed") = 0, py::arg("workers") = 0, py::arg("output_dir") = "");
}
