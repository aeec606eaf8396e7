// python face of the laboratory: fields cross as numpy arrays, everything
// else as plain structs and dicts
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>
#include <stdexcept>

#include "nehari/config.hpp"
#include "nehari/energy.hpp"
#include "nehari/extremal.hpp"
#include "nehari/fibering.hpp"
#include "nehari/grid.hpp"
#include "nehari/params.hpp"
#include "nehari/solver.hpp"
#include "nehari/verify.hpp"

namespace py = pybind11;
using namespace nehari;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

ScalarField to_field(const GridSpec& g, const Array& arr) {
    ScalarField f(g);
    const auto info = arr.request();
    if (static_cast<std::size_t>(info.size) != g.size())
        throw std::invalid_argument("array size does not match the grid");
    const double* src = static_cast<const double*>(info.ptr);
    std::copy(src, src + g.size(), f.values.begin());
    return f;
}

py::array_t<double> to_array(const ScalarField& f) {
    const py::ssize_t n = f.grid.points_per_dim;
    py::array_t<double> arr(f.grid.dim == 1 ? std::vector<py::ssize_t>{n}
                                            : std::vector<py::ssize_t>{n, n});
    std::copy(f.values.begin(), f.values.end(), static_cast<double*>(arr.request().ptr));
    return arr;
}

GridSpec grid_of(const Array& arr, double half_width, double s) {
    const auto info = arr.request();
    GridSpec g;
    g.dim = static_cast<int>(info.ndim);
    if (g.dim != 1 && g.dim != 2) throw std::invalid_argument("expected a 1d or 2d array");
    if (g.dim == 2 && info.shape[0] != info.shape[1])
        throw std::invalid_argument("expected a square array");
    g.points_per_dim = static_cast<int>(info.shape[0]);
    g.half_width = half_width;
    g.s = s;
    validate_grid(g);
    return g;
}

py::dict coefficients_dict(const FiberingCoefficients& f) {
    py::dict d;
    d["a"] = f.a;
    d["b"] = f.b;
    d["c"] = f.c;
    d["d"] = f.d;
    return d;
}

py::dict report_dict(const SolutionReport& rep) {
    py::dict d;
    d["u"] = to_array(rep.pair.u);
    d["v"] = to_array(rep.pair.v);
    d["energy"] = rep.energy;
    d["grad_norm"] = rep.grad_norm;
    d["coupling"] = rep.coupling;
    d["min_value_u"] = rep.min_value_u;
    d["min_value_v"] = rep.min_value_v;
    d["split_residual"] = rep.split_residual;
    d["tag"] = to_string(rep.cls.tag);
    d["d1"] = rep.cls.d1;
    d["d2"] = rep.cls.d2;
    d["regime"] = to_string(rep.regime);
    d["iterations"] = rep.iterations;
    d["restarts"] = rep.restarts;
    d["converged"] = rep.converged;
    d["t_history"] = rep.t_history;
    d["energy_history"] = rep.energy_history;
    return d;
}

}  // namespace

PYBIND11_MODULE(nehari_lab, m) {
    m.doc() = "fibering quotients, Nehari branches and threshold estimates for a "
              "coupled concave-convex fractional system on a periodic box";

    py::class_<GridSpec>(m, "GridSpec")
        .def(py::init<>())
        .def_readwrite("dim", &GridSpec::dim)
        .def_readwrite("points_per_dim", &GridSpec::points_per_dim)
        .def_readwrite("half_width", &GridSpec::half_width)
        .def_readwrite("s", &GridSpec::s)
        .def("spacing", &GridSpec::spacing)
        .def("volume", &GridSpec::volume);

    py::class_<Exponents>(m, "Exponents")
        .def(py::init<>())
        .def_readwrite("p", &Exponents::p)
        .def_readwrite("q", &Exponents::q)
        .def_readwrite("alpha", &Exponents::alpha)
        .def_readwrite("beta", &Exponents::beta)
        .def("eta", &Exponents::eta);

    py::class_<PotentialSpec>(m, "PotentialSpec")
        .def_static("constant", &PotentialSpec::constant, py::arg("v0"))
        .def_static("power_law", &PotentialSpec::power_law, py::arg("gamma"));

    py::class_<ProblemParams>(m, "ProblemParams")
        .def(py::init<>())
        .def_readwrite("exp", &ProblemParams::exp)
        .def_readwrite("theta", &ProblemParams::theta)
        .def_readwrite("lam", &ProblemParams::lambda)
        .def_readwrite("grid", &ProblemParams::grid)
        .def_readwrite("pot_u", &ProblemParams::pot_u)
        .def_readwrite("pot_v", &ProblemParams::pot_v)
        .def("validate", [](const ProblemParams& prm) { validate_params(prm); });

    m.def("seminorm_sq",
          [](const Array& f, double half_width, double s) {
              return gagliardo_seminorm_sq(to_field(grid_of(f, half_width, s), f));
          },
          py::arg("f"), py::arg("half_width"), py::arg("s"));

    m.def("fractional_laplacian",
          [](const Array& f, double half_width, double s) {
              return to_array(fractional_laplacian_apply(to_field(grid_of(f, half_width, s), f)));
          },
          py::arg("f"), py::arg("half_width"), py::arg("s"));

    m.def("coefficients",
          [](const ProblemParams& prm, const Array& u, const Array& v) {
              return coefficients_dict(
                  coefficients_of({to_field(prm.grid, u), to_field(prm.grid, v)}, prm));
          },
          py::arg("prm"), py::arg("u"), py::arg("v"));

    m.def("energy",
          [](const ProblemParams& prm, const Array& u, const Array& v) {
              return energy(prm, {to_field(prm.grid, u), to_field(prm.grid, v)});
          },
          py::arg("prm"), py::arg("u"), py::arg("v"));

    m.def("gradient",
          [](const ProblemParams& prm, const Array& u, const Array& v) {
              const FieldPair g = gradient(prm, {to_field(prm.grid, u), to_field(prm.grid, v)});
              return py::make_tuple(to_array(g.u), to_array(g.v));
          },
          py::arg("prm"), py::arg("u"), py::arg("v"));

    m.def("classify",
          [](const ProblemParams& prm, const Array& u, const Array& v) {
              const NehariClass c =
                  classify(prm, {to_field(prm.grid, u), to_field(prm.grid, v)});
              py::dict d;
              d["tag"] = to_string(c.tag);
              d["d1"] = c.d1;
              d["d2"] = c.d2;
              return d;
          },
          py::arg("prm"), py::arg("u"), py::arg("v"));

    m.def("quotients",
          [](const ProblemParams& prm, const Array& u, const Array& v, double t) {
              const FiberingCoefficients f =
                  coefficients_of({to_field(prm.grid, u), to_field(prm.grid, v)}, prm);
              return py::make_tuple(quotient_nehari(f, t), quotient_energy(f, t));
          },
          py::arg("prm"), py::arg("u"), py::arg("v"), py::arg("t"));

    m.def("fiber_peaks",
          [](const ProblemParams& prm, const Array& u, const Array& v) {
              const FiberingCoefficients f =
                  coefficients_of({to_field(prm.grid, u), to_field(prm.grid, v)}, prm);
              const Peak pn = peak_nehari(f);
              const Peak pe = peak_energy(f);
              py::dict d;
              d["t_n"] = pn.scale;
              d["lambda_n"] = pn.value;
              d["t_e"] = pe.scale;
              d["lambda_e"] = pe.value;
              return d;
          },
          py::arg("prm"), py::arg("u"), py::arg("v"));

    m.def("projection_roots",
          [](const ProblemParams& prm, const Array& u, const Array& v, double lam) {
              const FiberingCoefficients f =
                  coefficients_of({to_field(prm.grid, u), to_field(prm.grid, v)}, prm);
              const ProjectionScales ps = projection_scales(f, lam);
              py::dict d;
              d["kind"] = ps.kind == RootKind::two ? "two"
                          : ps.kind == RootKind::tangent ? "tangent"
                                                         : "none";
              d["t_plus"] = ps.plus;
              d["t_minus"] = ps.minus;
              d["t_peak"] = ps.peak.scale;
              d["lambda_peak"] = ps.peak.value;
              return d;
          },
          py::arg("prm"), py::arg("u"), py::arg("v"), py::arg("lam"));

    m.def("project",
          [](const ProblemParams& prm, const Array& u, const Array& v, const std::string& branch) {
              const FieldPair z = project(prm, {to_field(prm.grid, u), to_field(prm.grid, v)},
                                          branch_from_string(branch));
              return py::make_tuple(to_array(z.u), to_array(z.v));
          },
          py::arg("prm"), py::arg("u"), py::arg("v"), py::arg("branch") = "plus");

    m.def("estimate_thresholds",
          [](const ProblemParams& prm, int count, std::uint64_t seed, bool refine) {
              DirectionSampler sampler;
              sampler.count = count;
              sampler.seed = seed;
              sampler.refine = refine;
              const ThresholdEstimates th = estimate_thresholds(prm, sampler);
              py::dict d;
              d["lambda_star_hat"] = th.lambda_star_hat;
              d["lambda_lower_star_hat"] = th.lambda_lower_star_hat;
              return d;
          },
          py::arg("prm"), py::arg("count") = 8, py::arg("seed") = 1, py::arg("refine") = false);

    m.def("minimize_branch",
          [](const ProblemParams& prm, const std::string& branch, double lam, std::uint64_t seed,
             double grad_tol, int max_outer, double lambda_star_hat,
             double lambda_lower_star_hat, py::object initial) {
              SolveConfig cfg;
              cfg.branch = branch_from_string(branch);
              cfg.lambda = lam > 0.0 ? lam : prm.lambda;
              cfg.seed = seed;
              cfg.grad_tol = grad_tol;
              cfg.max_outer = max_outer;
              cfg.lambda_star_hat = lambda_star_hat;
              cfg.lambda_lower_star_hat = lambda_lower_star_hat;
              if (!initial.is_none()) {
                  const auto pair = initial.cast<std::pair<Array, Array>>();
                  cfg.initial = {to_field(prm.grid, pair.first), to_field(prm.grid, pair.second)};
              }
              return report_dict(minimize_branch(prm, cfg));
          },
          py::arg("prm"), py::arg("branch") = "plus", py::arg("lam") = 0.0, py::arg("seed") = 1,
          py::arg("grad_tol") = 1e-6, py::arg("max_outer") = 400,
          py::arg("lambda_star_hat") = 0.0, py::arg("lambda_lower_star_hat") = 0.0,
          py::arg("initial") = py::none());

    m.def("best_semitrivial_energy", &best_semitrivial_energy, py::arg("prm"),
          py::arg("component"));

    m.def("verify",
          [](const ProblemParams& prm, std::uint64_t seed) {
              py::list rows;
              for (const SuiteResult& r : run_verify_suites(prm, seed)) {
                  py::dict d;
                  d["name"] = r.name;
                  d["pass"] = r.pass;
                  d["checks"] = r.checks;
                  d["worst"] = r.worst;
                  d["detail"] = r.detail;
                  rows.append(d);
              }
              return rows;
          },
          py::arg("prm"), py::arg("seed") = 1);
}
