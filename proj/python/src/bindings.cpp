#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cutform/cli.hpp"
#include "cutform/demos.hpp"
#include "cutform/errors.hpp"
#include "cutform/evolve.hpp"
#include "cutform/geometries.hpp"
#include "cutform/isolated.hpp"
#include "cutform/optimizer.hpp"

namespace py = pybind11;
using namespace cutform;

namespace {

py::array_t<double> to_array(std::span<const double> v) { return py::array_t<double>(v.size(), v.data()); }

LevelSet from_array(const Mesh2D& mesh, const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 1 || static_cast<std::size_t>(a.shape(0)) != mesh.num_vertices())
    throw InvalidArgument("level set needs one value per mesh vertex");
  return LevelSet(std::vector<double>(a.data(), a.data() + a.shape(0)));
}

Functional functional_by_name(const std::string& name) {
  const auto v = verification_set();
  if (name == "J1") return v.j1();
  if (name == "J2") return v.j2();
  if (name == "J3") return v.j3();
  if (name == "J4") return v.j4();
  throw InvalidArgument("unknown functional '" + name + "' (J1..J4)");
}

py::dict history_dict(const std::vector<HistoryRow>& rows) {
  std::vector<double> J, C, lambda, rho, cfl;
  for (const auto& r : rows) {
    J.push_back(r.J);
    C.push_back(r.C);
    lambda.push_back(r.lambda);
    rho.push_back(r.rho);
    cfl.push_back(r.cfl);
  }
  py::dict d;
  d["J"] = to_array(J);
  d["C"] = to_array(C);
  d["lambda"] = to_array(lambda);
  d["rho"] = to_array(rho);
  d["cfl"] = to_array(cfl);
  return d;
}

py::dict run_result(const RunResult& r) {
  py::dict d;
  d["phi"] = to_array(r.phi.values());
  d["converged"] = r.converged;
  d["J"] = r.J;
  d["C"] = r.C;
  d["iterations"] = r.state.history.size();
  d["history"] = history_dict(r.state.history);
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Level-set shape derivatives and optimization on cut meshes";

  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  py::register_exception<AssumptionViolation>(m, "AssumptionViolation", PyExc_ValueError);
  py::register_exception<NumericalFailure>(m, "NumericalFailure", PyExc_ArithmeticError);

  py::class_<Mesh2D>(m, "Mesh")
      .def_property_readonly("num_vertices", &Mesh2D::num_vertices)
      .def_property_readonly("num_cells", &Mesh2D::num_cells)
      .def_property_readonly("total_area", &Mesh2D::total_area)
      .def_property_readonly("vertices",
                             [](const Mesh2D& mesh) {
                               py::array_t<double> a({static_cast<py::ssize_t>(mesh.num_vertices()), py::ssize_t{2}});
                               auto r = a.mutable_unchecked<2>();
                               for (std::size_t i = 0; i < mesh.num_vertices(); ++i) {
                                 r(i, 0) = mesh.vertex(static_cast<int>(i)).x;
                                 r(i, 1) = mesh.vertex(static_cast<int>(i)).y;
                               }
                               return a;
                             })
      .def_property_readonly("triangles", [](const Mesh2D& mesh) {
        py::array_t<int> a({static_cast<py::ssize_t>(mesh.num_cells()), py::ssize_t{3}});
        auto r = a.mutable_unchecked<2>();
        for (std::size_t c = 0; c < mesh.num_cells(); ++c)
          for (int k = 0; k < 3; ++k) r(c, k) = mesh.triangle(static_cast<int>(c))[k];
        return a;
      });

  m.def(
      "structured_mesh",
      [](int nx, int ny, std::pair<double, double> lower, std::pair<double, double> upper) {
        return build_structured_mesh(nx, ny, {{lower.first, lower.second}, {upper.first, upper.second}});
      },
      py::arg("nx"), py::arg("ny"), py::arg("lower") = std::pair{0.0, 0.0}, py::arg("upper") = std::pair{1.0, 1.0});

  m.def("geometry_names", &geometry_names);
  m.def(
      "interpolate",
      [](const Mesh2D& mesh, const std::string& geometry) {
        return to_array(LevelSet::interpolate(mesh, geometry_by_name(geometry)).values());
      },
      py::arg("mesh"), py::arg("geometry"), "Nodal values of a named geometry.");

  m.def(
      "evaluate",
      [](const std::string& fn, const Mesh2D& mesh, const py::array_t<double>& phi) {
        return evaluate(functional_by_name(fn), mesh, from_array(mesh, phi));
      },
      py::arg("functional"), py::arg("mesh"), py::arg("phi"));
  m.def(
      "ad_gradient",
      [](const std::string& fn, const Mesh2D& mesh, const py::array_t<double>& phi) {
        return to_array(ad_gradient(functional_by_name(fn), mesh, from_array(mesh, phi)).values);
      },
      py::arg("functional"), py::arg("mesh"), py::arg("phi"));
  m.def(
      "fd_gradient",
      [](const std::string& fn, const Mesh2D& mesh, const py::array_t<double>& phi, double step) {
        return to_array(fd_gradient(functional_by_name(fn), mesh, from_array(mesh, phi), step).values);
      },
      py::arg("functional"), py::arg("mesh"), py::arg("phi"), py::arg("step") = 1e-6);

  m.def(
      "phase_areas",
      [](const Mesh2D& mesh, const py::array_t<double>& phi) {
        const auto cut = build_cut(mesh, from_array(mesh, phi));
        return std::pair{phase_area(mesh, cut, Phase::In), phase_area(mesh, cut, Phase::Out)};
      },
      py::arg("mesh"), py::arg("phi"), "(area inside, area outside)");

  m.def(
      "count_volumes",
      [](const Mesh2D& mesh, const py::array_t<double>& phi) {
        const auto col = colour_graph(build_cut_graph(mesh, build_cut(mesh, from_array(mesh, phi))).graph);
        const auto in = std::count(col.colour_state.begin(), col.colour_state.end(), Phase::In);
        return std::pair{static_cast<int>(in), col.count() - static_cast<int>(in)};
      },
      py::arg("mesh"), py::arg("phi"), "(connected inside volumes, connected outside volumes)");

  m.def(
      "isolated_indicator",
      [](const Mesh2D& mesh, const py::array_t<double>& phi, const std::vector<std::string>& tags) {
        return to_array(isolated_indicator(mesh, build_cut(mesh, from_array(mesh, phi)), tags));
      },
      py::arg("mesh"), py::arg("phi"), py::arg("dirichlet_tags") = std::vector<std::string>{"left"});

  m.def(
      "evolve",
      [](const Mesh2D& mesh, const py::array_t<double>& phi,
         const py::array_t<double, py::array::c_style | py::array::forcecast>& beta, double dt, int steps,
         bool velocity_weighted) {
        if (beta.ndim() != 2 || beta.shape(1) != 2 || static_cast<std::size_t>(beta.shape(0)) != mesh.num_vertices())
          throw InvalidArgument("beta must have shape (num_vertices, 2)");
        std::vector<Point> b(mesh.num_vertices());
        for (std::size_t i = 0; i < b.size(); ++i) b[i] = {beta.at(i, 0), beta.at(i, 1)};
        EvolveConfig cfg;
        cfg.dt = dt;
        cfg.steps = steps;
        cfg.velocity_weighted = velocity_weighted;
        return to_array(evolve(from_array(mesh, phi), b, cfg, mesh, build_skeleton(mesh)).phi.values());
      },
      py::arg("mesh"), py::arg("phi"), py::arg("beta"), py::arg("dt"), py::arg("steps") = 1,
      py::arg("velocity_weighted") = true);

  m.def(
      "reinitialize",
      [](const Mesh2D& mesh, const py::array_t<double>& phi) {
        const auto p = from_array(mesh, phi);
        const auto r = reinitialize(p, {}, mesh, build_cut(mesh, p));
        return py::make_tuple(to_array(r.phi.values()), r.converged, r.iterations);
      },
      py::arg("mesh"), py::arg("phi"), "(phi, converged, iterations)");

  m.def(
      "optimize_volume",
      [](int n, double volume_fraction, double radius, int max_iters) {
        const auto demo = make_volume_demo(n, volume_fraction, radius);
        StopCriteria stop;
        stop.max_iters = max_iters;
        return run_result(run(Optimizer(demo.problem(), {}), demo.phi0, stop));
      },
      py::arg("n") = 50, py::arg("volume_fraction") = 0.5, py::arg("radius") = 0.35, py::arg("max_iters") = 100);

  m.def(
      "optimize_cantilever",
      [](int nx, int ny, double volume_fraction, int max_iters) {
        CantileverOptions o;
        o.nx = nx;
        o.ny = ny;
        o.volume_fraction = volume_fraction;
        const auto demo = make_cantilever(o);
        StopCriteria stop;
        stop.max_iters = max_iters;
        const auto problem = demo.problem();
        py::dict d = run_result(run(Optimizer(problem, {}), demo.phi0, stop));
        d["J0"] = evaluate_objective(problem, demo.phi0).J;
        return d;
      },
      py::arg("nx") = 100, py::arg("ny") = 50, py::arg("volume_fraction") = 0.4, py::arg("max_iters") = 300);

  m.def("run_cli", &run_cli, py::arg("args"), "Runs a CLI subcommand and returns its exit code.");
}
