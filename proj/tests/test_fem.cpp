#include <cmath>
#include <random>

#include "doctest.h"
#include "helpers.hpp"

#include "cutform/adjoint.hpp"
#include "cutform/errors.hpp"
#include "cutform/fem.hpp"

using namespace cutform;
using testing::on_mesh;
using testing::unit_mesh;

namespace {

const Integrand kOne = [](const auto& p) { return decltype(p.x.x)(1.0); };

double max_abs(const SparseMatrix& m) {
  double v = 0.0;
  for (int k = 0; k < m.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) v = std::max(v, std::abs(it.value()));
  return v;
}

double asymmetry(const SparseMatrix& m) {
  const SparseMatrix t = m.transpose();
  return max_abs(SparseMatrix(m - t)) / std::max(1.0, max_abs(m));
}

LevelSet all_inside(const Mesh2D& mesh) { return LevelSet(std::vector<double>(mesh.num_vertices(), -1.0)); }

}  // namespace

TEST_CASE("fully inside domain reduces to body-fitted assembly") {
  const auto mesh = unit_mesh(12);
  const auto cut = build_cut(mesh, all_inside(mesh));
  CHECK(ghost_facets(build_skeleton(mesh), cut.states, Phase::In).empty());

  PoissonParams params;
  params.source = kOne;
  params.gamma = 1e3;  // irrelevant without cut cells
  const auto a = assemble_cut_poisson(mesh, cut, {}, params);
  CHECK(max_abs(SparseMatrix(a.matrix - stiffness_matrix(mesh))) <= 1e-13);
  CHECK(std::abs(a.rhs.sum() - 1.0) <= 1e-13);

  const auto space = make_space(mesh, 1, cut.states, {"left", "right", "bottom", "top"});
  const auto u = solve(reduce(a, space));
  Assembly fitted{stiffness_matrix(mesh), mass_matrix(mesh) * Vector::Ones(mesh.num_vertices())};
  const auto ref = solve(reduce(fitted, space));
  CHECK((u - ref).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("planar cut Poisson converges at second order") {
  // -u'' = 1 on (0, 0.55), u(0) = 0, natural condition on the interface:
  // u = x (1.1 - x) / 2.
  double previous = 0.0;
  for (int n : {16, 32, 64}) {
    const auto mesh = unit_mesh(n);
    const auto phi = LevelSet::interpolate(mesh, [](const Point& p) { return p.x - 0.55; });
    const auto cut = build_cut(mesh, phi);
    PoissonParams params;
    params.source = kOne;
    const auto a = assemble_cut_poisson(mesh, cut, {}, params);
    CHECK(asymmetry(a.matrix) <= 1e-12);
    const auto u = solve(reduce(a, make_space(mesh, 1, cut.states, {"left"})));
    double err = 0.0;
    for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
      const double x = mesh.vertex(static_cast<int>(v)).x;
      if (x <= 0.55) err = std::max(err, std::abs(u[v] - x * (1.1 - x) / 2.0));
    }
    const double h = 1.0 / n;
    CHECK(err <= 0.5 * h * h);
    if (previous > 0.0) CHECK(err < previous);
    previous = err;
  }
}

TEST_CASE("psi mass removes the constant kernel") {
  const auto mesh = unit_mesh(10);
  const auto cut = build_cut(mesh, all_inside(mesh));
  PoissonParams params;
  params.source = kOne;
  const std::vector<double> psi(mesh.num_cells(), 1.0);
  const auto a = assemble_cut_poisson(mesh, cut, psi, params);
  const auto u = solve(reduce(a, make_space(mesh, 1, cut.states, {})));
  // -lap u + u = 1 with natural boundaries: u = 1.
  CHECK((u.array() - 1.0).abs().maxCoeff() <= 1e-10);
}

TEST_CASE("elasticity patch test on a planar cut") {
  // u = (x, -3y) has sigma.n = 0 on the vertical interface for lambda = mu = 1.
  const auto mesh = unit_mesh(12);
  const auto phi = LevelSet::interpolate(mesh, [](const Point& p) { return p.x - 0.55; });
  const auto cut = build_cut(mesh, phi);
  ElasticityParams params;
  params.gamma = 1e-2;
  const auto a = assemble_cut_elasticity(mesh, cut, {}, params);
  CHECK(asymmetry(a.matrix) <= 1e-12);
  const auto exact = [](const Point& p, int i) { return i == 0 ? p.x : -3.0 * p.y; };
  const auto space = make_space(mesh, 2, cut.states, {"left", "bottom", "top"}, Phase::In, exact);
  const auto u = solve(reduce(a, space));
  double err = 0.0;
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
    if (!space.active[2 * v]) continue;
    const auto& p = mesh.vertex(static_cast<int>(v));
    err = std::max({err, std::abs(u[2 * v] - exact(p, 0)), std::abs(u[2 * v + 1] - exact(p, 1))});
  }
  CHECK(err <= 1e-10);
}

TEST_CASE("rigid translations are in the kernel before constraints") {
  const auto mesh = unit_mesh(8);
  const auto phi = LevelSet::interpolate(mesh, [](const Point& p) { return p.x - 0.55; });
  const auto cut = build_cut(mesh, phi);
  const auto a = assemble_cut_elasticity(mesh, cut, {}, {});
  for (int i = 0; i < 2; ++i) {
    Vector t = Vector::Zero(2 * mesh.num_vertices());
    for (std::size_t v = 0; v < mesh.num_vertices(); ++v) t[2 * v + i] = 1.0;
    CHECK((a.matrix * t).cwiseAbs().maxCoeff() <= 1e-12);
  }
  const auto space = make_space(mesh, 2, cut.states, {"left"});
  CHECK_NOTHROW(solve(reduce(a, space)));
}

TEST_CASE("floating volume is singular until psi flags it") {
  const auto mesh = unit_mesh(32);
  const auto phi = LevelSet::interpolate(
      mesh, union_of(circle({0.1, 0.5}, 0.25), circle({0.75, 0.5}, 0.15)));
  const auto cut = build_cut(mesh, phi);
  PoissonParams params;
  params.source = kOne;
  const auto space = make_space(mesh, 1, cut.states, {"left"});
  CHECK_THROWS_AS(solve(reduce(assemble_cut_poisson(mesh, cut, {}, params), space)), SolverError);

  const auto psi = isolated_indicator(mesh, cut, {"left"});
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const auto x = mesh.corners(static_cast<int>(c));
    const double cx = (x[0].x + x[1].x + x[2].x) / 3.0;
    if (cut.states[c] != CellState::Out) CHECK(psi[c] == (cx > 0.5 ? 1.0 : 0.0));
  }
  CHECK_NOTHROW(solve(reduce(assemble_cut_poisson(mesh, cut, psi, params), space)));

  const auto elastic_space = make_space(mesh, 2, cut.states, {"left"});
  const auto u = solve(reduce(assemble_cut_elasticity(mesh, cut, psi, {}), elastic_space));
  CHECK(u.cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("linear solvers") {
  SUBCASE("identity") {
    SparseMatrix id(5, 5);
    id.setIdentity();
    const Vector b = Vector::LinSpaced(5, 1.0, 5.0);
    CHECK((solve_spd(id, b) - b).norm() == 0.0);
    CHECK((conjugate_gradient(id, b, 1e-12, 10) - b).norm() <= 1e-12);
  }
  SUBCASE("direct and CG agree on a mass matrix") {
    const auto mesh = unit_mesh(9);
    const SparseMatrix m = mass_matrix(mesh);
    CHECK(m.rows() == 100);
    std::mt19937 rng(1);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Vector b(m.rows());
    for (auto& x : b) x = u(rng);
    const Vector direct = solve_spd(m, b);
    SolveOptions cg;
    cg.method = SolveMethod::CG;
    cg.tolerance = 1e-12;
    const Vector iterative = solve_spd(m, b, cg);
    CHECK((direct - iterative).norm() / direct.norm() <= 1e-10);
  }
  SUBCASE("CG reports non-convergence with its residual history") {
    const auto mesh = unit_mesh(16);
    SparseMatrix k = stiffness_matrix(mesh) + 1e-6 * mass_matrix(mesh);
    const Vector b = Vector::Ones(k.rows());
    try {
      conjugate_gradient(k, b, 1e-14, 3);
      FAIL("expected non-convergence");
    } catch (const SolverError& e) {
      CHECK(e.residual_history().size() >= 3);
    }
  }
}

TEST_CASE("Hilbertian extension") {
  const auto mesh = unit_mesh(16);
  const double h = mesh_size(mesh);
  HilbertianExtension ext(mesh, 2.0 * h);
  CHECK(asymmetry(ext.matrix()) <= 1e-12);
  Eigen::SimplicialLLT<SparseMatrix> llt(ext.matrix());
  CHECK(llt.info() == Eigen::Success);

  SUBCASE("constants are reproduced") {
    const Vector mass1 = mass_matrix(mesh) * Vector::Ones(mesh.num_vertices());
    GradientVector dj(mesh.num_vertices());
    for (std::size_t i = 0; i < dj.size(); ++i) dj[i] = 2.5 * mass1[i];
    for (double alpha : {0.0, 0.1, 1.0}) {
      const auto g = HilbertianExtension(mesh, alpha).apply(dj);
      for (double x : g) CHECK(std::abs(x - 2.5) <= 1e-12);
    }
  }
  SUBCASE("zero maps to zero") {
    for (double x : ext.apply(GradientVector(mesh.num_vertices()))) CHECK(x == 0.0);
  }
  SUBCASE("descent direction") {
    const auto phi = on_mesh(mesh, "circle");
    const auto dj = ad_gradient(Functional::volume(kOne), mesh, phi);
    const auto g = ext.apply(dj);
    double inner = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) inner += g[i] * dj[i];
    CHECK(inner > 0.0);
  }
}

TEST_CASE("normal velocity") {
  const auto mesh = unit_mesh(16);
  const std::vector<double> one(mesh.num_vertices(), 1.0);
  const std::vector<double> zero(mesh.num_vertices(), 0.0);
  {
    const auto phi = LevelSet::interpolate(mesh, [](const Point& p) { return p.x - 0.55; });
    for (const auto& b : compute_velocity(one, phi, mesh)) {
      CHECK(std::abs(b.x - 1.0) <= 1e-14);
      CHECK(std::abs(b.y) <= 1e-14);
    }
    for (const auto& b : compute_velocity(zero, phi, mesh)) CHECK((b.x == 0.0 && b.y == 0.0));
  }
  {
    const auto phi = LevelSet::interpolate(mesh, circle({0.5, 0.5}, 0.3));
    const auto beta = compute_velocity(one, phi, mesh);
    for (std::size_t v = 0; v < beta.size(); ++v) {
      const auto& p = mesh.vertex(static_cast<int>(v));
      if (std::hypot(p.x - 0.5, p.y - 0.5) < 1e-12) continue;
      CHECK(std::abs(norm(beta[v]) - 1.0) <= 1e-10);
    }
  }
}
