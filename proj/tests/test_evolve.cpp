#include <algorithm>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "helpers.hpp"

#include "cutform/demos.hpp"
#include "cutform/evolve.hpp"
#include "cutform/fem.hpp"

using namespace cutform;
using testing::unit_mesh;

namespace {

const Integrand kOne = [](const auto& p) { return decltype(p.x.x)(1.0); };

double max_change(const LevelSet& a, const LevelSet& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// |grad phi| on every cut cell of phi's own cut.
std::vector<double> band_gradient_norms(const Mesh2D& mesh, const LevelSet& phi) {
  std::vector<double> out;
  for (const auto& cc : build_cut(mesh, phi).cuts) out.push_back(norm(cc.gradient));
  return out;
}

}  // namespace

TEST_CASE("zero velocity is a fixed point") {
  const auto mesh = unit_mesh(24);
  const auto skeleton = build_skeleton(mesh);
  const auto phi = LevelSet::interpolate(mesh, circle({0.5, 0.5}, 0.3));
  const std::vector<Point> beta(mesh.num_vertices(), Point{0.0, 0.0});
  for (bool weighted : {true, false}) {
    EvolveConfig cfg;
    cfg.dt = 0.01;
    cfg.steps = 10;
    cfg.velocity_weighted = weighted;
    const auto out = evolve(phi, beta, cfg, mesh, skeleton);
    CHECK(max_change(out.phi, phi) <= 1e-14);
    CHECK(out.advisory.empty());
  }
}

TEST_CASE("a linear profile is advected exactly up to second order") {
  const int n = 40;
  const auto mesh = unit_mesh(n);
  const auto skeleton = build_skeleton(mesh);
  const double h = 1.0 / n;
  const auto phi = LevelSet::interpolate(mesh, [](const Point& p) { return p.x - 0.3; });
  const std::vector<Point> beta(mesh.num_vertices(), Point{1.0, 0.0});
  EvolveConfig cfg;
  cfg.dt = 0.5 * h;
  cfg.steps = static_cast<int>(std::lround(0.1 / cfg.dt));
  const auto out = evolve(phi, beta, cfg, mesh, skeleton);
  CHECK(out.courant == doctest::Approx(0.5));
  double err = 0.0;
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
    const auto& p = mesh.vertex(static_cast<int>(v));
    if (p.x < 0.2 || p.x > 0.8 || p.y < 0.2 || p.y > 0.8) continue;
    err = std::max(err, std::abs(out.phi[v] - (p.x - 0.4)));
  }
  CHECK(err <= 4.0 * h * h);
}

TEST_CASE("time steps above the CFL limit are taken with an advisory") {
  const auto mesh = unit_mesh(8);
  const auto phi = LevelSet::interpolate(mesh, [](const Point& p) { return p.x - 0.3; });
  const std::vector<Point> beta(mesh.num_vertices(), Point{1.0, 0.0});
  EvolveConfig cfg;
  cfg.dt = 0.5;
  const auto out = evolve(phi, beta, cfg, mesh, build_skeleton(mesh));
  CHECK(!out.advisory.empty());
  CHECK(out.courant > 1.0);
}

TEST_CASE("transport operators") {
  const auto mesh = unit_mesh(10);
  const auto skeleton = build_skeleton(mesh);
  std::vector<Point> beta;
  for (const auto& p : mesh.vertices()) beta.push_back({p.y, -p.x});
  const SparseMatrix s = transport_penalty_matrix(mesh, skeleton, beta, 0.01, true);
  CHECK((Eigen::MatrixXd(s) - Eigen::MatrixXd(s).transpose()).cwiseAbs().maxCoeff() <= 1e-15);
  // Constants are neither advected nor penalized.
  const Vector ones = Vector::Ones(mesh.num_vertices());
  CHECK((advection_matrix(mesh, beta) * ones).cwiseAbs().maxCoeff() <= 1e-14);
  CHECK((s * ones).cwiseAbs().maxCoeff() <= 1e-14);
  const SparseMatrix zero = transport_penalty_matrix(mesh, skeleton, std::vector<Point>(beta.size()), 0.01, true);
  CHECK(zero.cwiseAbs().sum() == 0.0);
}

TEST_CASE("non-designable region is protected by the velocity-weighted penalty") {
  const auto weighted = run_encroachment(true);
  const auto unweighted = run_encroachment(false);
  MESSAGE("encroachment weighted " << weighted.metric << " unweighted " << unweighted.metric);
  CHECK(weighted.metric < unweighted.metric);
  CHECK(weighted.metric < 0.1 * unweighted.metric);
}

TEST_CASE("approximate sign") {
  const double h = 0.01;
  CHECK(approximate_sign(1.0, h, 1.0) == doctest::Approx(1.0 / std::sqrt(1.0 + h * h)));
  CHECK(approximate_sign(-1.0, h, 1.0) < 0.0);
  const double s = approximate_sign(-1e-10, h, 1.0);
  CHECK(std::isfinite(s));
  CHECK(s == doctest::Approx(-1e-10 / h).epsilon(1e-9));
  CHECK(std::isfinite(approximate_sign(1e-10, h, 0.0)));
}

TEST_CASE("reinitialization of a signed distance is nearly a fixed point") {
  const int n = 32;
  const auto mesh = unit_mesh(n);
  const double h = 1.0 / n;
  const auto phi = LevelSet::interpolate(mesh, [](const Point& p) { return p.x - 0.55; });
  const auto out = reinitialize(phi, {}, mesh, build_cut(mesh, phi));
  CHECK(out.converged);
  auto norms = band_gradient_norms(mesh, out.phi);
  std::nth_element(norms.begin(), norms.begin() + norms.size() / 2, norms.end());
  const double median = norms[norms.size() / 2];
  CHECK(median >= 0.9);
  CHECK(median <= 1.1);
  const auto vol = Functional::volume(kOne);
  CHECK(std::abs(evaluate(vol, mesh, out.phi) - evaluate(vol, mesh, phi)) <= 0.1 * h);
}

TEST_CASE("reinitialization restores unit slope on a quadratic level set") {
  const int n = 64;
  const auto mesh = unit_mesh(n);
  const double h = 1.0 / n;
  const auto phi = LevelSet::interpolate(mesh, [](const Point& p) {
    return 2.0 * ((p.x - 0.5) * (p.x - 0.5) + (p.y - 0.5) * (p.y - 0.5) - 0.23 * 0.23);
  });
  const auto cut0 = build_cut(mesh, phi);
  const auto out = reinitialize(phi, {}, mesh, cut0);
  CHECK(out.iterations >= 1);
  CHECK(!out.changes.empty());

  const auto norms = band_gradient_norms(mesh, out.phi);
  const auto good = std::count_if(norms.begin(), norms.end(), [](double g) { return g >= 0.85 && g <= 1.15; });
  CHECK(static_cast<double>(good) >= 0.9 * static_cast<double>(norms.size()));

  const auto states_in = cut0.states;
  const auto states_out = classify_cells(mesh, out.phi);
  std::size_t same = 0;
  for (std::size_t c = 0; c < states_in.size(); ++c) same += states_in[c] == states_out[c];
  CHECK(static_cast<double>(same) >= 0.99 * static_cast<double>(states_in.size()));

  const auto vol = Functional::volume(kOne);
  const double perimeter = evaluate(Functional::boundary(kOne), mesh, phi);
  CHECK(std::abs(evaluate(vol, mesh, out.phi) - evaluate(vol, mesh, phi)) <= 0.5 * h * perimeter);
}

TEST_CASE("interior-penalty reinitialization variant") {
  const auto mesh = unit_mesh(32);
  const auto phi = LevelSet::interpolate(mesh, circle({0.5, 0.5}, 0.23));
  ReinitConfig cfg;
  cfg.variant = ReinitVariant::InteriorPenalty;
  const auto out = reinitialize(phi, cfg, mesh, build_cut(mesh, phi));
  const auto vol = Functional::volume(kOne);
  CHECK(std::abs(evaluate(vol, mesh, out.phi) - evaluate(vol, mesh, phi)) <= 0.5 / 32 * 2 * std::numbers::pi * 0.23);
}
