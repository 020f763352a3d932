#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "helpers.hpp"

#include "cutform/errors.hpp"
#include "cutform/functional.hpp"
#include "cutform/quadrature.hpp"

using namespace cutform;
using testing::on_mesh;
using testing::unit_mesh;

namespace {

LevelSet planar(const Mesh2D& mesh) {
  return LevelSet::interpolate(mesh, [](const Point& p) { return p.x - 0.55; });
}

const Integrand kOne = [](const auto& p) { return decltype(p.x.x)(1.0); };

double polygon_perimeter_oracle(const Mesh2D& mesh, const LevelSet& phi) {
  double len = 0.0;
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const auto& t = mesh.triangle(static_cast<int>(c));
    const auto x = mesh.corners(static_cast<int>(c));
    std::vector<Point> hits;
    for (int k = 0; k < 3; ++k) {
      const double pa = phi[t[k]];
      const double pb = phi[t[(k + 1) % 3]];
      if ((pa < 0.0) == (pb < 0.0)) continue;
      const double s = pa / (pa - pb);
      const Point& a = x[k];
      const Point& b = x[(k + 1) % 3];
      hits.push_back({a.x + s * (b.x - a.x), a.y + s * (b.y - a.y)});
    }
    if (hits.size() == 2) len += std::hypot(hits[1].x - hits[0].x, hits[1].y - hits[0].y);
  }
  return len;
}

}  // namespace

TEST_CASE("quadrature rules integrate their stated order exactly") {
  for (int order = 1; order <= 4; ++order) {
    const auto& tri = triangle_rule(order);
    double wsum = 0.0;
    for (double w : tri.weights) wsum += w;
    CHECK(wsum == doctest::Approx(0.5).epsilon(1e-15));
    // int_T x^a y^b = a! b! / (a + b + 2)!
    for (int a = 0; a <= order; ++a)
      for (int b = 0; a + b <= order; ++b) {
        double q = 0.0;
        for (std::size_t i = 0; i < tri.weights.size(); ++i)
          q += tri.weights[i] * std::pow(tri.points[i][0], a) * std::pow(tri.points[i][1], b);
        const double exact = std::tgamma(a + 1) * std::tgamma(b + 1) / std::tgamma(a + b + 3);
        CHECK(std::abs(q - exact) < 1e-15);
      }
    const auto& seg = segment_rule(order);
    for (int a = 0; a <= order; ++a) {
      double q = 0.0;
      for (std::size_t i = 0; i < seg.weights.size(); ++i) q += seg.weights[i] * std::pow(seg.points[i], a);
      CHECK(std::abs(q - 1.0 / (a + 1)) < 1e-15);
    }
  }
}

TEST_CASE("evaluation on exact cuts") {
  const auto mesh = unit_mesh(10);
  const auto phi = planar(mesh);
  CHECK(std::abs(evaluate(Functional::volume(kOne), mesh, phi) - 0.55) <= 1e-14);
  CHECK(std::abs(evaluate(Functional::boundary(kOne), mesh, phi) - 1.0) <= 1e-14);
  const auto flux = Functional::flux([](const auto& p) { return p.x; });
  CHECK(std::abs(evaluate(flux, mesh, phi) - 0.55) <= 1e-14);
  // Quadratic integrand over the planar cut: int_0^0.55 int_0^1 x y dy dx.
  const auto xy = Functional::volume([](const auto& p) { return p.x.x * p.x.y; });
  CHECK(std::abs(evaluate(xy, mesh, phi) - 0.55 * 0.55 / 4.0) <= 1e-14);
}

TEST_CASE("circle perimeter matches the polygon oracle") {
  const auto mesh = unit_mesh(64);
  const auto phi = on_mesh(mesh, "circle");
  const double len = evaluate(Functional::boundary(kOne), mesh, phi);
  CHECK(std::abs(len - polygon_perimeter_oracle(mesh, phi)) <= 1e-13);
  CHECK(std::abs(len - 2.0 * std::numbers::pi * 0.23) < 1e-2);
}

TEST_CASE("volume quadrature is exact on random cuts") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const auto mesh = unit_mesh(6);
  const auto quad = Functional::volume([](const auto& p) { return p.x.x * p.x.x + 3.0 * p.x.x * p.x.y - p.x.y; });
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> v(mesh.num_vertices());
    for (auto& x : v) x = u(rng);
    const LevelSet phi(v);
    const auto cut = build_cut(mesh, phi);
    // Refine each sub-triangle with a high-order rule as the oracle.
    Functional hi = quad;
    hi.triangle_order = 4;
    CHECK(std::abs(evaluate(quad, mesh, cut) - evaluate(hi, mesh, cut)) <= 1e-14);
  }
}

TEST_CASE("gradient is supported on the cut band") {
  const auto mesh = unit_mesh(16);
  const auto phi = on_mesh(mesh, "circle");
  const auto grad = ad_gradient(Functional::volume(kOne), mesh, phi);
  const auto states = classify_cells(mesh, phi);
  const auto band = band_nodes(mesh, states);
  std::vector<char> in_band(mesh.num_vertices(), 0);
  for (int v : band) in_band[v] = 1;
  for (std::size_t i = 0; i < grad.size(); ++i)
    if (!in_band[i]) CHECK(grad[i] == 0.0);
  CHECK(grad.max_abs() > 0.0);
}

TEST_CASE("complementarity of inside and outside volumes") {
  const auto v = verification_set();
  for (const char* geo : {"circle", "coscos"}) {
    const auto mesh = unit_mesh(32);
    const auto phi = on_mesh(mesh, geo);
    const auto in = ad_gradient(Functional::volume(v.f, Phase::In), mesh, phi);
    const auto out = ad_gradient(Functional::volume(v.f, Phase::Out), mesh, phi);
    double m = 0.0;
    for (std::size_t i = 0; i < in.size(); ++i) m = std::max(m, std::abs(in[i] + out[i]));
    CHECK(m <= 1e-13);
  }
}

TEST_CASE("finite differences agree with dual numbers") {
  const auto v = verification_set();
  SUBCASE("circle volume") {
    const auto mesh = unit_mesh(32);
    const auto phi = on_mesh(mesh, "circle");
    const auto ad = ad_gradient(v.j1(), mesh, phi);
    const auto fd = fd_gradient(v.j1(), mesh, phi, 1e-6);
    CHECK(max_abs_difference(ad, fd) <= 1e-8);
  }
  SUBCASE("planar cut, linear integrand") {
    const auto mesh = unit_mesh(10);
    const auto phi = planar(mesh);
    const auto ad = ad_gradient(v.j1(), mesh, phi);
    const auto fd = fd_gradient(v.j1(), mesh, phi, 1e-6);
    CHECK(max_abs_difference(ad, fd) <= 1e-10);
  }
  SUBCASE("normal-dependent functional") {
    const auto mesh = unit_mesh(32);
    const auto phi = on_mesh(mesh, "coscos");
    const auto ad = ad_gradient(v.j4(), mesh, phi);
    const auto fd = fd_gradient(v.j4(), mesh, phi, 1e-6);
    CHECK(max_abs_difference(ad, fd) <= 1e-7);
  }
  SUBCASE("a step that flips a sign is refused") {
    const auto mesh = unit_mesh(10);
    const auto phi = planar(mesh);
    CHECK_THROWS_AS(fd_gradient(v.j1(), mesh, phi, 0.1), AssumptionViolation);
    CHECK_THROWS_AS(fd_gradient(v.j1(), mesh, phi, 0.0), InvalidArgument);
  }
}

TEST_CASE("Hessian by second-order duals") {
  const auto mesh = unit_mesh(10);
  const auto phi = on_mesh(mesh, "circle");
  const auto fn = Functional::volume(kOne);
  const auto band = band_nodes(mesh, classify_cells(mesh, phi));
  const std::vector<int> nodes(band.begin(), band.begin() + 6);
  const auto h = ad_hessian(fn, mesh, phi, nodes);
  CHECK(h.asymmetry <= 1e-12);

  const double t = 1e-6;
  for (std::size_t a = 0; a < nodes.size(); ++a) {
    const auto gp = ad_gradient(fn, mesh, perturb(phi, nodes[a], t));
    const auto gm = ad_gradient(fn, mesh, perturb(phi, nodes[a], -t));
    for (std::size_t b = 0; b < nodes.size(); ++b) {
      const double fd = (gp[nodes[b]] - gm[nodes[b]]) / (2.0 * t);
      CHECK(std::abs(fd - h.matrix(static_cast<long>(b), static_cast<long>(a))) <= 1e-5);
    }
    const double jp = evaluate(fn, mesh, perturb(phi, nodes[a], 1e-4));
    const double j0 = evaluate(fn, mesh, phi);
    const double jm = evaluate(fn, mesh, perturb(phi, nodes[a], -1e-4));
    const double second = (jp - 2.0 * j0 + jm) / 1e-8;
    CHECK(std::abs(second - h.matrix(static_cast<long>(a), static_cast<long>(a))) <= 1e-4);
  }

  const std::vector<int> far{0};
  CHECK_THROWS_AS(ad_hessian(fn, mesh, phi, far), InvalidArgument);
}

TEST_CASE("threaded gradients are identical") {
  const auto v = verification_set();
  const auto mesh = unit_mesh(32);
  const auto phi = on_mesh(mesh, "coscos");
  const auto serial = ad_gradient(v.j2(), mesh, phi);
  const auto threaded = ad_gradient(v.j2(), mesh, phi, {.threads = 4});
  CHECK(serial.values == threaded.values);
}
