// Runs the nine acceptance checks and prints one PASS/FAIL line per check.
// Exit status is the number of failed checks.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <set>
#include <string>

#include "cutform/adjoint.hpp"
#include "cutform/analytic.hpp"
#include "cutform/demos.hpp"
#include "cutform/evolve.hpp"
#include "cutform/geometries.hpp"
#include "cutform/isolated.hpp"
#include "cutform/optimizer.hpp"

using namespace cutform;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

Mesh2D unit_mesh(int n) { return build_structured_mesh(n, n, {{0.0, 0.0}, {1.0, 1.0}}); }

LevelSet on_mesh(const Mesh2D& mesh, const std::string& geometry) {
  return LevelSet::interpolate(mesh, geometry_by_name(geometry));
}

double scale(const GradientVector& g) { return std::max(1.0, g.max_abs()); }

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
};

// ----------------------------------------------------------------------------

Outcome table_reproduction() {
  Outcome o;
  const auto v = verification_set();
  double worst = 0.0, slowest = 0.0;
  for (const char* geo : {"circle", "coscos"}) {
    const auto t0 = Clock::now();
    for (int n : {16, 32, 64}) {
      const auto mesh = unit_mesh(n);
      const auto phi = on_mesh(mesh, geo);
      const GradientVector e1 = exact_dJ1(v.f_value, mesh, phi);
      const GradientVector e2 = exact_dJ2(v.f_value, v.grad_f, mesh, phi);
      const GradientVector e3 = exact_dJ3(v.div_flux, v.flux_field, mesh, phi).gradient;
      const std::pair<Functional, const GradientVector*> rows[] = {{v.j1(), &e1}, {v.j2(), &e2}, {v.j3(), &e3}};
      for (const auto& [fn, exact] : rows) {
        const double rel = max_abs_difference(ad_gradient(fn, mesh, phi), *exact) / scale(*exact);
        worst = std::max(worst, rel);
        o.pass = o.pass && rel <= 1e-13;
      }
    }
    const double t = seconds_since(t0);
    slowest = std::max(slowest, t);
    o.pass = o.pass && t <= 60.0;
  }
  o.detail << "max relative AD-exact " << worst << ", slowest geometry " << slowest << " s";
  return o;
}

Outcome finite_differences() {
  Outcome o;
  const auto v = verification_set();
  double worst = 0.0;
  for (const char* geo : {"circle", "coscos"})
    for (int n : {16, 32, 64}) {
      const auto mesh = unit_mesh(n);
      const auto phi = on_mesh(mesh, geo);
      for (const auto& fn : {v.j1(), v.j2(), v.j3(), v.j4()}) {
        const double d = max_abs_difference(ad_gradient(fn, mesh, phi), fd_gradient(fn, mesh, phi, 1e-6));
        worst = std::max(worst, d);
        o.pass = o.pass && d <= 1e-7;
      }
    }
  o.detail << "max AD-FD " << worst << " over J1..J4";
  return o;
}

Outcome shape_hessian() {
  Outcome o;
  const auto v = verification_set();
  const auto fn = v.j4();
  const auto mesh = unit_mesh(32);
  const auto phi = on_mesh(mesh, "circle");
  const auto band = band_nodes(mesh, classify_cells(mesh, phi));
  // A cluster of 16 neighbouring band nodes.
  const Point c = mesh.vertex(band[band.size() / 2]);
  std::vector<int> nodes = band;
  std::sort(nodes.begin(), nodes.end(), [&](int a, int b) {
    return norm(mesh.vertex(a) - c) < norm(mesh.vertex(b) - c);
  });
  nodes.resize(16);
  const auto h = ad_hessian(fn, mesh, phi, nodes);
  const double t = 1e-6;
  double err = 0.0;
  for (std::size_t a = 0; a < nodes.size(); ++a) {
    const auto gp = ad_gradient(fn, mesh, perturb(phi, nodes[a], t));
    const auto gm = ad_gradient(fn, mesh, perturb(phi, nodes[a], -t));
    for (std::size_t b = 0; b < nodes.size(); ++b) {
      const double fd = (gp[nodes[b]] - gm[nodes[b]]) / (2.0 * t);
      err = std::max(err, std::abs(fd - h.matrix(static_cast<long>(b), static_cast<long>(a))));
    }
  }
  o.pass = err <= 1e-4 && h.asymmetry <= 1e-12;
  o.detail << "max |H_AD - H_FD| " << err << ", symmetry defect " << h.asymmetry;
  return o;
}

Outcome boundary_extension() {
  Outcome o;
  const auto v = verification_set();
  const auto mesh = unit_mesh(32);
  const auto phi = on_mesh(mesh, "tilted");
  const auto ad = ad_gradient(v.j2(), mesh, phi);
  const auto with = exact_dJ2(v.f_value, v.grad_f, mesh, phi);
  BoundaryDerivativeOptions off;
  off.boundary_crossings = false;
  const auto without = exact_dJ2(v.f_value, v.grad_f, mesh, phi, off);
  const double s = scale(with);
  const double on_err = max_abs_difference(ad, with) / s;
  const double off_err = max_abs_difference(ad, without) / s;
  o.pass = on_err <= 1e-13 && off_err > 1e-3;
  o.detail << "with boundary term " << on_err << ", without " << off_err;
  return o;
}

std::vector<int> union_find_components(const Graph& g) {
  std::vector<int> parent(g.size());
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
  for (int v = 0; v < static_cast<int>(g.size()); ++v)
    for (int w : g.neighbours(v))
      if (g.state[v] == g.state[w]) parent[find(v)] = find(w);
  std::vector<int> root(g.size());
  for (int v = 0; v < static_cast<int>(g.size()); ++v) root[v] = find(v);
  return root;
}

// True when `a` and `b` induce the same partition of the vertices.
bool bijective(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) return false;
  std::map<int, int> ab, ba;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto [it1, new1] = ab.emplace(a[i], b[i]);
    const auto [it2, new2] = ba.emplace(b[i], a[i]);
    if (it1->second != b[i] || it2->second != a[i]) return false;
  }
  return true;
}

LevelSet random_disks(const Mesh2D& mesh, std::mt19937& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::pair<Point, double>> disks;
  const int k = 2 + static_cast<int>(u(rng) * 6);
  for (int i = 0; i < k; ++i) disks.push_back({{u(rng), u(rng)}, 0.05 + 0.2 * u(rng)});
  return LevelSet::interpolate(mesh, [&](const Point& p) {
    double d = 1e9;
    for (const auto& [c, r] : disks) d = std::min(d, norm(p - c) - r);
    return d;
  });
}

Outcome colouring() {
  Outcome o;
  const auto mesh = unit_mesh(32);
  std::mt19937 rng(2024);
  std::uniform_int_distribution<int> parts(2, 8);
  int serial_mismatch = 0, distributed_mismatch = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto cg = build_cut_graph(mesh, build_cut(mesh, random_disks(mesh, rng)));
    const auto col = colour_graph(cg.graph);
    const auto oracle = union_find_components(cg.graph);
    const std::set<int> roots(oracle.begin(), oracle.end());
    if (static_cast<int>(roots.size()) != col.count() || !bijective(col.colour, oracle)) ++serial_mismatch;
    const int np = parts(rng);
    const auto owner = random_owner(mesh, cg, np, static_cast<unsigned>(rng()));
    const auto dist = colour_distributed(partition_graph(cg.graph, owner, np));
    bool ok = dist.global.count() == col.count() && bijective(dist.global.colour, col.colour);
    for (std::size_t v = 0; ok && v < cg.graph.size(); ++v)
      ok = dist.global.colour_state[dist.global.colour[v] - 1] == col.colour_state[col.colour[v] - 1];
    distributed_mismatch += !ok;
  }
  const auto cg = build_cut_graph(mesh, build_cut(mesh, on_mesh(mesh, "snake")));
  const auto dist = colour_distributed(partition_graph(cg.graph, quadrant_owner(mesh, cg), 4));
  const auto snake_in = std::count(dist.global.colour_state.begin(), dist.global.colour_state.end(), Phase::In);
  o.pass = serial_mismatch == 0 && distributed_mismatch == 0 && snake_in == 1;
  o.detail << "oracle mismatches " << serial_mismatch << ", distributed mismatches " << distributed_mismatch
           << ", snake IN colours " << snake_in;
  return o;
}

Outcome conservation() {
  Outcome o;
  const auto mesh = unit_mesh(32);
  const double vol = mesh.total_area();
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> values(mesh.num_vertices());
    for (auto& x : values) x = u(rng);
    const auto cut = build_cut(mesh, LevelSet(values));
    const double total = phase_area(mesh, cut, Phase::In) + phase_area(mesh, cut, Phase::Out);
    worst = std::max(worst, std::abs(total - vol) / vol);
  }
  o.pass = worst <= 1e-13;
  o.detail << "max relative measure defect " << worst;
  return o;
}

Outcome evolution() {
  Outcome o;
  const int n = 40;
  const auto mesh = unit_mesh(n);
  const auto skeleton = build_skeleton(mesh);
  const double h = 1.0 / n;

  const auto circle0 = LevelSet::interpolate(mesh, circle({0.5, 0.5}, 0.3));
  EvolveConfig still;
  still.dt = 0.01;
  still.steps = 10;
  const auto fixed = evolve(circle0, std::vector<Point>(mesh.num_vertices()), still, mesh, skeleton).phi;
  double drift = 0.0;
  for (std::size_t i = 0; i < fixed.size(); ++i) drift = std::max(drift, std::abs(fixed[i] - circle0[i]));

  const auto line = LevelSet::interpolate(mesh, [](const Point& p) { return p.x - 0.3; });
  EvolveConfig cfg;
  cfg.dt = 0.5 * h;
  cfg.steps = static_cast<int>(std::lround(0.1 / cfg.dt));
  const auto moved = evolve(line, std::vector<Point>(mesh.num_vertices(), Point{1.0, 0.0}), cfg, mesh, skeleton).phi;
  double err = 0.0;
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
    const auto& p = mesh.vertex(static_cast<int>(v));
    if (p.x < 0.2 || p.x > 0.8 || p.y < 0.2 || p.y > 0.8) continue;
    err = std::max(err, std::abs(moved[v] - (p.x - 0.4)));
  }

  const double weighted = run_encroachment(true).metric;
  const double plain = run_encroachment(false).metric;
  o.pass = drift <= 1e-14 && err <= 4.0 * h * h && weighted < plain;
  o.detail << "fixed-point drift " << drift << ", advection error " << err << " (4h^2 = " << 4.0 * h * h
           << "), encroachment " << weighted << " vs " << plain;
  return o;
}

double end_to_end_error(StaggeredProblem& p, const Mesh2D& mesh, const LevelSet& phi) {
  auto pipeline = [&](const LevelSet& x) {
    p.set_level_set(x);
    return p.objective(solve_forward(p));
  };
  p.set_level_set(phi);
  const auto s = evaluate_sensitivity(p);
  double err = 0.0, ref = 0.0;
  for (int v : band_nodes(mesh, classify_cells(mesh, phi))) {
    const double fd = (pipeline(perturb(phi, v, 1e-6)) - pipeline(perturb(phi, v, -1e-6))) / 2e-6;
    err = std::max(err, std::abs(fd - s.gradient[v]));
    ref = std::max(ref, std::abs(fd));
  }
  return err / ref;
}

Outcome staggered_adjoint() {
  Outcome o;
  const auto mesh = unit_mesh(16);
  const auto phi =
      LevelSet::interpolate(mesh, union_of(circle({0.1, 0.5}, 0.33), circle({0.55, 0.45}, 0.21)));
  CutProblemSetup setup;
  setup.mesh = &mesh;
  auto poisson = make_poisson_compliance(setup);
  auto thermo = make_thermoelastic(setup, 1.0, 0.7);
  const double e1 = end_to_end_error(*poisson, mesh, phi);
  const double e2 = end_to_end_error(*thermo, mesh, phi);

  thermo->set_level_set(phi);
  const auto s = evaluate_sensitivity(*thermo);
  const double l = lagrangian(*thermo, s.u, s.lambda);
  const double recovery = std::abs(l - s.value) / std::abs(s.value);
  // L is flat in lambda at the converged state: random multiplier
  // perturbations leave it unchanged.
  std::mt19937 rng(7);
  std::normal_distribution<double> nd;
  double stationarity = 0.0;
  for (int i = 0; i < thermo->stages(); ++i) {
    auto lam = s.lambda;
    Vector d(lam[i].size());
    for (auto& x : d) x = nd(rng);
    lam[i] += d;
    stationarity = std::max(stationarity, std::abs(lagrangian(*thermo, s.u, lam) - l) /
                                              (d.norm() * std::max(1.0, std::abs(l))));
  }
  o.pass = e1 <= 1e-6 && e2 <= 1e-6 && recovery <= 1e-9 && stationarity <= 1e-9;
  o.detail << "FD relative error poisson " << e1 << ", thermoelastic " << e2 << "; recovery " << recovery
           << ", stationarity " << stationarity;
  return o;
}

Outcome optimization() {
  Outcome o;
  const auto t0 = Clock::now();
  const auto cant = make_cantilever();
  const auto problem = cant.problem();
  const Optimizer opt(problem, {});
  const double j0 = evaluate_objective(problem, cant.phi0).J;
  StopCriteria stop;
  stop.max_iters = 300;
  const auto r = run(opt, cant.phi0, stop);
  const auto iters = r.state.history.size();

  const auto vol = make_volume_demo();
  const Optimizer vopt(vol.problem(), {});
  StopCriteria vstop;
  vstop.max_iters = 100;
  const auto vr = run(vopt, vol.phi0, vstop);
  const double t = seconds_since(t0);
  o.pass = r.converged && std::abs(r.C) <= 1e-3 && r.J < j0 && std::abs(vr.C) <= 1e-3 && t <= 900.0;
  o.detail << "cantilever " << iters << " iterations, |C| " << std::abs(r.C) << ", J " << j0 << " -> " << r.J
           << "; volume " << vr.state.history.size() << " iterations, |C| " << std::abs(vr.C) << "; " << t << " s";
  return o;
}

}  // namespace

int main() {
  const std::pair<const char*, Outcome (*)()> checks[] = {
      {"derivatives match closed forms on circle and cos-cos", table_reproduction},
      {"derivatives match finite differences", finite_differences},
      {"shape Hessian", shape_hessian},
      {"boundary-crossing term of the boundary derivative", boundary_extension},
      {"volume colouring", colouring},
      {"cut measure conservation", conservation},
      {"transport invariants", evolution},
      {"staggered adjoint", staggered_adjoint},
      {"optimization demos", optimization},
  };
  int failed = 0;
  int k = 0;
  for (const auto& [name, fn] : checks) {
    ++k;
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "threw: " << e.what();
    }
    failed += !o.pass;
    std::printf("%s %d %s: %s\n", o.pass ? "PASS" : "FAIL", k, name, o.detail.str().c_str());
    std::fflush(stdout);
  }
  return failed;
}
