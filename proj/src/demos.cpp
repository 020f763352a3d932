#include "cutform/demos.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cutform/geometries.hpp"

namespace cutform {

OptProblem CantileverDemo::problem(int threads) const {
  OptProblem p;
  p.mesh = mesh.get();
  p.state = state.get();
  p.volume_fraction = volume_fraction;
  p.non_designable = non_designable;
  p.threads = threads;
  return p;
}

CantileverDemo make_cantilever(const CantileverOptions& o) {
  if (o.nx < 2 || o.ny < 2 || o.holes_x < 1 || o.holes_y < 1) throw InvalidArgument("invalid cantilever size");
  if (!(o.volume_fraction > 0.0 && o.volume_fraction < 1.0)) throw InvalidArgument("volume fraction must be in (0,1)");
  CantileverDemo d;
  d.volume_fraction = o.volume_fraction;
  d.mesh = std::make_shared<const Mesh2D>(build_structured_mesh(o.nx, o.ny, {{0.0, 0.0}, {2.0, 1.0}}));
  const Point load{2.0, 0.5};
  // Holes sized so the initial material fraction matches the target.
  const double sx = 2.0 / o.holes_x, sy = 1.0 / o.holes_y;
  const double radius =
      std::min(std::sqrt(2.0 * (1.0 - o.volume_fraction) / (o.holes_x * o.holes_y * M_PI)), 0.45 * std::min(sx, sy));
  const auto shape = [&](const Point& x) {
    double hole = std::numeric_limits<double>::infinity();
    for (int i = 0; i < o.holes_x; ++i)
      for (int j = 0; j < o.holes_y; ++j) hole = std::min(hole, norm(x - Point{(i + 0.5) * sx, (j + 0.5) * sy}));
    const double material = radius - hole;
    return std::min(material, norm(x - load) - o.load_radius);
  };
  d.phi0 = LevelSet::interpolate(*d.mesh, shape);
  d.non_designable.assign(d.mesh->num_vertices(), 0);
  for (std::size_t v = 0; v < d.mesh->num_vertices(); ++v)
    if (norm(d.mesh->vertex(static_cast<int>(v)) - load) <= o.load_radius + 1e-12) d.non_designable[v] = 1;
  for (int e : d.mesh->tagged_edges("right")) {
    const auto [a, b] = d.mesh->edge(e);
    const double y = 0.5 * (d.mesh->vertex(a).y + d.mesh->vertex(b).y);
    if (std::abs(y - load.y) <= 0.05) d.load_edges.push_back(e);
  }
  CutProblemSetup setup;
  setup.mesh = d.mesh.get();
  setup.dirichlet_tags = {"left"};
  d.state = make_elastic_compliance(setup, d.load_edges, {0.0, -1.0});
  return d;
}

OptProblem VolumeDemo::problem(int threads) const {
  OptProblem p;
  p.mesh = mesh.get();
  p.volume_fraction = volume_fraction;
  p.threads = threads;
  return p;
}

VolumeDemo make_volume_demo(int n, double volume_fraction, double radius) {
  VolumeDemo d;
  d.volume_fraction = volume_fraction;
  d.mesh = std::make_shared<const Mesh2D>(build_structured_mesh(n, n, {{0.0, 0.0}, {1.0, 1.0}}));
  d.phi0 = LevelSet::interpolate(*d.mesh, circle({0.5, 0.5}, radius));
  return d;
}

EncroachmentResult run_encroachment(bool velocity_weighted, const EncroachmentOptions& o) {
  const Mesh2D mesh = build_structured_mesh(o.n, o.n, {{0.0, 0.0}, {1.0, 1.0}});
  const auto skeleton = build_skeleton(mesh);
  // A circle reaching into the strip; its nodal gradient jumps feed the penalty.
  const LevelSet phi0 = LevelSet::interpolate(mesh, circle({0.5, 0.5}, 0.3));
  std::vector<Point> beta(mesh.num_vertices(), Point{0.0, 0.0});
  for (std::size_t v = 0; v < beta.size(); ++v)
    beta[v] = {std::clamp((o.x_fixed - mesh.vertex(static_cast<int>(v)).x) / o.ramp, 0.0, 1.0), 0.0};
  EvolveConfig cfg;
  cfg.c_e = o.c_e;
  cfg.velocity_weighted = velocity_weighted;
  cfg.dt = o.courant * mesh_size(mesh);
  cfg.steps = o.steps;
  auto r = evolve(phi0, beta, cfg, mesh, skeleton);
  double metric = 0.0;
  for (std::size_t v = 0; v < beta.size(); ++v)
    if (mesh.vertex(static_cast<int>(v)).x >= o.x_fixed + o.margin) metric = std::max(metric, std::abs(r.phi[v] - phi0[v]));
  return {mesh, phi0, std::move(r.phi), metric};
}

}  // namespace cutform
