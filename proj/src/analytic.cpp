#include "cutform/analytic.hpp"

#include <cmath>

#include "cutform/quadrature.hpp"

namespace cutform {

namespace {

constexpr double kDegenerate = 1e-14;

Point unit(const Point& v) { return v / norm(v); }

double gradient_norm(const CutCell<double>& cc) {
  const double g = norm(cc.gradient);
  if (g < kDegenerate) throw DegenerateGeometry("level-set gradient vanishes on cut cell " + std::to_string(cc.cell));
  return g;
}

/// Adds -int_Gamma g w_i / |grad phi| ds to every node of every cut cell.
void add_interface_kernel(const ScalarField& g, const Mesh2D& mesh, const CutTopology<double>& cut,
                          GradientVector& out) {
  const auto& rule = segment_rule(5);
  for (const auto& cc : cut.cuts) {
    const double inv = 1.0 / gradient_norm(cc);
    const auto x = mesh.corners(cc.cell);
    const auto& tri = mesh.triangle(cc.cell);
    const Point a = cc.interface[0];
    const Point d = cc.interface[1] - a;
    const double len = norm(d);
    for (std::size_t q = 0; q < rule.weights.size(); ++q) {
      EvalPoint<double> p{a + rule.points[q] * d, cc.normal, cc.cell};
      const double val = rule.weights[q] * len * g(p) * inv;
      const auto lam = barycentric(x, p.x);
      for (int k = 0; k < 3; ++k) out[tri[k]] -= val * lam[k];
    }
  }
}

/// Distributes value * w_i(point) onto the two edge endpoints.
void add_point(const FacetCrossing& fc, double value, GradientVector& out) {
  out[fc.vertices[0]] += value * (1.0 - fc.s);
  out[fc.vertices[1]] += value * fc.s;
}

}  // namespace

std::vector<FacetCrossing> enumerate_crossings(const Mesh2D& mesh, const LevelSet& phi,
                                               const CutTopology<double>& cut) {
  std::vector<FacetCrossing> out;
  for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
    const auto& ed = mesh.edge(static_cast<int>(e));
    const double pa = phi[ed[0]], pb = phi[ed[1]];
    if ((pa < 0.0) == (pb < 0.0)) continue;
    if (pa == 0.0 || pb == 0.0)
      throw DegenerateGeometry("interface passes through an endpoint of edge " + std::to_string(e));
    const Point qa = mesh.vertex(ed[0]), qb = mesh.vertex(ed[1]);
    FacetCrossing fc;
    fc.edge = static_cast<int>(e);
    fc.vertices = ed;
    fc.s = std::abs(pa) / (std::abs(pa) + std::abs(pb));
    fc.point = qa + fc.s * (qb - qa);
    const double len = norm(qb - qa);
    fc.n_s = pb > pa ? (qb - qa) / len : (qa - qb) / len;
    fc.slope = std::abs(pb - pa) / len;
    if (fc.slope < kDegenerate)
      throw DegenerateGeometry("interface is tangent to edge " + std::to_string(e));

    const auto cells = mesh.edge_cells(static_cast<int>(e));
    fc.on_boundary = cells.size() == 1;
    for (int c : cells) {
      const auto* cc = cut.cut_of(c);
      if (cc == nullptr) throw TopologyError("edge with a sign change borders an uncut cell");
      const auto& ce = mesh.cell_edges(c);
      int j = -1;
      for (int k = 0; k < 2; ++k)
        if (ce[cc->interface_edge[k]] == static_cast<int>(e)) j = k;
      if (j < 0) throw TopologyError("cut cell does not report its crossing edge");
      const Point here = cc->interface[j], there = cc->interface[1 - j];
      fc.sides.push_back({c, cc->normal, unit(here - there)});
      if (fc.on_boundary) {
        // Outward normal of D: away from the opposite corner.
        const auto& tri = mesh.triangle(c);
        int opposite = tri[0];
        for (int v : tri)
          if (v != ed[0] && v != ed[1]) opposite = v;
        Point nd = perp(qb - qa) / len;
        if (dot(nd, mesh.vertex(opposite) - qa) > 0.0) nd = -1.0 * nd;
        fc.n_d = nd;
      }
    }
    if (fc.sides.size() == 2) {
      const Point& n0 = fc.sides[0].normal;
      const Point m_minus{n0.y, -n0.x};
      if (dot(fc.sides[0].conormal, m_minus) < 0.0) std::swap(fc.sides[0], fc.sides[1]);
    }
    out.push_back(std::move(fc));
  }
  return out;
}

GradientVector exact_dJ1(const ScalarField& f, const Mesh2D& mesh, const LevelSet& phi) {
  const auto cut = build_cut(mesh, phi);
  GradientVector out(mesh.num_vertices());
  add_interface_kernel(f, mesh, cut, out);
  return out;
}

GradientVector exact_dJ2(const ScalarField& f, const VectorField& grad_f, const Mesh2D& mesh,
                         const LevelSet& phi, const BoundaryDerivativeOptions& options) {
  const auto cut = build_cut(mesh, phi);
  GradientVector out(mesh.num_vertices());
  add_interface_kernel([&](const EvalPoint<double>& p) { return dot(grad_f(p), p.normal); }, mesh, cut, out);
  for (const auto& fc : enumerate_crossings(mesh, phi, cut)) {
    if (fc.on_boundary && !options.boundary_crossings) continue;
    Point jump{0.0, 0.0};
    for (const auto& side : fc.sides) jump += f(EvalPoint<double>{fc.point, side.normal, side.cell}) * side.conormal;
    add_point(fc, -dot(fc.n_s, jump) / fc.slope, out);
  }
  return out;
}

FluxDerivative exact_dJ3(const ScalarField& div_f, const VectorField& field, const Mesh2D& mesh,
                         const LevelSet& phi, const BoundaryDerivativeOptions& options) {
  const auto cut = build_cut(mesh, phi);
  FluxDerivative out;
  out.gradient = GradientVector(mesh.num_vertices());
  add_interface_kernel(div_f, mesh, cut, out.gradient);
  for (const auto& fc : enumerate_crossings(mesh, phi, cut)) {
    if (!fc.on_boundary) continue;
    out.boundary_intersection = true;
    if (!options.boundary_crossings || !field) continue;
    const auto& side = fc.sides.front();
    const double flux = dot(field(EvalPoint<double>{fc.point, side.normal, side.cell}), fc.n_d);
    add_point(fc, flux / fc.slope, out.gradient);
  }
  if (out.boundary_intersection) {
    out.advisory = (options.boundary_crossings && field)
                       ? "interface meets the background boundary; boundary-crossing flux correction applied"
                       : "interface meets the background boundary; the flux derivative omits the boundary "
                         "crossings and is not exact";
  }
  return out;
}

}  // namespace cutform
