#pragma once

// Cell classification and sub-triangulation of cut cells.
//
// Everything downstream of the nodal level-set values is templated on the
// scalar so that the same code yields primal geometry (double), first
// derivatives (Dual1) and mixed second derivatives (Dual2) of intersection
// points, sub-cell Jacobians and interface normals.

#include <array>
#include <cstdint>
#include <span>
#include <sstream>
#include <vector>

#include "cutform/dual.hpp"
#include "cutform/errors.hpp"
#include "cutform/levelset.hpp"
#include "cutform/mesh.hpp"
#include "cutform/vec2.hpp"

namespace cutform {

enum class CellState : std::uint8_t { In, Out, Cut };
enum class Phase : std::uint8_t { In, Out };

inline Phase phase_of_value(double v) { return v < 0.0 ? Phase::In : Phase::Out; }
inline Phase opposite(Phase p) { return p == Phase::In ? Phase::Out : Phase::In; }

template <class T>
struct SubTriangle {
  std::array<Vec2<T>, 3> corners;
  Phase phase = Phase::In;
  /// Local point codes: 0..2 parent corners, 3 + k interface vertex on local edge k.
  std::array<int, 3> points{-1, -1, -1};

  T area() const { return T(0.5) * cross(corners[1] - corners[0], corners[2] - corners[0]); }
};

/// Geometry of one cut triangle.
///
/// The lone vertex is the one whose sign differs from the other two. Local
/// edge k joins local vertices k and (k+1)%3; the interface vertices lie on
/// local edges `lone` and `(lone+2)%3`.
template <class T>
struct CutCell {
  int cell = -1;
  int lone = 0;
  Phase lone_phase = Phase::In;
  /// subs[0] is the corner triangle at the lone vertex; subs[1..2] tile the
  /// quadrilateral on the other side. All counter-clockwise.
  std::array<SubTriangle<T>, 3> subs;
  std::array<Vec2<T>, 2> interface;
  std::array<int, 2> interface_edge{};
  /// P1 gradient of the level set on the parent cell.
  Vec2<T> gradient;
  /// gradient / |gradient|, pointing out of the negative phase.
  Vec2<T> normal;
};

template <class T>
Vec2<T> p1_gradient(const std::array<Point, 3>& x, const std::array<T, 3>& phi) {
  const Point e1 = x[1] - x[0];
  const Point e2 = x[2] - x[0];
  const double det = cross(e1, e2);
  const T d1 = phi[1] - phi[0];
  const T d2 = phi[2] - phi[0];
  return {(d1 * e2.y - d2 * e1.y) / det, (d2 * e1.x - d1 * e2.x) / det};
}

/// Barycentric coordinates of `p` in the triangle with corners `x`.
template <class T>
std::array<T, 3> barycentric(const std::array<Point, 3>& x, const Vec2<T>& p) {
  const Point e1 = x[1] - x[0];
  const Point e2 = x[2] - x[0];
  const double det = cross(e1, e2);
  const Vec2<T> r = p - promote<T>(x[0]);
  const T l1 = (r.x * e2.y - r.y * e2.x) / det;
  const T l2 = (e1.x * r.y - e1.y * r.x) / det;
  return {T(1.0) - l1 - l2, l1, l2};
}

/// Zero crossing of the linear interpolant on the segment qa -> qb.
template <class T>
Vec2<T> edge_crossing(const Point& qa, const Point& qb, const T& pa, const T& pb) {
  using std::abs;
  const T s = abs(pa) / (abs(pa) + abs(pb));
  return promote<T>(qa) + s * promote<T>(qb - qa);
}

template <class T>
CutCell<T> cut_triangle(const std::array<Point, 3>& x, const std::array<T, 3>& phi) {
  const bool neg[3] = {value_of(phi[0]) < 0.0, value_of(phi[1]) < 0.0, value_of(phi[2]) < 0.0};
  if (neg[0] == neg[1] && neg[1] == neg[2]) throw NotCutError("triangle is not cut by the level set");
  for (const auto& v : phi)
    if (value_of(v) == 0.0) throw AssumptionViolation("zero level-set value on a cut triangle");

  CutCell<T> cc;
  int l = 0;
  if (neg[0] == neg[1]) l = 2;
  else if (neg[0] == neg[2]) l = 1;
  const int a = (l + 1) % 3;
  const int b = (l + 2) % 3;
  cc.lone = l;
  cc.lone_phase = neg[l] ? Phase::In : Phase::Out;
  const Phase other = opposite(cc.lone_phase);

  const Vec2<T> v1 = edge_crossing(x[l], x[a], phi[l], phi[a]);
  const Vec2<T> v2 = edge_crossing(x[l], x[b], phi[l], phi[b]);
  const Vec2<T> ql = promote<T>(x[l]);
  const Vec2<T> qa = promote<T>(x[a]);
  const Vec2<T> qb = promote<T>(x[b]);
  const int e1 = 3 + l;  // local edge (l, a)
  const int e2 = 3 + b;  // local edge (b, l)

  cc.subs[0] = {{ql, v1, v2}, cc.lone_phase, {l, e1, e2}};
  cc.subs[1] = {{v1, qa, qb}, other, {e1, a, b}};
  cc.subs[2] = {{v1, qb, v2}, other, {e1, b, e2}};
  cc.interface = {v1, v2};
  cc.interface_edge = {l, b};

  using std::sqrt;
  cc.gradient = p1_gradient(x, phi);
  const T len = sqrt(dot(cc.gradient, cc.gradient));
  cc.normal = cc.gradient / len;
  return cc;
}

template <class T>
struct CutTopology {
  std::vector<CellState> states;
  std::vector<int> cut_index;  // -1 when the cell is not cut
  std::vector<CutCell<T>> cuts;

  const CutCell<T>* cut_of(int c) const {
    const int k = cut_index[c];
    return k < 0 ? nullptr : &cuts[k];
  }
  std::size_t num_cut_cells() const { return cuts.size(); }
};

template <class T>
CellState classify(const std::array<T, 3>& phi) {
  const bool n0 = value_of(phi[0]) < 0.0, n1 = value_of(phi[1]) < 0.0, n2 = value_of(phi[2]) < 0.0;
  if (n0 && n1 && n2) return CellState::In;
  if (!n0 && !n1 && !n2) return CellState::Out;
  return CellState::Cut;
}

template <class T>
std::array<T, 3> cell_values(const Mesh2D& mesh, int c, std::span<const T> phi) {
  const auto& t = mesh.triangle(c);
  return {phi[t[0]], phi[t[1]], phi[t[2]]};
}

namespace detail {
template <class T>
void require_nonzero(std::span<const T> phi) {
  for (std::size_t i = 0; i < phi.size(); ++i) {
    if (value_of(phi[i]) == 0.0) {
      std::ostringstream msg;
      msg << "level set is exactly zero at node " << i;
      throw AssumptionViolation(msg.str(), static_cast<int>(i));
    }
  }
}
}  // namespace detail

template <class T>
std::vector<CellState> classify_cells(const Mesh2D& mesh, std::span<const T> phi) {
  if (phi.size() != mesh.num_vertices()) throw InvalidArgument("level set size does not match the mesh");
  detail::require_nonzero(phi);
  std::vector<CellState> s(mesh.num_cells());
  for (std::size_t c = 0; c < s.size(); ++c) s[c] = classify(cell_values(mesh, static_cast<int>(c), phi));
  return s;
}

inline std::vector<CellState> classify_cells(const Mesh2D& mesh, const LevelSet& phi) {
  return classify_cells<double>(mesh, phi.values());
}

template <class T>
CutTopology<T> build_cut(const Mesh2D& mesh, std::span<const T> phi) {
  CutTopology<T> topo;
  topo.states = classify_cells(mesh, phi);
  topo.cut_index.assign(mesh.num_cells(), -1);
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    if (topo.states[c] != CellState::Cut) continue;
    const int ci = static_cast<int>(c);
    CutCell<T> cc = cut_triangle(mesh.corners(ci), cell_values(mesh, ci, phi));
    cc.cell = ci;
    topo.cut_index[c] = static_cast<int>(topo.cuts.size());
    topo.cuts.push_back(std::move(cc));
  }
  return topo;
}

inline CutTopology<double> build_cut(const Mesh2D& mesh, const LevelSet& phi) {
  return build_cut<double>(mesh, phi.values());
}

/// Measure of one phase: sub-triangles of cut cells plus whole uncut cells.
double phase_area(const Mesh2D& mesh, const CutTopology<double>& cut, Phase phase);

/// Total length of the interface segments.
double interface_length(const CutTopology<double>& cut);

/// Global point id for a local code of a sub-triangle of cell `c`:
/// mesh vertex ids, then num_vertices + edge id for interface vertices.
int global_point_id(const Mesh2D& mesh, int c, int local_code);

}  // namespace cutform
