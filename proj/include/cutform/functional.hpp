#pragma once

// Functionals over cut domains and their derivatives with respect to the
// nodal level-set values.
//
// A functional is evaluated cell by cell. The contribution of a background
// cell depends only on its three nodal values, so the derivative with respect
// to node i only needs the cells around i: each gradient entry re-cuts at most
// the handful of cells in the support of the hat function w_i.

#include <Eigen/Dense>
#include <functional>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "cutform/cut.hpp"
#include "cutform/dual.hpp"
#include "cutform/levelset.hpp"
#include "cutform/mesh.hpp"
#include "cutform/quadrature.hpp"

namespace cutform {

/// Quadrature point handed to integrands. `normal` is only meaningful on the
/// interface; `cell` is the background cell hosting the point.
template <class T>
struct EvalPoint {
  Vec2<T> x;
  Vec2<T> normal;
  int cell = -1;
};

/// Scalar integrand callable with every supported scalar type.
///
/// Built from a generic lambda, e.g. `[](const auto& p) { return p.x.x + p.x.y; }`.
class Integrand {
 public:
  Integrand() = default;
  template <class F>
    requires(!std::same_as<std::decay_t<F>, Integrand>)
  Integrand(F f)  // NOLINT: implicit from lambdas
      : real_(f), dual1_(f), dual2_(f) {}

  double operator()(const EvalPoint<double>& p) const { return real_(p); }
  Dual1 operator()(const EvalPoint<Dual1>& p) const { return dual1_(p); }
  Dual2 operator()(const EvalPoint<Dual2>& p) const { return dual2_(p); }
  explicit operator bool() const { return static_cast<bool>(real_); }

 private:
  std::function<double(const EvalPoint<double>&)> real_;
  std::function<Dual1(const EvalPoint<Dual1>&)> dual1_;
  std::function<Dual2(const EvalPoint<Dual2>&)> dual2_;
};

enum class FunctionalKind { Volume, Boundary, Flux, Normal };

std::string to_string(FunctionalKind kind);

struct Functional {
  FunctionalKind kind = FunctionalKind::Volume;
  /// Scalar integrand; for Flux the field has already been dotted with n.
  Integrand integrand;
  /// Phase integrated by volume functionals.
  Phase domain = Phase::In;
  int triangle_order = 2;
  int segment_order = 5;

  /// f dx over one phase.
  static Functional volume(Integrand f, Phase domain = Phase::In);
  /// f ds over the interface.
  static Functional boundary(Integrand f);
  /// g(x, n) ds over the interface; the integrand reads p.normal.
  static Functional normal(Integrand g);
  /// F . n ds over the interface; `field` maps an EvalPoint to a Vec2.
  template <class F>
  static Functional flux(F field) {
    Functional fn;
    fn.kind = FunctionalKind::Flux;
    fn.integrand = Integrand([field](const auto& p) { return dot(field(p), p.normal); });
    return fn;
  }
};

/// One directional derivative dJ(phi; w_i) per mesh vertex.
struct GradientVector {
  std::vector<double> values;

  GradientVector() = default;
  explicit GradientVector(std::size_t n) : values(n, 0.0) {}
  std::size_t size() const { return values.size(); }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
  double max_abs() const;
};

/// max_i |a_i - b_i|
double max_abs_difference(const GradientVector& a, const GradientVector& b);

template <class T>
T integrate_triangle(const Integrand& f, const std::array<Vec2<T>, 3>& x, int cell, int order) {
  const auto& rule = triangle_rule(order);
  const Vec2<T> e1 = x[1] - x[0];
  const Vec2<T> e2 = x[2] - x[0];
  const T jac = cross(e1, e2);
  T sum(0.0);
  for (std::size_t q = 0; q < rule.weights.size(); ++q) {
    EvalPoint<T> p;
    p.x = x[0] + T(rule.points[q][0]) * e1 + T(rule.points[q][1]) * e2;
    p.cell = cell;
    sum += T(rule.weights[q]) * f(p);
  }
  return sum * jac;
}

template <class T>
T integrate_segment(const Integrand& f, const Vec2<T>& a, const Vec2<T>& b, const Vec2<T>& n,
                    int cell, int order) {
  const auto& rule = segment_rule(order);
  const Vec2<T> d = b - a;
  const T len = norm(d);
  T sum(0.0);
  for (std::size_t q = 0; q < rule.weights.size(); ++q) {
    EvalPoint<T> p;
    p.x = a + T(rule.points[q]) * d;
    p.normal = n;
    p.cell = cell;
    sum += T(rule.weights[q]) * f(p);
  }
  return sum * len;
}

/// Contribution of a cut cell.
template <class T>
T integrate_cut_cell(const Functional& fn, const CutCell<T>& cc) {
  if (fn.kind == FunctionalKind::Volume) {
    T sum(0.0);
    for (const auto& s : cc.subs)
      if (s.phase == fn.domain) sum += integrate_triangle(fn.integrand, s.corners, cc.cell, fn.triangle_order);
    return sum;
  }
  return integrate_segment(fn.integrand, cc.interface[0], cc.interface[1], cc.normal, cc.cell,
                           fn.segment_order);
}

/// Contribution of background cell `c` given its three nodal values.
template <class T>
T cell_contribution(const Functional& fn, const Mesh2D& mesh, int c, const std::array<T, 3>& phi) {
  const CellState state = classify(phi);
  if (state == CellState::Cut) {
    CutCell<T> cc = cut_triangle(mesh.corners(c), phi);
    cc.cell = c;
    return integrate_cut_cell(fn, cc);
  }
  if (fn.kind != FunctionalKind::Volume) return T(0.0);
  const CellState whole = fn.domain == Phase::In ? CellState::In : CellState::Out;
  if (state != whole) return T(0.0);
  const auto x = mesh.corners(c);
  return integrate_triangle<T>(fn.integrand, {promote<T>(x[0]), promote<T>(x[1]), promote<T>(x[2])}, c,
                               fn.triangle_order);
}

/// Value of the functional on a pre-built cut, in the cut's scalar type.
template <class T>
T evaluate(const Functional& fn, const Mesh2D& mesh, const CutTopology<T>& cut) {
  const CellState whole = fn.domain == Phase::In ? CellState::In : CellState::Out;
  T sum(0.0);
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const int ci = static_cast<int>(c);
    if (const auto* cc = cut.cut_of(ci)) {
      sum += integrate_cut_cell(fn, *cc);
    } else if (fn.kind == FunctionalKind::Volume && cut.states[c] == whole) {
      const auto x = mesh.corners(ci);
      sum += integrate_triangle<T>(fn.integrand, {promote<T>(x[0]), promote<T>(x[1]), promote<T>(x[2])}, ci,
                                   fn.triangle_order);
    }
  }
  return sum;
}

double evaluate(const Functional& fn, const Mesh2D& mesh, const LevelSet& phi);

/// Vertices of cut cells, sorted.
std::vector<int> band_nodes(const Mesh2D& mesh, std::span<const CellState> states);

struct GradientOptions {
  int threads = 1;
};

/// Contribution of one cut cell as a function of its three nodal values.
using CellFunction = std::function<Dual1(int cell, const std::array<Dual1, 3>& phi)>;

/// Derivative of a sum of cut-cell contributions with respect to every nodal
/// value: one seed per cut-band vertex, re-evaluating only the cut cells
/// around it. Uncut cells are assumed not to depend on phi.
GradientVector ad_cell_gradient(const Mesh2D& mesh, const LevelSet& phi, const CellFunction& contribution,
                                const GradientOptions& options = {});

/// dJ(phi; w_i) for every vertex by one Dual1 seed per cut-band vertex.
GradientVector ad_gradient(const Functional& fn, const Mesh2D& mesh, const LevelSet& phi,
                           const GradientOptions& options = {});

/// Central differences (J(phi + t w_i) - J(phi - t w_i)) / 2t over the cut
/// band. Throws AssumptionViolation when +-step flips the sign of any node.
GradientVector fd_gradient(const Functional& fn, const Mesh2D& mesh, const LevelSet& phi, double step,
                           const GradientOptions& options = {});

struct HessianResult {
  std::vector<int> nodes;
  Eigen::MatrixXd matrix;
  /// max |H - H^T|, with (i,j) and (j,i) computed independently.
  double asymmetry = 0.0;
};

/// Second derivatives d^2 J / dphi_i dphi_j for i, j in `nodes` via Dual2.
HessianResult ad_hessian(const Functional& fn, const Mesh2D& mesh, const LevelSet& phi,
                         std::span<const int> nodes, const GradientOptions& options = {});

}  // namespace cutform
