#pragma once

// Closed-form directional derivatives dJ(phi; w_i) of cut-domain functionals,
// used as oracles for the dual-number gradients.
//
// All integrals live on the piecewise-linear interface. In 2D, the facet terms
// of the boundary-integral derivative collapse to point evaluations at the
// places where the interface crosses a mesh edge.

#include <functional>
#include <string>
#include <vector>

#include "cutform/cut.hpp"
#include "cutform/functional.hpp"
#include "cutform/levelset.hpp"
#include "cutform/mesh.hpp"

namespace cutform {

using ScalarField = std::function<double(const EvalPoint<double>&)>;
using VectorField = std::function<Point(const EvalPoint<double>&)>;

struct CrossingSide {
  int cell = -1;
  /// Interface normal in this cell.
  Point normal;
  /// In-plane co-normal: unit tangent of the interface piece in this cell,
  /// pointing out of the piece through the crossing point.
  Point conormal;
};

/// Point where the interface crosses mesh edge `edge`.
struct FacetCrossing {
  int edge = -1;
  Point point;
  /// Edge endpoints (a, b) and the position s of `point` on a -> b.
  std::array<int, 2> vertices{};
  double s = 0.0;
  /// Unit vector along the edge, pointing toward the positive (outside) end.
  Point n_s;
  /// |d phi / d n_s| along the edge.
  double slope = 0.0;
  bool on_boundary = false;
  /// Outward normal of the background domain (boundary crossings only).
  Point n_d;
  /// One entry on the boundary of D, two for interior edges. For interior
  /// edges sides[0] is the cell whose co-normal is the normal rotated by -90
  /// degrees (t = -e3), sides[1] the one rotated by +90 (t = +e3).
  std::vector<CrossingSide> sides;
};

std::vector<FacetCrossing> enumerate_crossings(const Mesh2D& mesh, const LevelSet& phi,
                                               const CutTopology<double>& cut);

/// -int_Gamma f w_i / |grad phi| ds
GradientVector exact_dJ1(const ScalarField& f, const Mesh2D& mesh, const LevelSet& phi);

struct BoundaryDerivativeOptions {
  /// Include the point terms where the interface meets the boundary of D.
  bool boundary_crossings = true;
};

/// Derivative of int_Gamma f ds: normal-derivative integral plus co-normal
/// jump terms at every edge crossing. `f` receives the hosting cell, so
/// cell-wise smooth integrands get their one-sided limits.
GradientVector exact_dJ2(const ScalarField& f, const VectorField& grad_f, const Mesh2D& mesh,
                         const LevelSet& phi, const BoundaryDerivativeOptions& options = {});

struct FluxDerivative {
  GradientVector gradient;
  /// True when the interface meets the boundary of D.
  bool boundary_intersection = false;
  /// Non-empty when the result relies on the boundary-crossing correction.
  std::string advisory;
};

/// Derivative of int_Gamma F.n ds: -int_Gamma div F w_i/|grad phi| ds, plus
/// (F.n_D) w_i / |d phi/d n_s| at each crossing with the boundary of D when
/// `field` is given and `options.boundary_crossings` is set.
FluxDerivative exact_dJ3(const ScalarField& div_f, const VectorField& field, const Mesh2D& mesh,
                         const LevelSet& phi, const BoundaryDerivativeOptions& options = {});

}  // namespace cutform
