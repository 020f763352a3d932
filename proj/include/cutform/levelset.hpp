#pragma once

#include <functional>
#include <span>
#include <vector>

#include "cutform/mesh.hpp"

namespace cutform {

/// Nodal values of a piecewise-linear level set; negative inside the domain.
///
/// Construction enforces that no nodal value is zero: values with
/// |phi_i| < snap_fraction * max|phi| are moved to +-snap_fraction * max|phi|
/// (sign kept, exact zero goes negative).
class LevelSet {
 public:
  static constexpr double snap_fraction = 1e-10;

  LevelSet() = default;
  explicit LevelSet(std::vector<double> values);

  /// Interpolates `f` at the mesh vertices, then snaps.
  static LevelSet interpolate(const Mesh2D& mesh, const std::function<double(const Point&)>& f);

  /// Adopts `values` as-is; throws AssumptionViolation on an exact zero.
  static LevelSet unsnapped(std::vector<double> values);

  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> values() const { return values_; }
  double max_abs() const;

  /// Number of values that were moved by the zero-avoidance snap.
  int snapped_count() const { return snapped_; }

 private:
  std::vector<double> values_;
  int snapped_ = 0;
};

/// phi + t * w_node, where w_node is the hat function of `node`.
LevelSet perturb(const LevelSet& phi, int node, double t);

struct AssumptionReport {
  /// Nodes whose value is closer to zero than the tolerance.
  std::vector<int> near_zero_nodes;
  /// Nodes whose sign flips under a +-t_probe perturbation.
  std::vector<int> sign_flip_nodes;
  /// Cells whose cut/uncut status changes under a +-t_probe perturbation of
  /// one incident node.
  std::vector<int> status_change_cells;

  bool clean() const {
    return near_zero_nodes.empty() && sign_flip_nodes.empty() && status_change_cells.empty();
  }
};

AssumptionReport check_assumptions(const Mesh2D& mesh, std::span<const double> phi, double t_probe,
                                   double tolerance = 1e-10);

}  // namespace cutform
