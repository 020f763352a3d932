#pragma once

#include "cutform/geometries.hpp"
#include "cutform/levelset.hpp"
#include "cutform/mesh.hpp"

namespace testing {

inline cutform::Mesh2D unit_mesh(int n) { return cutform::build_structured_mesh(n, n, {{0.0, 0.0}, {1.0, 1.0}}); }

inline cutform::LevelSet on_mesh(const cutform::Mesh2D& mesh, const std::string& geometry) {
  return cutform::LevelSet::interpolate(mesh, cutform::geometry_by_name(geometry));
}

inline double scale(const cutform::GradientVector& g) { return std::max(1.0, g.max_abs()); }

}  // namespace testing
