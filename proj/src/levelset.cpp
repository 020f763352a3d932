#include "cutform/levelset.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cutform/errors.hpp"

namespace cutform {

LevelSet::LevelSet(std::vector<double> values) : values_(std::move(values)) {
  double scale = 0.0;
  for (double v : values_) {
    if (!std::isfinite(v)) throw InvalidArgument("level set contains a non-finite value");
    scale = std::max(scale, std::abs(v));
  }
  if (scale == 0.0) scale = 1.0;
  const double floor = snap_fraction * scale;
  for (double& v : values_) {
    if (std::abs(v) < floor) {
      v = v > 0.0 ? floor : -floor;
      ++snapped_;
    }
  }
}

LevelSet LevelSet::interpolate(const Mesh2D& mesh, const std::function<double(const Point&)>& f) {
  std::vector<double> v(mesh.num_vertices());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(mesh.vertex(static_cast<int>(i)));
  return LevelSet(std::move(v));
}

LevelSet LevelSet::unsnapped(std::vector<double> values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] == 0.0) {
      std::ostringstream msg;
      msg << "level set is exactly zero at node " << i;
      throw AssumptionViolation(msg.str(), static_cast<int>(i));
    }
  }
  LevelSet ls;
  ls.values_ = std::move(values);
  return ls;
}

double LevelSet::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

LevelSet perturb(const LevelSet& phi, int node, double t) {
  if (node < 0 || node >= static_cast<int>(phi.size()))
    throw InvalidArgument("perturbation node out of range");
  std::vector<double> v(phi.values().begin(), phi.values().end());
  v[node] += t;
  return LevelSet::unsnapped(std::move(v));
}

AssumptionReport check_assumptions(const Mesh2D& mesh, std::span<const double> phi, double t_probe,
                                   double tolerance) {
  AssumptionReport report;
  const int nv = static_cast<int>(phi.size());
  std::vector<char> flips(phi.size(), 0);
  for (int i = 0; i < nv; ++i) {
    const double a = std::abs(phi[i]);
    if (a < tolerance) report.near_zero_nodes.push_back(i);
    if (a <= t_probe) {
      report.sign_flip_nodes.push_back(i);
      flips[i] = 1;
    }
  }
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const auto& tri = mesh.triangle(static_cast<int>(c));
    bool changes = false;
    for (int k = 0; k < 3 && !changes; ++k) {
      if (!flips[tri[k]]) continue;
      // Try both signs for the flipping node with the other two fixed.
      const double o1 = phi[tri[(k + 1) % 3]];
      const double o2 = phi[tri[(k + 2) % 3]];
      const bool others_mixed = (o1 < 0.0) != (o2 < 0.0);
      if (!others_mixed) changes = true;  // the cell toggles between cut and uncut
    }
    if (changes) report.status_change_cells.push_back(static_cast<int>(c));
  }
  return report;
}

}  // namespace cutform
