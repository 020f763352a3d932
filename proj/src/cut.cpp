#include "cutform/cut.hpp"

namespace cutform {

double phase_area(const Mesh2D& mesh, const CutTopology<double>& cut, Phase phase) {
  const CellState whole = phase == Phase::In ? CellState::In : CellState::Out;
  double area = 0.0;
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const int ci = static_cast<int>(c);
    if (cut.states[c] == whole) {
      area += mesh.cell_area(ci);
    } else if (const auto* cc = cut.cut_of(ci)) {
      for (const auto& s : cc->subs)
        if (s.phase == phase) area += s.area();
    }
  }
  return area;
}

double interface_length(const CutTopology<double>& cut) {
  double len = 0.0;
  for (const auto& cc : cut.cuts) len += norm(cc.interface[1] - cc.interface[0]);
  return len;
}

int global_point_id(const Mesh2D& mesh, int c, int local_code) {
  if (local_code < 3) return mesh.triangle(c)[local_code];
  return static_cast<int>(mesh.num_vertices()) + mesh.cell_edges(c)[local_code - 3];
}

}  // namespace cutform
