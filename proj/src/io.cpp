#include "cutform/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace cutform {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void CsvTable::add(std::vector<std::string> row) {
  if (row.size() != header.size()) throw InvalidArgument("CSV row width does not match the header");
  rows.push_back(std::move(row));
}

std::string CsvTable::str() const {
  std::ostringstream out;
  auto line = [&](const std::vector<std::string>& r) {
    for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << r[i];
    out << '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
  return out.str();
}

void CsvTable::write(const std::filesystem::path& path) const { write_text(path, str()); }

CsvTable gradient_table(const Mesh2D& mesh,
                        const std::vector<std::pair<std::string, const GradientVector*>>& columns) {
  CsvTable t;
  t.header = {"node", "x", "y"};
  for (const auto& [name, g] : columns) {
    if (g->size() != mesh.num_vertices()) throw InvalidArgument("gradient column size mismatch");
    t.header.push_back(name);
  }
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
    const Point& x = mesh.vertex(static_cast<int>(v));
    std::vector<std::string> row{std::to_string(v), format_double(x.x), format_double(x.y)};
    for (const auto& c : columns) row.push_back(format_double((*c.second)[v]));
    t.add(std::move(row));
  }
  return t;
}

CsvTable history_table(const std::vector<HistoryRow>& history) {
  CsvTable t;
  t.header = {"iter", "J", "C", "lambda", "rho", "cfl", "descent", "step_norm", "reinit_change"};
  for (const auto& h : history)
    t.add({std::to_string(h.iter), format_double(h.J), format_double(h.C), format_double(h.lambda),
           format_double(h.rho), format_double(h.cfl), format_double(h.descent), format_double(h.step_norm),
           format_double(h.reinit_change)});
  return t;
}

namespace {

void header(std::ostringstream& out, const std::string& title) {
  out << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
}

void scalars(std::ostringstream& out, const std::vector<NamedField>& fields, std::size_t n, const char* what) {
  if (fields.empty()) return;
  out << what << ' ' << n << '\n';
  for (const auto& [name, values] : fields) {
    if (values.size() != n) throw InvalidArgument("VTK field '" + name + "' has the wrong size");
    out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (double v : values) out << format_double(v) << '\n';
  }
}

void triangles(std::ostringstream& out, std::size_t count, const std::vector<std::array<int, 3>>& tris) {
  out << "CELLS " << count << ' ' << 4 * count << '\n';
  for (const auto& t : tris) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  out << "CELL_TYPES " << count << '\n';
  for (std::size_t i = 0; i < count; ++i) out << "5\n";
}

}  // namespace

std::string vtk_mesh(const Mesh2D& mesh, const std::vector<NamedField>& point_fields,
                     const std::vector<NamedField>& cell_fields, const std::string& title) {
  std::ostringstream out;
  header(out, title);
  out << "POINTS " << mesh.num_vertices() << " double\n";
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
    const Point& x = mesh.vertex(static_cast<int>(v));
    out << format_double(x.x) << ' ' << format_double(x.y) << " 0\n";
  }
  std::vector<std::array<int, 3>> tris;
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) tris.push_back(mesh.triangle(static_cast<int>(c)));
  triangles(out, tris.size(), tris);
  scalars(out, cell_fields, mesh.num_cells(), "CELL_DATA");
  scalars(out, point_fields, mesh.num_vertices(), "POINT_DATA");
  return out.str();
}

std::string vtk_cut(const Mesh2D& mesh, const CutTopology<double>& cut, const std::vector<NamedField>& fields,
                    const std::string& title) {
  std::vector<Point> points;
  std::vector<std::array<int, 3>> tris;
  std::vector<double> phase, parent;
  auto add = [&](const std::array<Point, 3>& x, Phase p, int c) {
    const int base = static_cast<int>(points.size());
    points.insert(points.end(), x.begin(), x.end());
    tris.push_back({base, base + 1, base + 2});
    phase.push_back(p == Phase::In ? 0.0 : 1.0);
    parent.push_back(c);
  };
  for (int c = 0; c < static_cast<int>(mesh.num_cells()); ++c) {
    if (const auto* cc = cut.cut_of(c)) {
      for (const auto& s : cc->subs) add(s.corners, s.phase, c);
    } else {
      add(mesh.corners(c), cut.states[c] == CellState::In ? Phase::In : Phase::Out, c);
    }
  }
  std::ostringstream out;
  header(out, title);
  out << "POINTS " << points.size() << " double\n";
  for (const auto& x : points) out << format_double(x.x) << ' ' << format_double(x.y) << " 0\n";
  triangles(out, tris.size(), tris);
  std::vector<NamedField> all{{"phase", phase}, {"parent", parent}};
  all.insert(all.end(), fields.begin(), fields.end());
  scalars(out, all, tris.size(), "CELL_DATA");
  return out.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open " + path.string() + " for writing");
  f << text;
  if (!f) throw Error("failed writing " + path.string());
}

}  // namespace cutform
