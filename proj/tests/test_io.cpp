#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"

#include "cutform/io.hpp"
#include "cutform/isolated.hpp"

using namespace cutform;
using testing::on_mesh;
using testing::unit_mesh;

namespace {

int count_lines(const std::string& s) { return static_cast<int>(std::count(s.begin(), s.end(), '\n')); }

std::string line_after(const std::string& text, const std::string& key) {
  const auto pos = text.find(key);
  if (pos == std::string::npos) return {};
  return text.substr(pos, text.find('\n', pos) - pos);
}

}  // namespace

TEST_CASE("doubles round-trip through text") {
  for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0}) CHECK(std::stod(format_double(x)) == x);
  CHECK(format_double(0.5) == "0.5");
}

TEST_CASE("CSV tables") {
  CsvTable t;
  t.header = {"a", "b"};
  t.add({"1", "2"});
  t.add({"x", format_double(0.25)});
  CHECK(t.str() == "a,b\n1,2\nx,0.25\n");
  CHECK_THROWS_AS(t.add({"only one"}), InvalidArgument);

  const auto dir = std::filesystem::temp_directory_path() / "cutform_io_test" / "nested";
  std::filesystem::remove_all(dir.parent_path());
  t.write(dir / "t.csv");
  std::ifstream f(dir / "t.csv");
  std::stringstream s;
  s << f.rdbuf();
  CHECK(s.str() == t.str());
}

TEST_CASE("gradient and history tables") {
  const auto mesh = unit_mesh(4);
  GradientVector g(mesh.num_vertices());
  g[3] = 1.5;
  const auto t = gradient_table(mesh, {{"ad", &g}, {"fd", &g}});
  CHECK(t.header == std::vector<std::string>{"node", "x", "y", "ad", "fd"});
  CHECK(t.rows.size() == mesh.num_vertices());
  CHECK(t.rows[3][3] == "1.5");

  std::vector<HistoryRow> h(3);
  h[2].J = 2.0;
  const auto ht = history_table(h);
  CHECK(ht.header.front() == "iter");
  CHECK(ht.header.size() == 9);
  CHECK(ht.rows.size() == 3);
}

TEST_CASE("VTK mesh export") {
  const auto mesh = unit_mesh(3);
  std::vector<double> pf(mesh.num_vertices(), 1.0), cf(mesh.num_cells(), 2.0);
  const auto vtk = vtk_mesh(mesh, {{"phi", pf}}, {{"psi", cf}});
  CHECK(vtk.rfind("# vtk DataFile Version 3.0\n", 0) == 0);
  CHECK(vtk.find("ASCII") != std::string::npos);
  CHECK(line_after(vtk, "POINTS") == "POINTS 16 double");
  CHECK(line_after(vtk, "CELLS") == "CELLS 18 72");
  CHECK(line_after(vtk, "POINT_DATA") == "POINT_DATA 16");
  CHECK(line_after(vtk, "CELL_DATA") == "CELL_DATA 18");
  CHECK(vtk.find("SCALARS phi double") != std::string::npos);
  CHECK(vtk.find("SCALARS psi double") != std::string::npos);
  CHECK_THROWS_AS(vtk_mesh(mesh, {{"bad", std::vector<double>(2)}}), InvalidArgument);
}

TEST_CASE("VTK cut export follows the cut-graph vertex order") {
  const auto mesh = unit_mesh(8);
  const auto cut = build_cut(mesh, on_mesh(mesh, "circle"));
  const auto cg = build_cut_graph(mesh, cut);
  const auto col = colour_graph(cg.graph);
  std::vector<double> colour(col.colour.begin(), col.colour.end());
  const auto vtk = vtk_cut(mesh, cut, {{"colour", colour}});
  std::ostringstream cells;
  cells << "CELL_DATA " << cg.graph.size();
  CHECK(vtk.find(cells.str()) != std::string::npos);
  CHECK(vtk.find("SCALARS phase") != std::string::npos);
  CHECK(vtk.find("SCALARS parent") != std::string::npos);
  CHECK(vtk.find("SCALARS colour") != std::string::npos);
  CHECK(count_lines(vtk) > static_cast<int>(cg.graph.size()));
}
