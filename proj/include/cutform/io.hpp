#pragma once

// File outputs: CSV tables with 17 significant digits and legacy ASCII VTK
// (version 3.0) unstructured grids.

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "cutform/cut.hpp"
#include "cutform/functional.hpp"
#include "cutform/mesh.hpp"
#include "cutform/optimizer.hpp"

namespace cutform {

/// %.17g, enough to round-trip any double.
std::string format_double(double x);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Appends a row; its width must match the header.
  void add(std::vector<std::string> row);
  std::string str() const;
  void write(const std::filesystem::path& path) const;
};

using NamedField = std::pair<std::string, std::vector<double>>;

/// One row per vertex: node, x, y and one column per gradient.
CsvTable gradient_table(const Mesh2D& mesh, const std::vector<std::pair<std::string, const GradientVector*>>& columns);

/// iter, J, C, lambda, rho, cfl, descent, step_norm, reinit_change
CsvTable history_table(const std::vector<HistoryRow>& history);

/// Background mesh with per-vertex and per-cell scalar fields.
std::string vtk_mesh(const Mesh2D& mesh, const std::vector<NamedField>& point_fields = {},
                     const std::vector<NamedField>& cell_fields = {}, const std::string& title = "cutform mesh");

/// Sub-triangulation of the cut: whole uncut cells plus the sub-triangles of
/// cut cells, with cell fields "phase" (0 IN, 1 OUT) and "parent". Triangles
/// come in the order of the cut-graph vertices, so per-vertex values (colours,
/// owners) can be passed as extra fields.
std::string vtk_cut(const Mesh2D& mesh, const CutTopology<double>& cut, const std::vector<NamedField>& fields = {},
                    const std::string& title = "cutform cut");

/// Writes text to a file, creating parent directories.
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace cutform
