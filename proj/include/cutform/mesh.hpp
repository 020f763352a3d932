#pragma once

#include <array>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "cutform/vec2.hpp"

namespace cutform {

struct BoundingBox {
  Point lower;
  Point upper;

  double width() const { return upper.x - lower.x; }
  double height() const { return upper.y - lower.y; }
  double area() const { return width() * height(); }
  double diameter() const;
};

/// Conforming triangle mesh of a planar background domain.
///
/// Edges are numbered once at construction; local edge k of a triangle joins
/// its local vertices k and (k+1) % 3. Boundary tags map a name to a sorted
/// list of boundary edge ids. The mesh never changes after construction.
class Mesh2D {
 public:
  using Triangle = std::array<int, 3>;
  using Edge = std::array<int, 2>;

  Mesh2D(std::vector<Point> vertices, std::vector<Triangle> triangles,
         std::map<std::string, std::vector<int>> boundary_tags = {});

  std::size_t num_vertices() const { return vertices_.size(); }
  std::size_t num_cells() const { return triangles_.size(); }
  std::size_t num_edges() const { return edges_.size(); }

  const std::vector<Point>& vertices() const { return vertices_; }
  const Point& vertex(int v) const { return vertices_[v]; }
  const std::vector<Triangle>& triangles() const { return triangles_; }
  const Triangle& triangle(int c) const { return triangles_[c]; }
  std::array<Point, 3> corners(int c) const;

  const Edge& edge(int e) const { return edges_[e]; }
  const std::array<int, 3>& cell_edges(int c) const { return cell_edges_[c]; }
  std::span<const int> edge_cells(int e) const;
  std::span<const int> vertex_cells(int v) const;
  bool is_boundary_edge(int e) const { return edge_cells(e).size() == 1; }
  /// Edge id joining two vertices, or -1.
  int find_edge(int a, int b) const;

  const std::map<std::string, std::vector<int>>& boundary_tags() const { return tags_; }
  /// Boundary edge ids carrying `tag`; throws InvalidArgument on unknown tags.
  const std::vector<int>& tagged_edges(const std::string& tag) const;
  bool has_tag(const std::string& tag) const { return tags_.count(tag) != 0; }

  double cell_area(int c) const;
  /// Longest edge of the cell.
  double cell_diameter(int c) const;
  double total_area() const;
  BoundingBox bounding_box() const;

 private:
  std::vector<Point> vertices_;
  std::vector<Triangle> triangles_;
  std::vector<Edge> edges_;
  std::vector<std::array<int, 3>> cell_edges_;
  // CSR adjacency
  std::vector<int> edge_cell_offsets_, edge_cell_list_;
  std::vector<int> vertex_cell_offsets_, vertex_cell_list_;
  std::map<std::string, std::vector<int>> tags_;
};

/// Structured nx-by-ny mesh of `box`, each quad split along its
/// lower-left to upper-right diagonal, boundary tagged left/right/bottom/top.
Mesh2D build_structured_mesh(int nx, int ny, const BoundingBox& box);

/// Copy of `mesh` with a new boundary tag holding every boundary edge whose
/// two endpoints satisfy `predicate`.
Mesh2D tag_boundary(const Mesh2D& mesh, const std::string& tag,
                    const std::function<bool(const Point&)>& predicate);

struct Facet {
  int edge = -1;
  std::array<int, 2> vertices{};
  int left = -1;
  int right = -1;  // -1 on the boundary
  Point normal;    // unit, pointing from left into right (outward on the boundary)
  double length = 0.0;
};

/// Interior and boundary facets of a mesh with orientation data.
struct FacetSkeleton {
  std::vector<Facet> interior;
  std::vector<Facet> boundary;
  /// facet_of_edge[e] = index into interior (>= 0) or -(index into boundary) - 1
  std::vector<int> facet_of_edge;
};

FacetSkeleton build_skeleton(const Mesh2D& mesh);

}  // namespace cutform
