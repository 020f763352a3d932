#include "cutform/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_map>

#include "cutform/errors.hpp"

namespace cutform {

namespace {

long long edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<long long>(a) << 32) | static_cast<unsigned>(b);
}

void build_csr(std::size_t n, const std::vector<std::pair<int, int>>& pairs,
               std::vector<int>& offsets, std::vector<int>& list) {
  offsets.assign(n + 1, 0);
  for (const auto& [row, col] : pairs) ++offsets[row + 1];
  for (std::size_t i = 0; i < n; ++i) offsets[i + 1] += offsets[i];
  list.resize(pairs.size());
  std::vector<int> fill(offsets.begin(), offsets.end() - 1);
  for (const auto& [row, col] : pairs) list[fill[row]++] = col;
}

}  // namespace

double BoundingBox::diameter() const { return std::hypot(width(), height()); }

Mesh2D::Mesh2D(std::vector<Point> vertices, std::vector<Triangle> triangles,
               std::map<std::string, std::vector<int>> boundary_tags)
    : vertices_(std::move(vertices)), triangles_(std::move(triangles)), tags_(std::move(boundary_tags)) {
  const int nv = static_cast<int>(vertices_.size());
  for (std::size_t c = 0; c < triangles_.size(); ++c) {
    for (int v : triangles_[c]) {
      if (v < 0 || v >= nv) {
        std::ostringstream msg;
        msg << "triangle " << c << " references vertex " << v << " out of range";
        throw InvalidArgument(msg.str());
      }
    }
    if (!(cell_area(static_cast<int>(c)) > 0.0)) {
      std::ostringstream msg;
      msg << "triangle " << c << " has non-positive signed area";
      throw InvalidArgument(msg.str());
    }
  }

  std::unordered_map<long long, int> index;
  index.reserve(triangles_.size() * 2);
  cell_edges_.resize(triangles_.size());
  std::vector<std::pair<int, int>> edge_cell_pairs;
  std::vector<std::pair<int, int>> vertex_cell_pairs;
  for (std::size_t c = 0; c < triangles_.size(); ++c) {
    const auto& t = triangles_[c];
    for (int k = 0; k < 3; ++k) {
      const int a = t[k];
      const int b = t[(k + 1) % 3];
      auto [it, inserted] = index.emplace(edge_key(a, b), static_cast<int>(edges_.size()));
      if (inserted) edges_.push_back({std::min(a, b), std::max(a, b)});
      cell_edges_[c][k] = it->second;
      edge_cell_pairs.emplace_back(it->second, static_cast<int>(c));
      vertex_cell_pairs.emplace_back(a, static_cast<int>(c));
    }
  }
  build_csr(edges_.size(), edge_cell_pairs, edge_cell_offsets_, edge_cell_list_);
  build_csr(vertices_.size(), vertex_cell_pairs, vertex_cell_offsets_, vertex_cell_list_);

  for (auto& [name, ids] : tags_) {
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    for (int e : ids) {
      if (e < 0 || e >= static_cast<int>(edges_.size()) || !is_boundary_edge(e))
        throw InvalidArgument("boundary tag '" + name + "' references a non-boundary edge");
    }
  }
}

std::array<Point, 3> Mesh2D::corners(int c) const {
  const auto& t = triangles_[c];
  return {vertices_[t[0]], vertices_[t[1]], vertices_[t[2]]};
}

std::span<const int> Mesh2D::edge_cells(int e) const {
  return {edge_cell_list_.data() + edge_cell_offsets_[e],
          static_cast<std::size_t>(edge_cell_offsets_[e + 1] - edge_cell_offsets_[e])};
}

std::span<const int> Mesh2D::vertex_cells(int v) const {
  return {vertex_cell_list_.data() + vertex_cell_offsets_[v],
          static_cast<std::size_t>(vertex_cell_offsets_[v + 1] - vertex_cell_offsets_[v])};
}

int Mesh2D::find_edge(int a, int b) const {
  for (int c : vertex_cells(a)) {
    for (int e : cell_edges_[c]) {
      const auto& ed = edges_[e];
      if ((ed[0] == a && ed[1] == b) || (ed[0] == b && ed[1] == a)) return e;
    }
  }
  return -1;
}

const std::vector<int>& Mesh2D::tagged_edges(const std::string& tag) const {
  auto it = tags_.find(tag);
  if (it == tags_.end()) throw InvalidArgument("unknown boundary tag '" + tag + "'");
  return it->second;
}

double Mesh2D::cell_area(int c) const {
  const auto [a, b, d] = corners(c);
  return 0.5 * cross(b - a, d - a);
}

double Mesh2D::cell_diameter(int c) const {
  const auto [a, b, d] = corners(c);
  return std::max({norm(b - a), norm(d - b), norm(a - d)});
}

double Mesh2D::total_area() const {
  double s = 0.0;
  for (std::size_t c = 0; c < triangles_.size(); ++c) s += cell_area(static_cast<int>(c));
  return s;
}

BoundingBox Mesh2D::bounding_box() const {
  BoundingBox box{vertices_.front(), vertices_.front()};
  for (const auto& p : vertices_) {
    box.lower = {std::min(box.lower.x, p.x), std::min(box.lower.y, p.y)};
    box.upper = {std::max(box.upper.x, p.x), std::max(box.upper.y, p.y)};
  }
  return box;
}

Mesh2D build_structured_mesh(int nx, int ny, const BoundingBox& box) {
  if (nx < 1 || ny < 1) throw InvalidArgument("structured mesh needs nx, ny >= 1");
  if (!(box.width() > 0.0) || !(box.height() > 0.0))
    throw InvalidArgument("structured mesh needs a non-degenerate bounding box");

  std::vector<Point> vertices;
  vertices.reserve(static_cast<std::size_t>(nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      // Snap the last row/column onto the box so boundary predicates are exact.
      const double x = i == nx ? box.upper.x : box.lower.x + box.width() * i / nx;
      const double y = j == ny ? box.upper.y : box.lower.y + box.height() * j / ny;
      vertices.push_back({x, y});
    }
  }
  std::vector<Mesh2D::Triangle> triangles;
  triangles.reserve(2 * static_cast<std::size_t>(nx) * ny);
  auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1), d = id(i, j + 1);
      triangles.push_back({a, b, c});
      triangles.push_back({a, c, d});
    }
  }
  Mesh2D mesh(std::move(vertices), std::move(triangles));

  const double tol = 1e-12 * box.diameter();
  mesh = tag_boundary(mesh, "left", [&](const Point& p) { return std::abs(p.x - box.lower.x) <= tol; });
  mesh = tag_boundary(mesh, "right", [&](const Point& p) { return std::abs(p.x - box.upper.x) <= tol; });
  mesh = tag_boundary(mesh, "bottom", [&](const Point& p) { return std::abs(p.y - box.lower.y) <= tol; });
  mesh = tag_boundary(mesh, "top", [&](const Point& p) { return std::abs(p.y - box.upper.y) <= tol; });
  return mesh;
}

Mesh2D tag_boundary(const Mesh2D& mesh, const std::string& tag,
                    const std::function<bool(const Point&)>& predicate) {
  auto tags = mesh.boundary_tags();
  auto& ids = tags[tag];
  for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
    const int ei = static_cast<int>(e);
    if (!mesh.is_boundary_edge(ei)) continue;
    const auto& ed = mesh.edge(ei);
    if (predicate(mesh.vertex(ed[0])) && predicate(mesh.vertex(ed[1]))) ids.push_back(ei);
  }
  return Mesh2D(mesh.vertices(), mesh.triangles(), std::move(tags));
}

FacetSkeleton build_skeleton(const Mesh2D& mesh) {
  FacetSkeleton sk;
  sk.facet_of_edge.assign(mesh.num_edges(), 0);
  for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
    const int ei = static_cast<int>(e);
    const auto cells = mesh.edge_cells(ei);
    if (cells.size() > 2) {
      std::ostringstream msg;
      msg << "edge " << e << " is shared by " << cells.size() << " cells";
      throw TopologyError(msg.str());
    }
    Facet f;
    f.edge = ei;
    f.vertices = mesh.edge(ei);
    const Point a = mesh.vertex(f.vertices[0]);
    const Point b = mesh.vertex(f.vertices[1]);
    f.length = norm(b - a);
    const Point t = (b - a) / f.length;
    f.left = cells[0];
    // Orient the normal out of the left cell: away from its opposite vertex.
    Point n{t.y, -t.x};
    const auto tri = mesh.triangle(f.left);
    Point opposite{};
    for (int v : tri)
      if (v != f.vertices[0] && v != f.vertices[1]) opposite = mesh.vertex(v);
    if (dot(n, opposite - a) > 0.0) n = -n;
    f.normal = n;
    if (cells.size() == 2) {
      f.right = cells[1];
      sk.facet_of_edge[e] = static_cast<int>(sk.interior.size());
      sk.interior.push_back(f);
    } else {
      sk.facet_of_edge[e] = -static_cast<int>(sk.boundary.size()) - 1;
      sk.boundary.push_back(f);
    }
  }
  return sk;
}

}  // namespace cutform
