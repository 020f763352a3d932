#include <map>
#include <numeric>
#include <random>
#include <set>

#include "doctest.h"
#include "helpers.hpp"

#include "cutform/errors.hpp"
#include "cutform/isolated.hpp"

using namespace cutform;
using testing::on_mesh;
using testing::unit_mesh;

namespace {

struct UnionFindOracle {
  std::vector<int> parent;
  explicit UnionFindOracle(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

// Same-state components by union-find over the raw graph edges.
std::vector<int> oracle_components(const Graph& g) {
  UnionFindOracle uf(g.size());
  for (int v = 0; v < static_cast<int>(g.size()); ++v)
    for (int w : g.neighbours(v))
      if (g.state[v] == g.state[w]) uf.unite(v, w);
  std::vector<int> root(g.size());
  for (int v = 0; v < static_cast<int>(g.size()); ++v) root[v] = uf.find(v);
  return root;
}

// True when `a` and `b` induce the same partition of the vertices.
bool same_partition(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) return false;
  std::map<int, int> ab, ba;
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto [it1, new1] = ab.emplace(a[i], b[i]);
    auto [it2, new2] = ba.emplace(b[i], a[i]);
    if (it1->second != b[i] || it2->second != a[i]) return false;
  }
  return true;
}

void check_colouring_valid(const Graph& g, const Colouring& col) {
  REQUIRE(col.colour.size() == g.size());
  std::set<int> used;
  for (std::size_t v = 0; v < g.size(); ++v) {
    REQUIRE(col.colour[v] >= 1);
    REQUIRE(col.colour[v] <= col.count());
    used.insert(col.colour[v]);
    CHECK(col.colour_state[col.colour[v] - 1] == g.state[v]);
    for (int w : g.neighbours(static_cast<int>(v)))
      if (g.state[w] == g.state[v]) CHECK(col.colour[w] == col.colour[v]);
  }
  CHECK(static_cast<int>(used.size()) == col.count());
}

LevelSet random_level_set(const Mesh2D& mesh, std::mt19937& rng) {
  // Union of 2 to 7 random disks.
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::pair<Point, double>> blobs;
  const int k = 2 + static_cast<int>(u(rng) * 6);
  for (int i = 0; i < k; ++i) blobs.push_back({{u(rng), u(rng)}, 0.05 + 0.2 * u(rng)});
  return LevelSet::interpolate(mesh, [&](const Point& p) {
    double d = 1e9;
    for (const auto& [c, r] : blobs) d = std::min(d, std::hypot(p.x - c.x, p.y - c.y) - r);
    return d;
  });
}

Graph path_graph(std::vector<Phase> state) {
  std::vector<std::array<int, 2>> edges;
  for (int i = 0; i + 1 < static_cast<int>(state.size()); ++i) edges.push_back({i, i + 1});
  return make_graph(std::move(state), edges);
}

int count_state(const Colouring& c, Phase p) {
  return static_cast<int>(std::count(c.colour_state.begin(), c.colour_state.end(), p));
}

}  // namespace

TEST_CASE("cut graph structure") {
  SUBCASE("all inside is the cell adjacency graph") {
    const auto mesh = unit_mesh(6);
    const auto cut = build_cut(mesh, LevelSet(std::vector<double>(mesh.num_vertices(), -1.0)));
    const auto cg = build_cut_graph(mesh, cut);
    CHECK(cg.graph.size() == mesh.num_cells());
    std::size_t interior = 0;
    for (std::size_t e = 0; e < mesh.num_edges(); ++e) interior += !mesh.is_boundary_edge(static_cast<int>(e));
    CHECK(cg.graph.adjacency.size() == 2 * interior);
    for (auto s : cg.graph.state) CHECK(s == Phase::In);
    CHECK(colour_graph(cg.graph).count() == 1);
  }
  SUBCASE("planar cut gives one component per phase") {
    const auto mesh = unit_mesh(10);
    const auto phi = LevelSet::interpolate(mesh, [](const Point& p) { return p.x - 0.55; });
    const auto cg = build_cut_graph(mesh, build_cut(mesh, phi));
    const auto col = colour_graph(cg.graph);
    check_colouring_valid(cg.graph, col);
    CHECK(col.count() == 2);
    CHECK(count_state(col, Phase::In) == 1);
  }
  SUBCASE("two circles give two inside colours and one outside") {
    const auto mesh = unit_mesh(32);
    const auto phi =
        LevelSet::interpolate(mesh, union_of(circle({0.3, 0.3}, 0.15), circle({0.7, 0.7}, 0.15)));
    const auto cg = build_cut_graph(mesh, build_cut(mesh, phi));
    const auto col = colour_graph(cg.graph);
    CHECK(col.count() == 3);
    CHECK(count_state(col, Phase::In) == 2);
    CHECK(same_partition(col.colour, oracle_components(cg.graph)));
  }
  SUBCASE("adjacency is symmetric") {
    const auto mesh = unit_mesh(16);
    const auto cg = build_cut_graph(mesh, build_cut(mesh, on_mesh(mesh, "coscos")));
    for (int v = 0; v < static_cast<int>(cg.graph.size()); ++v)
      for (int w : cg.graph.neighbours(v)) {
        const auto nb = cg.graph.neighbours(w);
        CHECK(std::find(nb.begin(), nb.end(), v) != nb.end());
      }
  }
}

TEST_CASE("colour_volume floods one same-state run") {
  SUBCASE("isolated vertex") {
    const auto g = make_graph({Phase::In, Phase::In}, {});
    std::vector<int> c(2, 0);
    colour_volume(0, 1, g, c);
    CHECK(c == std::vector<int>{1, 0});
  }
  SUBCASE("uniform path") {
    const auto g = path_graph(std::vector<Phase>(5, Phase::Out));
    std::vector<int> c(5, 0);
    colour_volume(2, 7, g, c);
    CHECK(c == std::vector<int>(5, 7));
  }
  SUBCASE("mixed path") {
    const auto g = path_graph({Phase::In, Phase::Out, Phase::Out, Phase::Out, Phase::In, Phase::Out});
    std::vector<int> c(6, 0);
    colour_volume(2, 1, g, c);
    CHECK(c == std::vector<int>{0, 1, 1, 1, 0, 0});
    const auto col = colour_graph(g);
    CHECK(col.colour == std::vector<int>{1, 2, 2, 2, 3, 4});
  }
}

TEST_CASE("colouring matches a union-find oracle on random level sets") {
  std::mt19937 rng(2024);
  const auto mesh = unit_mesh(32);
  int mismatches = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto cg = build_cut_graph(mesh, build_cut(mesh, random_level_set(mesh, rng)));
    const auto col = colour_graph(cg.graph);
    check_colouring_valid(cg.graph, col);
    const auto oracle = oracle_components(cg.graph);
    const std::set<int> roots(oracle.begin(), oracle.end());
    if (static_cast<int>(roots.size()) != col.count() || !same_partition(col.colour, oracle)) ++mismatches;
    // Repeatable.
    CHECK(colour_graph(cg.graph).colour == col.colour);
  }
  CHECK(mismatches == 0);
}

TEST_CASE("distributed colouring is bijective to the serial one") {
  std::mt19937 rng(7);
  std::uniform_int_distribution<int> parts(2, 8);
  const auto mesh = unit_mesh(32);
  int failures = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto cg = build_cut_graph(mesh, build_cut(mesh, random_level_set(mesh, rng)));
    const int np = parts(rng);
    const auto owner = random_owner(mesh, cg, np, static_cast<unsigned>(rng()));
    const auto pg = partition_graph(cg.graph, owner, np);
    const auto dist = colour_distributed(pg);
    const auto serial = colour_graph(cg.graph);
    bool ok = dist.global.count() == serial.count() && same_partition(dist.global.colour, serial.colour);
    for (std::size_t v = 0; ok && v < cg.graph.size(); ++v)
      ok = dist.global.colour_state[dist.global.colour[v] - 1] == serial.colour_state[serial.colour[v] - 1];
    failures += !ok;
  }
  CHECK(failures == 0);
}

TEST_CASE("single part reproduces the serial colouring") {
  const auto mesh = unit_mesh(16);
  const auto cg = build_cut_graph(mesh, build_cut(mesh, on_mesh(mesh, "coscos")));
  const std::vector<int> owner(cg.graph.size(), 0);
  const auto dist = colour_distributed(partition_graph(cg.graph, owner, 1));
  const auto serial = colour_graph(cg.graph);
  CHECK(dist.global.colour == serial.colour);
  CHECK(dist.local[0].colour == serial.colour);
}

TEST_CASE("snake volume over four parts") {
  const auto mesh = unit_mesh(32);
  const auto cg = build_cut_graph(mesh, build_cut(mesh, on_mesh(mesh, "snake")));
  const auto owner = quadrant_owner(mesh, cg);
  const auto dist = colour_distributed(partition_graph(cg.graph, owner, 4));
  int local_in = 0;
  for (const auto& col : dist.local) local_in += count_state(col, Phase::In);
  CHECK(local_in >= 4);
  CHECK(count_state(dist.global, Phase::In) == 1);

  std::map<MessageKind, int> kinds;
  for (const auto& m : dist.messages) ++kinds[m.kind];
  CHECK(kinds[MessageKind::PairGather] == 4);
  CHECK(kinds[MessageKind::ColourScatter] == 4);
  CHECK(kinds[MessageKind::GhostColours] >= 4);
}

TEST_CASE("partition integrity") {
  const auto g = path_graph({Phase::In, Phase::In, Phase::Out});
  CHECK_THROWS_AS(partition_graph(g, std::vector<int>{0, 1, 2}, 2), PartitionIntegrityError);
  auto pg = partition_graph(g, std::vector<int>{0, 0, 1}, 2);
  // Corrupt the state of a ghost copy.
  auto& part = pg.parts[1];
  REQUIRE(part.local.size() > static_cast<std::size_t>(part.num_owned));
  part.local.state[part.num_owned] = opposite(part.local.state[part.num_owned]);
  CHECK_THROWS_AS(colour_distributed(pg), PartitionIntegrityError);
}

TEST_CASE("isolated volumes relative to the Dirichlet boundary") {
  const auto mesh = unit_mesh(32);
  const auto left = edges_with_tags(mesh, {"left"});
  const auto mark = [&](const LevelSet& phi) {
    const auto cut = build_cut(mesh, phi);
    const auto cg = build_cut_graph(mesh, cut);
    return std::make_pair(cut, mark_isolated(cg, colour_graph(cg.graph), mesh, left));
  };
  SUBCASE("anchored body") {
    const auto [cut, psi] = mark(LevelSet::interpolate(mesh, circle({0.0, 0.5}, 0.4)));
    for (double x : psi) CHECK(x == 0.0);
  }
  SUBCASE("floating blob") {
    const auto [cut, psi] =
        mark(LevelSet::interpolate(mesh, union_of(circle({0.0, 0.5}, 0.3), circle({0.7, 0.5}, 0.15))));
    for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
      const auto x = mesh.corners(static_cast<int>(c));
      const bool right = (x[0].x + x[1].x + x[2].x) / 3.0 > 0.45;
      const bool has_in = cut.states[c] != CellState::Out;
      CHECK(psi[c] == (right && has_in ? 1.0 : 0.0));
    }
  }
  SUBCASE("volumes one cell layer apart") {
    // Two vertical bands separated by a gap narrower than a cell.
    const double h = 1.0 / 32;
    const auto phi = LevelSet::interpolate(mesh, [h](const Point& p) {
      return std::min(p.x - (0.5 - 0.3 * h), std::max((0.5 + 0.3 * h) - p.x, p.x - 0.9));
    });
    const auto [cut, psi] = mark(phi);
    const auto cg = build_cut_graph(mesh, cut);
    CHECK(count_state(colour_graph(cg.graph), Phase::In) == 2);
    bool right_flagged = false, left_flagged = false;
    for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
      const auto x = mesh.corners(static_cast<int>(c));
      const double cx = (x[0].x + x[1].x + x[2].x) / 3.0;
      if (psi[c] == 1.0) (cx > 0.5 ? right_flagged : left_flagged) = true;
    }
    CHECK(right_flagged);
    CHECK(!left_flagged);
  }
}
