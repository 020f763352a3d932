#include "cutform/isolated.hpp"

#include <algorithm>
#include <climits>
#include <deque>
#include <numeric>
#include <random>
#include <unordered_map>

namespace cutform {

Graph make_graph(std::vector<Phase> state, std::span<const std::array<int, 2>> edges) {
  Graph g;
  g.state = std::move(state);
  const std::size_t n = g.state.size();
  std::vector<int> degree(n, 0);
  for (const auto& e : edges) {
    ++degree[e[0]];
    ++degree[e[1]];
  }
  g.offsets.assign(n + 1, 0);
  for (std::size_t v = 0; v < n; ++v) g.offsets[v + 1] = g.offsets[v] + degree[v];
  g.adjacency.resize(g.offsets[n]);
  std::vector<int> fill(g.offsets.begin(), g.offsets.end() - 1);
  for (const auto& e : edges) {
    g.adjacency[fill[e[0]]++] = e[1];
    g.adjacency[fill[e[1]]++] = e[0];
  }
  for (std::size_t v = 0; v < n; ++v) std::sort(g.adjacency.begin() + g.offsets[v], g.adjacency.begin() + g.offsets[v + 1]);
  return g;
}

namespace {

std::uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

/// Mesh edge containing the segment between two global point ids, or -1.
int host_edge(const Mesh2D& mesh, int a, int b) {
  const int nv = static_cast<int>(mesh.num_vertices());
  if (a >= nv && b >= nv) return a == b ? a - nv : -1;
  if (a >= nv) std::swap(a, b);
  if (b < nv) return mesh.find_edge(a, b);
  const int e = b - nv;
  const auto& ed = mesh.edge(e);
  return (ed[0] == a || ed[1] == a) ? e : -1;
}

}  // namespace

CutGraph build_cut_graph(const Mesh2D& mesh, const CutTopology<double>& cut) {
  CutGraph cg;
  std::vector<Phase> state;
  cg.first_vertex.assign(mesh.num_cells() + 1, 0);
  for (int c = 0; c < static_cast<int>(mesh.num_cells()); ++c) {
    cg.first_vertex[c] = static_cast<int>(cg.cell.size());
    if (const auto* cc = cut.cut_of(c)) {
      for (const auto& s : cc->subs) {
        cg.cell.push_back(c);
        state.push_back(s.phase);
        cg.points.push_back({global_point_id(mesh, c, s.points[0]), global_point_id(mesh, c, s.points[1]),
                             global_point_id(mesh, c, s.points[2])});
      }
    } else {
      cg.cell.push_back(c);
      state.push_back(cut.states[c] == CellState::In ? Phase::In : Phase::Out);
      cg.points.push_back(mesh.triangle(c));
    }
  }
  cg.first_vertex[mesh.num_cells()] = static_cast<int>(cg.cell.size());

  std::unordered_map<std::uint64_t, std::array<int, 2>> owners;
  owners.reserve(cg.cell.size() * 2);
  std::vector<std::array<int, 2>> edges;
  for (int v = 0; v < static_cast<int>(cg.points.size()); ++v) {
    const auto& p = cg.points[v];
    for (int k = 0; k < 3; ++k) {
      auto [it, fresh] = owners.try_emplace(edge_key(p[k], p[(k + 1) % 3]), std::array<int, 2>{v, -1});
      if (fresh) continue;
      if (it->second[1] >= 0) throw TopologyError("cut mesh edge shared by more than two triangles");
      it->second[1] = v;
      edges.push_back({it->second[0], v});
    }
  }
  for (const auto& [key, own] : owners) {
    if (own[1] >= 0) continue;
    const int a = static_cast<int>(key >> 32), b = static_cast<int>(key & 0xffffffffu);
    const int e = host_edge(mesh, a, b);
    if (e < 0 || !mesh.is_boundary_edge(e)) throw TopologyError("cut mesh is not conforming: dangling interior edge");
  }
  std::sort(edges.begin(), edges.end());
  cg.graph = make_graph(std::move(state), edges);
  return cg;
}

void colour_volume(int v0, int c, const Graph& graph, std::vector<int>& colour) {
  const Phase s = graph.state[v0];
  std::deque<int> queue{v0};
  colour[v0] = c;
  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop_front();
    for (int w : graph.neighbours(v)) {
      if (colour[w] == 0 && graph.state[w] == s) {
        colour[w] = c;
        queue.push_back(w);
      }
    }
  }
}

Colouring colour_graph(const Graph& graph) {
  Colouring out;
  out.colour.assign(graph.size(), 0);
  for (int v = 0; v < static_cast<int>(graph.size()); ++v) {
    if (out.colour[v] != 0) continue;
    out.colour_state.push_back(graph.state[v]);
    colour_volume(v, out.count(), graph, out.colour);
  }
  return out;
}

PartitionedGraph partition_graph(const Graph& graph, std::span<const int> owner, int num_parts) {
  if (owner.size() != graph.size()) throw InvalidArgument("owner list does not match the graph");
  if (num_parts < 1) throw InvalidArgument("need at least one part");
  for (int p : owner)
    if (p < 0 || p >= num_parts) throw PartitionIntegrityError("vertex owner outside the part range");
  PartitionedGraph pg;
  pg.num_global = graph.size();
  pg.parts.resize(num_parts);
  std::vector<int> local(graph.size(), -1);
  for (int p = 0; p < num_parts; ++p) {
    GraphPart& part = pg.parts[p];
    for (int v = 0; v < static_cast<int>(graph.size()); ++v)
      if (owner[v] == p) part.global_ids.push_back(v);
    part.num_owned = static_cast<int>(part.global_ids.size());
    for (int i = 0; i < part.num_owned; ++i) local[part.global_ids[i]] = i;
    std::vector<std::array<int, 2>> edges;
    for (int i = 0; i < part.num_owned; ++i) {
      const int v = part.global_ids[i];
      for (int w : graph.neighbours(v)) {
        if (owner[w] == p) {
          if (v < w) edges.push_back({i, local[w]});
          continue;
        }
        if (local[w] < 0) {
          local[w] = static_cast<int>(part.global_ids.size());
          part.global_ids.push_back(w);
          part.ghost_owner.push_back(owner[w]);
        }
        edges.push_back({i, local[w]});
      }
    }
    std::vector<Phase> state;
    for (int v : part.global_ids) state.push_back(graph.state[v]);
    part.local = make_graph(std::move(state), edges);
    for (int v : part.global_ids) local[v] = -1;
  }
  return pg;
}

namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

}  // namespace

DistributedColouring colour_distributed(const PartitionedGraph& pg) {
  const int np = static_cast<int>(pg.parts.size());
  DistributedColouring out;

  // Phase 1: independent local colourings.
  for (const auto& part : pg.parts) out.local.push_back(colour_graph(part.local));

  // Ownership check and global-to-local maps for owned vertices.
  std::vector<int> owner(pg.num_global, -1), owned_local(pg.num_global, -1);
  for (int p = 0; p < np; ++p) {
    const auto& part = pg.parts[p];
    for (int i = 0; i < part.num_owned; ++i) {
      const int g = part.global_ids[i];
      if (owner[g] >= 0) throw PartitionIntegrityError("vertex owned by more than one part");
      owner[g] = p;
      owned_local[g] = i;
    }
  }
  for (int g : owner)
    if (g < 0) throw PartitionIntegrityError("vertex not owned by any part");

  // Phase 2a: each owner tells every neighbour the colour and state of the
  // vertices that neighbour holds as ghosts. Payload: (global id, colour, state).
  for (int p = 0; p < np; ++p) {
    const auto& part = pg.parts[p];
    std::vector<std::vector<int>> wanted(np);
    for (std::size_t k = 0; k < part.ghost_owner.size(); ++k)
      wanted[part.ghost_owner[k]].push_back(part.global_ids[part.num_owned + k]);
    for (int q = 0; q < np; ++q) {
      if (wanted[q].empty()) continue;
      Message msg{q, p, MessageKind::GhostColours, {}};
      for (int g : wanted[q]) {
        const int i = owned_local[g];
        msg.payload.insert(msg.payload.end(),
                           {g, out.local[q].colour[i], static_cast<std::int64_t>(pg.parts[q].local.state[i])});
      }
      out.messages.push_back(std::move(msg));
    }
  }

  // Phase 2b: each part pairs its ghost colours with the owner's colours and
  // sends the pairs plus the smallest owned global id per local colour.
  // Payload: count, then (colour, min id) per colour, then (colour, owner, owner colour) per ghost.
  std::vector<std::vector<Message*>> inbox(np);
  for (auto& m : out.messages) inbox[m.to].push_back(&m);
  std::vector<Message> gather;
  for (int p = 0; p < np; ++p) {
    const auto& part = pg.parts[p];
    const auto& col = out.local[p];
    std::unordered_map<int, int> ghost_local;
    for (std::size_t k = 0; k < part.ghost_owner.size(); ++k)
      ghost_local[part.global_ids[part.num_owned + k]] = part.num_owned + static_cast<int>(k);
    Message msg{p, -1, MessageKind::PairGather, {}};
    msg.payload.push_back(col.count());
    std::vector<int> min_id(col.count(), INT_MAX);
    for (int i = 0; i < part.num_owned; ++i)
      min_id[col.colour[i] - 1] = std::min(min_id[col.colour[i] - 1], part.global_ids[i]);
    for (int c = 0; c < col.count(); ++c) msg.payload.insert(msg.payload.end(), {c + 1, min_id[c]});
    for (const Message* in : inbox[p]) {
      for (std::size_t k = 0; k < in->payload.size(); k += 3) {
        const int li = ghost_local.at(static_cast<int>(in->payload[k]));
        if (static_cast<std::int64_t>(part.local.state[li]) != in->payload[k + 2])
          throw PartitionIntegrityError("ghost state disagrees with its owner");
        msg.payload.insert(msg.payload.end(), {col.colour[li], in->from, in->payload[k + 1]});
      }
    }
    gather.push_back(std::move(msg));
  }

  // Coordinator: union-find over (part, local colour).
  std::vector<int> base(np + 1, 0);
  for (int p = 0; p < np; ++p) base[p + 1] = base[p] + out.local[p].count();
  UnionFind uf(base[np]);
  std::vector<long long> min_id(base[np], LLONG_MAX);
  for (const auto& msg : gather) {
    const int p = msg.from;
    const int count = static_cast<int>(msg.payload[0]);
    for (int c = 0; c < count; ++c) {
      const auto id = msg.payload[2 + 2 * c];
      min_id[base[p] + msg.payload[1 + 2 * c] - 1] = id == INT_MAX ? LLONG_MAX : id;
    }
    for (std::size_t k = 1 + 2 * count; k < msg.payload.size(); k += 3)
      uf.unite(base[p] + static_cast<int>(msg.payload[k]) - 1,
               base[msg.payload[k + 1]] + static_cast<int>(msg.payload[k + 2]) - 1);
  }
  std::vector<long long> root_min(base[np], LLONG_MAX);
  for (int n = 0; n < base[np]; ++n) root_min[uf.find(n)] = std::min(root_min[uf.find(n)], min_id[n]);
  std::vector<std::pair<long long, int>> roots;
  for (int n = 0; n < base[np]; ++n)
    if (uf.find(n) == n) roots.emplace_back(root_min[n], n);
  std::sort(roots.begin(), roots.end());
  std::vector<int> global_of_root(base[np], 0);
  for (std::size_t k = 0; k < roots.size(); ++k) global_of_root[roots[k].second] = static_cast<int>(k) + 1;
  out.messages.insert(out.messages.end(), gather.begin(), gather.end());

  // Scatter: each part learns the global id of its local colours.
  out.local_to_global.resize(np);
  for (int p = 0; p < np; ++p) {
    Message msg{-1, p, MessageKind::ColourScatter, {}};
    for (int c = 0; c < out.local[p].count(); ++c) {
      const int g = global_of_root[uf.find(base[p] + c)];
      out.local_to_global[p].push_back(g);
      msg.payload.push_back(g);
    }
    out.messages.push_back(std::move(msg));
  }

  out.global.colour.assign(pg.num_global, 0);
  out.global.colour_state.assign(roots.size(), Phase::In);
  for (int p = 0; p < np; ++p) {
    const auto& part = pg.parts[p];
    for (int i = 0; i < part.num_owned; ++i) {
      const int g = out.local_to_global[p][out.local[p].colour[i] - 1];
      out.global.colour[part.global_ids[i]] = g;
      out.global.colour_state[g - 1] = part.local.state[i];
    }
  }
  return out;
}

std::vector<int> edges_with_tags(const Mesh2D& mesh, const std::vector<std::string>& tags) {
  std::vector<int> out;
  for (const auto& t : tags) {
    const auto& e = mesh.tagged_edges(t);
    out.insert(out.end(), e.begin(), e.end());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<double> mark_isolated(const CutGraph& graph, const Colouring& colouring, const Mesh2D& mesh,
                                  std::span<const int> dirichlet_edges, Phase phase) {
  std::vector<char> dirichlet(mesh.num_edges(), 0);
  for (int e : dirichlet_edges) dirichlet[e] = 1;
  std::vector<char> anchored(colouring.count() + 1, 0);
  for (std::size_t v = 0; v < graph.graph.size(); ++v) {
    const auto& p = graph.points[v];
    for (int k = 0; k < 3; ++k) {
      const int e = host_edge(mesh, p[k], p[(k + 1) % 3]);
      if (e >= 0 && dirichlet[e]) anchored[colouring.colour[v]] = 1;
    }
  }
  std::vector<double> psi(mesh.num_cells(), 0.0);
  for (std::size_t v = 0; v < graph.graph.size(); ++v)
    if (graph.graph.state[v] == phase && !anchored[colouring.colour[v]]) psi[graph.cell[v]] = 1.0;
  return psi;
}

namespace {

Point centroid(const Mesh2D& mesh, int c) {
  const auto x = mesh.corners(c);
  return (x[0] + x[1] + x[2]) / 3.0;
}

}  // namespace

std::vector<int> quadrant_owner(const Mesh2D& mesh, const CutGraph& graph) {
  const auto box = mesh.bounding_box();
  const Point mid = 0.5 * (box.lower + box.upper);
  std::vector<int> owner(graph.cell.size());
  for (std::size_t v = 0; v < owner.size(); ++v) {
    const Point x = centroid(mesh, graph.cell[v]);
    owner[v] = (x.x >= mid.x ? 1 : 0) + (x.y >= mid.y ? 2 : 0);
  }
  return owner;
}

std::vector<int> random_owner(const Mesh2D& mesh, const CutGraph& graph, int num_parts, unsigned seed) {
  const int nc = static_cast<int>(mesh.num_cells());
  if (num_parts < 1 || num_parts > nc) throw InvalidArgument("part count must be in [1, number of cells]");
  std::mt19937 rng(seed);
  std::vector<int> cells(nc);
  std::iota(cells.begin(), cells.end(), 0);
  std::shuffle(cells.begin(), cells.end(), rng);
  std::vector<Point> seeds;
  for (int k = 0; k < num_parts; ++k) seeds.push_back(centroid(mesh, cells[k]));
  std::vector<int> cell_owner(nc);
  for (int c = 0; c < nc; ++c) {
    const Point x = centroid(mesh, c);
    int best = 0;
    for (int k = 1; k < num_parts; ++k)
      if (norm(x - seeds[k]) < norm(x - seeds[best])) best = k;
    cell_owner[c] = best;
  }
  std::vector<int> owner(graph.cell.size());
  for (std::size_t v = 0; v < owner.size(); ++v) owner[v] = cell_owner[graph.cell[v]];
  return owner;
}

}  // namespace cutform
