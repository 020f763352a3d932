#pragma once

// Connectivity of the cut mesh and detection of isolated volumes.
//
// Graph vertices are the sub-triangles of cut cells plus the uncut cells; two
// vertices are adjacent when their triangles share a full edge. Colouring
// groups adjacent vertices of equal state.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cutform/cut.hpp"
#include "cutform/mesh.hpp"

namespace cutform {

/// Undirected graph in CSR form with a two-valued state per vertex.
struct Graph {
  std::vector<int> offsets{0};
  std::vector<int> adjacency;
  std::vector<Phase> state;

  std::size_t size() const { return state.size(); }
  std::span<const int> neighbours(int v) const {
    return {adjacency.data() + offsets[v], static_cast<std::size_t>(offsets[v + 1] - offsets[v])};
  }
};

/// Builds a CSR graph from an edge list (each undirected edge once).
Graph make_graph(std::vector<Phase> state, std::span<const std::array<int, 2>> edges);

struct CutGraph {
  Graph graph;
  /// Background cell of each vertex.
  std::vector<int> cell;
  /// Global point ids of each vertex's triangle corners: mesh vertices, then
  /// num_vertices + edge id for interface points.
  std::vector<std::array<int, 3>> points;
  /// Vertices of background cell c are first_vertex[c] .. first_vertex[c+1]-1.
  std::vector<int> first_vertex;
};

CutGraph build_cut_graph(const Mesh2D& mesh, const CutTopology<double>& cut);

struct Colouring {
  /// Colour of each vertex, numbered from 1; 0 means uncoloured.
  std::vector<int> colour;
  /// State of colour k at index k - 1.
  std::vector<Phase> colour_state;

  int count() const { return static_cast<int>(colour_state.size()); }
};

/// Breadth-first flood of colour c from v0 through vertices of v0's state.
void colour_volume(int v0, int c, const Graph& graph, std::vector<int>& colour);

/// Scans vertices in index order; every uncoloured vertex opens a new colour.
Colouring colour_graph(const Graph& graph);

/// One part of a partitioned graph: owned vertices first, then one layer of
/// ghosts owned by other parts.
struct GraphPart {
  Graph local;
  std::vector<int> global_ids;
  int num_owned = 0;
  /// Owner part of each ghost, indexed by local id - num_owned.
  std::vector<int> ghost_owner;
};

struct PartitionedGraph {
  std::vector<GraphPart> parts;
  std::size_t num_global = 0;
};

/// Splits `graph` by vertex owner (values in [0, num_parts)).
PartitionedGraph partition_graph(const Graph& graph, std::span<const int> owner, int num_parts);

enum class MessageKind { GhostColours, PairGather, ColourScatter };

/// One simulated message between parts; the coordinator is part -1.
struct Message {
  int from = 0;
  int to = 0;
  MessageKind kind = MessageKind::GhostColours;
  /// Flattened integers; layout depends on the kind.
  std::vector<std::int64_t> payload;
};

struct DistributedColouring {
  Colouring global;
  /// Phase-one colouring of each part (owned and ghost vertices).
  std::vector<Colouring> local;
  /// Global colour of each local colour, per part.
  std::vector<std::vector<int>> local_to_global;
  std::vector<Message> messages;
};

/// Local colouring per part, ghost-colour exchange between neighbours, a
/// gather of colour pairs to a coordinator that merges them with union-find,
/// and a scatter of the resulting global ids. Global colours are numbered in
/// order of their smallest global vertex id, as the serial scan does.
DistributedColouring colour_distributed(const PartitionedGraph& graph);

/// Per background cell: 1 when the cell's `phase` part belongs to a volume
/// that touches none of `dirichlet_edges`, else 0.
std::vector<double> mark_isolated(const CutGraph& graph, const Colouring& colouring, const Mesh2D& mesh,
                                  std::span<const int> dirichlet_edges, Phase phase = Phase::In);

/// Owner part of each cut-graph vertex by the quadrant of its background
/// cell's centroid about the mesh centre (4 parts).
std::vector<int> quadrant_owner(const Mesh2D& mesh, const CutGraph& graph);

/// Owner part by nearest of `num_parts` distinct random cell centroids
/// (a Voronoi partition); every part owns at least its seed cell.
std::vector<int> random_owner(const Mesh2D& mesh, const CutGraph& graph, int num_parts, unsigned seed);

/// Boundary edges carrying any of `tags`.
std::vector<int> edges_with_tags(const Mesh2D& mesh, const std::vector<std::string>& tags);

}  // namespace cutform
