#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace pushpull {

// Directed communication graph. An edge (src -> dst) means dst can receive
// from src. Edges are kept sorted and duplicate-free; self-loops are stored
// only when supplied explicitly (mixing-matrix construction adds its own
// diagonal regardless).
struct DirectedGraph {
  int n = 0;
  std::vector<std::pair<int, int>> edges;  // (src, dst), sorted, unique

  bool has_edge(int src, int dst) const;
};

// Validates indices, sorts, and rejects duplicates.
DirectedGraph make_graph(int n, std::vector<std::pair<int, int>> edges);

enum class TopologyKind { Ring, MultiSubRing, Exponential, Complete, Custom };

struct TopologySpec {
  TopologyKind kind = TopologyKind::Ring;
  int n = 0;
  int sub_rings = 2;  // MultiSubRing
  int root = 0;       // MultiSubRing
  std::vector<std::pair<int, int>> custom_edges;
};

// i -> (i+1) mod n for every node; n = 1 yields no edges.
DirectedGraph gen_ring(int n);

// Power-of-two offsets: i -> (i + 2^j) mod n for 2^j < n.
DirectedGraph gen_exponential(int n);

// All ordered pairs of distinct nodes.
DirectedGraph gen_complete(int n);

// s directed sub-rings sharing one root: the non-root nodes are split into s
// contiguous blocks, each forming a path root -> block -> root. Both returned
// graphs are the same structure; spanning trees are extracted separately.
std::pair<DirectedGraph, DirectedGraph> gen_multi_sub_ring(int n, int s, int root);

DirectedGraph build_topology(const TopologySpec& spec);

// Breadth-first out-tree rooted at `root`, neighbors explored in ascending
// index order. Exactly n-1 edges; throws AssumptionError naming the first
// unreachable node.
DirectedGraph extract_spanning_tree(const DirectedGraph& g, int root);

bool is_strongly_connected(const DirectedGraph& g);

DirectedGraph reverse(const DirectedGraph& g);

// Nodes from which every node is reachable (following edge direction).
std::vector<int> spanning_roots(const DirectedGraph& g);

std::vector<std::vector<int>> in_neighbors(const DirectedGraph& g);
std::vector<std::vector<int>> out_neighbors(const DirectedGraph& g);

// Edge-list text format: first line "n <count>", then "src dst" pairs,
// '#' starts a comment.
DirectedGraph parse_edge_list(std::istream& in);
DirectedGraph parse_edge_list_file(const std::string& path);
std::string format_edge_list(const DirectedGraph& g);

std::string to_string(TopologyKind kind);
TopologyKind topology_kind_from_string(const std::string& name);

}  // namespace pushpull
