#include "pushpull/graph.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <sstream>

#include "pushpull/errors.hpp"

namespace pushpull {

bool DirectedGraph::has_edge(int src, int dst) const {
  return std::binary_search(edges.begin(), edges.end(), std::make_pair(src, dst));
}

DirectedGraph make_graph(int n, std::vector<std::pair<int, int>> edges) {
  if (n < 1) throw ConfigError("graph: node count must be positive");
  for (const auto& [src, dst] : edges) {
    if (src < 0 || src >= n || dst < 0 || dst >= n)
      throw ConfigError("graph: edge (" + std::to_string(src) + " -> " + std::to_string(dst) +
                        ") out of range for n=" + std::to_string(n));
  }
  std::sort(edges.begin(), edges.end());
  if (std::adjacent_find(edges.begin(), edges.end()) != edges.end())
    throw ConfigError("graph: duplicate edge in input");
  return DirectedGraph{n, std::move(edges)};
}

DirectedGraph gen_ring(int n) {
  if (n < 1) throw ConfigError("gen_ring: n must be >= 1");
  std::vector<std::pair<int, int>> edges;
  if (n > 1) {
    edges.reserve(n);
    for (int i = 0; i < n; ++i) edges.emplace_back(i, (i + 1) % n);
  }
  return make_graph(n, std::move(edges));
}

DirectedGraph gen_exponential(int n) {
  if (n < 1) throw ConfigError("gen_exponential: n must be >= 1");
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i) {
    for (long long off = 1; off < n; off *= 2) {
      edges.emplace_back(i, static_cast<int>((i + off) % n));
    }
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return DirectedGraph{n, std::move(edges)};
}

DirectedGraph gen_complete(int n) {
  if (n < 1) throw ConfigError("gen_complete: n must be >= 1");
  std::vector<std::pair<int, int>> edges;
  edges.reserve(static_cast<std::size_t>(n) * (n - 1));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) edges.emplace_back(i, j);
  return make_graph(n, std::move(edges));
}

std::pair<DirectedGraph, DirectedGraph> gen_multi_sub_ring(int n, int s, int root) {
  if (n < 1) throw ConfigError("gen_multi_sub_ring: n must be >= 1");
  if (s < 2 || s > n - 1)
    throw ConfigError("gen_multi_sub_ring: sub-ring count " + std::to_string(s) +
                      " outside [2, n-1] for n=" + std::to_string(n));
  if (root < 0 || root >= n) throw ConfigError("gen_multi_sub_ring: root out of range");

  std::vector<int> others;
  others.reserve(n - 1);
  for (int i = 0; i < n; ++i)
    if (i != root) others.push_back(i);

  const int m = static_cast<int>(others.size());
  const int base = m / s;
  const int extra = m % s;  // first `extra` blocks get one more node

  std::vector<std::pair<int, int>> edges;
  edges.reserve(m + s);
  int pos = 0;
  for (int b = 0; b < s; ++b) {
    const int len = base + (b < extra ? 1 : 0);
    int prev = root;
    for (int t = 0; t < len; ++t) {
      edges.emplace_back(prev, others[pos]);
      prev = others[pos];
      ++pos;
    }
    edges.emplace_back(prev, root);
  }
  DirectedGraph g = make_graph(n, std::move(edges));
  return {g, g};
}

DirectedGraph build_topology(const TopologySpec& spec) {
  switch (spec.kind) {
    case TopologyKind::Ring:
      return gen_ring(spec.n);
    case TopologyKind::Exponential:
      return gen_exponential(spec.n);
    case TopologyKind::Complete:
      return gen_complete(spec.n);
    case TopologyKind::MultiSubRing:
      return gen_multi_sub_ring(spec.n, spec.sub_rings, spec.root).first;
    case TopologyKind::Custom:
      return make_graph(spec.n, spec.custom_edges);
  }
  throw ConfigError("build_topology: unknown kind");
}

namespace {

std::vector<char> reachable_from(const std::vector<std::vector<int>>& adj, int n, int start) {
  std::vector<char> seen(n, 0);
  std::deque<int> queue{start};
  seen[start] = 1;
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    for (int v : adj[u]) {
      if (!seen[v]) {
        seen[v] = 1;
        queue.push_back(v);
      }
    }
  }
  return seen;
}

}  // namespace

std::vector<std::vector<int>> out_neighbors(const DirectedGraph& g) {
  std::vector<std::vector<int>> adj(g.n);
  for (const auto& [src, dst] : g.edges) adj[src].push_back(dst);
  return adj;  // already ascending: edges are sorted by (src, dst)
}

std::vector<std::vector<int>> in_neighbors(const DirectedGraph& g) {
  std::vector<std::vector<int>> adj(g.n);
  for (const auto& [src, dst] : g.edges) adj[dst].push_back(src);
  for (auto& v : adj) std::sort(v.begin(), v.end());
  return adj;
}

DirectedGraph extract_spanning_tree(const DirectedGraph& g, int root) {
  if (root < 0 || root >= g.n) throw ConfigError("extract_spanning_tree: root out of range");
  const auto adj = out_neighbors(g);
  std::vector<char> seen(g.n, 0);
  std::deque<int> queue{root};
  seen[root] = 1;
  std::vector<std::pair<int, int>> tree;
  tree.reserve(g.n - 1);
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    for (int v : adj[u]) {
      if (!seen[v]) {
        seen[v] = 1;
        tree.emplace_back(u, v);
        queue.push_back(v);
      }
    }
  }
  for (int i = 0; i < g.n; ++i)
    if (!seen[i])
      throw AssumptionError("extract_spanning_tree: node " + std::to_string(i) +
                            " not reachable from root " + std::to_string(root));
  return make_graph(g.n, std::move(tree));
}

bool is_strongly_connected(const DirectedGraph& g) {
  if (g.n <= 1) return true;
  const auto fwd = reachable_from(out_neighbors(g), g.n, 0);
  const auto bwd = reachable_from(in_neighbors(g), g.n, 0);
  for (int i = 0; i < g.n; ++i)
    if (!fwd[i] || !bwd[i]) return false;
  return true;
}

DirectedGraph reverse(const DirectedGraph& g) {
  std::vector<std::pair<int, int>> edges;
  edges.reserve(g.edges.size());
  for (const auto& [src, dst] : g.edges) edges.emplace_back(dst, src);
  std::sort(edges.begin(), edges.end());
  return DirectedGraph{g.n, std::move(edges)};
}

std::vector<int> spanning_roots(const DirectedGraph& g) {
  const auto adj = out_neighbors(g);
  std::vector<int> roots;
  for (int r = 0; r < g.n; ++r) {
    const auto seen = reachable_from(adj, g.n, r);
    if (std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; })) roots.push_back(r);
  }
  return roots;
}

DirectedGraph parse_edge_list(std::istream& in) {
  std::string line;
  int lineno = 0;
  int n = -1;
  std::vector<std::pair<int, int>> edges;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    if (n < 0) {
      std::string tag;
      if (!(ss >> tag)) continue;  // blank before header
      int count = 0;
      if (tag != "n" || !(ss >> count) || count < 1)
        throw ConfigError("edge list line " + std::to_string(lineno) +
                          ": expected header \"n <count>\"");
      n = count;
      continue;
    }
    int src, dst;
    if (!(ss >> src)) continue;  // blank line
    if (!(ss >> dst))
      throw ConfigError("edge list line " + std::to_string(lineno) + ": expected \"src dst\"");
    edges.emplace_back(src, dst);
  }
  if (n < 0) throw ConfigError("edge list: missing \"n <count>\" header");
  try {
    return make_graph(n, std::move(edges));
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("edge list: ") + e.what());
  }
}

DirectedGraph parse_edge_list_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open graph file: " + path);
  return parse_edge_list(in);
}

std::string format_edge_list(const DirectedGraph& g) {
  std::ostringstream out;
  out << "n " << g.n << "\n";
  for (const auto& [src, dst] : g.edges) out << src << " " << dst << "\n";
  return out.str();
}

std::string to_string(TopologyKind kind) {
  switch (kind) {
    case TopologyKind::Ring:
      return "ring";
    case TopologyKind::MultiSubRing:
      return "multi_sub_ring";
    case TopologyKind::Exponential:
      return "exponential";
    case TopologyKind::Complete:
      return "complete";
    case TopologyKind::Custom:
      return "custom";
  }
  return "?";
}

TopologyKind topology_kind_from_string(const std::string& name) {
  if (name == "ring") return TopologyKind::Ring;
  if (name == "multi_sub_ring") return TopologyKind::MultiSubRing;
  if (name == "exponential") return TopologyKind::Exponential;
  if (name == "complete") return TopologyKind::Complete;
  if (name == "custom") return TopologyKind::Custom;
  throw ConfigError("unknown topology '" + name +
                    "' (valid: ring, multi_sub_ring, exponential, complete, custom)");
}

}  // namespace pushpull
