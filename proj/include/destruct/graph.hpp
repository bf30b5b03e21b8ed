#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace destruct {

// Immutable simple undirected graph. Node ids are dense 0..n-1, neighbor
// lists sorted ascending. Builders live below; once built, a Graph is never
// mutated and is safe to share across threads.
struct Graph {
  int n = 0;
  std::vector<std::vector<int>> adj;
  // Optional dense node attribute table (n rows); empty when absent.
  std::vector<std::vector<double>> node_attrs;
  // Optional per-unordered-edge attributes, keyed by (min,max).
  std::map<std::pair<int, int>, std::vector<double>> edge_attrs;

  int degree(int v) const { return static_cast<int>(adj[v].size()); }

  bool has_edge(int u, int v) const {
    const auto& a = adj[u];
    return std::binary_search(a.begin(), a.end(), v);
  }

  std::size_t edge_count() const {
    std::size_t m = 0;
    for (const auto& a : adj) m += a.size();
    return m / 2;
  }

  int max_degree() const {
    int d = 0;
    for (int v = 0; v < n; ++v) d = std::max(d, degree(v));
    return d;
  }

  std::vector<std::pair<int, int>> edges() const {
    std::vector<std::pair<int, int>> e;
    e.reserve(edge_count());
    for (int u = 0; u < n; ++u)
      for (int v : adj[u])
        if (u < v) e.emplace_back(u, v);
    return e;
  }

  bool same_structure(const Graph& o) const { return n == o.n && adj == o.adj; }
};

// A bijection on 0..n-1; map[old_id] = new_id.
struct Permutation {
  std::vector<int> map;

  int size() const { return static_cast<int>(map.size()); }

  bool valid() const {
    std::vector<int> s = map;
    std::sort(s.begin(), s.end());
    for (int i = 0; i < static_cast<int>(s.size()); ++i)
      if (s[i] != i) return false;
    return true;
  }

  static Permutation identity(int n) {
    Permutation p;
    p.map.resize(n);
    std::iota(p.map.begin(), p.map.end(), 0);
    return p;
  }

  Permutation inverse() const {
    Permutation p;
    p.map.resize(map.size());
    for (int i = 0; i < size(); ++i) p.map[map[i]] = i;
    return p;
  }
};

// A node set of interest (|S| in 1..3 for the tasks here) paired with the
// graph it lives in.
struct TargetTuple {
  const Graph* graph = nullptr;
  std::vector<int> nodes;
};

inline void check_target(const Graph& g, const std::vector<int>& s) {
  if (s.empty() || static_cast<int>(s.size()) > g.n)
    throw std::invalid_argument("target set size out of range");
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] < 0 || s[i] >= g.n) throw std::invalid_argument("target node id out of range");
    for (std::size_t j = i + 1; j < s.size(); ++j)
      if (s[i] == s[j]) throw std::invalid_argument("target nodes must be distinct");
  }
}

// Builds a simple graph from an arbitrary edge list: symmetrizes, drops
// self-loops and duplicates. n is inferred as max id + 1 when not given.
inline Graph from_edge_list(const std::vector<std::pair<int, int>>& edges, int n = -1) {
  if (edges.empty() && n < 0) throw std::invalid_argument("empty graph undefined");
  int count = n;
  for (const auto& [u, v] : edges) {
    if (u < 0 || v < 0) throw std::invalid_argument("negative node id");
    count = std::max(count, std::max(u, v) + 1);
  }
  if (n >= 0) {
    for (const auto& [u, v] : edges)
      if (u >= n || v >= n) throw std::invalid_argument("edge id exceeds declared n");
    count = n;
  }
  Graph g;
  g.n = count;
  g.adj.assign(count, {});
  for (const auto& [u, v] : edges) {
    if (u == v) continue;
    g.adj[u].push_back(v);
    g.adj[v].push_back(u);
  }
  for (auto& a : g.adj) {
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
  }
  return g;
}

// Relabels g by pi (node v becomes pi.map[v]); attributes move with their
// nodes and edges.
inline Graph apply_permutation(const Graph& g, const Permutation& pi) {
  if (pi.size() != g.n) throw std::invalid_argument("permutation size mismatch");
  if (!pi.valid()) throw std::invalid_argument("permutation is not a bijection");
  Graph h;
  h.n = g.n;
  h.adj.assign(g.n, {});
  for (int u = 0; u < g.n; ++u)
    for (int v : g.adj[u])
      if (u < v) {
        h.adj[pi.map[u]].push_back(pi.map[v]);
        h.adj[pi.map[v]].push_back(pi.map[u]);
      }
  for (auto& a : h.adj) std::sort(a.begin(), a.end());
  if (!g.node_attrs.empty()) {
    h.node_attrs.assign(g.n, {});
    for (int v = 0; v < g.n; ++v) h.node_attrs[pi.map[v]] = g.node_attrs[v];
  }
  for (const auto& [e, val] : g.edge_attrs) {
    int a = pi.map[e.first], b = pi.map[e.second];
    h.edge_attrs[{std::min(a, b), std::max(a, b)}] = val;
  }
  return h;
}

inline std::vector<int> apply_permutation(const std::vector<int>& s, const Permutation& pi) {
  std::vector<int> t;
  t.reserve(s.size());
  for (int v : s) t.push_back(pi.map[v]);
  return t;
}

namespace detail {

inline bool tuple_matches(const std::vector<int>& s1, const std::vector<int>& s2,
                          const std::vector<int>& perm) {
  // set-wise: perm image of s1 must equal s2 as a set
  std::vector<int> img;
  img.reserve(s1.size());
  for (int v : s1) img.push_back(perm[v]);
  std::sort(img.begin(), img.end());
  std::vector<int> t = s2;
  std::sort(t.begin(), t.end());
  return img == t;
}

}  // namespace detail

// Exhaustive isomorphism check for tiny graphs (factorial search, n <= 9).
// When tuples are given, the witness permutation must also map s1 onto s2
// as sets.
inline bool brute_force_isomorphic(const Graph& g1, const Graph& g2,
                                   const std::vector<int>* s1 = nullptr,
                                   const std::vector<int>* s2 = nullptr) {
  if (g1.n != g2.n) return false;
  if (g1.n > 9) throw std::invalid_argument("brute force cap exceeded");
  if ((s1 == nullptr) != (s2 == nullptr)) throw std::invalid_argument("both tuples or neither");
  if (s1 && s1->size() != s2->size()) throw std::invalid_argument("tuple sizes differ");
  if (g1.edge_count() != g2.edge_count()) return false;

  std::vector<int> d1(g1.n), d2(g2.n);
  for (int v = 0; v < g1.n; ++v) d1[v] = g1.degree(v);
  for (int v = 0; v < g2.n; ++v) d2[v] = g2.degree(v);
  {
    auto a = d1, b = d2;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    if (a != b) return false;
  }

  std::vector<std::uint16_t> rows2(g2.n, 0);
  for (int u = 0; u < g2.n; ++u)
    for (int v : g2.adj[u]) rows2[u] |= static_cast<std::uint16_t>(1u << v);

  std::vector<int> perm(g1.n);
  std::iota(perm.begin(), perm.end(), 0);
  do {
    bool ok = true;
    for (int v = 0; v < g1.n && ok; ++v)
      if (d1[v] != d2[perm[v]]) ok = false;
    if (!ok) continue;
    for (int u = 0; u < g1.n && ok; ++u) {
      std::uint16_t mapped = 0;
      for (int v : g1.adj[u]) mapped |= static_cast<std::uint16_t>(1u << perm[v]);
      if (mapped != rows2[perm[u]]) ok = false;
    }
    if (!ok) continue;
    if (s1 && !detail::tuple_matches(*s1, *s2, perm)) continue;
    return true;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return false;
}

// ---- text formats -------------------------------------------------------
//
// Edge list: one edge per line "u v"; '#' starts a comment line; an optional
// header line "n=<count>" pins the node count. Label file: "<node_id> <label>"
// per line, same comment rule.

inline Graph load_edge_list(std::istream& in) {
  std::vector<std::pair<int, int>> edges;
  int n = -1;
  std::string line;
  while (std::getline(in, line)) {
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    if (line.compare(first, 2, "n=") == 0) {
      n = std::stoi(line.substr(first + 2));
      continue;
    }
    std::istringstream ls(line);
    long long u, v;
    if (!(ls >> u >> v)) throw std::runtime_error("malformed edge line: " + line);
    edges.emplace_back(static_cast<int>(u), static_cast<int>(v));
  }
  return from_edge_list(edges, n);
}

inline Graph load_edge_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return load_edge_list(in);
}

inline void save_edge_list(const Graph& g, std::ostream& out) {
  out << "n=" << g.n << "\n";
  for (auto [u, v] : g.edges()) out << u << " " << v << "\n";
}

inline void save_edge_list(const Graph& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  save_edge_list(g, out);
}

inline std::vector<int> load_labels(const std::string& path, int n) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<int> labels(n, -1);
  std::string line;
  while (std::getline(in, line)) {
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    int v, lab;
    if (!(ls >> v >> lab)) throw std::runtime_error("malformed label line: " + line);
    if (v < 0 || v >= n) throw std::runtime_error("label for unknown node");
    labels[v] = lab;
  }
  return labels;
}

// ---- small stock graphs (used all over the tests and experiments) -------

inline Graph path_graph(int n) {
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  return from_edge_list(e, n);
}

inline Graph cycle_graph(int n) {
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i < n; ++i) e.emplace_back(i, (i + 1) % n);
  return from_edge_list(e, n);
}

inline Graph complete_graph(int n) {
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) e.emplace_back(i, j);
  return from_edge_list(e, n);
}

inline Graph star_graph(int leaves) {
  std::vector<std::pair<int, int>> e;
  for (int i = 1; i <= leaves; ++i) e.emplace_back(0, i);
  return from_edge_list(e, leaves + 1);
}

inline Graph disjoint_union(const Graph& a, const Graph& b) {
  std::vector<std::pair<int, int>> e;
  for (auto [u, v] : a.edges()) e.emplace_back(u, v);
  for (auto [u, v] : b.edges()) e.emplace_back(u + a.n, v + a.n);
  return from_edge_list(e, a.n + b.n);
}

}  // namespace destruct
