#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "destruct/distance.hpp"
#include "destruct/graph.hpp"
#include "destruct/rng.hpp"

namespace destruct {

struct StubPairing {
  std::vector<std::pair<int, int>> edges;  // multiset, self-loops possible
  bool simple = false;
};

// Configuration model draw for an r-regular (multi)graph: n*r half-edge
// stubs paired by a uniform random perfect matching. The caller decides
// what to do with non-simple outcomes.
inline StubPairing configuration_model_regular(int n, int r, Rng& rng) {
  if (n < 1 || r < 1) throw std::invalid_argument("n and r must be positive");
  if ((static_cast<long long>(n) * r) % 2 != 0) throw std::invalid_argument("n*r must be even");
  std::vector<int> stubs;
  stubs.reserve(static_cast<std::size_t>(n) * r);
  for (int v = 0; v < n; ++v)
    for (int k = 0; k < r; ++k) stubs.push_back(v);
  rng.shuffle(stubs);

  StubPairing out;
  out.edges.reserve(stubs.size() / 2);
  out.simple = true;
  std::vector<std::vector<int>> seen(n);
  for (std::size_t i = 0; i < stubs.size(); i += 2) {
    int u = stubs[i], v = stubs[i + 1];
    out.edges.emplace_back(u, v);
    if (u == v) {
      out.simple = false;
      continue;
    }
    auto& su = seen[std::min(u, v)];
    int other = std::max(u, v);
    if (std::find(su.begin(), su.end(), other) != su.end())
      out.simple = false;
    else
      su.push_back(other);
  }
  return out;
}

inline StubPairing configuration_model_regular(int n, int r, std::uint64_t seed) {
  Rng rng(seed);
  return configuration_model_regular(n, r, rng);
}

// Rejection sampling of the configuration model down to simple graphs,
// which is uniform over simple r-regular graphs. The theory regime wants
// r < sqrt(2 ln n); outside it sampling still works, just without the
// acceptance-rate guarantee.
inline Graph sample_simple_regular(int n, int r, std::uint64_t seed, int max_tries = 100000,
                                   int* tries_used = nullptr) {
  Rng rng(seed);
  for (int attempt = 1; attempt <= max_tries; ++attempt) {
    StubPairing p = configuration_model_regular(n, r, rng);
    if (p.simple) {
      if (tries_used) *tries_used = attempt;
      return from_edge_list(p.edges, n);
    }
  }
  throw std::runtime_error("sample_simple_regular: max_tries exhausted");
}

// Cayley graph on Z4 x Z4 with connection set {±(1,0), ±(0,1), ±(1,1)}:
// 16 nodes, 48 edges, 6-regular, diameter 2.
inline Graph shrikhande() {
  auto id = [](int i, int j) { return ((i & 3) << 2) | (j & 3); };
  std::vector<std::pair<int, int>> e;
  const int off[3][2] = {{1, 0}, {0, 1}, {1, 1}};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (const auto& d : off) e.emplace_back(id(i, j), id(i + d[0], j + d[1]));
  return from_edge_list(e, 16);
}

// Vertices (i,j) on a 4x4 board, adjacent iff same row or same column.
inline Graph rooks_4x4() {
  auto id = [](int i, int j) { return i * 4 + j; };
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      for (int k = j + 1; k < 4; ++k) e.emplace_back(id(i, j), id(i, k));
      for (int k = i + 1; k < 4; ++k) e.emplace_back(id(i, j), id(k, j));
    }
  return from_edge_list(e, 16);
}

struct IntersectionArray {
  std::vector<int> b;  // b_0 .. b_{diam-1}
  std::vector<int> c;  // c_1 .. c_diam
  int diameter = 0;

  bool operator==(const IntersectionArray&) const = default;

  std::string to_string() const {
    std::string s = "{";
    for (std::size_t i = 0; i < b.size(); ++i) s += (i ? "," : "") + std::to_string(b[i]);
    s += ";";
    for (std::size_t i = 0; i < c.size(); ++i) s += (i ? "," : "") + std::to_string(c[i]);
    return s + "}";
  }
};

struct DrgCheck {
  std::optional<IntersectionArray> array;  // set iff the graph is a DRG
  // witness when not a DRG: two ordered pairs at the same distance whose
  // neighbor counts disagree
  std::pair<int, int> witness_a{-1, -1};
  std::pair<int, int> witness_b{-1, -1};
  std::string reason;
};

// Distance-regularity check by direct counting: for every ordered pair
// (v,u) at distance j, count neighbors of v at distance j+1 (b_j) and j-1
// (c_j) from u; a DRG has one value per j.
inline DrgCheck intersection_array(const Graph& g) {
  if (g.n == 0) throw std::invalid_argument("empty graph");
  std::vector<SpdTable> spd;
  spd.reserve(g.n);
  for (int v = 0; v < g.n; ++v) spd.push_back(spd_from(g, v));
  int diam = 0;
  for (int v = 0; v < g.n; ++v)
    for (int u = 0; u < g.n; ++u) {
      if (spd[v].dist[u] == kInfDist) throw std::invalid_argument("graph must be connected");
      diam = std::max(diam, spd[v].dist[u]);
    }

  DrgCheck out;
  std::vector<int> bj(diam + 1, -1), cj(diam + 1, -1);
  std::vector<std::pair<int, int>> rep(diam + 1, {-1, -1});
  for (int v = 0; v < g.n; ++v)
    for (int u = 0; u < g.n; ++u) {
      int j = spd[u].dist[v];
      int up = 0, down = 0;
      for (int w : g.adj[v]) {
        if (spd[u].dist[w] == j + 1) ++up;
        if (spd[u].dist[w] == j - 1) ++down;
      }
      if (bj[j] < 0) {
        bj[j] = up;
        cj[j] = down;
        rep[j] = {v, u};
      } else if (bj[j] != up || cj[j] != down) {
        out.witness_a = rep[j];
        out.witness_b = {v, u};
        out.reason = "neighbor counts differ within distance class " + std::to_string(j);
        return out;
      }
    }

  IntersectionArray arr;
  arr.diameter = diam;
  for (int j = 0; j < diam; ++j) arr.b.push_back(bj[j]);
  for (int j = 1; j <= diam; ++j) arr.c.push_back(cj[j]);
  out.array = arr;
  return out;
}

// Synthetic benchmark graph for triad prediction: m planted K4 blocks (each
// contributes 4 triangles and stays 3-regular) alongside a uniformly sampled
// simple 3-regular bulk on the remaining nodes.
inline Graph planted_k4_regular(int n_bulk, int m_blocks, std::uint64_t seed) {
  if (n_bulk < 4 || n_bulk % 2 != 0) throw std::invalid_argument("bulk size must be even and >= 4");
  if (m_blocks < 1) throw std::invalid_argument("need at least one block");
  std::vector<std::pair<int, int>> e;
  for (int b = 0; b < m_blocks; ++b) {
    int base = 4 * b;
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j) e.emplace_back(base + i, base + j);
  }
  Graph bulk = sample_simple_regular(n_bulk, 3, seed);
  int off = 4 * m_blocks;
  for (auto [u, v] : bulk.edges()) e.emplace_back(u + off, v + off);
  return from_edge_list(e, off + n_bulk);
}

}  // namespace destruct
