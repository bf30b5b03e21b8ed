#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "destruct/graph.hpp"

namespace destruct {

namespace detail {

// Content-addressed color table. A color id stands for the exact signature
// (round, own color, sorted child colors), compared with std::map rather
// than hashed, so distinct signatures can never collide. Sharing one
// interner across refinement runs makes their color ids directly
// comparable across graphs.
class SigInterner {
 public:
  int intern(std::vector<int>&& key) {
    auto [it, inserted] = ids_.try_emplace(std::move(key), static_cast<int>(ids_.size()));
    return it->second;
  }
  std::size_t size() const { return ids_.size(); }

 private:
  std::map<std::vector<int>, int> ids_;
};

inline int count_distinct(std::vector<int> colors) {
  std::sort(colors.begin(), colors.end());
  colors.erase(std::unique(colors.begin(), colors.end()), colors.end());
  return static_cast<int>(colors.size());
}

}  // namespace detail

// Shared refinement context. Runs that should be comparable (the two sides
// of a test, a whole catalogue) must use the same context.
struct WlContext {
  detail::SigInterner node_sigs;
  detail::SigInterner pair_sigs;
};

struct Coloring {
  std::vector<int> colors;       // content-addressed ids (context-relative)
  std::vector<int> dense;        // same partition remapped to 0..k-1
  int rounds = 0;                // update rounds until the partition was stable
  std::vector<int> class_counts; // distinct classes per round, starting at round 0
};

// Multiset of stable colors, as sorted (color id, count) pairs. Two configs
// are comparable only when produced under one WlContext.
struct ColorConfig {
  std::vector<std::pair<int, int>> entries;
  int rounds = 0;

  bool operator==(const ColorConfig&) const = default;
};

namespace detail {

inline std::vector<int> densify(const std::vector<int>& colors) {
  std::map<int, int> remap;
  for (int c : colors) remap.try_emplace(c, 0);
  int next = 0;
  for (auto& [sig, d] : remap) d = next++;
  std::vector<int> dense(colors.size());
  for (std::size_t i = 0; i < colors.size(); ++i) dense[i] = remap[colors[i]];
  return dense;
}

inline ColorConfig config_of(const std::vector<int>& colors, int rounds) {
  std::map<int, int> counts;
  for (int c : colors) counts[c]++;
  ColorConfig cfg;
  cfg.entries.assign(counts.begin(), counts.end());
  cfg.rounds = rounds;
  return cfg;
}

}  // namespace detail

// 1-WL color refinement. Starts from degrees (or the given labels) and
// iterates color(v) <- signature(color(v), sorted multiset of neighbor
// colors) until the partition stops refining. Signatures carry their round
// index, so colors from runs of different depths can never be confused.
inline Coloring wl1_refine(const Graph& g, WlContext& ctx,
                           const std::vector<int>* init_labels = nullptr) {
  if (init_labels && static_cast<int>(init_labels->size()) != g.n)
    throw std::invalid_argument("init label size mismatch");
  Coloring out;
  std::vector<int> cur(g.n);
  for (int v = 0; v < g.n; ++v)
    cur[v] = ctx.node_sigs.intern({0, init_labels ? (*init_labels)[v] : g.degree(v)});
  out.class_counts.push_back(detail::count_distinct(cur));

  for (int round = 1; round <= g.n + 1; ++round) {
    std::vector<int> next(g.n);
    for (int v = 0; v < g.n; ++v) {
      std::vector<int> key;
      key.reserve(g.degree(v) + 3);
      key.push_back(round);
      key.push_back(cur[v]);
      std::vector<int> nbr;
      nbr.reserve(g.degree(v));
      for (int u : g.adj[v]) nbr.push_back(cur[u]);
      std::sort(nbr.begin(), nbr.end());
      key.insert(key.end(), nbr.begin(), nbr.end());
      next[v] = ctx.node_sigs.intern(std::move(key));
    }
    int k = detail::count_distinct(next);
    if (k == out.class_counts.back()) {
      out.colors = std::move(cur);
      out.rounds = round - 1;
      out.dense = detail::densify(out.colors);
      return out;
    }
    out.class_counts.push_back(k);
    cur = std::move(next);
  }
  throw std::runtime_error("wl1 failed to stabilize");  // unreachable: <= n splits
}

inline ColorConfig wl1_graph_config(const Graph& g, WlContext& ctx,
                                    const std::vector<int>* init_labels = nullptr) {
  Coloring c = wl1_refine(g, ctx, init_labels);
  return detail::config_of(c.colors, c.rounds);
}

// Stable 1-WL signature multiset restricted to a target set.
inline ColorConfig wl1_tuple_config(const Graph& g, const std::vector<int>& s, WlContext& ctx,
                                    const std::vector<int>* init_labels = nullptr) {
  check_target(g, s);
  Coloring c = wl1_refine(g, ctx, init_labels);
  std::vector<int> sub;
  sub.reserve(s.size());
  for (int v : s) sub.push_back(c.colors[v]);
  return detail::config_of(sub, c.rounds);
}

// Folklore 2-WL refinement over ordered node pairs. Pair (u,v) is stored at
// index u*n+v. Initial colors encode the equality pattern and adjacency;
// the update aggregates, for each witness w, the ordered color pair of
// (w,v) and (u,w).
inline Coloring fwl2_refine(const Graph& g, WlContext& ctx) {
  if (g.n > 64) throw std::invalid_argument("2-FWL cap exceeded");
  const int n = g.n;
  Coloring out;
  std::vector<int> cur(static_cast<std::size_t>(n) * n);
  for (int u = 0; u < n; ++u)
    for (int v = 0; v < n; ++v) {
      int pattern = (u == v) ? 2 : (g.has_edge(u, v) ? 1 : 0);
      cur[static_cast<std::size_t>(u) * n + v] = ctx.pair_sigs.intern({0, pattern});
    }
  out.class_counts.push_back(detail::count_distinct(cur));

  const int max_rounds = n * n + 1;
  for (int round = 1; round <= max_rounds; ++round) {
    std::vector<int> next(cur.size());
    std::vector<std::pair<int, int>> witness(n);
    for (int u = 0; u < n; ++u)
      for (int v = 0; v < n; ++v) {
        for (int w = 0; w < n; ++w)
          witness[w] = {cur[static_cast<std::size_t>(w) * n + v],
                        cur[static_cast<std::size_t>(u) * n + w]};
        std::sort(witness.begin(), witness.end());
        std::vector<int> key;
        key.reserve(2 * n + 3);
        key.push_back(round);
        key.push_back(cur[static_cast<std::size_t>(u) * n + v]);
        for (const auto& [a, b] : witness) {
          key.push_back(a);
          key.push_back(b);
        }
        next[static_cast<std::size_t>(u) * n + v] = ctx.pair_sigs.intern(std::move(key));
      }
    int k = detail::count_distinct(next);
    if (k == out.class_counts.back()) {
      out.colors = std::move(cur);
      out.rounds = round - 1;
      out.dense = detail::densify(out.colors);
      return out;
    }
    out.class_counts.push_back(k);
    cur = std::move(next);
  }
  throw std::runtime_error("fwl2 failed to stabilize");  // unreachable
}

inline ColorConfig fwl2_graph_config(const Graph& g, WlContext& ctx) {
  Coloring c = fwl2_refine(g, ctx);
  return detail::config_of(c.colors, c.rounds);
}

// Stable pair-color multiset restricted to S x S (used for tuple-level
// comparisons under the order-2 test).
inline ColorConfig fwl2_tuple_config(const Graph& g, const std::vector<int>& s, WlContext& ctx) {
  check_target(g, s);
  Coloring c = fwl2_refine(g, ctx);
  std::vector<int> sub;
  for (int u : s)
    for (int v : s) sub.push_back(c.colors[static_cast<std::size_t>(u) * g.n + v]);
  return detail::config_of(sub, c.rounds);
}

struct WlVerdict {
  bool distinguished = false;
  int rounds_g1 = 0;
  int rounds_g2 = 0;
};

// Compares two graphs (optionally two tuples) under 1-WL or 2-FWL with a
// shared context. Different configs certify non-isomorphism; equal configs
// mean the test cannot tell them apart.
inline WlVerdict wl_compare(const Graph& g1, const Graph& g2, int order,
                            const std::vector<int>* s1 = nullptr,
                            const std::vector<int>* s2 = nullptr) {
  if (order != 1 && order != 2) throw std::invalid_argument("order must be 1 or 2");
  if ((s1 == nullptr) != (s2 == nullptr)) throw std::invalid_argument("both tuples or neither");
  WlContext ctx;
  ColorConfig c1, c2;
  if (order == 1) {
    c1 = s1 ? wl1_tuple_config(g1, *s1, ctx) : wl1_graph_config(g1, ctx);
    c2 = s2 ? wl1_tuple_config(g2, *s2, ctx) : wl1_graph_config(g2, ctx);
  } else {
    c1 = s1 ? fwl2_tuple_config(g1, *s1, ctx) : fwl2_graph_config(g1, ctx);
    c2 = s2 ? fwl2_tuple_config(g2, *s2, ctx) : fwl2_graph_config(g2, ctx);
  }
  return {c1 != c2, c1.rounds, c2.rounds};
}

}  // namespace destruct
