#pragma once

#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <stdexcept>
#include <vector>

#include "destruct/graph.hpp"

namespace destruct {

// Distance sentinel for unreachable nodes.
constexpr int kInfDist = std::numeric_limits<int>::max();

struct SpdTable {
  std::vector<int> dist;  // kInfDist when unreachable
};

// BFS distances from v.
inline SpdTable spd_from(const Graph& g, int v) {
  if (v < 0 || v >= g.n) throw std::invalid_argument("source out of range");
  SpdTable t;
  t.dist.assign(g.n, kInfDist);
  t.dist[v] = 0;
  std::deque<int> q{v};
  while (!q.empty()) {
    int u = q.front();
    q.pop_front();
    for (int w : g.adj[u])
      if (t.dist[w] == kInfDist) {
        t.dist[w] = t.dist[u] + 1;
        q.push_back(w);
      }
  }
  return t;
}

namespace detail {

// Sums terms in ascending value order. Addition order is then a function of
// the value multiset only, so relabeled graphs produce bit-identical floats.
inline double sorted_sum(std::vector<double>& terms) {
  std::sort(terms.begin(), terms.end());
  double s = 0.0;
  for (double t : terms) s += t;
  return s;
}

// One application of the random-walk matrix W = A D^{-1} (column-stochastic):
// y_i = sum_{j in N(i)} x_j / deg(j).
inline std::vector<double> walk_step(const Graph& g, const std::vector<double>& x) {
  std::vector<double> y(g.n, 0.0);
  std::vector<double> terms;
  for (int i = 0; i < g.n; ++i) {
    terms.clear();
    for (int j : g.adj[i])
      terms.push_back(x[j] / static_cast<double>(g.degree(j)));
    y[i] = sorted_sum(terms);
  }
  return y;
}

}  // namespace detail

// Landing probabilities ((W)_{uv}, ..., (W^{d_rw})_{uv}) for every u, where
// W = A D^{-1}; column v of W^k is the distribution of a k-step walk started
// at v. Returned as result[u][k-1].
inline std::vector<std::vector<double>> landing_probabilities(const Graph& g, int v, int d_rw) {
  if (v < 0 || v >= g.n) throw std::invalid_argument("source out of range");
  if (d_rw < 1) throw std::invalid_argument("d_rw must be >= 1");
  if (g.degree(v) == 0) throw std::invalid_argument("walk undefined on isolated node");
  std::vector<std::vector<double>> out(g.n, std::vector<double>(d_rw, 0.0));
  std::vector<double> x(g.n, 0.0);
  x[v] = 1.0;
  for (int k = 0; k < d_rw; ++k) {
    x = detail::walk_step(g, x);
    for (int u = 0; u < g.n; ++u) out[u][k] = x[u];
  }
  return out;
}

// Truncated generalized PageRank: sum_k gamma_k (W^k)_{uv}, k = 1..len(gammas).
inline std::vector<double> generalized_pagerank(const Graph& g, int v,
                                                const std::vector<double>& gammas) {
  if (gammas.empty()) throw std::invalid_argument("empty gamma list");
  for (double ga : gammas)
    if (!std::isfinite(ga)) throw std::invalid_argument("gamma must be finite");
  auto lp = landing_probabilities(g, v, static_cast<int>(gammas.size()));
  std::vector<double> out(g.n, 0.0);
  for (int u = 0; u < g.n; ++u) {
    double s = 0.0;
    for (std::size_t k = 0; k < gammas.size(); ++k) s += gammas[k] * lp[u][k];
    out[u] = s;
  }
  return out;
}

// Personalized PageRank column [(I - damping W)^{-1}]_{.v} via the Neumann
// series x = sum_k (damping W)^k e_v, iterated until the successive-iterate
// max-norm drops below tol. Iteration cap follows the geometric rate.
inline std::vector<double> personalized_pagerank(const Graph& g, int v, double damping,
                                                 double tol = 1e-9) {
  if (v < 0 || v >= g.n) throw std::invalid_argument("source out of range");
  if (!(damping > 0.0 && damping < 1.0)) throw std::invalid_argument("damping must be in (0,1)");
  if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
  if (g.degree(v) == 0) throw std::invalid_argument("walk undefined on isolated node");
  const int cap = static_cast<int>(std::ceil(std::log(tol) / std::log(damping))) + 16;
  std::vector<double> x(g.n, 0.0);
  x[v] = 1.0;
  std::vector<double> term = x;  // (damping W)^k e_v
  for (int it = 0; it < cap; ++it) {
    term = detail::walk_step(g, term);
    for (double& t : term) t *= damping;
    double diff = 0.0;
    for (int u = 0; u < g.n; ++u) {
      x[u] += term[u];
      diff = std::max(diff, term[u]);
    }
    if (diff < tol) return x;
  }
  throw std::runtime_error("personalized pagerank did not converge within cap");
}

// One-hot of min(spd, d_max) in a vector of length d_max+1; unreachable
// shares the far bucket.
inline std::vector<double> one_hot_spd(int spd, int d_max) {
  if (d_max < 1) throw std::invalid_argument("d_max must be >= 1");
  std::vector<double> v(d_max + 1, 0.0);
  int idx = (spd == kInfDist) ? d_max : std::min(spd, d_max);
  v[idx] = 1.0;
  return v;
}

enum class DeVariant { SpdOneHot, LandingProb };

struct DeParams {
  int d_max = 3;  // SPD truncation cap
  int d_rw = 4;   // random-walk feature length
};

// Set aggregation of per-member distance encodings: mean over v in S.
// SpdOneHot rows have length d_max+1; LandingProb rows have length d_rw+1
// (the leading entry is the 0-step indicator of membership in S).
inline std::vector<std::vector<double>> de_for_set(const Graph& g, const std::vector<int>& s,
                                                   DeVariant variant, const DeParams& params) {
  check_target(g, s);
  const double inv = 1.0 / static_cast<double>(s.size());
  std::vector<std::vector<double>> per_member;
  if (variant == DeVariant::SpdOneHot) {
    for (int u = 0; u < g.n; ++u) per_member.emplace_back(params.d_max + 1, 0.0);
    for (int v : s) {
      auto t = spd_from(g, v);
      for (int u = 0; u < g.n; ++u) {
        auto oh = one_hot_spd(t.dist[u], params.d_max);
        for (int k = 0; k <= params.d_max; ++k) per_member[u][k] += oh[k] * inv;
      }
    }
    return per_member;
  }
  for (int u = 0; u < g.n; ++u) per_member.emplace_back(params.d_rw + 1, 0.0);
  for (int v : s) {
    auto lp = landing_probabilities(g, v, params.d_rw);
    for (int u = 0; u < g.n; ++u) {
      if (u == v) per_member[u][0] += inv;
      for (int k = 0; k < params.d_rw; ++k) per_member[u][k + 1] += lp[u][k] * inv;
    }
  }
  // mean over |S|<=3 members in sorted-value order would change nothing for
  // these few equal-weight terms; membership order is already canonical.
  return per_member;
}

// The node-pair labeling used by SEAL, kept as a comparison feature:
// 1 + min(d1,d2) + (d/2)((d/2) + (d%2) - 1) with d = d1 + d2 and integer
// division. Unreachable inputs collapse to the reserved label 0.
inline int seal_label(int spd1, int spd2) {
  if (spd1 == kInfDist || spd2 == kInfDist) return 0;
  if (spd1 < 0 || spd2 < 0) throw std::invalid_argument("negative distance");
  int d = spd1 + spd2;
  int h = d / 2;
  return 1 + std::min(spd1, spd2) + h * (h + d % 2 - 1);
}

// Number of walks of exactly `length` steps from v to each node, by repeated
// adjacency multiplication over 64-bit counters with overflow checks.
inline std::vector<std::uint64_t> walk_counts(const Graph& g, int v, int length) {
  if (v < 0 || v >= g.n) throw std::invalid_argument("source out of range");
  if (length < 1 || length > 12) throw std::invalid_argument("walk length cap exceeded");
  std::vector<std::uint64_t> x(g.n, 0);
  x[v] = 1;
  for (int step = 0; step < length; ++step) {
    std::vector<std::uint64_t> y(g.n, 0);
    for (int i = 0; i < g.n; ++i)
      for (int j : g.adj[i]) {
        if (y[i] > std::numeric_limits<std::uint64_t>::max() - x[j])
          throw std::runtime_error("walk count overflow");
        y[i] += x[j];
      }
    x = std::move(y);
  }
  return x;
}

}  // namespace destruct
