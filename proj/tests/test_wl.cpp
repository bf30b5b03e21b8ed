#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "destruct/generators.hpp"
#include "destruct/graph.hpp"
#include "destruct/rng.hpp"
#include "destruct/wl.hpp"

using namespace destruct;

namespace {

Graph random_graph(int n, double p, Rng& rng) {
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (rng.next_double() < p) e.emplace_back(i, j);
  return from_edge_list(e, n);
}

Permutation random_permutation(int n, Rng& rng) {
  Permutation p = Permutation::identity(n);
  rng.shuffle(p.map);
  return p;
}

}  // namespace

TEST_CASE("wl1 on regular and star graphs") {
  WlContext ctx;
  Coloring c6 = wl1_refine(cycle_graph(6), ctx);
  CHECK(c6.dense == std::vector<int>(6, 0));
  CHECK(c6.rounds == 0);

  Coloring star = wl1_refine(star_graph(3), ctx);
  CHECK(star.dense[0] != star.dense[1]);
  CHECK(star.dense[1] == star.dense[2]);
  CHECK(star.dense[1] == star.dense[3]);

  Coloring p4 = wl1_refine(path_graph(4), ctx);
  CHECK(p4.dense[0] == p4.dense[3]);
  CHECK(p4.dense[1] == p4.dense[2]);
  CHECK(p4.dense[0] != p4.dense[1]);
}

TEST_CASE("wl1 tuple configs compare across graphs") {
  Graph c6 = cycle_graph(6);
  Graph two_k3 = disjoint_union(complete_graph(3), complete_graph(3));
  WlContext ctx;
  CHECK(wl1_tuple_config(c6, {0}, ctx) == wl1_tuple_config(two_k3, {0}, ctx));

  Graph star = star_graph(3);
  CHECK(wl1_tuple_config(star, {0}, ctx) != wl1_tuple_config(star, {1}, ctx));
}

TEST_CASE("wl1 configs are invariant under relabeling") {
  Rng rng(9);
  for (int t = 0; t < 25; ++t) {
    int n = 4 + rng.next_int(6);
    Graph g = random_graph(n, 0.45, rng);
    Permutation pi = random_permutation(n, rng);
    Graph h = apply_permutation(g, pi);
    std::vector<int> s{rng.next_int(n)};
    WlContext ctx;
    CHECK(wl1_tuple_config(g, s, ctx) == wl1_tuple_config(h, apply_permutation(s, pi), ctx));
    WlContext ctx2;
    CHECK(wl1_graph_config(g, ctx2) == wl1_graph_config(h, ctx2));
  }
}

TEST_CASE("wl1 honors caller-provided initial colors") {
  Graph c6 = cycle_graph(6);
  std::vector<int> marked{1, 0, 0, 0, 0, 0};
  WlContext ctx;
  Coloring c = wl1_refine(c6, ctx, &marked);
  // the mark breaks the cycle's symmetry into distance classes from node 0
  CHECK(c.dense[1] == c.dense[5]);
  CHECK(c.dense[2] == c.dense[4]);
  CHECK(c.dense[0] != c.dense[1]);
  CHECK(c.dense[1] != c.dense[2]);
  CHECK(c.dense[2] != c.dense[3]);
}

TEST_CASE("refinement class counts never decrease and stop within n rounds") {
  Rng rng(13);
  for (int t = 0; t < 25; ++t) {
    int n = 4 + rng.next_int(8);
    Graph g = random_graph(n, 0.4, rng);
    WlContext ctx;
    Coloring c = wl1_refine(g, ctx);
    for (std::size_t i = 1; i < c.class_counts.size(); ++i)
      CHECK(c.class_counts[i] >= c.class_counts[i - 1]);
    CHECK(c.rounds <= n);
  }
}

TEST_CASE("fwl2 separates C6 from two triangles where wl1 cannot") {
  Graph c6 = cycle_graph(6);
  Graph two_k3 = disjoint_union(complete_graph(3), complete_graph(3));
  CHECK_FALSE(wl_compare(c6, two_k3, 1).distinguished);
  CHECK(wl_compare(c6, two_k3, 2).distinguished);
}

TEST_CASE("fwl2 cannot separate the DRG corpus pair") {
  Graph s = shrikhande();
  Graph r = rooks_4x4();
  CHECK_FALSE(wl_compare(s, r, 1).distinguished);
  CHECK_FALSE(wl_compare(s, r, 2).distinguished);
}

TEST_CASE("fwl2 is reflexive and permutation-invariant") {
  CHECK_FALSE(wl_compare(complete_graph(3), complete_graph(3), 2).distinguished);
  Rng rng(19);
  for (int t = 0; t < 10; ++t) {
    int n = 4 + rng.next_int(4);
    Graph g = random_graph(n, 0.5, rng);
    Graph h = apply_permutation(g, random_permutation(n, rng));
    CHECK_FALSE(wl_compare(g, h, 2).distinguished);
  }
}

TEST_CASE("fwl2 node count cap") {
  WlContext ctx;
  Graph big = cycle_graph(65);
  CHECK_THROWS_AS(fwl2_refine(big, ctx), std::invalid_argument);
}

TEST_CASE("wl soundness against brute force on random pairs") {
  Rng rng(29);
  int distinguished_checked = 0;
  for (int t = 0; t < 120; ++t) {
    int n = 4 + rng.next_int(3);  // 4..6
    Graph g1 = random_graph(n, 0.5, rng);
    Graph g2 = random_graph(n, 0.5, rng);
    bool iso = brute_force_isomorphic(g1, g2);
    bool wl1_diff = wl_compare(g1, g2, 1).distinguished;
    bool fwl2_diff = wl_compare(g1, g2, 2).distinguished;
    if (wl1_diff || fwl2_diff) {
      CHECK_FALSE(iso);
      ++distinguished_checked;
    }
    // order-2 subsumes order-1 on every tested pair
    if (wl1_diff) CHECK(fwl2_diff);
  }
  CHECK(distinguished_checked > 20);
}

TEST_CASE("fwl2 tuple configs: same-graph edges agree, cross-corpus diagonal agrees") {
  Graph s = shrikhande();
  int nb = s.adj[0][0];
  WlContext ctx;
  CHECK(fwl2_tuple_config(s, {0, nb}, ctx) ==
        fwl2_tuple_config(s, {5, s.adj[5][2]}, ctx));
}
