#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "destruct/graph.hpp"
#include "destruct/rng.hpp"

using namespace destruct;

namespace {

// independent 4x4 rook edge builder: pairs sharing a row or a column
std::vector<std::pair<int, int>> rook_edges() {
  std::vector<std::pair<int, int>> e;
  for (int a = 0; a < 16; ++a)
    for (int b = a + 1; b < 16; ++b)
      if (a / 4 == b / 4 || a % 4 == b % 4) e.emplace_back(a, b);
  return e;
}

Permutation random_permutation(int n, Rng& rng) {
  Permutation p = Permutation::identity(n);
  rng.shuffle(p.map);
  return p;
}

Graph random_graph(int n, double p, Rng& rng) {
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (rng.next_double() < p) e.emplace_back(i, j);
  return from_edge_list(e, n);
}

}  // namespace

TEST_CASE("from_edge_list builds K3") {
  Graph g = from_edge_list({{0, 1}, {1, 2}, {2, 0}});
  CHECK(g.n == 3);
  CHECK(g.edge_count() == 3);
  for (int v = 0; v < 3; ++v) CHECK(g.degree(v) == 2);
}

TEST_CASE("from_edge_list cleanup semantics") {
  Graph g = from_edge_list({{0, 1}, {1, 0}, {1, 1}});
  CHECK(g.n == 2);
  CHECK(g.edge_count() == 1);
  CHECK(g.has_edge(0, 1));
}

TEST_CASE("from_edge_list on the rook edge list") {
  Graph g = from_edge_list(rook_edges());
  CHECK(g.n == 16);
  CHECK(g.edge_count() == 48);
  for (int v = 0; v < 16; ++v) CHECK(g.degree(v) == 6);
}

TEST_CASE("from_edge_list errors") {
  CHECK_THROWS_AS(from_edge_list({}), std::invalid_argument);
  CHECK_NOTHROW(from_edge_list({}, 4));
  CHECK_THROWS_AS(from_edge_list({{-1, 2}}), std::invalid_argument);
  CHECK_THROWS_AS(from_edge_list({{0, 5}}, 3), std::invalid_argument);
}

TEST_CASE("from_edge_list is idempotent on its own output") {
  Rng rng(11);
  for (int t = 0; t < 20; ++t) {
    Graph g = random_graph(8, 0.4, rng);
    Graph h = from_edge_list(g.edges(), g.n);
    CHECK(g.same_structure(h));
  }
}

TEST_CASE("apply_permutation identity and complete graph") {
  Graph k3 = complete_graph(3);
  CHECK(apply_permutation(k3, Permutation::identity(3)).same_structure(k3));
  Permutation rot{{1, 2, 0}};
  CHECK(apply_permutation(k3, rot).same_structure(k3));
}

TEST_CASE("apply_permutation on a path keeps the edge set under the swap") {
  Graph p = path_graph(3);
  Permutation swap02{{2, 1, 0}};
  Graph q = apply_permutation(p, swap02);
  CHECK(q.has_edge(2, 1));
  CHECK(q.has_edge(1, 0));
  CHECK(q.same_structure(p));
}

TEST_CASE("apply_permutation moves attributes with nodes") {
  Graph g = path_graph(3);
  g.node_attrs = {{1.0}, {2.0}, {3.0}};
  g.edge_attrs[{0, 1}] = {5.0};
  Permutation pi{{2, 0, 1}};
  Graph h = apply_permutation(g, pi);
  CHECK(h.node_attrs[2] == std::vector<double>{1.0});
  CHECK(h.node_attrs[0] == std::vector<double>{2.0});
  CHECK(h.edge_attrs.at({0, 2}) == std::vector<double>{5.0});
}

TEST_CASE("apply_permutation rejects bad inputs") {
  Graph p = path_graph(3);
  CHECK_THROWS_AS(apply_permutation(p, Permutation{{0, 1}}), std::invalid_argument);
  CHECK_THROWS_AS(apply_permutation(p, Permutation{{0, 0, 1}}), std::invalid_argument);
}

TEST_CASE("brute force isomorphism basics") {
  CHECK(brute_force_isomorphic(complete_graph(3), complete_graph(3)));
  Graph c6 = cycle_graph(6);
  Graph two_k3 = disjoint_union(complete_graph(3), complete_graph(3));
  CHECK_FALSE(brute_force_isomorphic(c6, two_k3));
  Graph big = cycle_graph(10);
  CHECK_THROWS_AS(brute_force_isomorphic(big, big), std::invalid_argument);
}

TEST_CASE("brute force isomorphism with tuples on C4") {
  Graph c4 = cycle_graph(4);
  std::vector<int> s1{0}, s2{2};
  CHECK(brute_force_isomorphic(c4, c4, &s1, &s2));
  // a path end is not a path middle
  Graph p4 = path_graph(4);
  std::vector<int> end{0}, mid{1};
  CHECK_FALSE(brute_force_isomorphic(p4, p4, &end, &mid));
}

TEST_CASE("graph is isomorphic to any relabeling of itself") {
  Rng rng(5);
  for (int t = 0; t < 30; ++t) {
    int n = 3 + rng.next_int(5);
    Graph g = random_graph(n, 0.5, rng);
    Permutation pi = random_permutation(n, rng);
    CHECK(brute_force_isomorphic(g, apply_permutation(g, pi)));
  }
}

TEST_CASE("degree sequence is permutation invariant") {
  Rng rng(7);
  for (int t = 0; t < 30; ++t) {
    int n = 4 + rng.next_int(6);
    Graph g = random_graph(n, 0.4, rng);
    Graph h = apply_permutation(g, random_permutation(n, rng));
    std::vector<int> d1, d2;
    for (int v = 0; v < n; ++v) {
      d1.push_back(g.degree(v));
      d2.push_back(h.degree(v));
    }
    std::sort(d1.begin(), d1.end());
    std::sort(d2.begin(), d2.end());
    CHECK(d1 == d2);
  }
}

TEST_CASE("edge list text round trip with header and comments") {
  std::istringstream in("# toy graph\nn=5\n0 1\n1 2\n\n3 1\n");
  Graph g = load_edge_list(in);
  CHECK(g.n == 5);
  CHECK(g.edge_count() == 3);
  CHECK(g.degree(4) == 0);

  std::ostringstream out;
  save_edge_list(g, out);
  std::istringstream back(out.str());
  CHECK(load_edge_list(back).same_structure(g));
}
