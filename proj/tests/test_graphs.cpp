#include "flagforge/graph.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace flagforge;

namespace {

SmallGraph graph_w() {
  return SmallGraph::from_edge_list(5, {{0, 1}, {0, 4}, {1, 2}, {1, 4}, {2, 3}, {2, 4}, {3, 4}});
}

SmallGraph random_graph(std::mt19937& rng, int n) {
  std::bernoulli_distribution coin(0.5);
  std::vector<Edge> edges;
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v)
      if (coin(rng)) edges.emplace_back(u, v);
  return SmallGraph::from_edge_list(n, edges);
}

// Oracle: brute-force search for an adjacency-preserving bijection.
bool brute_isomorphic(const SmallGraph& a, const SmallGraph& b) {
  if (a.order() != b.order()) return false;
  std::vector<int> perm(a.order());
  std::iota(perm.begin(), perm.end(), 0);
  do {
    bool ok = true;
    for (int u = 0; u < a.order() && ok; ++u)
      for (int v = u + 1; v < a.order() && ok; ++v) ok = a.adjacent(u, v) == b.adjacent(perm[u], perm[v]);
    if (ok) return true;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return false;
}

// Oracle: independence number by subset scan.
int brute_alpha(const SmallGraph& g) {
  int best = 0;
  for (unsigned s = 0; s < (1u << g.order()); ++s) {
    bool indep = true;
    for (int u = 0; u < g.order() && indep; ++u)
      if (s >> u & 1u) indep = (g.neighbours(u) & s) == 0;
    if (indep) best = std::max(best, std::popcount(s));
  }
  return best;
}

SmallGraph shuffled(const SmallGraph& g, std::mt19937& rng) {
  std::vector<int> perm(g.order());
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  return g.permuted(perm);
}

}  // namespace

TEST(SmallGraph, FromEdgeList) {
  auto p2 = SmallGraph::from_edge_list(3, {{0, 1}, {1, 2}});
  EXPECT_EQ(p2.edge_count(), 2);
  EXPECT_EQ(graph_w().edge_count(), 7);
  auto k1 = SmallGraph::from_edge_list(1, {});
  EXPECT_EQ(k1.order(), 1);
  EXPECT_EQ(k1.edge_count(), 0);
  EXPECT_EQ(SmallGraph::from_edge_list(2, {{0, 1}, {1, 0}, {0, 1}}).edge_count(), 1);
}

TEST(SmallGraph, FromEdgeListErrors) {
  EXPECT_THROW(SmallGraph::from_edge_list(3, {{0, 3}}), std::invalid_argument);
  EXPECT_THROW(SmallGraph::from_edge_list(3, {{-1, 2}}), std::invalid_argument);
  EXPECT_THROW(SmallGraph::from_edge_list(3, {{1, 1}}), std::invalid_argument);
  EXPECT_THROW(SmallGraph::from_edge_list(0, {}), std::invalid_argument);
  EXPECT_THROW(SmallGraph::from_edge_list(11, {}), std::invalid_argument);
}

TEST(SmallGraph, Complement) {
  EXPECT_EQ(complement(SmallGraph::complete(3)), SmallGraph::empty(3));
  EXPECT_EQ(complement(complement(graph_w())), graph_w());
  auto p2 = SmallGraph::from_edge_list(3, {{0, 1}, {1, 2}});
  EXPECT_EQ(complement(p2).edge_count(), 1);
  EXPECT_TRUE(isomorphic(complement(p2), SmallGraph::from_edge_list(3, {{0, 2}})));
}

TEST(SmallGraph, IndependenceNumber) {
  EXPECT_EQ(independence_number(SmallGraph::cycle(5)), 2);
  EXPECT_EQ(independence_number(SmallGraph::empty(4)), 4);
  EXPECT_EQ(independence_number(graph_w()), 2);
}

TEST(SmallGraph, Admissibility) {
  EXPECT_TRUE(is_admissible(SmallGraph::complete(3), 3));
  EXPECT_FALSE(is_admissible(SmallGraph::empty(3), 3));
  EXPECT_THROW(is_admissible(SmallGraph::complete(3), 1), std::invalid_argument);
}

TEST(SmallGraph, CanonicalFormInvariance) {
  auto c5a = SmallGraph::cycle(5);
  auto c5b = SmallGraph::from_edge_list(5, {{0, 2}, {2, 4}, {4, 1}, {1, 3}, {3, 0}});
  EXPECT_EQ(canonical_form(c5a).code, canonical_form(c5b).code);
  auto k3 = SmallGraph::complete(3);
  auto p2 = SmallGraph::from_edge_list(3, {{0, 1}, {1, 2}});
  EXPECT_NE(canonical_form(k3).code, canonical_form(p2).code);
}

TEST(SmallGraph, CanonicalPermWitnessesCode) {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    auto g = random_graph(rng, 1 + trial % 10);
    auto cf = canonical_form(g);
    EXPECT_EQ(adjacency_bits(g.permuted(cf.perm)), cf.code.bits);
  }
}

TEST(SmallGraph, CanonicalFormIsIsomorphismComplete) {
  std::mt19937 rng(20240611);
  for (int trial = 0; trial < 400; ++trial) {
    int n = 2 + trial % 6;
    auto a = random_graph(rng, n);
    auto b = trial % 3 == 0 ? shuffled(a, rng) : random_graph(rng, n);
    EXPECT_EQ(canonical_form(a).code == canonical_form(b).code, brute_isomorphic(a, b)) << to_graph6(a) << " " << to_graph6(b);
  }
}

TEST(SmallGraph, CanonicalFormStableUnderRelabelingAtTen) {
  std::mt19937 rng(99);
  for (int trial = 0; trial < 50; ++trial) {
    auto g = random_graph(rng, 10);
    EXPECT_EQ(canonical_form(g).code, canonical_form(shuffled(g, rng)).code);
  }
  auto petersen = SmallGraph::from_edge_list(
      10, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 0}, {0, 5}, {1, 6}, {2, 7}, {3, 8}, {4, 9}, {5, 7}, {7, 9}, {9, 6}, {6, 8}, {8, 5}});
  EXPECT_EQ(canonical_form(petersen).code, canonical_form(shuffled(petersen, rng)).code);
}

TEST(SmallGraph, ColouredCanonicalFormPlacesColoursInOrder) {
  auto p2 = SmallGraph::from_edge_list(3, {{0, 1}, {1, 2}});
  std::vector<int> colours{1, 0, 2};
  auto cf = canonical_form(p2, colours);
  EXPECT_EQ(cf.perm, (std::vector<int>{1, 0, 2}));
}

TEST(SmallGraph, ComplementAndCliqueDuality) {
  std::mt19937 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    auto g = random_graph(rng, 1 + trial % 10);
    EXPECT_EQ(complement(complement(g)), g);
    EXPECT_EQ(independence_number(g), clique_number(complement(g)));
    EXPECT_EQ(independence_number(g), brute_alpha(g));
  }
}

TEST(SmallGraph, InducedCounts) {
  auto edge = SmallGraph::complete(2);
  EXPECT_EQ(induced_density(edge, graph_w()), Rational(7, 10));
  EXPECT_EQ(induced_density(SmallGraph::complete(3), graph_w()), Rational(3, 10));
  EXPECT_EQ(induced_density(edge, edge), Rational(1));
  EXPECT_THROW(count_induced(SmallGraph::complete(4), SmallGraph::complete(3)), std::invalid_argument);
}

TEST(SmallGraph, InducedDensitiesSumToOne) {
  std::mt19937 rng(5);
  const std::vector<std::vector<SmallGraph>> classes = {
      {SmallGraph::complete(3), SmallGraph::from_edge_list(3, {{0, 1}, {1, 2}}), SmallGraph::from_edge_list(3, {{0, 1}}), SmallGraph::empty(3)}};
  for (int trial = 0; trial < 50; ++trial) {
    auto g = random_graph(rng, 3 + trial % 6);
    Rational total = 0;
    for (const auto& h : classes[0]) total += induced_density(h, g);
    EXPECT_EQ(total, 1);
  }
}

TEST(SmallGraph, CliqueCounts) {
  EXPECT_EQ(count_cliques(graph_w(), 3), 3);
  EXPECT_EQ(count_cliques(SmallGraph::complete(5), 4), 5);
  EXPECT_EQ(count_cliques(SmallGraph::cycle(5), 3), 0);
  std::mt19937 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    auto g = random_graph(rng, 4 + trial % 5);
    for (int k = 1; k <= 4; ++k) EXPECT_EQ(count_cliques(g, k), count_induced(SmallGraph::complete(k), g));
  }
}

TEST(SmallGraph, Automorphisms) {
  EXPECT_EQ(automorphisms(SmallGraph::cycle(5)).size(), 10u);
  EXPECT_EQ(automorphisms(SmallGraph::complete(2)).size(), 2u);
  EXPECT_EQ(automorphisms(SmallGraph::from_edge_list(3, {{0, 1}, {1, 2}})).size(), 2u);
  auto w = graph_w();
  auto group = automorphisms(w);
  for (const auto& a : group)
    for (const auto& b : group) {
      std::vector<int> ab(5);
      for (int v = 0; v < 5; ++v) ab[v] = a[b[v]];
      EXPECT_NE(std::find(group.begin(), group.end(), ab), group.end());
    }
}

TEST(Graph6, KnownEncodings) {
  EXPECT_EQ(to_graph6(SmallGraph::cycle(5)), "Dhc");
  EXPECT_EQ(to_graph6(SmallGraph::complete(3)), "Bw");
  EXPECT_EQ(to_graph6(SmallGraph::empty(0)), "?");
  EXPECT_EQ(to_graph6(SmallGraph::complete(1)), "@");
}

TEST(Graph6, RoundTrip) {
  std::mt19937 rng(13);
  for (int trial = 0; trial < 200; ++trial) {
    auto g = random_graph(rng, 1 + trial % 10);
    EXPECT_EQ(from_graph6(to_graph6(g)), g);
  }
  EXPECT_EQ(from_graph6(">>graph6<<Dhc\n"), SmallGraph::cycle(5));
}

TEST(Graph6, RejectsBadInput) {
  EXPECT_THROW(from_graph6(""), std::invalid_argument);
  EXPECT_THROW(from_graph6("Dh"), std::invalid_argument);
  EXPECT_THROW(from_graph6("K??????????"), std::invalid_argument);
  EXPECT_THROW(from_graph6("Bx"), std::invalid_argument);
}
