#include "flagforge/flags.hpp"
#include "fixtures.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace flagforge;
using flagforge::testing::fixture;

namespace {

// Oracle: label-fixing isomorphism by permuting the unlabeled vertices only.
bool brute_flag_iso(const SmallGraph& a, const SmallGraph& b, int k) {
  const int n = a.order();
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  do {
    bool ok = true;
    for (int u = 0; u < n && ok; ++u)
      for (int v = u + 1; v < n && ok; ++v) ok = a.adjacent(u, v) == b.adjacent(perm[u], perm[v]);
    if (ok) return true;
  } while (std::next_permutation(perm.begin() + k, perm.end()));
  return false;
}

// Oracle: filter every labeled graph on n vertices extending sigma, then deduplicate.
std::size_t naive_family_size(const TypeGraph& type, int n) {
  const int k = type.size();
  std::vector<std::pair<int, int>> free_pairs;
  for (int j = 1; j < n; ++j)
    for (int i = 0; i < j; ++i)
      if (j >= k) free_pairs.emplace_back(i, j);
  std::vector<SmallGraph> reps;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << free_pairs.size()); ++mask) {
    std::vector<Edge> edges = type.graph().edges();
    for (std::size_t b = 0; b < free_pairs.size(); ++b)
      if (mask >> b & 1u) edges.push_back(free_pairs[b]);
    auto g = SmallGraph::from_edge_list(n, edges);
    if (!is_admissible(g, type.forbidden())) continue;
    if (std::none_of(reps.begin(), reps.end(), [&](const SmallGraph& r) { return brute_flag_iso(r, g, k); }))
      reps.push_back(g);
  }
  return reps.size();
}

}  // namespace

TEST(Enumeration, AdmissibleCounts) {
  EXPECT_EQ(enumerate_admissible(3, 3).size(), 3u);
  EXPECT_EQ(enumerate_admissible(5, 3).size(), 14u);
  EXPECT_EQ(enumerate_admissible(5, 4).size(), 29u);
}

TEST(Enumeration, AdmissibleMembersAreAdmissibleAndDistinct) {
  for (int l : {3, 4})
    for (int n = 1; n <= 7; ++n) {
      auto graphs = enumerate_admissible(n, l);
      for (std::size_t i = 0; i < graphs.size(); ++i) {
        EXPECT_TRUE(is_admissible(graphs[i], l));
        if (i > 0) {
          EXPECT_LT(canonical_form(graphs[i - 1]).code, canonical_form(graphs[i]).code);
        }
      }
    }
}

TEST(Enumeration, AllGraphsWhenNothingIsForbidden) {
  const std::size_t known[] = {1, 2, 4, 11, 34, 156, 1044};
  for (int n = 1; n <= 7; ++n) EXPECT_EQ(enumerate_admissible(n, n + 1).size(), known[n - 1]) << n;
}

TEST(Enumeration, Types) {
  EXPECT_EQ(enumerate_types(1, 3).size(), 1u);
  EXPECT_EQ(enumerate_types(0, 3).size(), 1u);
  EXPECT_EQ(enumerate_types(0, 3)[0].size(), 0);
  EXPECT_EQ(enumerate_types(2, 3).size(), 2u);
  // Labeled graphs on [3] minus the empty one.
  EXPECT_EQ(enumerate_types(3, 3).size(), 7u);
}

TEST(Enumeration, FlagFamilySizes) {
  const int l = 3;
  EXPECT_EQ(enumerate_flags(TypeGraph::dot(l), 3)->size(), 5u);
  EXPECT_EQ(enumerate_flags(TypeGraph::dot(l), 2)->size(), 2u);
  auto tau2 = fixture("l3_tau2_flags4.json").at("tau2").as_type(l);
  EXPECT_EQ(enumerate_flags(tau2, 4)->size(), 8u);
  EXPECT_THROW(enumerate_flags(tau2, 2), std::invalid_argument);
}

TEST(Enumeration, TrivialTypeMatchesAdmissible) {
  for (int n = 1; n <= 6; ++n) {
    auto fam = enumerate_flags(TypeGraph::trivial(4), n);
    auto graphs = enumerate_admissible(n, 4);
    ASSERT_EQ(fam->size(), graphs.size());
    for (std::size_t i = 0; i < graphs.size(); ++i) EXPECT_EQ(underlying((*fam)[i]), graphs[i]);
  }
}

TEST(Enumeration, AugmentationMatchesNaiveFilter) {
  for (int l : {3, 4})
    for (int k = 0; k <= 3; ++k)
      for (const auto& type : enumerate_types(k, l))
        for (int n = std::max(k, 1); n <= 5; ++n)
          EXPECT_EQ(enumerate_flags(type, n)->size(), naive_family_size(type, n)) << "l=" << l << " sigma=" << type.graph6() << " n=" << n;
}

TEST(Enumeration, MembersSatisfyFlagInvariants) {
  for (const auto& type : enumerate_types(2, 3)) {
    auto fam = enumerate_flags(type, 5);
    for (std::size_t i = 0; i < fam->size(); ++i) {
      const Flag& f = (*fam)[i];
      auto lab = f.labeled();
      EXPECT_EQ(f.graph().induced(lab), type.graph());
      EXPECT_TRUE(is_admissible(f.graph(), 3));
      for (std::size_t j = i + 1; j < fam->size(); ++j) EXPECT_FALSE(flag_isomorphic(f, (*fam)[j]));
    }
  }
}

TEST(Enumeration, OrderIndependentOfInputOrder) {
  auto fam = enumerate_flags(TypeGraph::dot(4), 4);
  std::vector<GraphCode> codes;
  for (const auto& f : *fam) codes.push_back(f.code());
  std::mt19937 rng(17);
  for (int trial = 0; trial < 5; ++trial) {
    std::shuffle(codes.begin(), codes.end(), rng);
    FlagFamily again(fam->type(), 4, codes);
    EXPECT_EQ(again.fingerprint(), fam->fingerprint());
    for (std::size_t i = 0; i < fam->size(); ++i) EXPECT_EQ(again[i].code(), (*fam)[i].code());
  }
}

TEST(Flags, Underlying) {
  auto fx = fixture("l3_dot_examples.json");
  EXPECT_TRUE(isomorphic(underlying(fx.flag("Z5")), SmallGraph::complete(3)));
  EXPECT_TRUE(isomorphic(underlying(fx.flag("rho")), SmallGraph::complete(2)));
  auto tau1 = fixture("l3_tau1_flags4.json").flag("tau1");
  EXPECT_EQ(underlying(tau1), tau1.type().graph());
}

TEST(Flags, Isomorphism) {
  auto fx = fixture("l3_dot_examples.json");
  auto z1 = fx.at("Z1");
  std::vector<int> swapped{0, 2, 1};
  Flag z1b(z1.graph.permuted(swapped), std::vector<int>{0}, TypeGraph::dot(3));
  EXPECT_TRUE(flag_isomorphic(fx.flag("Z1"), z1b));
  EXPECT_FALSE(flag_isomorphic(fx.flag("Z3"), fx.flag("Z4")));
  auto m = fixture("l3_tau1_flags4.json");
  EXPECT_FALSE(flag_isomorphic(m.flag("M1"), m.flag("M2")));
  EXPECT_THROW(flag_isomorphic(fx.flag("Z1"), m.flag("M1")), std::invalid_argument);
}

TEST(Flags, ConstructorRejectsBadLabels) {
  auto p2 = SmallGraph::from_edge_list(3, {{0, 1}, {1, 2}});
  auto edge_type = TypeGraph(SmallGraph::complete(2), 3);
  EXPECT_NO_THROW(Flag(p2, std::vector<int>{0, 1}, edge_type));
  EXPECT_THROW(Flag(p2, std::vector<int>{0, 2}, edge_type), std::invalid_argument);
  EXPECT_THROW(Flag(p2, std::vector<int>{0, 0}, edge_type), std::invalid_argument);
  EXPECT_THROW(Flag(p2, std::vector<int>{0}, edge_type), std::invalid_argument);
  EXPECT_THROW(Flag(SmallGraph::empty(3), std::vector<int>{0}, TypeGraph::dot(3)), std::invalid_argument);
}

TEST(Fixtures, TablesAreCompleteFamilies) {
  struct Table {
    const char* file;
    const char* type;
    int size;
    std::size_t expected;
  };
  for (auto t : {Table{"l3_tau2_flags4.json", "tau2", 4, 8},
                 Table{"l3_dot_flags3.json", "dot", 3, 5}, Table{"l4_tau2_flags4.json", "tau2", 4, 8},
                 Table{"l3_sigma_split.json", "sigma", 3, 3}}) {
    auto fx = fixture(t.file);
    auto fam = enumerate_flags(fx.at(t.type).as_type(fx.forbidden()), t.size);
    EXPECT_EQ(fam->size(), t.expected) << t.file;
    std::set<std::size_t> hit;
    for (const auto& e : fx.entries())
      if (e.name != t.type) hit.insert(fam->index_of(e.as_flag(fx.forbidden())));
    EXPECT_EQ(hit.size(), t.expected) << t.file;
  }
}

TEST(Fixtures, PartialTablesAreDistinctMembers) {
  // The tau1 families are larger than the four named flags M1..M4.
  for (auto [file, l, total] : {std::tuple{"l3_tau1_flags4.json", 3, 6u}, std::tuple{"l4_tau1_flags4.json", 4, 8u}}) {
    auto m = fixture(file);
    auto fam = enumerate_flags(m.at("tau1").as_type(l), 4);
    EXPECT_EQ(fam->size(), total) << file;
    std::set<std::size_t> hit;
    for (auto name : {"M1", "M2", "M3", "M4"}) hit.insert(fam->index_of(m.flag(name)));
    EXPECT_EQ(hit.size(), 4u) << file;
  }
  auto z = fixture("l4_dot_flags3.json");
  EXPECT_EQ(enumerate_flags(TypeGraph::dot(4), 3)->size(), 6u);
  std::set<std::size_t> zs;
  for (auto name : {"Z1", "Z2", "Z3", "Z4", "Z5"}) zs.insert(enumerate_flags(TypeGraph::dot(4), 3)->index_of(z.flag(name)));
  EXPECT_EQ(zs.size(), 5u);
}

TEST(Fixtures, GraphTablesAreCompleteAndDistinct) {
  for (auto [file, count] : {std::pair{"l3_graphs5.json", 14u}, std::pair{"l4_graphs5.json", 29u}}) {
    auto fx = fixture(file);
    auto fam = admissible_family(5, fx.forbidden());
    std::set<std::size_t> hit;
    for (const auto& e : fx.entries()) hit.insert(fam->index_of(canonical_form(e.graph).code));
    EXPECT_EQ(hit.size(), count) << file;
  }
}

TEST(Fixtures, RepeatedDotTablesAgree) {
  auto a = fixture("l3_dot_examples.json");
  auto b = fixture("l3_dot_flags3.json");
  for (auto name : {"Z1", "Z2", "Z3", "Z4", "Z5"}) EXPECT_TRUE(flag_isomorphic(a.flag(name), b.flag(name))) << name;
}

TEST(Fixtures, LoaderErrors) {
  EXPECT_THROW(fixture("missing.json"), std::runtime_error);
  auto doc = nlohmann::json::parse(R"({"forbidden_l":3,"entries":[{"name":"x","n":2,"edges":[[1,3]]}]})");
  EXPECT_THROW(FixtureSet::parse(doc), std::invalid_argument);
}
