#include "flagforge/probsearch.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace flagforge;

namespace {

SearchParams reference_tuple() { return {2074, 164397, Rational(51707, 10000000), 14000, 35000}; }

// Mass condition with every denominator cleared: p = a/b, both sides times 6 (l-1)^2 b^3.
bool mass_by_integers(const SearchParams& q) {
  const BigInt a = numerator_of(q.p), b = denominator_of(q.p), m = q.m, l1 = q.l - 1;
  const BigInt c2 = m * (m - 1) / 2, c3 = m * (m - 1) * (m - 2) / 6;
  const BigInt lhs = 6 * l1 * l1 * (c2 * a * b * b + c3 * a * a * a + BigInt(q.s + q.t) * b * b * b);
  const BigInt rhs = b * b * b * (m * m * m - m * l1 * l1);
  return lhs <= rhs;
}

// Plain floating-point evaluation of the three-term expression.
long double float_total(const SearchParams& q) {
  const long double p = static_cast<long double>(q.p.convert_to<double>());
  const long double m = q.m, l = q.l;
  const long double b1 = std::exp(l * (std::log(m) + 1.0L - std::log(l) + (l - 1) / 2 * std::log1p(-p)));
  const long double v2 = m * (m - 1) / 2 * p * (1 - p);
  const long double p3 = p * p * p;
  const long double v3 = m * (m - 1) * (m - 2) / 6 * p3 * ((1 - p3) + 3 * (m - 3) * p * p * (1 - p));
  const long double b2 = v2 / (static_cast<long double>(q.s) * q.s + v2);
  const long double b3 = v3 / (static_cast<long double>(q.t) * q.t + v3);
  return b1 + b2 + b3 * (1 - b2);
}

SearchParams random_params(std::mt19937& rng) {
  const long l = 3 + static_cast<long>(rng() % 60);
  return {l, l + 1 + static_cast<long>(rng() % 3000), Rational(1 + rng() % 500, 1000), 1 + static_cast<long>(rng() % 5000),
          1 + static_cast<long>(rng() % 5000)};
}

}  // namespace

TEST(Mass, ReferenceTupleAndGrossViolation) {
  auto r = check_mass(reference_tuple());
  EXPECT_TRUE(r.ok);
  EXPECT_GT(r.margin, 0);
  EXPECT_EQ(r.margin, r.rhs - r.lhs);
  // l = 3 leaves room: C(100,2)/2 + C(100,3)/8 + 2 = 22689.5 <= 41650.
  EXPECT_TRUE(check_mass({3, 100, Rational(1, 2), 1, 1}).ok);
  EXPECT_EQ(check_mass({3, 100, Rational(1, 2), 1, 1}).lhs, Rational(45379, 2));
  EXPECT_FALSE(check_mass({10, 100, Rational(1, 2), 1, 1}).ok);
}

TEST(Mass, AgreesWithClearedDenominators) {
  std::mt19937 rng(42);
  int both = 0;
  for (int trial = 0; trial < 500; ++trial) {
    auto q = random_params(rng);
    EXPECT_EQ(check_mass(q).ok, mass_by_integers(q));
    both += check_mass(q).ok;
  }
  EXPECT_GT(both, 0);
  EXPECT_TRUE(mass_by_integers(reference_tuple()));
}

TEST(Mass, ThresholdInS) {
  auto q = reference_tuple();
  long lo = 1, hi = 1L << 40;
  while (hi - lo > 1) {
    q.s = lo + (hi - lo) / 2;
    (check_mass(q).ok ? lo : hi) = q.s;
  }
  q.s = lo;
  EXPECT_TRUE(check_mass(q).ok);
  EXPECT_TRUE(mass_by_integers(q));
  q.s = hi;
  EXPECT_FALSE(check_mass(q).ok);
  EXPECT_FALSE(mass_by_integers(q));
  EXPECT_LT(check_mass(q).margin, 0);
}

TEST(Mass, RejectsInvalidParameters) {
  EXPECT_THROW(check_mass({2, 10, Rational(1, 2), 1, 1}), std::invalid_argument);
  EXPECT_THROW(check_mass({5, 5, Rational(1, 2), 1, 1}), std::invalid_argument);
  EXPECT_THROW(check_mass({5, 10, Rational(1), 1, 1}), std::invalid_argument);
  EXPECT_THROW(check_mass({5, 10, Rational(1, 2), 0, 1}), std::invalid_argument);
}

TEST(Probability, EnclosureOfE) {
  detail::Mpfr one(2000), e(2000);
  mpfr_set_ui(one.get(), 1, MPFR_RNDN);
  mpfr_exp(e.get(), one.get(), MPFR_RNDN);
  const Rational approx = e.exact();
  EXPECT_LT(e_lower(), approx);
  EXPECT_GT(e_upper(), approx);
  EXPECT_EQ(e_upper() - e_lower(), Rational(BigInt(1), pow(BigInt(10), 59)));
}

TEST(Probability, ReferenceTupleIsCertified) {
  auto r = check_probability(reference_tuple());
  EXPECT_TRUE(r.ok);
  EXPECT_LT(r.total_upper, 1);
  EXPECT_LE(r.b1_lower, r.b1_upper);
  EXPECT_EQ(r.b23, r.b2 + r.b3 * (1 - r.b2));
  const long double approx = float_total(reference_tuple());
  EXPECT_NEAR(static_cast<long double>(r.total_upper.convert_to<double>()), approx, 1e-9);
  EXPECT_LT(approx, 1.0L);
}

TEST(Probability, SmallInstanceFails) {
  auto r = check_probability({3, 10, Rational(1, 2), 1, 1});
  EXPECT_FALSE(r.ok);
  EXPECT_GE(r.b1_lower, 1);
}

TEST(Probability, LargeDeviationsLeaveTheUnionTerm) {
  auto q = reference_tuple();
  q.s = q.t = 2000000000L;
  auto r = check_probability(q);
  EXPECT_LT(r.b23, Rational(1, 1000000));
  EXPECT_LT(r.total_upper - r.b1_upper, Rational(1, 1000000));
}

TEST(Probability, DoublingPrecisionKeepsVerdictAndTightens) {
  std::mt19937 rng(7);
  std::vector<SearchParams> cases{reference_tuple()};
  for (int i = 0; i < 40; ++i) cases.push_back(random_params(rng));
  for (const auto& q : cases) {
    auto lo = check_probability(q, 256), hi = check_probability(q, 512);
    EXPECT_EQ(lo.ok, hi.ok);
    EXPECT_LE(hi.b1_upper, lo.b1_upper);
    EXPECT_GE(hi.b1_lower, lo.b1_lower);
    EXPECT_LE(hi.b1_lower, hi.b1_upper);
  }
}

TEST(Probability, MatchesFloatingPointAwayFromOne) {
  std::mt19937 rng(8);
  for (int i = 0; i < 100; ++i) {
    auto q = random_params(rng);
    auto r = check_probability(q);
    const long double approx = float_total(q);
    if (std::fabs(approx - 1.0L) > 1e-6L) {
      EXPECT_EQ(r.ok, approx < 1.0L);
    }
  }
}

TEST(Probability, MonotoneInDeviations) {
  std::mt19937 rng(9);
  for (int i = 0; i < 100; ++i) {
    auto q = random_params(rng);
    auto base = check_probability(q);
    auto more_s = q, more_t = q;
    more_s.s += 1 + static_cast<long>(rng() % 1000);
    more_t.t += 1 + static_cast<long>(rng() % 1000);
    EXPECT_LE(check_probability(more_s).b2, base.b2);
    EXPECT_LE(check_probability(more_t).b3, base.b3);
  }
}

TEST(Verify, ReferenceTupleIsSuitable) {
  auto r = verify_params(reference_tuple());
  EXPECT_TRUE(r.mass.ok);
  ASSERT_TRUE(r.probability.has_value());
  EXPECT_TRUE(r.suitable);
  auto j = to_json(r);
  EXPECT_TRUE(j["suitable"].get<bool>());
  EXPECT_EQ(j["params"]["p"], "51707/10000000");
}

TEST(Verify, MassFailureSkipsProbability) {
  auto r = verify_params({10, 100, Rational(1, 2), 1, 1});
  EXPECT_FALSE(r.suitable);
  EXPECT_FALSE(r.probability.has_value());
}

// p scaled by 3/2: C(m,3) p^3 alone already exceeds the mass budget.
TEST(Verify, ScaledProbabilityRegression) {
  auto q = reference_tuple();
  q.p *= Rational(3, 2);
  const Rational triangles = Rational(binomial(q.m, 3)) * q.p * q.p * q.p;
  EXPECT_GT(triangles, check_mass(q).rhs);
  auto r = verify_params(q);
  EXPECT_FALSE(r.mass.ok);
  EXPECT_FALSE(r.suitable);
  EXPECT_FALSE(r.probability.has_value());
}

TEST(Search, FindsFirstSuitablePointInOrder) {
  SearchGrid grid{{2073, 2074}, {164397}, {Rational(51707, 10000000)}, {9000, 14000}, {35000}};
  auto res = search(grid, 100);
  ASSERT_TRUE(res.found.has_value());
  const auto& q = res.found->params;
  EXPECT_TRUE(res.found->suitable);
  for (std::size_t i = 0; i + 1 < res.evaluated; ++i) EXPECT_FALSE(verify_params(grid.at(i)).suitable);
  EXPECT_TRUE(verify_params(q).suitable);
  EXPECT_EQ(search(grid, 100).found->params.s, q.s);
}

TEST(Search, EmptyGridAndBudget) {
  SearchGrid empty{{}, {100}, {Rational(1, 2)}, {1}, {1}};
  auto res = search(empty, 10);
  EXPECT_FALSE(res.found.has_value());
  EXPECT_EQ(res.evaluated, 0u);
  SearchGrid hopeless{{3, 4, 5}, {100, 200}, {Rational(1, 2)}, {1, 2, 3}, {1, 2}};
  EXPECT_THROW(search(hopeless, 5), BudgetExhausted);
  EXPECT_FALSE(search(hopeless, 1000).found.has_value());
}

TEST(Search, GridFromJson) {
  auto j = nlohmann::json::parse(R"({"l": {"from": 2070, "to": 2074, "step": 2}, "m": 164397, "p": ["51707/10000000", "1/200"],
                                     "s": [14000], "t": {"from": 30000, "to": 35000, "step": 5000}})");
  auto g = grid_from_json(j);
  EXPECT_EQ(g.l, (std::vector<long>{2070, 2072, 2074}));
  EXPECT_EQ(g.m, (std::vector<long>{164397}));
  EXPECT_EQ(g.p.size(), 2u);
  EXPECT_EQ(g.t, (std::vector<long>{30000, 35000}));
  EXPECT_EQ(g.size(), 12u);
  EXPECT_EQ(g.at(0).t, 30000);
  EXPECT_EQ(g.at(1).t, 35000);
  EXPECT_EQ(g.at(11).l, 2074);
}
