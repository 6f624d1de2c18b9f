#pragma once

#include "flagforge/flags.hpp"
#include "flagforge/parallel.hpp"

#include <array>
#include <cstdlib>
#include <mutex>
#include <numeric>
#include <vector>

namespace flagforge {

/// Blow-up of `base`: vertex i becomes a clique of sizes[i] vertices, edges become complete
/// bipartite graphs. Zero sizes are allowed and drop the vertex.
struct BlowupSpec {
  SmallGraph base;
  std::vector<long> sizes;

  BlowupSpec(SmallGraph b, std::vector<long> s) : base(std::move(b)), sizes(std::move(s)) {
    if (static_cast<int>(sizes.size()) != base.order()) throw std::invalid_argument("one part size per base vertex is required");
    for (long x : sizes)
      if (x < 0) throw std::invalid_argument("part sizes must be nonnegative");
  }

  long order() const { return std::accumulate(sizes.begin(), sizes.end(), 0L); }
};

/// Explicit graph on at most 64 vertices.
class DenseGraph {
 public:
  explicit DenseGraph(int n) : rows_(n, 0) {
    if (n < 0 || n > 64) throw std::invalid_argument("dense graphs hold at most 64 vertices");
  }

  int order() const { return static_cast<int>(rows_.size()); }
  bool adjacent(int u, int v) const { return rows_[u] >> v & 1u; }
  std::uint64_t neighbours(int v) const { return rows_[v]; }
  std::uint64_t full_mask() const { return order() == 64 ? ~0ull : (1ull << order()) - 1; }

  void add_edge(int u, int v) {
    if (u == v) throw std::invalid_argument("loops are not allowed");
    rows_[u] |= 1ull << v;
    rows_[v] |= 1ull << u;
  }

  long edge_count() const {
    long e = 0;
    for (auto r : rows_) e += std::popcount(r);
    return e / 2;
  }

  BigInt count_cliques(int k) const {
    if (k < 1) throw std::invalid_argument("clique size must be at least 1");
    std::uint64_t total = 0;
    auto rec = [&](auto&& self, std::uint64_t cand, int depth) -> void {
      if (depth == k) {
        ++total;
        return;
      }
      while (cand) {
        int v = std::countr_zero(cand);
        cand &= cand - 1;
        self(self, cand & rows_[v], depth + 1);
      }
    };
    rec(rec, full_mask(), 0);
    return total;
  }

  int clique_number() const {
    return detail::max_clique<std::uint64_t>(full_mask(), [&](int v) { return rows_[v]; }, 0, 0);
  }

  int independence_number() const {
    const auto full = full_mask();
    return detail::max_clique<std::uint64_t>(full, [&](int v) { return ~rows_[v] & full & ~(1ull << v); }, 0, 0);
  }

  SmallGraph small() const {
    if (order() > SmallGraph::kMaxVertices) throw std::invalid_argument("graph too large for SmallGraph");
    std::vector<Edge> edges;
    for (int u = 0; u < order(); ++u)
      for (int v = u + 1; v < order(); ++v)
        if (adjacent(u, v)) edges.emplace_back(u, v);
    return SmallGraph::from_edge_list(order(), edges);
  }

 private:
  std::vector<std::uint64_t> rows_;
};

/// Parts occupy consecutive vertex ranges in base order.
inline DenseGraph materialize(const BlowupSpec& spec) {
  const long n = spec.order();
  if (n > 64) throw std::invalid_argument("materialization is limited to 64 vertices");
  DenseGraph g(static_cast<int>(n));
  std::vector<int> part;
  for (int i = 0; i < spec.base.order(); ++i) part.insert(part.end(), spec.sizes[i], i);
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v)
      if (part[u] == part[v] || spec.base.adjacent(part[u], part[v])) g.add_edge(u, v);
  return g;
}

/// Number of k-cliques: sum over nonempty base cliques S of [x^k] prod_{i in S} ((1+x)^{n_i} - 1).
inline BigInt count_cliques_blowup(const BlowupSpec& spec, int k) {
  if (k < 1) throw std::invalid_argument("clique size must be at least 1");
  const int m = spec.base.order();
  std::vector<std::vector<BigInt>> part_poly(m, std::vector<BigInt>(k + 1));
  for (int i = 0; i < m; ++i)
    for (int d = 1; d <= k; ++d) part_poly[i][d] = binomial(spec.sizes[i], d);
  BigInt total = 0;
  for (unsigned s = 1; s < (1u << m); ++s) {
    bool clique = true;
    for (unsigned rest = s; rest && clique; rest &= rest - 1) {
      const int v = std::countr_zero(rest);
      clique = (spec.base.neighbours(v) & (s & ~(1u << v))) == (s & ~(1u << v));
    }
    if (!clique || std::popcount(s) > k) continue;
    std::vector<BigInt> poly(k + 1);
    poly[0] = 1;
    for (unsigned rest = s; rest; rest &= rest - 1) {
      const auto& p = part_poly[std::countr_zero(rest)];
      std::vector<BigInt> next(k + 1);
      for (int a = 0; a <= k; ++a)
        if (poly[a] != 0)
          for (int b = 1; a + b <= k; ++b) next[a + b] += poly[a] * p[b];
      poly = std::move(next);
    }
    total += poly[k];
  }
  return total;
}

/// Disjoint union of `parts` cliques with sizes differing by at most one, larger parts first.
inline BlowupSpec turan_complement(long n, int parts) {
  if (parts < 1 || parts > SmallGraph::kMaxVertices) throw std::invalid_argument("part count out of range");
  if (n < 0) throw std::invalid_argument("vertex count must be nonnegative");
  std::vector<long> sizes(parts, n / parts);
  for (long i = 0; i < n % parts; ++i) ++sizes[i];
  return BlowupSpec(SmallGraph::empty(parts), sizes);
}

/// (|V_1|, ..., |V_5|) of the extremal C5 blow-up, by n mod 5. n = 6 yields an empty part.
inline std::array<long, 5> c5_extremal_sizes(long n) {
  if (n < 5) throw std::invalid_argument("the C5 construction needs n >= 5");
  const long k = n / 5;
  switch (n % 5) {
    case 0: return {k, k, k, k, k};
    case 1: return {k, k, k + 1, k - 1, k + 1};
    case 2: return {k, k, k + 1, k, k + 1};
    case 3: return {k + 1, k + 1, k, k + 1, k};
    default: return {k + 1, k + 1, k, k + 2, k};
  }
}

inline BlowupSpec c5_blowup(const std::array<long, 5>& sizes) {
  return BlowupSpec(SmallGraph::cycle(5), std::vector<long>(sizes.begin(), sizes.end()));
}

inline BigInt f34_formula(long n) {
  if (n < 1) throw std::invalid_argument("n must be positive");
  return binomial(n / 3, 3) + binomial((n + 1) / 3, 3) + binomial((n + 2) / 3, 3);
}

inline BigInt f43_construction_value(long n) { return count_cliques_blowup(c5_blowup(c5_extremal_sizes(n)), 4); }

/// y_i = |V_{2i-1} u V_{2i}| with indices mod 5.
inline std::array<long, 5> pair_sums(const std::array<long, 5>& v) {
  std::array<long, 5> y{};
  for (int i = 0; i < 5; ++i) y[i] = v[(2 * i) % 5] + v[(2 * i + 1) % 5];
  return y;
}

namespace detail {
inline void require_gap_feasible(long n, const std::array<long, 5>& y) {
  for (int i = 0; i < 5; ++i) {
    if (y[i] < 0) throw std::invalid_argument("y entries must be nonnegative");
    if (y[i] + y[(i + 1) % 5] > n) throw std::invalid_argument("y_i + y_{i+1} exceeds n");
  }
}

inline std::int64_t choose4(std::int64_t m) { return m < 4 ? 0 : m * (m - 1) / 2 * (m - 2) / 3 * (m - 3) / 4; }

inline std::int64_t g_value(long n, const std::array<long, 5>& y) {
  std::int64_t g = 0;
  for (int i = 0; i < 5; ++i) g += choose4(y[i]) - choose4(n - y[i] - y[(i + 1) % 5]);
  return g;
}
}  // namespace detail

/// g(y) = sum C(y_i, 4) - sum C(n - y_i - y_{i+1}, 4).
inline BigInt g_objective(long n, const std::array<long, 5>& y) {
  detail::require_gap_feasible(n, y);
  BigInt g = 0;
  for (int i = 0; i < 5; ++i) g += binomial(y[i], 4) - binomial(n - y[i] - y[(i + 1) % 5], 4);
  return g;
}

/// Lexicographically smallest cyclic rotation.
inline std::array<long, 5> smallest_rotation(const std::array<long, 5>& y) {
  auto best = y;
  for (int r = 1; r < 5; ++r) {
    std::array<long, 5> rot{};
    for (int i = 0; i < 5; ++i) rot[i] = y[(i + r) % 5];
    best = std::min(best, rot);
  }
  return best;
}

struct IntOptInstance {
  long n;
  Rational epsilon;
  std::array<long, 5> y;
};

struct IntOptResult {
  long n;
  Rational epsilon;
  BigInt minimum;
  std::size_t feasible = 0;
  /// Every minimizing tuple.
  std::vector<std::array<long, 5>> minimizers;
  /// One smallest rotation per cyclic orbit of minimizers.
  std::vector<std::array<long, 5>> orbits;
};

/// Exhaustive minimization of g over integer y with sum 2n and |y_i - 2n/5| < epsilon n.
inline IntOptResult intopt_bruteforce(long n, const Rational& epsilon = Rational(1, 10)) {
  if (n < 12) throw std::invalid_argument("the integer optimization is stated for n >= 12");
  if (epsilon <= 0) throw std::invalid_argument("epsilon must be positive");
  if (n > 5000) throw std::invalid_argument("n too large for 64-bit clique counts");
  const BigInt num = numerator_of(epsilon), den = denominator_of(epsilon);
  // |5y - 2n| * den < 5n * num
  auto inside = [&](long y) { return BigInt(std::abs(5 * y - 2 * n)) * den < BigInt(5 * n) * num; };
  std::vector<long> window;
  for (long y = 0; y <= n; ++y)
    if (inside(y)) window.push_back(y);
  if (window.empty()) throw std::invalid_argument("empty feasible set");

  std::mutex mu;
  IntOptResult res{n, epsilon, 0, 0, {}, {}};
  bool have = false;
  std::int64_t best = 0;
  parallel_for(window.size(), [&](std::size_t i1) {
    std::int64_t local_best = 0;
    bool local_have = false;
    std::size_t local_feasible = 0;
    std::vector<std::array<long, 5>> local;
    std::array<long, 5> y{};
    y[0] = window[i1];
    for (long y2 : window)
      for (long y3 : window)
        for (long y4 : window) {
          y = {y[0], y2, y3, y4, 2 * n - y[0] - y2 - y3 - y4};
          if (!inside(y[4])) continue;
          bool gaps = true;
          for (int i = 0; i < 5 && gaps; ++i) gaps = y[i] + y[(i + 1) % 5] <= n;
          if (!gaps) continue;
          ++local_feasible;
          const auto g = detail::g_value(n, y);
          if (!local_have || g < local_best) {
            local_best = g;
            local_have = true;
            local.clear();
          }
          if (g == local_best) local.push_back(y);
        }
    std::lock_guard lock(mu);
    res.feasible += local_feasible;
    if (!local_have) return;
    if (!have || local_best < best) {
      best = local_best;
      have = true;
      res.minimizers.clear();
    }
    if (local_best == best) res.minimizers.insert(res.minimizers.end(), local.begin(), local.end());
  });
  if (!have) throw std::invalid_argument("empty feasible set");
  res.minimum = best;
  std::sort(res.minimizers.begin(), res.minimizers.end());
  for (const auto& y : res.minimizers) res.orbits.push_back(smallest_rotation(y));
  std::sort(res.orbits.begin(), res.orbits.end());
  res.orbits.erase(std::unique(res.orbits.begin(), res.orbits.end()), res.orbits.end());
  return res;
}

struct BruteForceResult {
  int n, k, l;
  BigInt minimum;
  /// Canonical representatives attaining the minimum, in family order.
  std::vector<SmallGraph> witnesses;
};

/// Minimum number of k-cliques over all n-vertex graphs with independence number below l.
inline BruteForceResult bruteforce_min_cliques(int n, int k, int l, bool allow_nine = false) {
  if (n < 1 || n > (allow_nine ? 9 : 8)) throw std::invalid_argument("exhaustive search is limited to n <= 8");
  auto fam = admissible_family(n, l);
  std::vector<BigInt> counts(fam->size());
  parallel_for(fam->size(), [&](std::size_t i) { counts[i] = count_cliques((*fam)[i].graph(), k); });
  BruteForceResult res{n, k, l, *std::min_element(counts.begin(), counts.end()), {}};
  for (std::size_t i = 0; i < fam->size(); ++i)
    if (counts[i] == res.minimum) res.witnesses.push_back((*fam)[i].graph());
  return res;
}

struct RatioComparison {
  Rational c5_density;
  Rational turan_density;
  bool c5_smaller;
};

/// Limit k-clique densities of the balanced C5 blow-up, (2^k - 1)/5^(k-1), against two
/// disjoint halves, 1/2^(k-1).
inline RatioComparison blowup_ratio_comparison(int k) {
  if (k < 2) throw std::invalid_argument("clique size must be at least 2");
  const BigInt two_k = BigInt(1) << k;
  BigInt five = 1;
  for (int i = 1; i < k; ++i) five *= 5;
  Rational c5(two_k - 1, five), turan(BigInt(1), two_k / 2);
  return {c5, turan, c5 < turan};
}

}  // namespace flagforge
