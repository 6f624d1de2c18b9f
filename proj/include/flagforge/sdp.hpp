#pragma once

#include "flagforge/algebra.hpp"
#include "flagforge/certify.hpp"

#include <json.hpp>

#include <ostream>
#include <set>
#include <string>
#include <vector>

namespace flagforge {

/// pairing(H)[a][b] = d_sigma(F_a, F_b; H) over the members of `fam`.
inline RationalMatrix pairing_matrix(const FlagFamily& fam, const SmallGraph& h) {
  const TypeGraph& type = fam.type();
  const int k = type.size();
  const int s = fam.flag_size() - k;
  if (2 * s + k > h.order()) throw std::invalid_argument("host graph too small for the block");
  const std::size_t m = fam.size();
  std::vector<std::uint64_t> counts(m * m, 0);
  detail::for_each_embedding(h, type, [&](std::span<const int> theta) {
    auto subsets = detail::classify_subsets(h, theta, fam);
    for (const auto& [ma, ia] : subsets)
      for (const auto& [mb, ib] : subsets)
        if ((ma & mb) == 0) ++counts[ia * m + ib];
  });
  const BigInt total = detail::falling_factorial(h.order(), k) * binomial(h.order() - k, s) * binomial(h.order() - k - s, s);
  RationalMatrix out(m, std::vector<Rational>(m));
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b)
      if (counts[a * m + b]) out[a][b] = Rational(BigInt(counts[a * m + b]), total);
  return out;
}

inline RationalMatrix pairing_matrix(const TypeGraph& type, int flag_size, const SmallGraph& h) {
  return pairing_matrix(*enumerate_flags(type, flag_size), h);
}

/// One PSD block. Row r of `basis` is the r-th basis vector over the flag family; the block's
/// matrix variable X gives the square sum_{r,s} X_rs b_r b_s.
struct SDPBlock {
  TypeGraph type;
  int flag_size;
  FamilyRef family;
  RationalMatrix basis;
  /// pairing[h] = basis * P(H_h) * basis^T.
  std::vector<RationalMatrix> pairing;

  std::size_t dimension() const { return basis.size(); }
};

/// maximize y subject to s_H = d(J; H) - sum_i <Q_i, pairing_i(H)> - y >= 0 and Q_i PSD.
struct SDPProblem {
  SmallGraph objective;
  int forbidden;
  int t;
  FamilyRef graphs;
  std::vector<Rational> objective_coeffs;
  std::vector<SDPBlock> blocks;
};

struct BlockSpec {
  TypeGraph type;
  int flag_size;
};

namespace detail {
inline RationalMatrix identity(std::size_t n) {
  RationalMatrix m(n, std::vector<Rational>(n));
  for (std::size_t i = 0; i < n; ++i) m[i][i] = 1;
  return m;
}

inline RationalMatrix multiply(const RationalMatrix& a, const RationalMatrix& b) {
  const std::size_t inner = b.size(), cols = b.empty() ? 0 : b[0].size();
  RationalMatrix out(a.size(), std::vector<Rational>(cols));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t k = 0; k < inner; ++k) {
      if (a[i][k] == 0) continue;
      for (std::size_t j = 0; j < cols; ++j)
        if (b[k][j] != 0) out[i][j] += a[i][k] * b[k][j];
    }
  return out;
}

inline RationalMatrix transpose(const RationalMatrix& a) {
  if (a.empty()) return {};
  RationalMatrix out(a[0].size(), std::vector<Rational>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a[i].size(); ++j) out[j][i] = a[i][j];
  return out;
}

inline bool invertible(RationalMatrix m) {
  const std::size_t n = m.size();
  auto piv = rref(m, n);
  return piv.size() == n;
}
}  // namespace detail

inline SDPProblem build_problem(const SmallGraph& objective, int l, int t, const std::vector<BlockSpec>& blocks) {
  if (t < 1 || t > 7) throw std::invalid_argument("expansion size must lie in 1..7");
  if (objective.order() > t) throw std::invalid_argument("objective graph larger than t");
  for (const auto& b : blocks) {
    if (b.type.forbidden() != l) throw std::invalid_argument("block type generated under a different l");
    if (b.flag_size < b.type.size()) throw std::invalid_argument("block flag size smaller than its type");
    if (2 * b.flag_size - b.type.size() > t)
      throw std::invalid_argument("block (|sigma|=" + std::to_string(b.type.size()) + ", size " + std::to_string(b.flag_size) +
                                  ") violates 2 l_i - |sigma| <= t");
  }
  SDPProblem p{objective, l, t, admissible_family(t, l), {}, {}};
  auto target = expand(graph_vector(objective, l), t);
  p.objective_coeffs = target.coefficients();
  for (const auto& b : blocks) {
    auto fam = enumerate_flags(b.type, b.flag_size);
    p.blocks.push_back(SDPBlock{b.type, b.flag_size, fam, detail::identity(fam->size()), {}});
  }
  const std::size_t nh = p.graphs->size();
  for (auto& b : p.blocks) b.pairing.resize(nh);
  parallel_for(p.blocks.size() * nh, [&](std::size_t job) {
    auto& b = p.blocks[job / nh];
    b.pairing[job % nh] = pairing_matrix(*b.family, (*p.graphs)[job % nh].graph());
  });
  return p;
}

/// alpha_H = sum_i <X_i, pairing_i(H)> for given block matrices.
inline DensityVector alpha(const SDPProblem& p, const std::vector<RationalMatrix>& xs) {
  if (xs.size() != p.blocks.size()) throw std::invalid_argument("one matrix per block is required");
  DensityVector out(p.graphs);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const auto& b = p.blocks[i];
    if (xs[i].size() != b.dimension()) throw std::invalid_argument("block matrix has the wrong size");
    for (std::size_t h = 0; h < out.size(); ++h)
      for (std::size_t r = 0; r < b.dimension(); ++r)
        for (std::size_t s = 0; s < b.dimension(); ++s)
          if (xs[i][r][s] != 0) out[h] += xs[i][r][s] * b.pairing[h][r][s];
  }
  return out;
}

/// Replaces block `index`'s basis by `rows` (expressed over the current basis, invertible):
/// pairing <- R P R^T.
inline void change_basis(SDPProblem& p, std::size_t index, const RationalMatrix& rows) {
  auto& b = p.blocks.at(index);
  if (rows.size() != b.dimension()) throw std::invalid_argument("basis change must be square of the block size");
  for (const auto& r : rows)
    if (r.size() != b.dimension()) throw std::invalid_argument("basis change must be square of the block size");
  if (!detail::invertible(rows)) throw std::invalid_argument("basis change is singular");
  const auto rt = detail::transpose(rows);
  for (auto& m : b.pairing) m = detail::multiply(detail::multiply(rows, m), rt);
  b.basis = detail::multiply(rows, b.basis);
}

/// Splits block `index` after its first `k` basis rows. Requires every cross pairing entry to
/// vanish, so no feasible square is lost.
inline void split_block(SDPProblem& p, std::size_t index, std::size_t k) {
  auto& b = p.blocks.at(index);
  const std::size_t n = b.dimension();
  if (k == 0 || k >= n) throw std::invalid_argument("split point must be strictly inside the block");
  for (const auto& m : b.pairing)
    for (std::size_t r = 0; r < k; ++r)
      for (std::size_t s = k; s < n; ++s)
        if (m[r][s] != 0) throw std::invalid_argument("block does not decouple at the requested split point");
  auto part = [&](std::size_t lo, std::size_t hi) {
    SDPBlock out{b.type, b.flag_size, b.family, {}, {}};
    out.basis.assign(b.basis.begin() + lo, b.basis.begin() + hi);
    for (const auto& m : b.pairing) {
      RationalMatrix sub;
      for (std::size_t r = lo; r < hi; ++r) sub.emplace_back(m[r].begin() + lo, m[r].begin() + hi);
      out.pairing.push_back(std::move(sub));
    }
    return out;
  };
  SDPBlock first = part(0, k), second = part(k, n);
  p.blocks[index] = std::move(first);
  p.blocks.insert(p.blocks.begin() + static_cast<std::ptrdiff_t>(index) + 1, std::move(second));
}

// ---------------------------------------------------------------------------
// Symmetry

struct SymmetryDecomposition {
  TypeGraph type;
  FamilyRef family;
  /// Automorphisms of sigma acting on labels.
  std::vector<std::vector<int>> group;
  std::vector<std::vector<Rational>> invariant;
  std::vector<std::vector<Rational>> anti_invariant;
};

/// Index of the flag obtained by giving label i to the vertex that carried label gamma[i].
inline std::size_t relabel(const FlagFamily& fam, std::size_t member, const std::vector<int>& gamma) {
  const Flag& f = fam[member];
  const int k = f.labeled_count();
  std::vector<int> theta(gamma.begin(), gamma.end());
  VertexMask rest = f.graph().full_mask();
  for (int i = 0; i < k; ++i) rest &= static_cast<VertexMask>(~(1u << theta[i]));
  return fam.index_of(detail::induced_flag_code(f.graph(), theta, rest));
}

inline SymmetryDecomposition split_invariant(const TypeGraph& type, int flag_size) {
  SymmetryDecomposition d{type, enumerate_flags(type, flag_size), automorphisms(type.graph()), {}, {}};
  const auto& fam = *d.family;
  std::vector<bool> seen(fam.size(), false);
  for (std::size_t i = 0; i < fam.size(); ++i) {
    if (seen[i]) continue;
    std::set<std::size_t> orbit;
    for (const auto& g : d.group) orbit.insert(relabel(fam, i, g));
    std::vector<Rational> sum(fam.size());
    for (auto j : orbit) {
      seen[j] = true;
      sum[j] = 1;
    }
    d.invariant.push_back(sum);
    const std::size_t first = *orbit.begin();
    for (auto j : orbit) {
      if (j == first) continue;
      std::vector<Rational> diff(fam.size());
      diff[first] = 1;
      diff[j] = -1;
      d.anti_invariant.push_back(diff);
    }
  }
  return d;
}

// ---------------------------------------------------------------------------
// Blow-up limits

/// Limit object of blow-ups of `base` with part proportions `weights`. Parts are cliques;
/// across parts adjacency follows the base.
class WeightedBlowup {
 public:
  WeightedBlowup(SmallGraph base, std::vector<Rational> weights) : base_(std::move(base)), weights_(std::move(weights)) {
    if (static_cast<int>(weights_.size()) != base_.order()) throw std::invalid_argument("one weight per base vertex is required");
    Rational total = 0;
    for (const auto& w : weights_) {
      if (w < 0) throw std::invalid_argument("blow-up weights must be nonnegative");
      total += w;
    }
    if (total != 1) throw std::invalid_argument("blow-up weights must sum to 1");
  }

  static WeightedBlowup balanced(const SmallGraph& base) {
    return WeightedBlowup(base, std::vector<Rational>(base.order(), Rational(1, base.order())));
  }

  const SmallGraph& base() const { return base_; }
  const std::vector<Rational>& weights() const { return weights_; }
  bool adjacent_parts(int a, int b) const { return a == b || base_.adjacent(a, b); }

 private:
  SmallGraph base_;
  std::vector<Rational> weights_;
};

namespace detail {
inline void require_embedding(const WeightedBlowup& b, std::span<const int> parts, const TypeGraph& sigma) {
  if (static_cast<int>(parts.size()) != sigma.size()) throw std::invalid_argument("embedding size differs from type size");
  for (int p : parts)
    if (p < 0 || p >= b.base().order()) throw std::invalid_argument("embedding part out of range");
  for (int i = 0; i < sigma.size(); ++i)
    for (int j = i + 1; j < sigma.size(); ++j)
      if (b.adjacent_parts(parts[i], parts[j]) != sigma.graph().adjacent(i, j))
        throw std::invalid_argument("embedding does not induce the type");
}
}  // namespace detail

/// lim p_sigma(F; G_n) with the labels fixed in parts `parts`: unlabeled vertices fall into
/// parts independently with the blow-up weights.
inline Rational limit_density(const WeightedBlowup& b, std::span<const int> parts, const Flag& f) {
  detail::require_embedding(b, parts, f.type());
  const int k = f.labeled_count();
  const int s = f.size() - k;
  const int m = b.base().order();
  Rational total = 0;
  std::vector<int> assign(s, 0);
  std::vector<int> all(parts.begin(), parts.end());
  all.resize(k + s);
  std::vector<int> colours(k + s, k);
  for (int i = 0; i < k; ++i) colours[i] = i;
  for (;;) {
    Rational w = 1;
    for (int i = 0; i < s && w != 0; ++i) w *= b.weights()[assign[i]];
    if (w != 0) {
      for (int i = 0; i < s; ++i) all[k + i] = assign[i];
      std::vector<Edge> edges;
      for (int u = 0; u < k + s; ++u)
        for (int v = u + 1; v < k + s; ++v)
          if (b.adjacent_parts(all[u], all[v])) edges.emplace_back(u, v);
      SmallGraph g = SmallGraph::from_edge_list(k + s, edges);
      if (canonical_form(g, colours).code == f.code()) total += w;
    }
    int i = 0;
    while (i < s && ++assign[i] == m) assign[i++] = 0;
    if (i == s) break;
  }
  return total;
}

inline FlagVector limit_profile(const WeightedBlowup& b, std::span<const int> parts, const FamilyRef& fam) {
  FlagVector v(fam);
  for (std::size_t i = 0; i < fam->size(); ++i) v[i] = limit_density(b, parts, (*fam)[i]);
  return v;
}

/// One limit profile per placement of sigma's labels into positive-weight parts, up to
/// weight-preserving automorphisms of the base.
inline std::vector<FlagVector> zero_eigenvector_candidates(const WeightedBlowup& b, const TypeGraph& sigma, int flag_size) {
  auto fam = enumerate_flags(sigma, flag_size);
  const int k = sigma.size(), m = b.base().order();
  std::vector<std::vector<int>> symmetries;
  for (auto& g : automorphisms(b.base())) {
    bool keeps = true;
    for (int v = 0; v < m && keeps; ++v) keeps = b.weights()[v] == b.weights()[g[v]];
    if (keeps) symmetries.push_back(std::move(g));
  }
  std::set<std::vector<int>> seen;
  std::vector<FlagVector> out;
  std::vector<int> parts(k, 0);
  auto valid = [&] {
    for (int i = 0; i < k; ++i) {
      if (b.weights()[parts[i]] == 0) return false;
      for (int j = i + 1; j < k; ++j)
        if (b.adjacent_parts(parts[i], parts[j]) != sigma.graph().adjacent(i, j)) return false;
    }
    return true;
  };
  for (;;) {
    if (valid() && !seen.contains(parts)) {
      for (const auto& g : symmetries) {
        std::vector<int> image(k);
        for (int i = 0; i < k; ++i) image[i] = g[parts[i]];
        seen.insert(image);
      }
      out.push_back(limit_profile(b, parts, fam));
    }
    int i = k - 1;
    while (i >= 0 && ++parts[i] == m) parts[i--] = 0;
    if (i < 0) break;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Output

/// SDPA sparse format. Variables: y, then the upper triangle (r <= s, row-major) of each block.
/// Blocks: one PSD block per SDP block, then a diagonal block holding the surplus s_H.
/// Decimal entries carry 30 significant digits.
inline void emit_sdpa(const SDPProblem& p, std::ostream& out) {
  std::size_t nvars = 1;
  for (const auto& b : p.blocks) nvars += b.dimension() * (b.dimension() + 1) / 2;
  const std::size_t nh = p.graphs->size();
  const std::size_t surplus_block = p.blocks.size() + 1;
  out << nvars << "\n" << p.blocks.size() + 1 << "\n";
  for (const auto& b : p.blocks) out << b.dimension() << " ";
  out << "-" << nh << "\n";
  out << "-1";
  for (std::size_t v = 1; v < nvars; ++v) out << " 0";
  out << "\n";
  auto entry = [&](std::size_t var, std::size_t block, std::size_t i, std::size_t j, const Rational& value) {
    if (value != 0) out << var << " " << block << " " << i << " " << j << " " << to_decimal(value, 30) << "\n";
  };
  for (std::size_t h = 0; h < nh; ++h) entry(0, surplus_block, h + 1, h + 1, -p.objective_coeffs[h]);
  for (std::size_t h = 0; h < nh; ++h) entry(1, surplus_block, h + 1, h + 1, Rational(-1));
  std::size_t var = 2;
  for (std::size_t bi = 0; bi < p.blocks.size(); ++bi) {
    const auto& b = p.blocks[bi];
    for (std::size_t r = 0; r < b.dimension(); ++r)
      for (std::size_t s = r; s < b.dimension(); ++s, ++var) {
        entry(var, bi + 1, r + 1, s + 1, Rational(1));
        for (std::size_t h = 0; h < nh; ++h) {
          const Rational c = r == s ? b.pairing[h][r][r] : b.pairing[h][r][s] + b.pairing[h][s][r];
          entry(var, surplus_block, h + 1, h + 1, -c);
        }
      }
  }
}

inline nlohmann::json to_json(const SDPProblem& p) {
  auto matrix = [](const RationalMatrix& m) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& row : m) {
      nlohmann::json r = nlohmann::json::array();
      for (const auto& x : row) r.push_back(to_string(x));
      j.push_back(r);
    }
    return j;
  };
  nlohmann::json j;
  j["objective"] = to_graph6(p.objective);
  j["forbidden_l"] = p.forbidden;
  j["t"] = p.t;
  j["graphs"] = nlohmann::json::array();
  for (std::size_t h = 0; h < p.graphs->size(); ++h)
    j["graphs"].push_back({{"graph6", to_graph6((*p.graphs)[h].graph())}, {"objective", to_string(p.objective_coeffs[h])}});
  j["blocks"] = nlohmann::json::array();
  for (const auto& b : p.blocks) {
    nlohmann::json jb;
    jb["type"] = b.type.graph6();
    jb["flag_size"] = b.flag_size;
    jb["flags"] = nlohmann::json::array();
    for (const auto& f : *b.family) jb["flags"].push_back(to_graph6(f.graph()));
    jb["basis"] = matrix(b.basis);
    jb["pairing"] = nlohmann::json::array();
    for (const auto& m : b.pairing) jb["pairing"].push_back(matrix(m));
    j["blocks"].push_back(jb);
  }
  return j;
}

/// {target: graph6, forbidden_l, t, blocks: [{type: labeled graph6, flag_size}]}
inline SDPProblem problem_from_json(const nlohmann::json& j) {
  const int l = j.at("forbidden_l").get<int>();
  std::vector<BlockSpec> blocks;
  for (const auto& b : j.at("blocks"))
    blocks.push_back(BlockSpec{TypeGraph(from_graph6(b.at("type").get<std::string>()), l), b.at("flag_size").get<int>()});
  return build_problem(from_graph6(j.at("target").get<std::string>()), l, j.at("t").get<int>(), blocks);
}

}  // namespace flagforge
