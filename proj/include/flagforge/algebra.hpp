#pragma once

#include "flagforge/flags.hpp"

#include <json.hpp>

#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <string>
#include <vector>

namespace flagforge {

/// Rational coefficients over one FlagFamily. Arithmetic between vectors over different
/// bases throws; the check compares basis fingerprints.
class FlagVector {
 public:
  explicit FlagVector(FamilyRef basis) : basis_(std::move(basis)), coeffs_(basis_->size()) {}
  FlagVector(FamilyRef basis, std::vector<Rational> coeffs) : basis_(std::move(basis)), coeffs_(std::move(coeffs)) {
    if (coeffs_.size() != basis_->size()) throw std::invalid_argument("coefficient count differs from basis size");
  }

  static FlagVector unit(const Flag& f) {
    FlagVector v(enumerate_flags(f.type(), f.size()));
    v.coeffs_[v.basis_->index_of(f)] = 1;
    return v;
  }

  const FlagFamily& basis() const { return *basis_; }
  const FamilyRef& basis_ref() const { return basis_; }
  std::uint64_t fingerprint() const { return basis_->fingerprint(); }
  std::size_t size() const { return coeffs_.size(); }
  const std::vector<Rational>& coefficients() const { return coeffs_; }

  const Rational& operator[](std::size_t i) const { return coeffs_[i]; }
  Rational& operator[](std::size_t i) { return coeffs_[i]; }
  const Rational& at(const Flag& f) const { return coeffs_[basis_->index_of(f)]; }
  Rational& at(const Flag& f) { return coeffs_[basis_->index_of(f)]; }
  /// Coefficient of an unlabeled graph; only meaningful over a trivial-type basis.
  const Rational& at(const SmallGraph& g) const { return coeffs_[basis_->index_of(canonical_form(g).code)]; }

  bool is_zero() const {
    return std::all_of(coeffs_.begin(), coeffs_.end(), [](const Rational& c) { return c == 0; });
  }

  FlagVector& operator+=(const FlagVector& o) {
    require_same_basis(o);
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
    return *this;
  }
  FlagVector& operator-=(const FlagVector& o) {
    require_same_basis(o);
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= o.coeffs_[i];
    return *this;
  }
  FlagVector& operator*=(const Rational& s) {
    for (auto& c : coeffs_) c *= s;
    return *this;
  }
  friend FlagVector operator+(FlagVector a, const FlagVector& b) { return a += b; }
  friend FlagVector operator-(FlagVector a, const FlagVector& b) { return a -= b; }
  friend FlagVector operator*(const Rational& s, FlagVector v) { return v *= s; }
  friend FlagVector operator*(FlagVector v, const Rational& s) { return v *= s; }
  friend bool operator==(const FlagVector& a, const FlagVector& b) {
    return a.fingerprint() == b.fingerprint() && a.coeffs_ == b.coeffs_;
  }

  void require_same_basis(const FlagVector& o) const {
    if (fingerprint() != o.fingerprint()) throw std::invalid_argument("mixed-basis arithmetic on flag vectors");
  }

 private:
  FamilyRef basis_;
  std::vector<Rational> coeffs_;
};

/// Vector over admissible graphs of one order (trivial type).
using DensityVector = FlagVector;
/// Vector over sigma-flags of one size.
using LinearCombination = FlagVector;

/// Unit vector of an admissible graph in the basis of its order.
inline DensityVector graph_vector(const SmallGraph& g, int l) {
  if (!is_admissible(g, l)) throw std::invalid_argument("graph is not admissible");
  DensityVector v(admissible_family(g.order(), l));
  v[v.basis().index_of(canonical_form(g).code)] = 1;
  return v;
}

namespace detail {

// Unlabeled vertices of a host whose labeled tuple is `theta`.
inline std::vector<int> free_vertices(int n, std::span<const int> theta) {
  std::vector<int> out;
  for (int v = 0; v < n; ++v)
    if (std::find(theta.begin(), theta.end(), v) == theta.end()) out.push_back(v);
  return out;
}

// Code of the flag induced on theta followed by the vertices of `mask`.
inline GraphCode induced_flag_code(const SmallGraph& host, std::span<const int> theta, VertexMask mask) {
  std::vector<int> verts(theta.begin(), theta.end());
  for (unsigned m = mask; m; m &= m - 1) verts.push_back(std::countr_zero(m));
  std::vector<int> colours(verts.size(), static_cast<int>(theta.size()));
  for (std::size_t i = 0; i < theta.size(); ++i) colours[i] = static_cast<int>(i);
  return canonical_form(host.induced(verts), colours).code;
}

// Calls fn(mask) for every subset of `pool` of the given size.
template <typename Fn>
void for_each_mask(std::span<const int> pool, int size, Fn&& fn) {
  for_each_subset(static_cast<int>(pool.size()), size, [&](std::span<const int> idx) {
    VertexMask m = 0;
    for (int i : idx) m |= static_cast<VertexMask>(1u << pool[i]);
    fn(m);
  });
}

// (mask, family index) for every subset of the free vertices of size |family| - k.
inline std::vector<std::pair<VertexMask, std::size_t>> classify_subsets(const SmallGraph& host, std::span<const int> theta,
                                                                        const FlagFamily& fam) {
  std::vector<std::pair<VertexMask, std::size_t>> out;
  const auto pool = free_vertices(host.order(), theta);
  for_each_mask(pool, fam.flag_size() - static_cast<int>(theta.size()),
                [&](VertexMask m) { out.emplace_back(m, fam.index_of(induced_flag_code(host, theta, m))); });
  return out;
}

inline BigInt falling_factorial(long n, long k) {
  BigInt r = 1;
  for (long i = 0; i < k; ++i) r *= n - i;
  return r;
}

// Calls fn(theta) for every ordered tuple of distinct host vertices inducing sigma.
template <typename Fn>
void for_each_embedding(const SmallGraph& host, const TypeGraph& sigma, Fn&& fn) {
  const int k = sigma.size();
  std::vector<int> theta;
  theta.reserve(k);
  std::function<void(VertexMask)> rec = [&](VertexMask used) {
    const int i = static_cast<int>(theta.size());
    if (i == k) {
      fn(std::span<const int>(theta));
      return;
    }
    for (int v = 0; v < host.order(); ++v) {
      if (used >> v & 1u) continue;
      bool ok = true;
      for (int j = 0; j < i && ok; ++j) ok = host.adjacent(theta[j], v) == sigma.graph().adjacent(j, i);
      if (!ok) continue;
      theta.push_back(v);
      rec(static_cast<VertexMask>(used | (1u << v)));
      theta.pop_back();
    }
  };
  rec(0);
}

inline void require_common_type(std::span<const Flag> flags, const TypeGraph& type) {
  for (const auto& f : flags)
    if (!(f.type() == type)) throw std::invalid_argument("flags do not share one type");
}

// p_sigma(targets; (host, theta)) by ordered disjoint subset choices.
inline Rational p_density_at(std::span<const Flag> targets, const SmallGraph& host, std::span<const int> theta) {
  const int k = static_cast<int>(theta.size());
  const auto pool = free_vertices(host.order(), theta);
  int needed = 0;
  for (const auto& f : targets) needed += f.size() - k;
  if (needed > static_cast<int>(pool.size())) throw std::invalid_argument("host too small for the target flags");
  std::vector<std::vector<VertexMask>> good(targets.size());
  for (std::size_t i = 0; i < targets.size(); ++i)
    for_each_mask(pool, targets[i].size() - k, [&](VertexMask m) {
      if (induced_flag_code(host, theta, m) == targets[i].code()) good[i].push_back(m);
    });
  std::uint64_t hits = 0;
  std::function<void(std::size_t, VertexMask)> rec = [&](std::size_t i, VertexMask used) {
    if (i == targets.size()) {
      ++hits;
      return;
    }
    for (VertexMask m : good[i])
      if ((m & used) == 0) rec(i + 1, static_cast<VertexMask>(used | m));
  };
  rec(0, 0);
  BigInt total = 1;
  long left = static_cast<long>(pool.size());
  for (const auto& f : targets) {
    total *= binomial(left, f.size() - k);
    left -= f.size() - k;
  }
  return Rational(BigInt(hits), total);
}

}  // namespace detail

/// p_sigma(F_1..F_m; host): probability that disjoint uniformly random unlabeled subsets of
/// sizes |F_i| - k induce, together with the labels, flags isomorphic to F_i.
inline Rational p_density(std::span<const Flag> targets, const Flag& host) {
  detail::require_common_type(targets, host.type());
  auto theta = host.labeled();
  return detail::p_density_at(targets, host.graph(), theta);
}

inline Rational p_density(std::initializer_list<Flag> targets, const Flag& host) {
  return p_density(std::span<const Flag>(targets.begin(), targets.size()), host);
}

/// d_sigma(F_1..F_m; G): p_sigma averaged over all ordered placements of the labels in G,
/// placements not inducing sigma contributing zero.
inline Rational d_density(std::span<const Flag> targets, const SmallGraph& host) {
  if (targets.empty()) throw std::invalid_argument("d_density needs at least one target");
  const TypeGraph& type = targets.front().type();
  detail::require_common_type(targets, type);
  const int k = type.size();
  int needed = k;
  for (const auto& f : targets) needed += f.size() - k;
  if (needed > host.order()) throw std::invalid_argument("host too small for the target flags");
  Rational sum = 0;
  detail::for_each_embedding(host, type, [&](std::span<const int> theta) { sum += detail::p_density_at(targets, host, theta); });
  return sum / Rational(detail::falling_factorial(host.order(), k));
}

inline Rational d_density(std::initializer_list<Flag> targets, const SmallGraph& host) {
  return d_density(std::span<const Flag>(targets.begin(), targets.size()), host);
}

/// q_sigma(F) = d_sigma(F; F|_0).
inline Rational q_factor(const Flag& f) {
  std::uint64_t hits = 0;
  detail::for_each_embedding(f.graph(), f.type(), [&](std::span<const int> theta) {
    VertexMask rest = f.graph().full_mask();
    for (int v : theta) rest &= static_cast<VertexMask>(~(1u << v));
    if (detail::induced_flag_code(f.graph(), theta, rest) == f.code()) ++hits;
  });
  return Rational(BigInt(hits), detail::falling_factorial(f.size(), f.labeled_count()));
}

/// [[lin]]_sigma: each flag F contributes q_sigma(F) times its underlying graph.
inline DensityVector average(const LinearCombination& lin) {
  const auto& fam = lin.basis();
  DensityVector out(admissible_family(fam.flag_size(), fam.type().forbidden()));
  for (std::size_t i = 0; i < fam.size(); ++i) {
    if (lin[i] == 0) continue;
    out[out.basis().index_of(canonical_form(fam[i].graph()).code)] += lin[i] * q_factor(fam[i]);
  }
  return out;
}

/// Exact products F_a * F_b expanded over F^sigma_l, for every pair of members.
class ProductTable {
 public:
  ProductTable(FamilyRef a, FamilyRef b, FamilyRef out, std::vector<FlagVector> rows)
      : a_(std::move(a)), b_(std::move(b)), out_(std::move(out)), rows_(std::move(rows)) {}

  const FlagFamily& left() const { return *a_; }
  const FlagFamily& right() const { return *b_; }
  const FamilyRef& result_basis() const { return out_; }
  const FlagVector& operator()(std::size_t i, std::size_t j) const { return rows_[i * b_->size() + j]; }

 private:
  FamilyRef a_, b_, out_;
  std::vector<FlagVector> rows_;
};

using ProductTableRef = std::shared_ptr<const ProductTable>;

namespace detail {

inline std::string product_cache_key(const FlagFamily& a, const FlagFamily& b, int l) {
  return "flagforge-product-v1 a=" + hex64(a.fingerprint()) + " b=" + hex64(b.fingerprint()) + " l=" + std::to_string(l);
}

inline ProductTableRef compute_product_table(const FamilyRef& a, const FamilyRef& b, int l) {
  const TypeGraph& type = a->type();
  const int k = type.size();
  auto out = enumerate_flags(type, l);
  const int sa = a->flag_size() - k, sb = b->flag_size() - k;
  std::vector<std::vector<Rational>> coeffs(a->size() * b->size(), std::vector<Rational>(out->size()));
  const BigInt total = binomial(l - k, sa) * binomial(l - k - sa, sb);
  std::vector<std::vector<std::uint64_t>> counts(out->size());
  parallel_for(out->size(), [&](std::size_t h) {
    const auto& host = (*out)[h].graph();
    auto theta = (*out)[h].labeled();
    auto xa = classify_subsets(host, theta, *a);
    auto xb = classify_subsets(host, theta, *b);
    counts[h].assign(a->size() * b->size(), 0);
    for (const auto& [ma, ia] : xa)
      for (const auto& [mb, ib] : xb)
        if ((ma & mb) == 0) ++counts[h][ia * b->size() + ib];
  });
  for (std::size_t h = 0; h < out->size(); ++h)
    for (std::size_t p = 0; p < counts[h].size(); ++p)
      if (counts[h][p]) coeffs[p][h] = Rational(BigInt(counts[h][p]), total);
  std::vector<FlagVector> rows;
  rows.reserve(coeffs.size());
  for (auto& c : coeffs) rows.emplace_back(out, std::move(c));
  return std::make_shared<ProductTable>(a, b, out, std::move(rows));
}

inline std::string serialize_table(const ProductTable& t) {
  std::ostringstream s;
  const std::size_t nb = t.right().size();
  for (std::size_t i = 0; i < t.left().size(); ++i)
    for (std::size_t j = 0; j < nb; ++j) {
      const auto& row = t(i, j);
      for (std::size_t h = 0; h < row.size(); ++h)
        if (row[h] != 0) s << i << ' ' << j << ' ' << h << ' ' << to_string(row[h]) << '\n';
    }
  return s.str();
}

inline ProductTableRef deserialize_table(const FamilyRef& a, const FamilyRef& b, int l, const std::string& blob) {
  auto out = enumerate_flags(a->type(), l);
  std::vector<std::vector<Rational>> coeffs(a->size() * b->size(), std::vector<Rational>(out->size()));
  std::istringstream in(blob);
  std::size_t i, j, h;
  std::string value;
  while (in >> i >> j >> h >> value) {
    if (i >= a->size() || j >= b->size() || h >= out->size()) return nullptr;
    coeffs[i * b->size() + j][h] = parse_rational(value);
  }
  std::vector<FlagVector> rows;
  for (auto& c : coeffs) rows.emplace_back(out, std::move(c));
  return std::make_shared<ProductTable>(a, b, out, std::move(rows));
}

class ProductRegistry {
 public:
  static ProductRegistry& instance() {
    static ProductRegistry r;
    return r;
  }

  ProductTableRef get(const FamilyRef& a, const FamilyRef& b, int l) {
    const std::string key = product_cache_key(*a, *b, l);
    {
      std::lock_guard lock(mutex_);
      if (auto it = tables_.find(key); it != tables_.end()) return it->second;
    }
    ProductTableRef t;
    if (auto blob = DiskCache::instance().get(key)) t = deserialize_table(a, b, l, *blob);
    if (!t) {
      t = compute_product_table(a, b, l);
      DiskCache::instance().put(key, serialize_table(*t));
    }
    std::lock_guard lock(mutex_);
    return tables_.emplace(key, t).first->second;
  }

 private:
  std::mutex mutex_;
  std::map<std::string, ProductTableRef> tables_;
};

}  // namespace detail

/// Memoized (in process and on disk) table of all products between two families of one type.
inline ProductTableRef product_table(const FamilyRef& a, const FamilyRef& b, int l) {
  if (!(a->type() == b->type())) throw std::invalid_argument("product of flags of different types");
  const int k = a->type().size();
  if (l < a->flag_size() + b->flag_size() - k) throw std::invalid_argument("product size too small");
  if (l > SmallGraph::kMaxVertices) throw std::invalid_argument("product size exceeds the 10-vertex kernel");
  return detail::ProductRegistry::instance().get(a, b, l);
}

/// F1 * F2 = sum over F in F^sigma_l of p_sigma(F1, F2; F) F.
inline LinearCombination product(const Flag& f1, const Flag& f2, int l) {
  if (!(f1.type() == f2.type())) throw std::invalid_argument("product of flags of different types");
  auto a = enumerate_flags(f1.type(), f1.size());
  auto b = enumerate_flags(f2.type(), f2.size());
  return (*product_table(a, b, l))(a->index_of(f1), b->index_of(f2));
}

/// Bilinear extension of the flag product.
inline LinearCombination product(const LinearCombination& x, const LinearCombination& y, int l) {
  auto table = product_table(x.basis_ref(), y.basis_ref(), l);
  LinearCombination out(table->result_basis());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] == 0) continue;
    for (std::size_t j = 0; j < y.size(); ++j) {
      if (y[j] == 0) continue;
      const auto& row = (*table)(i, j);
      const Rational w = x[i] * y[j];
      for (std::size_t h = 0; h < row.size(); ++h)
        if (row[h] != 0) out[h] += w * row[h];
    }
  }
  return out;
}

/// Chain rule: re-expresses `lin` over flags of size l, preserving every density.
inline LinearCombination expand_flag(const LinearCombination& lin, int l) {
  const auto& fam = lin.basis();
  if (l < fam.flag_size()) throw std::invalid_argument("expansion target smaller than source size");
  if (l > SmallGraph::kMaxVertices) throw std::invalid_argument("expansion size exceeds the 10-vertex kernel");
  auto target = enumerate_flags(fam.type(), l);
  LinearCombination out(target);
  const int k = fam.type().size();
  const BigInt total = binomial(l - k, fam.flag_size() - k);
  std::vector<std::vector<std::uint64_t>> counts(target->size());
  parallel_for(target->size(), [&](std::size_t h) {
    counts[h].assign(fam.size(), 0);
    for (const auto& [mask, idx] : detail::classify_subsets((*target)[h].graph(), (*target)[h].labeled(), fam)) ++counts[h][idx];
  });
  for (std::size_t h = 0; h < target->size(); ++h)
    for (std::size_t i = 0; i < fam.size(); ++i)
      if (counts[h][i] && lin[i] != 0) out[h] += lin[i] * Rational(BigInt(counts[h][i]), total);
  return out;
}

/// Chain rule for unlabeled combinations: coefficient of H is sum_J vec(J) p(J; H).
inline DensityVector expand(const DensityVector& vec, int t) {
  if (vec.basis().type().size() != 0) throw std::invalid_argument("expand takes an unlabeled density vector");
  return expand_flag(vec, t);
}

// ---------------------------------------------------------------------------
// JSON

/// {basis_fingerprint, forbidden_l, type, flag_size, entries: [{canonical_code, num, den}]}, where
/// canonical_code is the graph6 of the canonical flag graph (labels first).
inline nlohmann::json to_json(const FlagVector& v) {
  nlohmann::json j;
  j["basis_fingerprint"] = hex64(v.fingerprint());
  j["forbidden_l"] = v.basis().type().forbidden();
  j["type"] = v.basis().type().graph6();
  j["flag_size"] = v.basis().flag_size();
  j["entries"] = nlohmann::json::array();
  for (std::size_t i = 0; i < v.size(); ++i)
    if (v[i] != 0)
      j["entries"].push_back({{"canonical_code", to_graph6(v.basis()[i].graph())},
                              {"num", numerator_of(v[i]).str()},
                              {"den", denominator_of(v[i]).str()}});
  return j;
}

inline FlagVector flag_vector_from_json(const nlohmann::json& j) {
  const int l = j.at("forbidden_l").get<int>();
  TypeGraph type(from_graph6(j.at("type").get<std::string>()), l);
  FlagVector v(enumerate_flags(type, j.at("flag_size").get<int>()));
  if (hex64(v.fingerprint()) != j.at("basis_fingerprint").get<std::string>())
    throw std::invalid_argument("basis fingerprint does not match the enumerated family");
  const int k = type.size();
  for (const auto& e : j.at("entries")) {
    SmallGraph g = from_graph6(e.at("canonical_code").get<std::string>());
    std::vector<int> labels(k);
    std::iota(labels.begin(), labels.end(), 0);
    Flag f(g, labels, type);
    v.at(f) += parse_rational(e.at("num").get<std::string>() + "/" + e.at("den").get<std::string>());
  }
  return v;
}

}  // namespace flagforge
