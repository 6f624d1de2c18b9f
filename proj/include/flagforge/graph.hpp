#pragma once

#include "flagforge/rational.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <compare>
#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace flagforge {

using Edge = std::pair<int, int>;
using VertexMask = std::uint16_t;

/// Undirected simple graph on at most ten vertices, one adjacency bitmask per vertex.
///
/// Values are immutable: every operation returns a new graph. The zero-vertex graph
/// exists only as the underlying graph of the trivial type.
class SmallGraph {
 public:
  static constexpr int kMaxVertices = 10;

  SmallGraph() = default;

  /// Edgeless graph on n vertices (0 <= n <= 10).
  static SmallGraph empty(int n) {
    if (n < 0 || n > kMaxVertices)
      throw std::invalid_argument("vertex count " + std::to_string(n) + " outside 0..10");
    SmallGraph g;
    g.n_ = n;
    return g;
  }

  static SmallGraph complete(int n) {
    SmallGraph g = empty(n);
    for (int v = 0; v < n; ++v) g.rows_[v] = static_cast<VertexMask>(g.full_mask() & ~(1u << v));
    return g;
  }

  static SmallGraph cycle(int n) {
    std::vector<Edge> edges;
    for (int v = 0; v < n; ++v) edges.emplace_back(v, (v + 1) % n);
    return from_edge_list(n, edges);
  }

  static SmallGraph from_edge_list(int n, std::span<const Edge> edges) {
    if (n < 1 || n > kMaxVertices)
      throw std::invalid_argument("vertex count " + std::to_string(n) + " outside 1..10");
    SmallGraph g = empty(n);
    for (auto [u, v] : edges) {
      if (u < 0 || v < 0 || u >= n || v >= n)
        throw std::invalid_argument("edge (" + std::to_string(u) + "," + std::to_string(v) +
                                    ") has an endpoint outside 0.." + std::to_string(n - 1));
      if (u == v) throw std::invalid_argument("loop at vertex " + std::to_string(u));
      g.rows_[u] |= static_cast<VertexMask>(1u << v);
      g.rows_[v] |= static_cast<VertexMask>(1u << u);
    }
    return g;
  }

  static SmallGraph from_edge_list(int n, std::initializer_list<Edge> edges) {
    return from_edge_list(n, std::span<const Edge>(edges.begin(), edges.size()));
  }

  /// Rows must be symmetric with an empty diagonal.
  static SmallGraph from_rows(int n, std::span<const VertexMask> rows) {
    SmallGraph g = empty(n);
    if (static_cast<int>(rows.size()) != n) throw std::invalid_argument("row count mismatch");
    for (int v = 0; v < n; ++v) {
      if (rows[v] & ~g.full_mask()) throw std::invalid_argument("row has bits beyond n");
      if (rows[v] >> v & 1u) throw std::invalid_argument("loop in adjacency rows");
      g.rows_[v] = rows[v];
    }
    for (int u = 0; u < n; ++u)
      for (int v = 0; v < n; ++v)
        if (g.adjacent(u, v) != g.adjacent(v, u)) throw std::invalid_argument("adjacency not symmetric");
    return g;
  }

  int order() const { return n_; }
  bool adjacent(int u, int v) const { return rows_[u] >> v & 1u; }
  VertexMask neighbours(int v) const { return rows_[v]; }
  int degree(int v) const { return std::popcount(static_cast<unsigned>(rows_[v])); }
  VertexMask full_mask() const { return static_cast<VertexMask>((1u << n_) - 1u); }

  int edge_count() const {
    int twice = 0;
    for (int v = 0; v < n_; ++v) twice += degree(v);
    return twice / 2;
  }

  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    for (int u = 0; u < n_; ++u)
      for (int v = u + 1; v < n_; ++v)
        if (adjacent(u, v)) out.emplace_back(u, v);
    return out;
  }

  /// One more vertex (index n) adjacent to the vertices in `mask`.
  SmallGraph extended(VertexMask mask) const {
    if (n_ >= kMaxVertices) throw std::invalid_argument("cannot extend a 10-vertex graph");
    if (mask & ~full_mask()) throw std::invalid_argument("extension mask beyond n");
    SmallGraph g = *this;
    g.rows_[n_] = mask;
    for (int v = 0; v < n_; ++v)
      if (mask >> v & 1u) g.rows_[v] |= static_cast<VertexMask>(1u << n_);
    ++g.n_;
    return g;
  }

  /// Induced subgraph; vertex i of the result is verts[i].
  SmallGraph induced(std::span<const int> verts) const {
    SmallGraph g = empty(static_cast<int>(verts.size()));
    for (std::size_t i = 0; i < verts.size(); ++i)
      for (std::size_t j = i + 1; j < verts.size(); ++j)
        if (adjacent(verts[i], verts[j])) {
          g.rows_[i] |= static_cast<VertexMask>(1u << j);
          g.rows_[j] |= static_cast<VertexMask>(1u << i);
        }
    return g;
  }

  /// Relabeling: vertex i of the result is vertex perm[i] of this graph.
  SmallGraph permuted(std::span<const int> perm) const {
    if (static_cast<int>(perm.size()) != n_) throw std::invalid_argument("permutation size mismatch");
    return induced(perm);
  }

  friend bool operator==(const SmallGraph& a, const SmallGraph& b) {
    return a.n_ == b.n_ && std::equal(a.rows_.begin(), a.rows_.begin() + a.n_, b.rows_.begin());
  }

 private:
  int n_ = 0;
  std::array<VertexMask, kMaxVertices> rows_{};
};

inline SmallGraph complement(const SmallGraph& g) {
  std::array<VertexMask, SmallGraph::kMaxVertices> rows{};
  for (int v = 0; v < g.order(); ++v)
    rows[v] = static_cast<VertexMask>(g.full_mask() & ~g.neighbours(v) & ~(1u << v));
  return SmallGraph::from_rows(g.order(), std::span<const VertexMask>(rows.data(), g.order()));
}

namespace detail {

// Largest clique inside `candidates`, given a neighbourhood oracle.
template <typename Mask, typename Neighbours>
int max_clique(Mask candidates, Neighbours&& nbrs, int current, int best) {
  if (candidates == 0) return std::max(current, best);
  if (current + std::popcount(candidates) <= best) return best;
  while (candidates) {
    if (current + std::popcount(candidates) <= best) return best;
    int v = std::countr_zero(candidates);
    candidates &= candidates - 1;
    best = max_clique<Mask>(candidates & nbrs(v), nbrs, current + 1, best);
  }
  return std::max(current, best);
}

}  // namespace detail

inline int clique_number(const SmallGraph& g) {
  return detail::max_clique<unsigned>(g.full_mask(), [&](int v) { return static_cast<unsigned>(g.neighbours(v)); }, 0, 0);
}

inline int independence_number(const SmallGraph& g) { return clique_number(complement(g)); }

/// Admissible for forbidden size l: no independent set of size l.
inline bool is_admissible(const SmallGraph& g, int l) {
  if (l < 2) throw std::invalid_argument("forbidden independent-set size must be at least 2");
  return independence_number(g) < l;
}

inline BigInt count_cliques(const SmallGraph& g, int k) {
  if (k < 1) throw std::invalid_argument("clique size must be at least 1");
  std::uint64_t total = 0;
  std::function<void(unsigned, int)> rec = [&](unsigned cand, int depth) {
    if (depth == k) {
      ++total;
      return;
    }
    while (cand) {
      int v = std::countr_zero(cand);
      cand &= cand - 1;
      rec(cand & g.neighbours(v), depth + 1);
    }
  };
  rec(g.full_mask(), 0);
  return total;
}

// ---------------------------------------------------------------------------
// Canonical labeling

/// Upper-triangle adjacency bits in column order (0,1),(0,2),(1,2),(0,3),...; the first pair
/// is the most significant bit. Ten vertices need 45 bits.
struct GraphCode {
  int n = 0;
  std::uint64_t bits = 0;
  friend auto operator<=>(const GraphCode&, const GraphCode&) = default;
};

inline std::uint64_t adjacency_bits(const SmallGraph& g) {
  std::uint64_t bits = 0;
  for (int j = 1; j < g.order(); ++j)
    for (int i = 0; i < j; ++i) bits = (bits << 1) | (g.adjacent(i, j) ? 1u : 0u);
  return bits;
}

struct CanonicalForm {
  GraphCode code;
  /// perm[i] is the original vertex placed at position i.
  std::vector<int> perm;
};

namespace detail {

using Cells = std::vector<std::vector<int>>;

// Equitable refinement: split cells by neighbour counts into every cell, in an order
// that depends only on those counts.
inline void refine(const SmallGraph& g, Cells& cells) {
  bool changed = true;
  while (changed) {
    changed = false;
    std::vector<VertexMask> masks;
    masks.reserve(cells.size());
    for (const auto& c : cells) {
      VertexMask m = 0;
      for (int v : c) m |= static_cast<VertexMask>(1u << v);
      masks.push_back(m);
    }
    Cells next;
    next.reserve(cells.size());
    for (const auto& cell : cells) {
      if (cell.size() == 1) {
        next.push_back(cell);
        continue;
      }
      std::vector<std::pair<std::vector<int>, int>> sig;
      sig.reserve(cell.size());
      for (int v : cell) {
        std::vector<int> s(masks.size());
        for (std::size_t c = 0; c < masks.size(); ++c)
          s[c] = std::popcount(static_cast<unsigned>(g.neighbours(v) & masks[c]));
        sig.emplace_back(std::move(s), v);
      }
      std::stable_sort(sig.begin(), sig.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
      std::size_t start = 0;
      for (std::size_t i = 1; i <= sig.size(); ++i) {
        if (i == sig.size() || sig[i].first != sig[start].first) {
          std::vector<int> part;
          for (std::size_t t = start; t < i; ++t) part.push_back(sig[t].second);
          std::sort(part.begin(), part.end());
          next.push_back(std::move(part));
          start = i;
        }
      }
    }
    changed = next.size() != cells.size();
    cells = std::move(next);
  }
}

// u and v have the same neighbours apart from each other: swapping them is an automorphism
// fixing every other vertex.
inline bool twins(const SmallGraph& g, int u, int v) {
  VertexMask mu = static_cast<VertexMask>(g.neighbours(u) & ~(1u << v));
  VertexMask mv = static_cast<VertexMask>(g.neighbours(v) & ~(1u << u));
  return mu == mv;
}

inline void canonical_search(const SmallGraph& g, Cells cells, CanonicalForm& best, bool& found) {
  refine(g, cells);
  auto it = std::find_if(cells.begin(), cells.end(), [](const auto& c) { return c.size() > 1; });
  if (it == cells.end()) {
    std::vector<int> perm;
    perm.reserve(g.order());
    for (const auto& c : cells) perm.push_back(c.front());
    GraphCode code{g.order(), adjacency_bits(g.permuted(perm))};
    if (!found || code < best.code) {
      best.code = code;
      best.perm = std::move(perm);
      found = true;
    }
    return;
  }
  const std::size_t at = static_cast<std::size_t>(it - cells.begin());
  const std::vector<int> target = *it;
  std::vector<int> tried;
  for (int v : target) {
    if (std::any_of(tried.begin(), tried.end(), [&](int w) { return twins(g, v, w); })) continue;
    tried.push_back(v);
    Cells child;
    child.reserve(cells.size() + 1);
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c != at) {
        child.push_back(cells[c]);
        continue;
      }
      child.push_back({v});
      std::vector<int> rest;
      for (int w : target)
        if (w != v) rest.push_back(w);
      child.push_back(std::move(rest));
    }
    canonical_search(g, std::move(child), best, found);
  }
}

}  // namespace detail

/// Canonical form of a vertex-coloured graph. Colours order the initial cells, so vertices of
/// colour 0 come first in the canonical labeling, then colour 1, and so on.
///
/// The code is the least adjacency bit-string over the labelings reached by
/// individualisation-refinement; it is an isomorphism invariant (colour-preserving).
inline CanonicalForm canonical_form(const SmallGraph& g, std::span<const int> colours) {
  const int n = g.order();
  if (static_cast<int>(colours.size()) != n) throw std::invalid_argument("colour vector size mismatch");
  CanonicalForm best;
  if (n == 0) return best;
  int max_colour = *std::max_element(colours.begin(), colours.end());
  detail::Cells cells;
  for (int c = 0; c <= max_colour; ++c) {
    std::vector<int> cell;
    for (int v = 0; v < n; ++v)
      if (colours[v] == c) cell.push_back(v);
    if (!cell.empty()) cells.push_back(std::move(cell));
  }
  bool found = false;
  detail::canonical_search(g, std::move(cells), best, found);
  return best;
}

inline CanonicalForm canonical_form(const SmallGraph& g) {
  std::vector<int> colours(g.order(), 0);
  return canonical_form(g, colours);
}

inline SmallGraph canonical_graph(const SmallGraph& g) { return g.permuted(canonical_form(g).perm); }

inline bool isomorphic(const SmallGraph& a, const SmallGraph& b) {
  return a.order() == b.order() && a.edge_count() == b.edge_count() &&
         canonical_form(a).code == canonical_form(b).code;
}

/// Every adjacency-preserving permutation; perm[v] is the image of v.
inline std::vector<std::vector<int>> automorphisms(const SmallGraph& g) {
  const int n = g.order();
  std::vector<std::vector<int>> out;
  std::vector<int> image(n, -1);
  VertexMask used = 0;
  std::function<void(int)> rec = [&](int v) {
    if (v == n) {
      out.push_back(image);
      return;
    }
    for (int w = 0; w < n; ++w) {
      if (used >> w & 1u) continue;
      if (g.degree(v) != g.degree(w)) continue;
      bool ok = true;
      for (int u = 0; u < v && ok; ++u) ok = g.adjacent(u, v) == g.adjacent(image[u], w);
      if (!ok) continue;
      image[v] = w;
      used |= static_cast<VertexMask>(1u << w);
      rec(v + 1);
      used &= static_cast<VertexMask>(~(1u << w));
    }
    image[v] = -1;
  };
  rec(0);
  return out;
}

// ---------------------------------------------------------------------------
// Induced counts

namespace detail {

template <typename Fn>
void for_each_subset(int n, int k, Fn&& fn) {
  if (k < 0 || k > n) return;
  std::vector<int> idx(k);
  std::iota(idx.begin(), idx.end(), 0);
  while (true) {
    fn(std::span<const int>(idx));
    int i = k - 1;
    while (i >= 0 && idx[i] == n - k + i) --i;
    if (i < 0) return;
    ++idx[i];
    for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

}  // namespace detail

/// Number of |H|-subsets of V(G) inducing a copy of H.
inline BigInt count_induced(const SmallGraph& h, const SmallGraph& g) {
  if (h.order() > g.order()) throw std::invalid_argument("pattern larger than host");
  const GraphCode target = canonical_form(h).code;
  const int edges = h.edge_count();
  std::uint64_t count = 0;
  detail::for_each_subset(g.order(), h.order(), [&](std::span<const int> s) {
    SmallGraph sub = g.induced(s);
    if (sub.edge_count() == edges && canonical_form(sub).code == target) ++count;
  });
  return count;
}

/// p(H; G) = count_induced(H, G) / C(|G|, |H|).
inline Rational induced_density(const SmallGraph& h, const SmallGraph& g) {
  return Rational(count_induced(h, g), binomial(g.order(), h.order()));
}

// ---------------------------------------------------------------------------
// graph6

namespace detail {
inline int graph6_order(std::string_view s, std::size_t& pos) {
  if (s.empty()) throw std::invalid_argument("empty graph6 string");
  auto byte = [&](std::size_t i) {
    if (i >= s.size()) throw std::invalid_argument("truncated graph6 header");
    int c = static_cast<unsigned char>(s[i]);
    if (c < 63 || c > 126) throw std::invalid_argument("graph6 byte out of range");
    return c - 63;
  };
  if (static_cast<unsigned char>(s[0]) != 126) {
    pos = 1;
    return byte(0);
  }
  if (s.size() > 1 && static_cast<unsigned char>(s[1]) == 126)
    throw std::invalid_argument("graph6 order above 258047 is not supported");
  pos = 4;
  return (byte(1) << 12) | (byte(2) << 6) | byte(3);
}
}  // namespace detail

/// Standard graph6 encoding (column-wise upper triangle, 6 bits per byte, offset 63).
inline std::string to_graph6(const SmallGraph& g) {
  std::string out(1, static_cast<char>(63 + g.order()));
  int acc = 0, nbits = 0;
  for (int j = 1; j < g.order(); ++j)
    for (int i = 0; i < j; ++i) {
      acc = (acc << 1) | (g.adjacent(i, j) ? 1 : 0);
      if (++nbits == 6) {
        out += static_cast<char>(63 + acc);
        acc = nbits = 0;
      }
    }
  if (nbits > 0) out += static_cast<char>(63 + (acc << (6 - nbits)));
  return out;
}

inline SmallGraph from_graph6(std::string_view text) {
  if (text.starts_with(">>graph6<<")) text.remove_prefix(10);
  while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.remove_suffix(1);
  std::size_t pos = 0;
  const int n = detail::graph6_order(text, pos);
  if (n > SmallGraph::kMaxVertices)
    throw std::invalid_argument("graph6 order " + std::to_string(n) + " exceeds the 10-vertex kernel");
  const std::size_t nbits = static_cast<std::size_t>(n) * (n - 1) / 2;
  const std::size_t nbytes = (nbits + 5) / 6;
  if (text.size() != pos + nbytes) throw std::invalid_argument("graph6 length does not match order");
  SmallGraph g = SmallGraph::empty(n);
  std::vector<Edge> edges;
  std::size_t bit = 0;
  for (int j = 1; j < n; ++j)
    for (int i = 0; i < j; ++i, ++bit) {
      int c = static_cast<unsigned char>(text[pos + bit / 6]);
      if (c < 63 || c > 126) throw std::invalid_argument("graph6 byte out of range");
      if ((c - 63) >> (5 - bit % 6) & 1) edges.emplace_back(i, j);
    }
  if (nbits % 6 != 0) {
    int c = static_cast<unsigned char>(text.back()) - 63;
    if (c & ((1 << (6 - nbits % 6)) - 1)) throw std::invalid_argument("graph6 padding bits are not zero");
  }
  if (n == 0) return g;
  return SmallGraph::from_edge_list(n, edges);
}

}  // namespace flagforge

template <>
struct std::hash<flagforge::GraphCode> {
  std::size_t operator()(const flagforge::GraphCode& c) const noexcept {
    return std::hash<std::uint64_t>{}(c.bits * 31 + static_cast<std::uint64_t>(c.n));
  }
};
