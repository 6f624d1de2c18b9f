#pragma once

#include "flagforge/cache.hpp"
#include "flagforge/graph.hpp"
#include "flagforge/parallel.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

namespace flagforge {

/// Admissible graph on labels 1..k (stored 0-indexed); k = 0 is the trivial type.
class TypeGraph {
 public:
  TypeGraph(SmallGraph sigma, int l) : sigma_(std::move(sigma)), l_(l) {
    if (!is_admissible(sigma_, l_)) throw std::invalid_argument("type graph is not admissible for l=" + std::to_string(l_));
  }

  static TypeGraph trivial(int l) { return TypeGraph(SmallGraph::empty(0), l); }
  static TypeGraph dot(int l) { return TypeGraph(SmallGraph::empty(1), l); }

  const SmallGraph& graph() const { return sigma_; }
  int size() const { return sigma_.order(); }
  int forbidden() const { return l_; }

  /// Labeled graph6: vertex order equals label order.
  std::string graph6() const { return to_graph6(sigma_); }

  friend bool operator==(const TypeGraph&, const TypeGraph&) = default;

 private:
  SmallGraph sigma_;
  int l_;
};

/// A sigma-flag, stored normalized: labeled vertex i sits at index i and the unlabeled vertices
/// follow in canonical order. Two flags are isomorphic iff their codes are equal.
class Flag {
 public:
  /// `labeled[i]` is the vertex carrying label i+1.
  Flag(const SmallGraph& g, std::span<const int> labeled, TypeGraph type) : type_(std::move(type)) {
    const int n = g.order();
    const int k = type_.size();
    if (static_cast<int>(labeled.size()) != k) throw std::invalid_argument("labeled vertex count differs from type size");
    VertexMask seen = 0;
    for (int v : labeled) {
      if (v < 0 || v >= n) throw std::invalid_argument("labeled vertex outside the graph");
      if (seen >> v & 1u) throw std::invalid_argument("labeled vertices must be distinct");
      seen |= static_cast<VertexMask>(1u << v);
    }
    if (!(g.induced(labeled) == type_.graph())) throw std::invalid_argument("labeled vertices do not induce the type");
    if (!is_admissible(g, type_.forbidden())) throw std::invalid_argument("flag graph is not admissible");
    std::vector<int> colours(n, k);
    for (int i = 0; i < k; ++i) colours[labeled[i]] = i;
    auto cf = canonical_form(g, colours);
    graph_ = g.permuted(cf.perm);
    code_ = cf.code;
  }

  /// Flag whose type is whatever its labeled vertices induce.
  static Flag with_induced_type(const SmallGraph& g, std::span<const int> labeled, int l) {
    return Flag(g, labeled, TypeGraph(g.induced(labeled), l));
  }

  const SmallGraph& graph() const { return graph_; }
  const TypeGraph& type() const { return type_; }
  int size() const { return graph_.order(); }
  int labeled_count() const { return type_.size(); }
  std::vector<int> labeled() const {
    std::vector<int> out(type_.size());
    std::iota(out.begin(), out.end(), 0);
    return out;
  }
  const GraphCode& code() const { return code_; }

 private:
  friend class FlagFamily;
  Flag(SmallGraph g, GraphCode code, TypeGraph type) : graph_(std::move(g)), type_(std::move(type)), code_(code) {}

  SmallGraph graph_;
  TypeGraph type_;
  GraphCode code_;
};

/// F|_0: the flag with its labels forgotten.
inline SmallGraph underlying(const Flag& f) { return f.graph(); }

inline bool flag_isomorphic(const Flag& a, const Flag& b) {
  if (!(a.type() == b.type())) throw std::invalid_argument("flags have different types");
  return a.code() == b.code();
}

/// Rebuilds the graph encoded by a code (positions in code order).
inline SmallGraph graph_from_code(const GraphCode& code) {
  std::vector<Edge> edges;
  int bit = code.n * (code.n - 1) / 2;
  for (int j = 1; j < code.n; ++j)
    for (int i = 0; i < j; ++i)
      if (code.bits >> --bit & 1u) edges.emplace_back(i, j);
  return code.n == 0 ? SmallGraph::empty(0) : SmallGraph::from_edge_list(code.n, edges);
}

/// All sigma-flags of one size, one per isomorphism class, ordered by canonical code.
class FlagFamily {
 public:
  FlagFamily(TypeGraph type, int size, std::vector<GraphCode> codes) : type_(std::move(type)), size_(size) {
    std::sort(codes.begin(), codes.end());
    codes.erase(std::unique(codes.begin(), codes.end()), codes.end());
    std::string fp = "l=" + std::to_string(type_.forbidden()) + ";sigma=" + type_.graph6() + ";size=" + std::to_string(size_);
    members_.reserve(codes.size());
    for (const auto& c : codes) {
      if (c.n != size_) throw std::invalid_argument("family member has wrong size");
      index_.emplace(c, members_.size());
      members_.push_back(Flag(graph_from_code(c), c, type_));
      fp += ";" + std::to_string(c.bits);
    }
    fingerprint_ = fnv1a(fp);
  }

  const TypeGraph& type() const { return type_; }
  int flag_size() const { return size_; }
  std::size_t size() const { return members_.size(); }
  const Flag& operator[](std::size_t i) const { return members_[i]; }
  const std::vector<Flag>& members() const { return members_; }
  auto begin() const { return members_.begin(); }
  auto end() const { return members_.end(); }
  std::uint64_t fingerprint() const { return fingerprint_; }

  /// Index of the member isomorphic to f; throws when f is not a member.
  std::size_t index_of(const Flag& f) const {
    if (!(f.type() == type_) || f.size() != size_) throw std::invalid_argument("flag does not belong to this family");
    return index_of(f.code());
  }
  std::size_t index_of(const GraphCode& code) const {
    auto it = index_.find(code);
    if (it == index_.end()) throw std::invalid_argument("code is not a member of this family");
    return it->second;
  }
  bool contains(const GraphCode& code) const { return index_.contains(code); }

 private:
  TypeGraph type_;
  int size_;
  std::vector<Flag> members_;
  std::unordered_map<GraphCode, std::size_t> index_;
  std::uint64_t fingerprint_ = 0;
};

using FamilyRef = std::shared_ptr<const FlagFamily>;

namespace detail {

inline std::vector<GraphCode> augment(const std::vector<GraphCode>& parents, const TypeGraph& type) {
  const int k = type.size();
  std::vector<std::set<GraphCode>> found(parents.size());
  parallel_for(parents.size(), [&](std::size_t p) {
    const SmallGraph base = graph_from_code(parents[p]);
    const int n = base.order();
    std::vector<int> colours(n + 1, k);
    for (int i = 0; i < k; ++i) colours[i] = i;
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
      SmallGraph g = base.extended(static_cast<VertexMask>(mask));
      if (!is_admissible(g, type.forbidden())) continue;
      found[p].insert(canonical_form(g, colours).code);
    }
  });
  std::set<GraphCode> merged;
  for (auto& s : found) merged.insert(s.begin(), s.end());
  return {merged.begin(), merged.end()};
}

inline std::string family_cache_key(const TypeGraph& type, int size) {
  return "flagforge-family-v1 l=" + std::to_string(type.forbidden()) + " sigma=" + type.graph6() +
         " size=" + std::to_string(size);
}

class FamilyRegistry {
 public:
  static FamilyRegistry& instance() {
    static FamilyRegistry r;
    return r;
  }

  FamilyRef get(const TypeGraph& type, int size) {
    Key key{type.forbidden(), type.size(), adjacency_bits(type.graph()), size};
    {
      std::lock_guard lock(mutex_);
      if (auto it = families_.find(key); it != families_.end()) return it->second;
    }
    FamilyRef fam;
    if (size == type.size()) {
      fam = std::make_shared<FlagFamily>(type, size, std::vector<GraphCode>{GraphCode{size, adjacency_bits(type.graph())}});
    } else if (auto cached = load(type, size)) {
      fam = std::move(cached);
    } else {
      fam = std::make_shared<FlagFamily>(type, size, augment(codes_of(*get(type, size - 1)), type));
      store(*fam);
    }
    std::lock_guard lock(mutex_);
    return families_.emplace(key, fam).first->second;
  }

 private:
  using Key = std::tuple<int, int, std::uint64_t, int>;

  static std::vector<GraphCode> codes_of(const FlagFamily& fam) {
    std::vector<GraphCode> out;
    for (const auto& f : fam) out.push_back(f.code());
    return out;
  }

  static FamilyRef load(const TypeGraph& type, int size) {
    auto blob = DiskCache::instance().get(family_cache_key(type, size));
    if (!blob) return nullptr;
    std::istringstream in(*blob);
    std::vector<GraphCode> codes;
    std::uint64_t bits = 0;
    while (in >> bits) codes.push_back(GraphCode{size, bits});
    return std::make_shared<FlagFamily>(type, size, std::move(codes));
  }

  static void store(const FlagFamily& fam) {
    std::string body;
    for (const auto& f : fam) body += std::to_string(f.code().bits) + "\n";
    DiskCache::instance().put(family_cache_key(fam.type(), fam.flag_size()), body);
  }

  std::mutex mutex_;
  std::map<Key, FamilyRef> families_;
};

}  // namespace detail

/// F^sigma_size, memoized process-wide.
inline FamilyRef enumerate_flags(const TypeGraph& type, int size) {
  if (size < type.size()) throw std::invalid_argument("flag size smaller than type size");
  if (size > SmallGraph::kMaxVertices) throw std::invalid_argument("flag size exceeds the 10-vertex kernel");
  return detail::FamilyRegistry::instance().get(type, size);
}

/// Admissible graphs of order n up to isomorphism, ordered by canonical code.
inline FamilyRef admissible_family(int n, int l) {
  if (n < 1 || n > SmallGraph::kMaxVertices) throw std::invalid_argument("graph order outside 1..10");
  return enumerate_flags(TypeGraph::trivial(l), n);
}

inline std::vector<SmallGraph> enumerate_admissible(int n, int l) {
  std::vector<SmallGraph> out;
  for (const auto& f : *admissible_family(n, l)) out.push_back(f.graph());
  return out;
}

/// Every admissible labeled graph on [k]; distinct labelings are distinct types. Ordered by
/// adjacency bits.
inline std::vector<TypeGraph> enumerate_types(int k, int l) {
  if (k < 0 || k > SmallGraph::kMaxVertices) throw std::invalid_argument("type size outside 0..10");
  std::vector<TypeGraph> out;
  if (k == 0) {
    out.push_back(TypeGraph::trivial(l));
    return out;
  }
  const int pairs = k * (k - 1) / 2;
  for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << pairs); ++bits) {
    SmallGraph g = graph_from_code(GraphCode{k, bits});
    if (is_admissible(g, l)) out.emplace_back(g, l);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Fixtures

/// A named picture from a fixture file: a graph plus its labeled vertices in label order.
struct FixtureEntry {
  std::string name;
  SmallGraph graph;
  std::vector<int> labeled;

  Flag as_flag(int l) const { return Flag::with_induced_type(graph, labeled, l); }
  TypeGraph as_type(int l) const { return TypeGraph(graph.induced(labeled), l); }
};

/// Named entries of one fixture file. JSON vertices are 1-indexed.
class FixtureSet {
 public:
  static FixtureSet parse(const nlohmann::json& doc) {
    FixtureSet set;
    set.forbidden_ = doc.at("forbidden_l").get<int>();
    for (const auto& e : doc.at("entries")) {
      FixtureEntry entry;
      entry.name = e.at("name").get<std::string>();
      const int n = e.at("n").get<int>();
      std::vector<Edge> edges;
      for (const auto& pair : e.at("edges")) edges.emplace_back(pair.at(0).get<int>() - 1, pair.at(1).get<int>() - 1);
      entry.graph = SmallGraph::from_edge_list(n, edges);
      for (const auto& v : e.value("labeled", nlohmann::json::array())) entry.labeled.push_back(v.get<int>() - 1);
      if (set.index_.contains(entry.name)) throw std::invalid_argument("duplicate fixture name " + entry.name);
      set.index_.emplace(entry.name, set.entries_.size());
      set.entries_.push_back(std::move(entry));
    }
    return set;
  }

  static FixtureSet load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open fixture file " + path.string());
    return parse(nlohmann::json::parse(in));
  }

  int forbidden() const { return forbidden_; }
  const std::vector<FixtureEntry>& entries() const { return entries_; }
  bool contains(const std::string& name) const { return index_.contains(name); }
  const FixtureEntry& at(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw std::out_of_range("no fixture entry named " + name);
    return entries_[it->second];
  }
  Flag flag(const std::string& name) const { return at(name).as_flag(forbidden_); }
  SmallGraph graph(const std::string& name) const { return at(name).graph; }

 private:
  int forbidden_ = 0;
  std::vector<FixtureEntry> entries_;
  std::map<std::string, std::size_t> index_;
};

}  // namespace flagforge
