#pragma once

#include "flagforge/algebra.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

namespace flagforge {

/// One summand mult * [[ v . v ]]_sigma of a sum of squares.
struct SquareTerm {
  Rational mult;
  std::vector<Rational> vector;
};

/// Sum of averaged squares of vectors over F^sigma_{flag_size}, indexed in family order.
struct SquareExpression {
  TypeGraph type;
  int flag_size;
  std::vector<SquareTerm> terms;

  FamilyRef family() const { return enumerate_flags(type, flag_size); }
  /// 2 * flag_size - |sigma|: the order of the graphs the square lives on.
  int product_size() const { return 2 * flag_size - type.size(); }
};

struct Certificate {
  SmallGraph target;
  int forbidden;
  int t;
  std::vector<SquareExpression> squares;
  std::vector<Rational> coeffs;
  Rational bound;
};

struct VerificationReport {
  DensityVector target_expansion;
  DensityVector residual;
  std::vector<DensityVector> square_expansions;
  Rational min_residual;
  bool pass = false;
  /// Basis indices whose residual is below the bound.
  std::vector<std::size_t> failing;
};

/// Exact expansion of a sum of squares into graphs of order t.
inline DensityVector expand_square(const SquareExpression& sq, int t) {
  if (sq.product_size() > t) throw std::invalid_argument("square does not fit in graphs of order " + std::to_string(t));
  auto fam = sq.family();
  DensityVector out(admissible_family(t, sq.type.forbidden()));
  for (const auto& term : sq.terms) {
    if (term.vector.size() != fam->size()) throw std::invalid_argument("square vector length differs from its flag family");
    if (term.mult == 0) continue;
    LinearCombination v(fam, term.vector);
    out += term.mult * expand(average(product(v, v, sq.product_size())), t);
  }
  return out;
}

inline void validate(const Certificate& cert) {
  if (cert.squares.size() != cert.coeffs.size()) throw std::invalid_argument("one coefficient per square is required");
  if (cert.target.order() > cert.t) throw std::invalid_argument("target larger than the expansion size");
  for (std::size_t i = 0; i < cert.squares.size(); ++i) {
    const auto& sq = cert.squares[i];
    if (sq.type.forbidden() != cert.forbidden) throw std::invalid_argument("square type generated under a different l");
    if (sq.product_size() > cert.t) throw std::invalid_argument("square " + std::to_string(i + 1) + " is too large for t");
    if (cert.coeffs[i] < 0) throw std::invalid_argument("certificate coefficients must be nonnegative");
  }
}

/// residual(H) = d(J; H) - sum_i c_i [[Delta_i]](H); passes iff every residual is at least the bound.
inline VerificationReport verify(const Certificate& cert) {
  validate(cert);
  VerificationReport rep{expand(graph_vector(cert.target, cert.forbidden), cert.t),
                         DensityVector(admissible_family(cert.t, cert.forbidden)),
                         {},
                         0,
                         false,
                         {}};
  rep.square_expansions.resize(cert.squares.size(), DensityVector(admissible_family(cert.t, cert.forbidden)));
  parallel_for(cert.squares.size(), [&](std::size_t i) { rep.square_expansions[i] = expand_square(cert.squares[i], cert.t); });
  rep.residual = rep.target_expansion;
  for (std::size_t i = 0; i < cert.squares.size(); ++i) rep.residual -= cert.coeffs[i] * rep.square_expansions[i];
  rep.min_residual = *std::min_element(rep.residual.coefficients().begin(), rep.residual.coefficients().end());
  for (std::size_t h = 0; h < rep.residual.size(); ++h)
    if (rep.residual[h] < cert.bound) rep.failing.push_back(h);
  rep.pass = rep.failing.empty();
  return rep;
}

// ---------------------------------------------------------------------------
// PSD decisions

using RationalMatrix = std::vector<std::vector<Rational>>;

struct PsdResult {
  bool psd = false;
  /// Q = sum_k d_k l_k l_k^T with d_k > 0 when psd.
  std::vector<SquareTerm> witness;
  /// x with x^T Q x < 0 when not psd.
  std::vector<Rational> negative_vector;
};

inline Rational quadratic_form(const RationalMatrix& q, const std::vector<Rational>& x) {
  Rational s = 0;
  for (std::size_t i = 0; i < q.size(); ++i)
    for (std::size_t j = 0; j < q.size(); ++j) s += x[i] * q[i][j] * x[j];
  return s;
}

/// Exact LDL^T with diagonal pivoting.
inline PsdResult check_psd(const RationalMatrix& q) {
  const std::size_t n = q.size();
  for (const auto& row : q)
    if (row.size() != n) throw std::invalid_argument("matrix is not square");
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (q[i][j] != q[j][i]) throw std::invalid_argument("matrix is not symmetric");

  RationalMatrix a = q;
  std::vector<bool> eliminated(n, false);
  std::vector<std::size_t> order;
  PsdResult res;
  // Solve l_k . x = 0 for the pivot coordinates, latest pivot first, so x^T Q x = y^T A y.
  auto lift = [&](std::vector<Rational> y) {
    for (std::size_t k = order.size(); k-- > 0;) {
      const std::size_t p = order[k];
      const auto& l = res.witness[k].vector;
      Rational s = 0;
      for (std::size_t j = 0; j < n; ++j)
        if (j != p) s += l[j] * y[j];
      y[p] = -s;
    }
    return y;
  };
  for (;;) {
    std::optional<std::size_t> pivot;
    for (std::size_t i = 0; i < n; ++i)
      if (!eliminated[i] && a[i][i] > 0) {
        pivot = i;
        break;
      }
    if (!pivot) {
      std::vector<Rational> y(n);
      for (std::size_t i = 0; i < n; ++i)
        if (!eliminated[i] && a[i][i] < 0) {
          y[i] = 1;
          res.negative_vector = lift(y);
          return res;
        }
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
          if (!eliminated[i] && !eliminated[j] && a[i][j] != 0) {
            y[i] = 1;
            y[j] = a[i][j] > 0 ? -1 : 1;
            res.negative_vector = lift(y);
            return res;
          }
      res.psd = true;
      return res;
    }
    const std::size_t p = *pivot;
    const Rational d = a[p][p];
    std::vector<Rational> l(n);
    for (std::size_t j = 0; j < n; ++j)
      if (!eliminated[j]) l[j] = a[j][p] / d;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (l[i] != 0 && l[j] != 0) a[i][j] -= d * l[i] * l[j];
    eliminated[p] = true;
    order.push_back(p);
    res.witness.push_back({d, std::move(l)});
  }
}

/// Sum-of-squares form of a PSD Gram matrix over F^sigma_{flag_size}.
inline SquareExpression square_from_matrix(const TypeGraph& type, int flag_size, const RationalMatrix& q) {
  auto res = check_psd(q);
  if (!res.psd) throw std::invalid_argument("matrix is not positive semidefinite");
  if (q.size() != enumerate_flags(type, flag_size)->size()) throw std::invalid_argument("matrix size differs from the flag family");
  return SquareExpression{type, flag_size, std::move(res.witness)};
}

// ---------------------------------------------------------------------------
// Local profiles

/// Profiles z over F^dot_3 with A z = b (full row rank, one dimension short) and z^T Q z = 0.
struct LocalProfileSystem {
  FamilyRef basis;
  RationalMatrix a;
  std::vector<Rational> b;
  RationalMatrix q;
};

struct IrrationalRoots : std::runtime_error {
  Rational discriminant;
  explicit IrrationalRoots(Rational disc)
      : std::runtime_error("profile roots are irrational; discriminant " + to_string(disc)), discriminant(std::move(disc)) {}
};

/// Linear rows: every term vector of the dot square (each must vanish on an extremal profile)
/// plus normalization. Quadratic: 4 (rho^2)(rhobar^2) - (2 rho rhobar)^2, which vanishes on
/// every profile because it is the square-of-products identity evaluated pointwise.
inline LocalProfileSystem dot_profile_system(const SquareExpression& dot_square) {
  if (dot_square.type.size() != 1) throw std::invalid_argument("profile system needs a square over the dot type");
  LocalProfileSystem sys;
  sys.basis = dot_square.family();
  const std::size_t n = sys.basis->size();
  for (const auto& term : dot_square.terms) {
    sys.a.push_back(term.vector);
    sys.b.push_back(0);
  }
  sys.a.push_back(std::vector<Rational>(n, Rational(1)));
  sys.b.push_back(1);
  const int l = dot_square.type.forbidden();
  auto two = enumerate_flags(TypeGraph::dot(l), 2);
  const Flag* rho = nullptr;
  const Flag* rhobar = nullptr;
  for (const auto& f : *two) (f.graph().adjacent(0, 1) ? rho : rhobar) = &f;
  auto rr = product(*rho, *rho, dot_square.flag_size);
  auto bb = product(*rhobar, *rhobar, dot_square.flag_size);
  auto rb = product(*rho, *rhobar, dot_square.flag_size);
  sys.q.assign(n, std::vector<Rational>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) sys.q[i][j] = 2 * (rr[i] * bb[j] + bb[i] * rr[j]) - 4 * rb[i] * rb[j];
  return sys;
}

namespace detail {

// Reduced row echelon form of [A | b]; returns pivot columns.
inline std::vector<std::size_t> rref(RationalMatrix& m, std::size_t cols) {
  std::vector<std::size_t> pivots;
  std::size_t row = 0;
  for (std::size_t c = 0; c < cols && row < m.size(); ++c) {
    std::size_t sel = row;
    while (sel < m.size() && m[sel][c] == 0) ++sel;
    if (sel == m.size()) continue;
    std::swap(m[row], m[sel]);
    const Rational inv = 1 / m[row][c];
    for (auto& x : m[row]) x *= inv;
    for (std::size_t r = 0; r < m.size(); ++r)
      if (r != row && m[r][c] != 0) {
        const Rational f = m[r][c];
        for (std::size_t k = 0; k < m[r].size(); ++k) m[r][k] -= f * m[row][k];
      }
    pivots.push_back(c);
    ++row;
  }
  return pivots;
}

inline std::optional<BigInt> exact_sqrt(const BigInt& v) {
  if (v < 0) return std::nullopt;
  BigInt r = boost::multiprecision::sqrt(v);
  if (r * r != v) return std::nullopt;
  return r;
}

}  // namespace detail

/// Both exact solutions, ordered lexicographically.
inline std::vector<FlagVector> solve_local_profile(const LocalProfileSystem& sys) {
  const std::size_t n = sys.basis->size();
  if (sys.a.size() + 1 != n) throw std::invalid_argument("profile system needs exactly n - 1 linear rows");
  RationalMatrix m = sys.a;
  for (std::size_t r = 0; r < m.size(); ++r) m[r].push_back(sys.b[r]);
  auto pivots = detail::rref(m, n);
  if (pivots.size() != sys.a.size()) throw std::invalid_argument("linear part of the profile system is rank deficient");
  std::size_t free_col = 0;
  while (std::find(pivots.begin(), pivots.end(), free_col) != pivots.end()) ++free_col;
  // z = x0 + s * dir
  std::vector<Rational> x0(n), dir(n);
  dir[free_col] = 1;
  for (std::size_t r = 0; r < pivots.size(); ++r) {
    x0[pivots[r]] = m[r][n];
    dir[pivots[r]] = -m[r][free_col];
  }
  auto bilinear = [&](const std::vector<Rational>& u, const std::vector<Rational>& v) {
    Rational s = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) s += u[i] * sys.q[i][j] * v[j];
    return s;
  };
  const Rational qa = bilinear(dir, dir), qb = 2 * bilinear(x0, dir), qc = bilinear(x0, x0);
  std::vector<Rational> roots;
  if (qa == 0) {
    if (qb == 0) throw std::invalid_argument("quadratic part vanishes on the solution line");
    roots.push_back(-qc / qb);
  } else {
    const Rational disc = qb * qb - 4 * qa * qc;
    auto sn = detail::exact_sqrt(numerator_of(disc));
    auto sd = detail::exact_sqrt(denominator_of(disc));
    if (!sn || !sd) throw IrrationalRoots(disc);
    const Rational root = Rational(*sn, *sd);
    roots.push_back((-qb - root) / (2 * qa));
    if (root != 0) roots.push_back((-qb + root) / (2 * qa));
  }
  std::vector<std::vector<Rational>> sols;
  for (const auto& s : roots) {
    std::vector<Rational> z(n);
    for (std::size_t i = 0; i < n; ++i) z[i] = x0[i] + s * dir[i];
    sols.push_back(std::move(z));
  }
  std::sort(sols.begin(), sols.end());
  std::vector<FlagVector> out;
  for (auto& z : sols) out.emplace_back(sys.basis, std::move(z));
  return out;
}

/// Edge density seen from the labeled vertex: sum_F p(rho; F) z_F.
inline Rational degree_of_profile(const FlagVector& profile) {
  const auto& fam = profile.basis();
  if (fam.type().size() != 1) throw std::invalid_argument("profile must be over dot-type flags");
  auto two = enumerate_flags(TypeGraph::dot(fam.type().forbidden()), 2);
  const Flag* rho = nullptr;
  for (const auto& f : *two)
    if (f.graph().adjacent(0, 1)) rho = &f;
  auto coeff = expand_flag(FlagVector::unit(*rho), fam.flag_size());
  Rational d = 0;
  for (std::size_t i = 0; i < profile.size(); ++i) d += coeff[i] * profile[i];
  return d;
}

// ---------------------------------------------------------------------------
// Certificate files

/// Canonical form: squares carry "vector" in family order. A source form may instead give
/// "flags": {name: coefficient} per term with a "fixture" file per square; names resolve
/// against that file.
inline Certificate certificate_from_json(const nlohmann::json& j, const std::filesystem::path& fixture_dir = {}) {
  Certificate cert{from_graph6(j.at("target").get<std::string>()), j.at("forbidden_l").get<int>(), j.at("t").get<int>(), {}, {},
                   parse_rational(j.at("bound").get<std::string>())};
  for (const auto& s : j.at("squares")) {
    std::optional<FixtureSet> fixtures;
    if (s.contains("fixture")) fixtures = FixtureSet::load(fixture_dir / s.at("fixture").get<std::string>());
    TypeGraph type(from_graph6(s.at("type").get<std::string>()), cert.forbidden);
    SquareExpression sq{type, s.at("flag_size").get<int>(), {}};
    auto fam = sq.family();
    for (const auto& t : s.at("terms")) {
      SquareTerm term{parse_rational(t.at("mult").get<std::string>()), std::vector<Rational>(fam->size())};
      if (t.contains("vector")) {
        const auto& vec = t.at("vector");
        if (vec.size() != fam->size()) throw std::invalid_argument("square vector length differs from its flag family");
        for (std::size_t i = 0; i < vec.size(); ++i) term.vector[i] = parse_rational(vec[i].get<std::string>());
      } else {
        if (!fixtures) throw std::invalid_argument("named flags need a fixture file");
        for (const auto& [name, coef] : t.at("flags").items()) {
          Flag f = fixtures->flag(name);
          if (!(f.type() == type)) throw std::invalid_argument("flag " + name + " has a different type than its square");
          term.vector[fam->index_of(f)] += parse_rational(coef.get<std::string>());
        }
      }
      sq.terms.push_back(std::move(term));
    }
    cert.squares.push_back(std::move(sq));
  }
  for (const auto& c : j.at("coeffs")) cert.coeffs.push_back(parse_rational(c.get<std::string>()));
  validate(cert);
  return cert;
}

inline nlohmann::json to_json(const Certificate& cert) {
  nlohmann::json j;
  j["target"] = to_graph6(cert.target);
  j["forbidden_l"] = cert.forbidden;
  j["t"] = cert.t;
  j["squares"] = nlohmann::json::array();
  for (const auto& sq : cert.squares) {
    nlohmann::json s;
    s["type"] = sq.type.graph6();
    s["flag_size"] = sq.flag_size;
    s["terms"] = nlohmann::json::array();
    for (const auto& t : sq.terms) {
      nlohmann::json vec = nlohmann::json::array();
      for (const auto& x : t.vector) vec.push_back(to_string(x));
      s["terms"].push_back({{"mult", to_string(t.mult)}, {"vector", vec}});
    }
    j["squares"].push_back(s);
  }
  j["coeffs"] = nlohmann::json::array();
  for (const auto& c : cert.coeffs) j["coeffs"].push_back(to_string(c));
  j["bound"] = to_string(cert.bound);
  return j;
}

inline Certificate load_certificate(const std::filesystem::path& path, const std::filesystem::path& fixture_dir = {}) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open certificate " + path.string());
  return certificate_from_json(nlohmann::json::parse(in), fixture_dir);
}

inline nlohmann::json to_json(const VerificationReport& rep, const Rational& bound) {
  nlohmann::json j;
  j["pass"] = rep.pass;
  j["min_residual"] = to_string(rep.min_residual);
  j["bound"] = to_string(bound);
  j["residual"] = nlohmann::json::array();
  for (std::size_t h = 0; h < rep.residual.size(); ++h)
    j["residual"].push_back({{"graph", to_graph6(rep.residual.basis()[h].graph())},
                             {"target", to_string(rep.target_expansion[h])},
                             {"residual", to_string(rep.residual[h])}});
  j["failing"] = nlohmann::json::array();
  for (auto h : rep.failing) j["failing"].push_back(to_graph6(rep.residual.basis()[h].graph()));
  return j;
}

}  // namespace flagforge
