#pragma once

#include "flagforge/parallel.hpp"
#include "flagforge/rational.hpp"

#include <mpfr.h>

#include <json.hpp>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace flagforge {

/// The working precision cannot separate the certified bound from 1.
class PrecisionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class BudgetExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SearchParams {
  long l;
  long m;
  Rational p;
  long s;
  long t;

  void validate() const {
    if (!(p > 0 && p < 1)) throw std::invalid_argument("p must lie strictly between 0 and 1");
    if (l < 3) throw std::invalid_argument("l must be at least 3");
    if (m <= l) throw std::invalid_argument("m must exceed l");
    if (s <= 0 || t <= 0) throw std::invalid_argument("s and t must be positive");
  }
};

/// 60-digit decimal enclosure of e.
inline const Rational& e_upper() {
  static const Rational v = parse_rational("271828182845904523536028747135266249775724709369995957496697/100000000000000000000000000000000000000000000000000000000000");
  return v;
}
inline const Rational& e_lower() {
  static const Rational v = parse_rational("271828182845904523536028747135266249775724709369995957496696/100000000000000000000000000000000000000000000000000000000000");
  return v;
}

namespace detail {

class Mpfr {
 public:
  explicit Mpfr(mpfr_prec_t prec) { mpfr_init2(v_, prec); }
  ~Mpfr() { mpfr_clear(v_); }
  Mpfr(const Mpfr&) = delete;
  Mpfr& operator=(const Mpfr&) = delete;

  mpfr_ptr get() { return v_; }
  mpfr_srcptr get() const { return v_; }

  void set(const Rational& q, mpfr_rnd_t rnd) { mpfr_set_q(v_, q.backend().data(), rnd); }

  /// Exact value of the binary float.
  Rational exact() const {
    if (!mpfr_number_p(v_)) throw PrecisionError("non-finite intermediate value");
    Rational q;
    mpfr_get_q(q.backend().data(), v_);
    return q;
  }

 private:
  mpfr_t v_;
};

inline mpfr_rnd_t opposite(mpfr_rnd_t r) { return r == MPFR_RNDU ? MPFR_RNDD : MPFR_RNDU; }

inline void log_of(Mpfr& out, const Rational& x, mpfr_prec_t prec, mpfr_rnd_t rnd) {
  Mpfr tmp(prec);
  tmp.set(x, rnd);
  mpfr_log(out.get(), tmp.get(), rnd);
}

}  // namespace detail

/// Directed bound on (m e (1-p)^((l-1)/2) / l)^l: rnd = MPFR_RNDU gives an upper bound,
/// MPFR_RNDD a lower bound.
inline Rational union_bound_term(const SearchParams& q, mpfr_prec_t prec, mpfr_rnd_t rnd) {
  using detail::Mpfr;
  const auto down = detail::opposite(rnd);
  Mpfr acc(prec), term(prec);
  detail::log_of(acc, Rational(q.m), prec, rnd);
  detail::log_of(term, rnd == MPFR_RNDU ? e_upper() : e_lower(), prec, rnd);
  mpfr_add(acc.get(), acc.get(), term.get(), rnd);
  detail::log_of(term, Rational(q.l), prec, down);
  mpfr_sub(acc.get(), acc.get(), term.get(), rnd);
  detail::log_of(term, 1 - q.p, prec, rnd);
  mpfr_mul_q(term.get(), term.get(), Rational(q.l - 1, 2).backend().data(), rnd);
  mpfr_add(acc.get(), acc.get(), term.get(), rnd);
  mpfr_mul_si(acc.get(), acc.get(), q.l, rnd);
  mpfr_exp(acc.get(), acc.get(), rnd);
  return acc.exact();
}

/// Second-moment bound sigma^2 / (lambda^2 + sigma^2).
inline Rational second_moment_bound(const Rational& variance, long lambda) {
  return variance / (Rational(lambda) * lambda + variance);
}

inline Rational edge_variance(const SearchParams& q) { return Rational(binomial(q.m, 2)) * q.p * (1 - q.p); }

inline Rational triangle_variance(const SearchParams& q) {
  const Rational p3 = q.p * q.p * q.p;
  return Rational(binomial(q.m, 3)) * p3 * ((1 - p3) + Rational(3 * (q.m - 3)) * q.p * q.p * (1 - q.p));
}

struct MassCheck {
  bool ok;
  Rational lhs, rhs, margin;
};

/// C(m,2) p + C(m,3) p^3 + s + t <= m^3 / (6 (l-1)^2) - m/6, exactly.
inline MassCheck check_mass(const SearchParams& q) {
  q.validate();
  const Rational lhs = Rational(binomial(q.m, 2)) * q.p + Rational(binomial(q.m, 3)) * q.p * q.p * q.p + q.s + q.t;
  const BigInt m = q.m, l1 = q.l - 1;
  const Rational rhs = Rational(m * m * m, 6 * l1 * l1) - Rational(m, 6);
  return {lhs <= rhs, lhs, rhs, rhs - lhs};
}

struct ProbabilityCheck {
  bool ok;
  mpfr_prec_t precision;
  /// Enclosure of the union-bound term.
  Rational b1_lower, b1_upper;
  /// Exact bounds on P(B2), P(B3) and the combination b2 + b3 (1 - b2).
  Rational b2, b3, b23;
  /// Certified upper bound on the failure probability.
  Rational total_upper;
};

/// Certifies b1 + b2 + b3 (1 - b2) < 1; b2, b3 are exact and only b1 is rounded (upward).
inline ProbabilityCheck check_probability(const SearchParams& q, mpfr_prec_t precision = 256) {
  q.validate();
  if (precision < 64) throw std::invalid_argument("precision below 64 bits");
  ProbabilityCheck r{};
  r.precision = precision;
  r.b2 = second_moment_bound(edge_variance(q), q.s);
  r.b3 = second_moment_bound(triangle_variance(q), q.t);
  r.b23 = r.b2 + r.b3 * (1 - r.b2);
  r.b1_upper = union_bound_term(q, precision, MPFR_RNDU);
  r.b1_lower = union_bound_term(q, precision, MPFR_RNDD);
  r.total_upper = r.b1_upper + r.b23;
  r.ok = r.total_upper < 1;
  if (!r.ok && r.b1_lower + r.b23 < 1)
    throw PrecisionError("precision " + std::to_string(precision) + " bits cannot decide the probability bound");
  return r;
}

struct BoundReport {
  SearchParams params;
  MassCheck mass;
  /// Absent when the mass condition already fails.
  std::optional<ProbabilityCheck> probability;
  bool suitable;
};

inline BoundReport verify_params(const SearchParams& q, mpfr_prec_t precision = 256) {
  BoundReport r{q, check_mass(q), std::nullopt, false};
  if (r.mass.ok) {
    r.probability = check_probability(q, precision);
    r.suitable = r.probability->ok;
  }
  return r;
}

/// Candidate values per parameter; points are visited lexicographically in (l, m, p, s, t).
struct SearchGrid {
  std::vector<long> l, m;
  std::vector<Rational> p;
  std::vector<long> s, t;

  std::size_t size() const { return l.size() * m.size() * p.size() * s.size() * t.size(); }

  SearchParams at(std::size_t index) const {
    SearchParams q{};
    q.t = t[index % t.size()];
    index /= t.size();
    q.s = s[index % s.size()];
    index /= s.size();
    q.p = p[index % p.size()];
    index /= p.size();
    q.m = m[index % m.size()];
    index /= m.size();
    q.l = l[index];
    return q;
  }
};

struct SearchResult {
  std::optional<BoundReport> found;
  std::size_t evaluated = 0;
  /// Points skipped because the precision could not decide them.
  std::size_t undecided = 0;
};

/// First suitable grid point in lexicographic order. Points outside the parameter
/// invariants are skipped. Throws BudgetExhausted when the first `budget` points hold no
/// suitable one and the grid is larger.
inline SearchResult search(const SearchGrid& grid, std::size_t budget, mpfr_prec_t precision = 256) {
  SearchResult res;
  const std::size_t total = grid.size();
  const std::size_t chunk = std::max<std::size_t>(1, workers() * 4);
  for (std::size_t start = 0; start < total; start += chunk) {
    if (start >= budget) throw BudgetExhausted("search budget of " + std::to_string(budget) + " points exhausted");
    const std::size_t end = std::min({total, start + chunk, budget});
    std::vector<std::optional<BoundReport>> reports(end - start);
    std::vector<char> undecided(end - start, 0);
    parallel_for(end - start, [&](std::size_t i) {
      const auto q = grid.at(start + i);
      try {
        q.validate();
        reports[i] = verify_params(q, precision);
      } catch (const PrecisionError&) {
        undecided[i] = 1;
      } catch (const std::invalid_argument&) {
      }
    });
    for (std::size_t i = 0; i < reports.size(); ++i) {
      ++res.evaluated;
      res.undecided += undecided[i];
      if (reports[i] && reports[i]->suitable) {
        res.found = reports[i];
        return res;
      }
    }
  }
  return res;
}

namespace detail {
template <typename T>
std::vector<T> grid_axis(const nlohmann::json& j, T (*parse)(const nlohmann::json&)) {
  std::vector<T> out;
  if (j.is_array()) {
    for (const auto& x : j) out.push_back(parse(x));
  } else if (j.is_object()) {
    const T from = parse(j.at("from")), to = parse(j.at("to")), step = parse(j.at("step"));
    if (step <= 0) throw std::invalid_argument("grid step must be positive");
    for (T x = from; x <= to; x += step) out.push_back(x);
  } else {
    out.push_back(parse(j));
  }
  return out;
}

inline long json_long(const nlohmann::json& j) { return j.get<long>(); }
inline Rational json_rational(const nlohmann::json& j) {
  return j.is_string() ? parse_rational(j.get<std::string>()) : Rational(j.get<long>());
}
}  // namespace detail

/// Each axis is a list, a single value or {from, to, step}; p values are rational strings.
inline SearchGrid grid_from_json(const nlohmann::json& j) {
  return {detail::grid_axis<long>(j.at("l"), detail::json_long), detail::grid_axis<long>(j.at("m"), detail::json_long),
          detail::grid_axis<Rational>(j.at("p"), detail::json_rational), detail::grid_axis<long>(j.at("s"), detail::json_long),
          detail::grid_axis<long>(j.at("t"), detail::json_long)};
}

inline nlohmann::json to_json(const SearchParams& q) {
  return {{"l", q.l}, {"m", q.m}, {"p", to_string(q.p)}, {"s", q.s}, {"t", q.t}};
}

/// Bounds render as 20-digit decimals next to their exact values.
inline nlohmann::json to_json(const BoundReport& r) {
  auto both = [](const Rational& x) { return nlohmann::json{{"decimal", to_decimal(x, 20)}, {"exact", to_string(x)}}; };
  nlohmann::json j;
  j["params"] = to_json(r.params);
  j["mass"] = {{"ok", r.mass.ok}, {"lhs", both(r.mass.lhs)}, {"rhs", both(r.mass.rhs)}, {"margin", both(r.mass.margin)}};
  if (r.probability) {
    const auto& p = *r.probability;
    j["probability"] = {{"ok", p.ok},
                        {"precision_bits", p.precision},
                        {"b1_upper", to_decimal(p.b1_upper, 20)},
                        {"b1_lower", to_decimal(p.b1_lower, 20)},
                        {"b2", both(p.b2)},
                        {"b3", both(p.b3)},
                        {"b2_or_b3", both(p.b23)},
                        {"total_upper", to_decimal(p.total_upper, 20)}};
  } else {
    j["probability"] = nullptr;
  }
  j["suitable"] = r.suitable;
  return j;
}

}  // namespace flagforge
