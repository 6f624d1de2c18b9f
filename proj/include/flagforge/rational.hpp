#pragma once

#include <boost/multiprecision/gmp.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace flagforge {

/// Exact rational number. GMP keeps it reduced with a positive denominator.
using Rational = boost::multiprecision::mpq_rational;
using BigInt = boost::multiprecision::mpz_int;

inline BigInt numerator_of(const Rational& q) { return boost::multiprecision::numerator(q); }
inline BigInt denominator_of(const Rational& q) { return boost::multiprecision::denominator(q); }

namespace detail {
// Leading zeros would select octal in the GMP string constructor.
inline BigInt decimal_int(std::string s) {
  bool neg = !s.empty() && s[0] == '-';
  if (!s.empty() && (s[0] == '-' || s[0] == '+')) s.erase(0, 1);
  auto nz = s.find_first_not_of('0');
  s = nz == std::string::npos ? "0" : s.substr(nz);
  BigInt v(s);
  return neg ? BigInt(-v) : v;
}
}  // namespace detail

/// Parses "p", "-p", "p/q" or a plain decimal such as "0.0051707".
inline Rational parse_rational(std::string_view text) {
  std::string s(text);
  if (s.empty()) throw std::invalid_argument("empty rational literal");
  auto check_int = [&](const std::string& part) {
    std::size_t i = (!part.empty() && (part[0] == '-' || part[0] == '+')) ? 1 : 0;
    if (i >= part.size()) throw std::invalid_argument("malformed rational literal '" + s + "'");
    for (; i < part.size(); ++i)
      if (part[i] < '0' || part[i] > '9')
        throw std::invalid_argument("malformed rational literal '" + s + "'");
  };
  if (auto slash = s.find('/'); slash != std::string::npos) {
    std::string num = s.substr(0, slash), den = s.substr(slash + 1);
    check_int(num);
    check_int(den);
    BigInt d = detail::decimal_int(den);
    if (d == 0) throw std::invalid_argument("zero denominator in '" + s + "'");
    return Rational(detail::decimal_int(num), d);
  }
  if (auto dot = s.find('.'); dot != std::string::npos) {
    std::string whole = s.substr(0, dot), frac = s.substr(dot + 1);
    bool neg = !whole.empty() && whole[0] == '-';
    std::string digits = (whole == "-" || whole == "+" || whole.empty()) ? std::string("0") : whole;
    check_int(digits);
    if (!frac.empty()) check_int(frac);
    if (!frac.empty() && (frac[0] == '-' || frac[0] == '+'))
      throw std::invalid_argument("malformed rational literal '" + s + "'");
    BigInt scale = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) scale *= 10;
    BigInt w = detail::decimal_int(digits);
    if (w < 0) w = -w;
    BigInt f = frac.empty() ? BigInt(0) : detail::decimal_int(frac);
    Rational r(w * scale + f, scale);
    return neg ? Rational(-r) : r;
  }
  check_int(s);
  return Rational(detail::decimal_int(s));
}

/// "p/q", or "p" when the denominator is one.
inline std::string to_string(const Rational& q) {
  if (denominator_of(q) == 1) return numerator_of(q).str();
  return numerator_of(q).str() + "/" + denominator_of(q).str();
}

/// Decimal rendering with `digits` significant digits, rounded half away from zero.
/// Output is scientific ("1.25e-3") unless the value is an integer or zero.
inline std::string to_decimal(const Rational& q, int digits) {
  if (digits < 1) throw std::invalid_argument("to_decimal needs at least one digit");
  if (q == 0) return "0";
  if (denominator_of(q) == 1) {
    std::string s = numerator_of(q).str();
    std::size_t nd = s.size() - (s[0] == '-' ? 1 : 0);
    if (nd <= static_cast<std::size_t>(digits)) return s;
  }
  bool neg = q < 0;
  Rational a = neg ? Rational(-q) : q;
  // Find exponent e with 10^e <= a < 10^(e+1).
  long e = 0;
  BigInt num = numerator_of(a), den = denominator_of(a);
  e = static_cast<long>(num.str().size()) - static_cast<long>(den.str().size());
  auto pow10 = [](long k) {
    BigInt r = 1;
    for (long i = 0; i < k; ++i) r *= 10;
    return r;
  };
  auto ge_pow = [&](long k) {  // a >= 10^k
    return k >= 0 ? num >= den * pow10(k) : num * pow10(-k) >= den;
  };
  while (!ge_pow(e)) --e;
  while (ge_pow(e + 1)) ++e;
  long shift = digits - 1 - e;  // scaled = a * 10^shift has `digits` integer digits
  BigInt sn = num, sd = den;
  if (shift >= 0)
    sn *= pow10(shift);
  else
    sd *= pow10(-shift);
  BigInt quo = sn / sd, rem = sn % sd;
  if (rem * 2 >= sd) quo += 1;
  std::string ds = quo.str();
  if (static_cast<long>(ds.size()) > digits) {  // rounding carried into a new digit
    ds.pop_back();
    ++e;
  }
  while (ds.size() > 1 && ds.back() == '0') ds.pop_back();
  std::string out = neg ? "-" : "";
  out += ds[0];
  if (ds.size() > 1) out += "." + ds.substr(1);
  if (e != 0) out += "e" + std::to_string(e);
  return out;
}

/// Binomial coefficient as a big integer; zero when k < 0 or k > n.
inline BigInt binomial(long n, long k) {
  if (k < 0 || n < 0 || k > n) return 0;
  if (k > n - k) k = n - k;
  BigInt r = 1;
  for (long i = 1; i <= k; ++i) {
    r *= n - k + i;
    r /= i;
  }
  return r;
}

}  // namespace flagforge
