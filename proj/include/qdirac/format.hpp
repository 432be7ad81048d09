#ifndef QDIRAC_FORMAT_HPP
#define QDIRAC_FORMAT_HPP

// Decimal string conversion. Output is deterministic: exact rationals are
// rounded half-to-even from the rational itself, reals go through MPFR's
// correctly rounded conversion.

#include "precision.hpp"

#include <cctype>
#include <string>
#include <string_view>

namespace qdirac {

namespace detail {

// Lays out a significand digit string d1 d2 ... with value d1.d2... x 10^e10.
inline std::string layout_decimal(bool negative, std::string digits, long e10) {
  while (digits.size() > 1 && digits.back() == '0') digits.pop_back();
  std::string out = negative ? "-" : "";
  const long n = static_cast<long>(digits.size());
  if (e10 >= -5 && e10 < 21) {
    if (e10 >= 0) {
      if (n <= e10 + 1) {
        out += digits + std::string(static_cast<size_t>(e10 + 1 - n), '0');
      } else {
        out += digits.substr(0, static_cast<size_t>(e10 + 1)) + "." +
               digits.substr(static_cast<size_t>(e10 + 1));
      }
    } else {
      out += "0." + std::string(static_cast<size_t>(-e10 - 1), '0') + digits;
    }
    return out;
  }
  out += digits.substr(0, 1);
  if (n > 1) out += "." + digits.substr(1);
  std::string ex = std::to_string(e10 < 0 ? -e10 : e10);
  if (ex.size() < 2) ex = "0" + ex;
  out += (e10 < 0 ? "e-" : "e+") + ex;
  return out;
}

}  // namespace detail

/// `sig` significant digits, round-half-even, trailing zeros dropped.
inline std::string to_decimal(const Rat& value, unsigned sig) {
  if (sgn(value) == 0) return "0";
  if (sig == 0) sig = 1;
  Rat v = abs(value);
  // e10 = floor(log10 v)
  long e10 = static_cast<long>(mpz_sizeinbase(v.get_num_mpz_t(), 10)) -
             static_cast<long>(mpz_sizeinbase(v.get_den_mpz_t(), 10));
  while (pow10(e10) > v) --e10;
  while (pow10(e10 + 1) <= v) ++e10;

  Rat scaled = v * pow10(static_cast<long>(sig) - 1 - e10);
  Int q, r;
  mpz_fdiv_qr(q.get_mpz_t(), r.get_mpz_t(), scaled.get_num_mpz_t(), scaled.get_den_mpz_t());
  int cmp = mpz_cmp(Int(2 * r).get_mpz_t(), scaled.get_den_mpz_t());
  if (cmp > 0 || (cmp == 0 && mpz_odd_p(q.get_mpz_t()))) ++q;
  std::string digits = q.get_str();
  if (digits.size() > sig) {  // rounded up to the next power of ten
    digits.pop_back();
    ++e10;
  }
  return detail::layout_decimal(sgn(value) < 0, digits, e10);
}

inline std::string to_decimal(const Real& value, unsigned sig) {
  if (!value.is_finite()) throw RangeError("cannot format a non-finite value");
  if (value.is_zero()) return "0";
  if (sig == 0) sig = 1;
  mpfr_exp_t e = 0;
  char* raw = mpfr_get_str(nullptr, &e, 10, sig, value.get(), MPFR_RNDN);
  std::string s(raw);
  mpfr_free_str(raw);
  bool neg = false;
  if (!s.empty() && s.front() == '-') {
    neg = true;
    s.erase(0, 1);
  }
  return detail::layout_decimal(neg, s, static_cast<long>(e) - 1);
}

inline std::string to_decimal(double value, unsigned sig) { return to_decimal(Real(value, 53), sig); }

/// Exact parse of "12", "-15.5", "1e-3", "2.5E+4" or "3/7".
inline Rat parse_rational(std::string_view text) {
  auto fail = [&] { return ParameterError("not a rational number: '" + std::string(text) + "'"); };
  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) s += c;
  if (s.empty()) throw fail();

  if (auto slash = s.find('/'); slash != std::string::npos) {
    Rat num = parse_rational(s.substr(0, slash));
    Rat den = parse_rational(s.substr(slash + 1));
    if (sgn(den) == 0) throw ParameterError("zero denominator in '" + std::string(text) + "'");
    Rat r = num / den;
    r.canonicalize();
    return r;
  }

  size_t i = 0;
  bool neg = false;
  if (s[i] == '+' || s[i] == '-') neg = s[i++] == '-';
  std::string mantissa;
  long frac_digits = 0;
  bool seen_point = false;
  for (; i < s.size() && (std::isdigit(static_cast<unsigned char>(s[i])) || s[i] == '.'); ++i) {
    if (s[i] == '.') {
      if (seen_point) throw fail();
      seen_point = true;
    } else {
      mantissa += s[i];
      if (seen_point) ++frac_digits;
    }
  }
  if (mantissa.empty()) throw fail();
  long exponent = 0;
  if (i < s.size()) {
    if (s[i] != 'e' && s[i] != 'E') throw fail();
    ++i;
    std::string ex = s.substr(i);
    if (ex.empty()) throw fail();
    size_t used = 0;
    try {
      exponent = std::stol(ex, &used);
    } catch (const std::exception&) {
      throw fail();
    }
    if (used != ex.size()) throw fail();
  }
  Rat r{Int(mantissa, 10)};
  r *= pow10(exponent - frac_digits);
  r.canonicalize();
  return neg ? Rat(-r) : r;
}

}  // namespace qdirac

#endif  // QDIRAC_FORMAT_HPP
