#ifndef QDIRAC_PRECISION_HPP
#define QDIRAC_PRECISION_HPP

// Numeric tower: exact rationals (GMP), configurable-precision reals (MPFR),
// a small complex template over either, and cancellation-aware summation.

#include <gmpxx.h>
#include <mpfr.h>

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qdirac {

using Rat = mpq_class;
using Int = mpz_class;

/// Raised when a model parameter violates an operation's precondition.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when the working precision cannot resolve a cancelling sum.
class PrecisionError : public std::runtime_error {
 public:
  PrecisionError(const std::string& what, unsigned required, unsigned supplied)
      : std::runtime_error(what), required_(required), supplied_(supplied) {}
  unsigned required_digits() const noexcept { return required_; }
  unsigned supplied_digits() const noexcept { return supplied_; }

 private:
  unsigned required_;
  unsigned supplied_;
};

/// Exponent overflow or a non-finite intermediate.
class RangeError : public std::overflow_error {
 public:
  using std::overflow_error::overflow_error;
};

inline constexpr unsigned kGuardDigits = 30;
inline constexpr unsigned kMinDigits = 16;

inline mpfr_prec_t bits_for_digits(unsigned digits) {
  return static_cast<mpfr_prec_t>(std::ceil(digits * 3.321928094887362)) + 8;
}

inline unsigned digits_for_bits(mpfr_prec_t bits) {
  return static_cast<unsigned>(std::floor((bits - 8) * 0.30102999566398120));
}

enum class Mode { Exact, Float };

struct PrecisionCtx {
  Mode mode = Mode::Exact;
  unsigned digits = kMinDigits;  // only meaningful in Float mode

  static PrecisionCtx exact() { return {}; }
  static PrecisionCtx floating(unsigned digits) {
    if (digits < kMinDigits)
      throw ParameterError("working precision must be at least " + std::to_string(kMinDigits) +
                           " decimal digits");
    return {Mode::Float, digits};
  }
  bool is_exact() const noexcept { return mode == Mode::Exact; }
};

// ---------------------------------------------------------------------------
// Real: an MPFR value that owns its precision. Binary operations produce a
// result at the larger of the operand precisions; assignment adopts the
// source precision.

class Real {
 public:
  static constexpr mpfr_prec_t kDefaultBits = 64;

  Real() { init(kDefaultBits); mpfr_set_zero(v_, 1); }
  Real(long v, mpfr_prec_t bits) { init(bits); mpfr_set_si(v_, v, MPFR_RNDN); }
  Real(int v, mpfr_prec_t bits) : Real(static_cast<long>(v), bits) {}
  Real(double v, mpfr_prec_t bits) { init(bits); mpfr_set_d(v_, v, MPFR_RNDN); }
  Real(const Rat& v, mpfr_prec_t bits) { init(bits); mpfr_set_q(v_, v.get_mpq_t(), MPFR_RNDN); }
  Real(const Int& v, mpfr_prec_t bits) { init(bits); mpfr_set_z(v_, v.get_mpz_t(), MPFR_RNDN); }
  Real(const Real& o) { init(o.bits()); mpfr_set(v_, o.v_, MPFR_RNDN); }
  Real(const Real& o, mpfr_prec_t bits) { init(bits); mpfr_set(v_, o.v_, MPFR_RNDN); }
  Real(Real&& o) noexcept {
    init(mpfr_get_prec(o.v_));
    mpfr_swap(v_, o.v_);
  }
  ~Real() { mpfr_clear(v_); }

  Real& operator=(const Real& o) {
    if (this != &o) {
      mpfr_set_prec(v_, o.bits());
      mpfr_set(v_, o.v_, MPFR_RNDN);
    }
    return *this;
  }
  Real& operator=(Real&& o) noexcept {
    mpfr_swap(v_, o.v_);
    return *this;
  }

  mpfr_prec_t bits() const noexcept { return mpfr_get_prec(v_); }
  unsigned digits() const noexcept { return digits_for_bits(bits()); }
  mpfr_srcptr get() const noexcept { return v_; }
  mpfr_ptr get() noexcept { return v_; }

  bool is_finite() const noexcept { return mpfr_number_p(v_) != 0; }
  bool is_zero() const noexcept { return mpfr_zero_p(v_) != 0; }
  int sign() const noexcept { return mpfr_sgn(v_); }
  double to_double() const noexcept { return mpfr_get_d(v_, MPFR_RNDN); }
  /// Base-2 exponent e with 2^(e-1) <= |x| < 2^e; meaningless for zero.
  long exponent() const noexcept { return mpfr_get_exp(v_); }

  /// Unit in the last place at this value's precision.
  Real ulp() const {
    Real r(1L, bits());
    if (is_zero()) {
      mpfr_set_zero(r.v_, 1);
      return r;
    }
    mpfr_mul_2si(r.v_, r.v_, exponent() - bits(), MPFR_RNDN);
    return r;
  }

  Real& operator+=(const Real& o) { widen(o); mpfr_add(v_, v_, o.v_, MPFR_RNDN); return *this; }
  Real& operator-=(const Real& o) { widen(o); mpfr_sub(v_, v_, o.v_, MPFR_RNDN); return *this; }
  Real& operator*=(const Real& o) { widen(o); mpfr_mul(v_, v_, o.v_, MPFR_RNDN); return *this; }
  Real& operator/=(const Real& o) { widen(o); mpfr_div(v_, v_, o.v_, MPFR_RNDN); return *this; }
  Real operator-() const { Real r(*this); mpfr_neg(r.v_, r.v_, MPFR_RNDN); return r; }

  friend Real operator+(Real a, const Real& b) { return a += b; }
  friend Real operator-(Real a, const Real& b) { return a -= b; }
  friend Real operator*(Real a, const Real& b) { return a *= b; }
  friend Real operator/(Real a, const Real& b) { return a /= b; }

  friend bool operator==(const Real& a, const Real& b) { return mpfr_equal_p(a.v_, b.v_) != 0; }
  friend bool operator<(const Real& a, const Real& b) { return mpfr_less_p(a.v_, b.v_) != 0; }
  friend bool operator>(const Real& a, const Real& b) { return b < a; }
  friend bool operator<=(const Real& a, const Real& b) { return mpfr_lessequal_p(a.v_, b.v_) != 0; }
  friend bool operator>=(const Real& a, const Real& b) { return b <= a; }

#define QDIRAC_REAL_UNARY(name, fn)                \
  friend Real name(const Real& x) {                \
    Real r(0L, x.bits());                          \
    fn(r.v_, x.v_, MPFR_RNDN);                     \
    return r;                                      \
  }
  QDIRAC_REAL_UNARY(abs, mpfr_abs)
  QDIRAC_REAL_UNARY(sqrt, mpfr_sqrt)
  QDIRAC_REAL_UNARY(exp, mpfr_exp)
  QDIRAC_REAL_UNARY(log, mpfr_log)
  QDIRAC_REAL_UNARY(log10, mpfr_log10)
  QDIRAC_REAL_UNARY(sin, mpfr_sin)
  QDIRAC_REAL_UNARY(cos, mpfr_cos)
#undef QDIRAC_REAL_UNARY

  friend Real hypot(const Real& x, const Real& y) {
    Real r(0L, std::max(x.bits(), y.bits()));
    mpfr_hypot(r.v_, x.v_, y.v_, MPFR_RNDN);
    return r;
  }
  friend Real pow(const Real& x, unsigned long n) {
    Real r(0L, x.bits());
    mpfr_pow_ui(r.v_, x.v_, n, MPFR_RNDN);
    return r;
  }
  friend Real ceil(const Real& x) {
    Real r(0L, x.bits());
    mpfr_ceil(r.v_, x.v_);
    return r;
  }

  static Real pi(mpfr_prec_t bits) {
    Real r(0L, bits);
    mpfr_const_pi(r.v_, MPFR_RNDN);
    return r;
  }
  static Real euler_e(mpfr_prec_t bits) { return exp(Real(1L, bits)); }

 private:
  void init(mpfr_prec_t bits) { mpfr_init2(v_, std::max<mpfr_prec_t>(bits, MPFR_PREC_MIN)); }
  void widen(const Real& o) {
    if (o.bits() > bits()) mpfr_prec_round(v_, o.bits(), MPFR_RNDN);
  }

  mpfr_t v_;
};

// ---------------------------------------------------------------------------
// Lifting rationals and small integers into a scalar type, using an existing
// value to pick the precision.

inline Rat lift(const Rat& r, const Rat&) { return r; }
inline Real lift(const Rat& r, const Real& like) { return Real(r, like.bits()); }
inline double lift(const Rat& r, double) { return r.get_d(); }

template <class T>
T lift(long v, const T& like) {
  return lift(Rat(v), like);
}

inline bool is_zero_value(const Rat& x) { return sgn(x) == 0; }
inline bool is_zero_value(const Real& x) { return x.is_zero(); }
inline bool is_zero_value(double x) { return x == 0.0; }

// ---------------------------------------------------------------------------

template <class T>
struct Complex {
  T re;
  T im;

  Complex() = default;
  Complex(T r, T i) : re(std::move(r)), im(std::move(i)) {}
  explicit Complex(const T& r) : re(r), im(lift(0L, r)) {}

  Complex& operator+=(const Complex& o) { re += o.re; im += o.im; return *this; }
  Complex& operator-=(const Complex& o) { re -= o.re; im -= o.im; return *this; }
  Complex& operator*=(const Complex& o) { return *this = *this * o; }
  Complex& operator/=(const Complex& o) { return *this = *this / o; }
  Complex& operator*=(const T& s) { re *= s; im *= s; return *this; }
  Complex& operator/=(const T& s) { re /= s; im /= s; return *this; }

  Complex operator-() const { return {T(-re), T(-im)}; }

  friend Complex operator+(Complex a, const Complex& b) { return a += b; }
  friend Complex operator-(Complex a, const Complex& b) { return a -= b; }
  friend Complex operator*(const Complex& a, const Complex& b) {
    return {T(a.re * b.re - a.im * b.im), T(a.re * b.im + a.im * b.re)};
  }
  friend Complex operator/(const Complex& a, const Complex& b) {
    T den = b.re * b.re + b.im * b.im;
    T re = a.re * b.re + a.im * b.im;
    T im = a.im * b.re - a.re * b.im;
    re /= den;
    im /= den;
    return {std::move(re), std::move(im)};
  }
  friend Complex operator*(Complex a, const T& s) { return a *= s; }
  friend Complex operator*(const T& s, Complex a) { return a *= s; }
  friend Complex operator/(Complex a, const T& s) { return a /= s; }

  friend bool operator==(const Complex& a, const Complex& b) { return a.re == b.re && a.im == b.im; }
  friend bool operator!=(const Complex& a, const Complex& b) { return !(a == b); }

  bool is_zero() const { return is_zero_value(re) && is_zero_value(im); }
  bool is_real() const { return is_zero_value(im); }
};

using CRat = Complex<Rat>;
using CReal = Complex<Real>;
using CDouble = Complex<double>;

template <class T>
Complex<T> conj(const Complex<T>& z) {
  return {z.re, T(-z.im)};
}

/// |z|^2, exact for rationals.
template <class T>
T norm(const Complex<T>& z) {
  return T(z.re * z.re + z.im * z.im);
}

inline Real abs(const CReal& z) { return hypot(z.re, z.im); }
inline double abs(const CDouble& z) { return std::hypot(z.re, z.im); }

inline CReal exp(const CReal& z) {
  Real mag = exp(z.re);
  Real s(0L, z.im.bits()), c(0L, z.im.bits());
  mpfr_sin_cos(s.get(), c.get(), z.im.get(), MPFR_RNDN);
  return {mag * c, mag * s};
}
inline CDouble exp(const CDouble& z) {
  double mag = std::exp(z.re);
  return {mag * std::cos(z.im), mag * std::sin(z.im)};
}

template <class T>
Complex<T> ipow(Complex<T> base, unsigned n) {
  Complex<T> result(lift(1L, base.re), lift(0L, base.re));
  while (n) {
    if (n & 1U) result = result * base;
    n >>= 1U;
    if (n) base = base * base;
  }
  return result;
}

inline Rat ipow(Rat base, unsigned n) {
  Rat result(1);
  while (n) {
    if (n & 1U) result *= base;
    n >>= 1U;
    if (n) base *= base;
  }
  return result;
}

inline CReal to_creal(const CRat& z, mpfr_prec_t bits) { return {Real(z.re, bits), Real(z.im, bits)}; }
inline CDouble to_cdouble(const CReal& z) { return {z.re.to_double(), z.im.to_double()}; }
inline CDouble to_cdouble(const CRat& z) { return {z.re.get_d(), z.im.get_d()}; }
inline CReal round_to(const CReal& z, mpfr_prec_t bits) { return {Real(z.re, bits), Real(z.im, bits)}; }

/// Power of ten as an exact rational; negative exponents allowed.
inline Rat pow10(long e) {
  Int p;
  mpz_ui_pow_ui(p.get_mpz_t(), 10, static_cast<unsigned long>(e < 0 ? -e : e));
  return e < 0 ? Rat(Int(1), p) : Rat(p);
}

/// Smallest k >= 0 with 10^k >= v, for v >= 1 (exact).
inline unsigned ceil_log10(const Rat& v) {
  if (v <= 1) return 0;
  // Start from a bit-length estimate and walk to the exact answer.
  Int q = v.get_num() / v.get_den();
  long k = std::max<long>(0, static_cast<long>(mpz_sizeinbase(q.get_mpz_t(), 10)) - 2);
  while (pow10(k) < v) ++k;
  while (k > 0 && pow10(k - 1) >= v) --k;
  return static_cast<unsigned>(k);
}

// ---------------------------------------------------------------------------
// Summation

struct ExactSum {
  CRat value;
};

struct CompensatedSum {
  CReal value;
  Real error_bound;  // upper bound on accumulated rounding error, not tight
};

inline ExactSum sum_compensated(std::span<const CRat> terms) {
  if (terms.empty()) throw ParameterError("sum_compensated: empty term list");
  CRat s = terms.front();
  for (auto it = terms.begin() + 1; it != terms.end(); ++it) s += *it;
  s.re.canonicalize();
  s.im.canonicalize();
  return {s};
}

namespace detail {

inline void require_finite(const Real& x, const char* what) {
  if (!x.is_finite()) throw RangeError(std::string(what) + ": value outside exponent range");
}

// Neumaier's variant of Kahan summation on one component.
struct NeumaierAccumulator {
  Real sum;
  Real comp;
  Real max_partial;

  explicit NeumaierAccumulator(mpfr_prec_t bits)
      : sum(0L, bits), comp(0L, bits), max_partial(0L, bits) {}

  void add(const Real& term) {
    Real t(term, sum.bits());
    require_finite(t, "sum_compensated term");
    Real u = sum + t;
    require_finite(u, "sum_compensated partial sum");
    if (abs(sum) >= abs(t))
      comp += (sum - u) + t;
    else
      comp += (t - u) + sum;
    sum = std::move(u);
    Real mag = abs(sum);
    if (mag > max_partial) max_partial = std::move(mag);
  }
  Real result() const { return sum + comp; }
};

}  // namespace detail

/// Compensated complex sum. In Float mode the working precision is
/// ctx.digits; in Exact mode the terms' own precision is kept. The bound is
/// (number of terms) x ulp(largest partial magnitude).
inline CompensatedSum sum_compensated(std::span<const CReal> terms, const PrecisionCtx& ctx) {
  if (terms.empty()) throw ParameterError("sum_compensated: empty term list");
  mpfr_prec_t bits = 0;
  if (ctx.is_exact()) {
    for (const auto& t : terms) bits = std::max({bits, t.re.bits(), t.im.bits()});
  } else {
    bits = bits_for_digits(ctx.digits);
  }
  detail::NeumaierAccumulator re(bits), im(bits);
  for (const auto& t : terms) {
    re.add(t.re);
    im.add(t.im);
  }
  Real largest = std::max(re.max_partial, im.max_partial);
  Real bound = Real(static_cast<long>(terms.size()), bits) * largest.ulp();
  CReal value{re.result(), im.result()};
  detail::require_finite(value.re, "sum_compensated result");
  detail::require_finite(value.im, "sum_compensated result");
  return {std::move(value), std::move(bound)};
}

}  // namespace qdirac

#endif  // QDIRAC_PRECISION_HPP
