#ifndef QDIRAC_DAD_HPP
#define QDIRAC_DAD_HPP

// Quasi-Dirac delay-amplitude distributions of order K.
//
// The distribution is a comb of K+1 weights eta_m on the nodes x_m = -m dx,
// m = 0..K, chosen so that its normalisation and first K moments coincide
// with those of delta(x - alpha). The weights depend on the problem only
// through beta = alpha / dx and are the Lagrange extrapolation weights of the
// nodes evaluated at alpha:
//
//   eta_m = (-1)^m prod_{j != m} (j + beta) / (m! (K - m)!)
//
// Everything is available exactly (rational or Gaussian-rational beta) and at
// a configurable floating precision.

#include "precision.hpp"

#include <cmath>
#include <numeric>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace qdirac {

inline constexpr unsigned kVandermondeMaxOrder = 64;

struct DadSpec {
  unsigned K = 0;
  Rat delta_x{1};
  CRat alpha{Rat(0), Rat(0)};

  static DadSpec from_beta(unsigned K, const Rat& delta_x, const CRat& beta) {
    DadSpec s{K, delta_x, {Rat(beta.re * delta_x), Rat(beta.im * delta_x)}};
    s.validate();
    return s;
  }

  void validate() const {
    if (sgn(delta_x) <= 0) throw ParameterError("delta_x must be positive");
  }

  /// alpha / delta_x, the only combination the weights depend on.
  CRat beta() const { return {Rat(alpha.re / delta_x), Rat(alpha.im / delta_x)}; }

  /// Support [-K dx, 0] of the distribution.
  std::pair<Rat, Rat> support() const { return {Rat(-Rat(K) * delta_x), Rat(0)}; }
};

/// A possibly exact scalar with its working-precision image.
struct Value {
  std::optional<CRat> exact;
  CReal approx;
  Real error_bound;  // zero when exact
};

struct AbsSum {
  std::optional<Rat> exact;  // present when every weight is a real rational
  Real value;
  Real error_bound;
};

struct Dad {
  DadSpec spec;
  bool exact = false;
  std::vector<CRat> eta_exact;  // K+1 weights, filled iff exact
  std::vector<CReal> eta;       // always filled, at `digits` precision
  unsigned digits = 0;
  AbsSum abs_sum;
  bool condition_hazard = false;  // set by the Vandermonde path in Float mode

  size_t size() const noexcept { return eta.size(); }

  /// Weights at the requested precision. Exact distributions are re-rounded
  /// from the rationals; floating ones cannot gain digits.
  std::vector<CReal> weights(unsigned want_digits) const {
    if (!exact) return eta;
    std::vector<CReal> out;
    out.reserve(eta_exact.size());
    for (const auto& w : eta_exact) out.push_back(to_creal(w, bits_for_digits(want_digits)));
    return out;
  }
};

namespace detail {

inline Int factorial(unsigned n) {
  Int f;
  mpz_fac_ui(f.get_mpz_t(), n);
  return f;
}

inline Rat lift_int(const Int& v, const Rat&) { return Rat(v); }
inline Real lift_int(const Int& v, const Real& like) { return Real(v, like.bits()); }

inline void canonicalize(CRat& z) {
  z.re.canonicalize();
  z.im.canonicalize();
}

// Weights by prefix/suffix products of (j + beta); no divisions by the
// factors, so integer beta in [-K, 0] needs no special case.
template <class T>
std::vector<Complex<T>> closed_form_weights(unsigned K, const Complex<T>& beta) {
  const T& like = beta.re;
  const Complex<T> one(qdirac::lift(1L, like), qdirac::lift(0L, like));
  std::vector<Complex<T>> factor, prefix(K + 1, one), suffix(K + 1, one);
  factor.reserve(K + 1);
  for (unsigned j = 0; j <= K; ++j)
    factor.push_back(Complex<T>(T(qdirac::lift(static_cast<long>(j), like) + beta.re), beta.im));
  for (unsigned m = 1; m <= K; ++m) prefix[m] = prefix[m - 1] * factor[m - 1];
  for (unsigned m = K; m-- > 0;) suffix[m] = suffix[m + 1] * factor[m + 1];

  std::vector<Complex<T>> eta;
  eta.reserve(K + 1);
  for (unsigned m = 0; m <= K; ++m) {
    T denom = lift_int(Int(factorial(m) * factorial(K - m)), like);
    Complex<T> w = prefix[m] * suffix[m] / denom;
    if (m % 2 == 1) w = -w;
    eta.push_back(std::move(w));
  }
  return eta;
}

inline std::vector<CRat> exact_weights(const DadSpec& spec) {
  auto eta = closed_form_weights<Rat>(spec.K, spec.beta());
  for (auto& w : eta) canonicalize(w);
  return eta;
}

inline bool all_real(std::span<const CRat> eta) {
  return std::all_of(eta.begin(), eta.end(), [](const CRat& w) { return w.is_real(); });
}

inline Rat exact_abs_sum(std::span<const CRat> eta) {
  Rat s(0);
  for (const auto& w : eta) s += abs(w.re);
  return s;
}

inline AbsSum float_abs_sum(std::span<const CReal> eta, unsigned digits) {
  std::vector<CReal> mags;
  mags.reserve(eta.size());
  for (const auto& w : eta) {
    Real m = abs(w);
    mags.push_back({m, Real(0L, m.bits())});
  }
  auto sum = sum_compensated(mags, PrecisionCtx::floating(std::max(digits, kMinDigits)));
  // hypot is correctly rounded: one more ulp per term
  Real bound = sum.error_bound + Real(static_cast<long>(eta.size()), sum.value.re.bits()) * sum.value.re.ulp();
  return {std::nullopt, sum.value.re, bound};
}

inline AbsSum make_abs_sum(std::span<const CRat> eta, unsigned digits) {
  if (all_real(eta)) {
    Rat s = exact_abs_sum(eta);
    auto bits = bits_for_digits(digits);
    return {s, Real(s, bits), Real(0L, bits)};
  }
  std::vector<CReal> approx;
  for (const auto& w : eta) approx.push_back(to_creal(w, bits_for_digits(digits) + 64));
  return float_abs_sum(approx, digits);
}

// Fraction-free (Bareiss) elimination of an integer matrix with a Gaussian
// integer right-hand side, followed by rational back substitution.
inline std::vector<CRat> bareiss_solve(std::vector<std::vector<Int>> M, std::vector<Int> re,
                                       std::vector<Int> im) {
  const size_t n = M.size();
  Int prev(1);
  for (size_t k = 0; k + 1 < n; ++k) {
    if (sgn(M[k][k]) == 0) {
      size_t r = k + 1;
      while (r < n && sgn(M[r][k]) == 0) ++r;
      if (r == n) throw ParameterError("singular Vandermonde system");
      std::swap(M[k], M[r]);
      std::swap(re[k], re[r]);
      std::swap(im[k], im[r]);
    }
    for (size_t i = k + 1; i < n; ++i) {
      for (size_t j = k + 1; j < n; ++j) {
        M[i][j] = M[i][j] * M[k][k] - M[i][k] * M[k][j];
        mpz_divexact(M[i][j].get_mpz_t(), M[i][j].get_mpz_t(), prev.get_mpz_t());
      }
      re[i] = re[i] * M[k][k] - M[i][k] * re[k];
      mpz_divexact(re[i].get_mpz_t(), re[i].get_mpz_t(), prev.get_mpz_t());
      im[i] = im[i] * M[k][k] - M[i][k] * im[k];
      mpz_divexact(im[i].get_mpz_t(), im[i].get_mpz_t(), prev.get_mpz_t());
      M[i][k] = 0;
    }
    prev = M[k][k];
  }
  if (sgn(M[n - 1][n - 1]) == 0) throw ParameterError("singular Vandermonde system");

  std::vector<CRat> x(n);
  for (size_t i = n; i-- > 0;) {
    Rat sr(re[i]), si(im[i]);
    for (size_t j = i + 1; j < n; ++j) {
      sr -= Rat(M[i][j]) * x[j].re;
      si -= Rat(M[i][j]) * x[j].im;
    }
    Rat piv(M[i][i]);
    x[i] = {Rat(sr / piv), Rat(si / piv)};
    canonicalize(x[i]);
  }
  return x;
}

inline Int lcm_den(const Int& acc, const Rat& v) {
  Int out;
  mpz_lcm(out.get_mpz_t(), acc.get_mpz_t(), v.get_den_mpz_t());
  return out;
}

}  // namespace detail

/// ceil(log10 sum|eta_m|) + guard digits.
inline unsigned required_digits(const DadSpec& spec) {
  spec.validate();
  auto eta = detail::exact_weights(spec);
  if (detail::all_real(eta)) return ceil_log10(detail::exact_abs_sum(eta)) + kGuardDigits;
  Real s(0L, 256);
  for (const auto& w : eta) s += hypot(Real(w.re, 256), Real(w.im, 256));
  Real lg = ceil(log10(s));
  return static_cast<unsigned>(std::max(0L, mpfr_get_si(lg.get(), MPFR_RNDN))) + kGuardDigits;
}

/// The coefficient matrix (-m dx)^n and right-hand side alpha^n of the
/// moment equations, n, m = 0..K.
struct VandermondeSystem {
  std::vector<std::vector<Rat>> matrix;
  std::vector<CRat> rhs;

  static VandermondeSystem build(const DadSpec& spec) {
    VandermondeSystem sys;
    const unsigned N = spec.K + 1;
    sys.matrix.assign(N, std::vector<Rat>(N));
    sys.rhs.resize(N);
    for (unsigned m = 0; m < N; ++m) {
      Rat node = -Rat(m) * spec.delta_x;
      Rat p(1);
      for (unsigned n = 0; n < N; ++n) {
        sys.matrix[n][m] = p;
        p *= node;
      }
    }
    CRat a(Rat(1), Rat(0));
    for (unsigned n = 0; n < N; ++n) {
      sys.rhs[n] = a;
      a = a * spec.alpha;
      detail::canonicalize(a);
    }
    return sys;
  }
};

inline Dad make_exact_dad(const DadSpec& spec, std::vector<CRat> eta) {
  Dad d;
  d.spec = spec;
  d.exact = true;
  d.eta_exact = std::move(eta);
  unsigned digits = required_digits(spec);
  d.digits = digits;
  for (const auto& w : d.eta_exact) d.eta.push_back(to_creal(w, bits_for_digits(digits)));
  d.abs_sum = detail::make_abs_sum(d.eta_exact, digits);
  return d;
}

inline Dad make_float_dad(const DadSpec& spec, std::vector<CReal> eta, unsigned digits) {
  Dad d;
  d.spec = spec;
  d.exact = false;
  d.digits = digits;
  for (auto& w : eta) d.eta.push_back(round_to(w, bits_for_digits(digits)));
  d.abs_sum = detail::float_abs_sum(d.eta, digits);
  return d;
}

/// Closed-form weights. Exact in Exact mode; in Float mode evaluated with 64
/// guard bits and rounded to ctx.digits.
inline Dad eta_closed_form(const DadSpec& spec, const PrecisionCtx& ctx) {
  spec.validate();
  if (ctx.is_exact()) return make_exact_dad(spec, detail::exact_weights(spec));
  const auto bits = bits_for_digits(ctx.digits) + 64;
  auto eta = detail::closed_form_weights<Real>(spec.K, to_creal(spec.beta(), bits));
  return make_float_dad(spec, std::move(eta), ctx.digits);
}

/// Weights by direct solution of the moment equations; an independent check
/// on eta_closed_form. Exact mode uses fraction-free elimination; Float mode
/// uses partially pivoted elimination at an elevated internal precision and
/// flags a condition hazard when the pivots span more than digits/2 decades.
inline Dad eta_vandermonde(const DadSpec& spec, const PrecisionCtx& ctx) {
  spec.validate();
  if (spec.K > kVandermondeMaxOrder)
    throw ParameterError("Vandermonde path limited to K <= " + std::to_string(kVandermondeMaxOrder));
  const auto sys = VandermondeSystem::build(spec);
  const size_t N = sys.rhs.size();

  if (ctx.is_exact()) {
    std::vector<std::vector<Int>> M(N, std::vector<Int>(N));
    std::vector<Int> re(N), im(N);
    for (size_t n = 0; n < N; ++n) {
      Int scale(1);
      for (const auto& a : sys.matrix[n]) scale = detail::lcm_den(scale, a);
      scale = detail::lcm_den(scale, sys.rhs[n].re);
      scale = detail::lcm_den(scale, sys.rhs[n].im);
      for (size_t m = 0; m < N; ++m) M[n][m] = Int(Rat(sys.matrix[n][m] * scale));
      re[n] = Int(Rat(sys.rhs[n].re * scale));
      im[n] = Int(Rat(sys.rhs[n].im * scale));
    }
    return make_exact_dad(spec, detail::bareiss_solve(std::move(M), std::move(re), std::move(im)));
  }

  const double cond_bits = 2.0 * spec.K * std::log2(spec.K + 2.0);
  const auto bits = bits_for_digits(ctx.digits) + 64 + static_cast<mpfr_prec_t>(cond_bits);
  std::vector<std::vector<Real>> A(N, std::vector<Real>(N));
  std::vector<CReal> b(N);
  for (size_t n = 0; n < N; ++n) {
    for (size_t m = 0; m < N; ++m) A[n][m] = Real(sys.matrix[n][m], bits);
    b[n] = to_creal(sys.rhs[n], bits);
  }
  Real min_piv, max_piv;
  for (size_t k = 0; k < N; ++k) {
    size_t p = k;
    for (size_t r = k + 1; r < N; ++r)
      if (abs(A[r][k]) > abs(A[p][k])) p = r;
    if (A[p][k].is_zero()) throw ParameterError("singular Vandermonde system");
    std::swap(A[k], A[p]);
    std::swap(b[k], b[p]);
    Real mag = abs(A[k][k]);
    if (k == 0 || mag < min_piv) min_piv = mag;
    if (k == 0 || mag > max_piv) max_piv = mag;
    for (size_t i = k + 1; i < N; ++i) {
      Real f = A[i][k] / A[k][k];
      for (size_t j = k; j < N; ++j) A[i][j] -= f * A[k][j];
      b[i] -= b[k] * f;
    }
  }
  std::vector<CReal> x(N);
  for (size_t i = N; i-- > 0;) {
    CReal s = b[i];
    for (size_t j = i + 1; j < N; ++j) s -= x[j] * A[i][j];
    x[i] = s / A[i][i];
  }
  Dad d = make_float_dad(spec, std::move(x), ctx.digits);
  double span_decades = log10(max_piv / min_piv).to_double();
  d.condition_hazard = span_decades > ctx.digits / 2.0;
  return d;
}

inline const AbsSum& abs_sum(const Dad& dad) { return dad.abs_sum; }

/// n-th moment sum_m eta_m (-m dx)^n.
inline Value moment(const Dad& dad, unsigned n, const PrecisionCtx& ctx) {
  const auto& spec = dad.spec;
  if (dad.exact) {
    CRat s(Rat(0), Rat(0));
    for (unsigned m = 0; m < dad.eta_exact.size(); ++m) {
      Rat node_pow = ipow(Rat(-Rat(m) * spec.delta_x), n);
      s.re += dad.eta_exact[m].re * node_pow;
      s.im += dad.eta_exact[m].im * node_pow;
    }
    detail::canonicalize(s);
    auto bits = bits_for_digits(dad.digits);
    return {s, to_creal(s, bits), Real(0L, bits)};
  }
  const auto bits = bits_for_digits(dad.digits);
  std::vector<CReal> terms;
  for (unsigned m = 0; m < dad.eta.size(); ++m) {
    Real node_pow(ipow(Rat(-Rat(m) * spec.delta_x), n), bits);
    terms.push_back(dad.eta[m] * node_pow);
  }
  PrecisionCtx work = ctx.is_exact() ? PrecisionCtx::floating(dad.digits) : ctx;
  auto sum = sum_compensated(terms, work);
  return {std::nullopt, std::move(sum.value), std::move(sum.error_bound)};
}

struct MomentRow {
  unsigned n;
  Value moment;
  Value alpha_power;
  std::optional<Value> ratio;  // absent when alpha = 0 and n > 0
};

inline std::vector<MomentRow> moment_table(const Dad& dad, unsigned n_max, const PrecisionCtx& ctx) {
  std::vector<MomentRow> rows;
  const auto bits = bits_for_digits(dad.digits);
  const bool alpha_zero = dad.spec.alpha.is_zero();
  CRat apow(Rat(1), Rat(0));
  for (unsigned n = 0; n <= n_max; ++n) {
    MomentRow row{n, moment(dad, n, ctx), {apow, to_creal(apow, bits), Real(0L, bits)}, std::nullopt};
    if (!alpha_zero || n == 0) {
      if (row.moment.exact) {
        CRat r = *row.moment.exact / apow;
        detail::canonicalize(r);
        row.ratio = Value{r, to_creal(r, bits), Real(0L, bits)};
      } else {
        CReal r = row.moment.approx / row.alpha_power.approx;
        Real bound = row.moment.error_bound / abs(row.alpha_power.approx);
        row.ratio = Value{std::nullopt, std::move(r), std::move(bound)};
      }
    }
    rows.push_back(std::move(row));
    apow = apow * dad.spec.alpha;
    detail::canonicalize(apow);
  }
  return rows;
}

/// Action of the distribution on a polynomial sum_k c_k x^k:
/// sum_m eta_m f(-m dx), exactly. Requires an exact distribution.
inline CRat apply_to_polynomial(const Dad& dad, std::span<const CRat> coeffs) {
  if (!dad.exact) throw ParameterError("apply_to_polynomial needs an exact distribution");
  CRat total(Rat(0), Rat(0));
  for (unsigned m = 0; m < dad.eta_exact.size(); ++m) {
    Rat node = -Rat(m) * dad.spec.delta_x;
    CRat f(Rat(0), Rat(0));
    for (size_t k = coeffs.size(); k-- > 0;) {  // Horner
      f = CRat(Rat(f.re * node), Rat(f.im * node)) + coeffs[k];
    }
    total += dad.eta_exact[m] * f;
  }
  detail::canonicalize(total);
  return total;
}

/// Evaluates the same polynomial at alpha.
inline CRat polynomial_at_alpha(const DadSpec& spec, std::span<const CRat> coeffs) {
  CRat f(Rat(0), Rat(0));
  for (size_t k = coeffs.size(); k-- > 0;) f = f * spec.alpha + coeffs[k];
  detail::canonicalize(f);
  return f;
}

}  // namespace qdirac

#endif  // QDIRAC_DAD_HPP
