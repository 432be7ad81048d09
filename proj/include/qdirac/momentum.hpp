#ifndef QDIRAC_MOMENTUM_HPP
#define QDIRAC_MOMENTUM_HPP

// Momentum-space view of a distribution.
//
// Fourier convention: G(x) = int A(p) exp(i p x) dp, so the forward transform
// A(p) = (1/2pi) int G(x) exp(-i p x) dx carries the 1/2pi. The transmission
// amplitude is T(p) = int eta(x) exp(-i p x) dx = sum_m eta_m exp(i m p dx),
// and Gt(X) = int T(p) A(p) exp(i p X) dp.
//
// Since the first K moments of eta equal alpha^n, d^n T/dp^n (0) = (-i)^n alpha^n
// for n <= K and T(p) tracks exp(-i alpha p) while (|p||alpha|)^K / K! stays
// small; Stirling turns that into the band |p| < K / (e |alpha|).

#include "dad.hpp"
#include "pulse.hpp"
#include "quadrature.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <vector>

namespace qdirac {

class TransmissionEvaluator {
 public:
  TransmissionEvaluator(const Dad& dad, const PrecisionCtx& ctx)
      : digits_(working_digits(dad, ctx)), bits_(bits_for_digits(digits_)), dx_(dad.spec.delta_x, bits_) {
    weights_ = dad.weights(digits_);
    sum_ctx_ = PrecisionCtx::floating(digits_);
  }

  unsigned digits() const noexcept { return digits_; }
  mpfr_prec_t bits() const noexcept { return bits_; }

  CompensatedSum with_bound(const Real& p) const {
    const CReal step = exp(CReal{Real(0L, bits_), Real(Real(p, bits_) * dx_)});
    CReal phase{Real(1L, bits_), Real(0L, bits_)};
    std::vector<CReal> terms;
    terms.reserve(weights_.size());
    for (size_t m = 0; m < weights_.size(); ++m) {
      terms.push_back(weights_[m] * phase);
      phase = phase * step;
    }
    return sum_compensated(terms, sum_ctx_);
  }

  CReal operator()(const Real& p) const { return with_bound(p).value; }
  CReal operator()(double p) const { return (*this)(Real(p, bits_)); }

 private:
  unsigned digits_;
  mpfr_prec_t bits_;
  Real dx_;
  std::vector<CReal> weights_;
  PrecisionCtx sum_ctx_;
};

/// T(p) = sum_m eta_m exp(i m p dx).
inline CReal transmission(const Dad& dad, const Real& p, const PrecisionCtx& ctx) {
  return TransmissionEvaluator(dad, ctx)(p);
}

/// exp(-i alpha p) = exp(-i alpha_1 p + alpha_2 p), the ideal amplitude.
inline CReal ideal_transmission(const CRat& alpha, const Real& p) {
  const auto bits = p.bits();
  const CReal a = to_creal(alpha, bits);
  return exp(CReal{Real(a.im * p), Real(-(a.re * p))});
}

struct DerivativeRow {
  unsigned n;
  Value derivative;  // d^n T / dp^n at p = 0
  Value expected;    // (-i)^n alpha^n
  bool matches = false;
};

namespace detail {

inline CRat i_power(unsigned n) {
  switch (n % 4) {
    case 0: return {Rat(1), Rat(0)};
    case 1: return {Rat(0), Rat(1)};
    case 2: return {Rat(-1), Rat(0)};
    default: return {Rat(0), Rat(-1)};
  }
}

}  // namespace detail

/// Compares sum_m eta_m (i m dx)^n with (-i)^n alpha^n for n = 0..n_max.
inline std::vector<DerivativeRow> taylor_derivative_check(const Dad& dad, unsigned n_max, const PrecisionCtx& ctx) {
  std::vector<DerivativeRow> rows;
  const auto bits = bits_for_digits(dad.digits);
  CRat apow(Rat(1), Rat(0));
  for (unsigned n = 0; n <= n_max; ++n) {
    const CRat in = detail::i_power(n);
    CRat expected = detail::i_power(3 * n) * apow;  // (-i)^n = i^(3n)
    detail::canonicalize(expected);
    DerivativeRow row{n, {}, {expected, to_creal(expected, bits), Real(0L, bits)}, false};
    if (dad.exact) {
      CRat s(Rat(0), Rat(0));
      for (unsigned m = 0; m < dad.eta_exact.size(); ++m) {
        Rat node_pow = ipow(Rat(Rat(m) * dad.spec.delta_x), n);
        s.re += dad.eta_exact[m].re * node_pow;
        s.im += dad.eta_exact[m].im * node_pow;
      }
      s = s * in;
      detail::canonicalize(s);
      row.derivative = {s, to_creal(s, bits), Real(0L, bits)};
      row.matches = s == expected;
    } else {
      std::vector<CReal> terms;
      for (unsigned m = 0; m < dad.eta.size(); ++m)
        terms.push_back(dad.eta[m] * Real(ipow(Rat(Rat(m) * dad.spec.delta_x), n), bits));
      PrecisionCtx work = ctx.is_exact() ? PrecisionCtx::floating(dad.digits) : ctx;
      auto sum = sum_compensated(terms, work);
      CReal d = sum.value * to_creal(in, bits);
      Real gap = abs(d - row.expected.approx);
      Real slack = Real(2L, bits) * sum.error_bound + abs(row.expected.approx) * Real(pow10(5 - static_cast<long>(dad.digits)), bits);
      row.matches = gap <= slack;
      row.derivative = {std::nullopt, std::move(d), std::move(sum.error_bound)};
    }
    rows.push_back(std::move(row));
    apow = apow * dad.spec.alpha;
    detail::canonicalize(apow);
  }
  return rows;
}

enum class WindowKind { Analytic, Empirical };

struct Window {
  double p_lo = 0.0;
  double p_hi = 0.0;
  double tol = 0.0;  // relative tolerance (Empirical only)
  WindowKind kind = WindowKind::Analytic;
  bool unbounded = false;  // no finite edge (alpha = 0) or search limit reached
};

inline double alpha_modulus(const DadSpec& spec) {
  return hypot(Real(spec.alpha.re, 128), Real(spec.alpha.im, 128)).to_double();
}

/// |p| < K / (e |alpha|).
inline Window analytic_window(const DadSpec& spec) {
  spec.validate();
  Window w;
  w.kind = WindowKind::Analytic;
  if (spec.alpha.is_zero()) {
    w.unbounded = true;
    w.p_lo = -std::numeric_limits<double>::infinity();
    w.p_hi = std::numeric_limits<double>::infinity();
    return w;
  }
  const double edge = spec.K / (M_E * alpha_modulus(spec));
  w.p_lo = -edge;
  w.p_hi = edge;
  return w;
}

inline constexpr unsigned kWindowSamples = 512;
inline constexpr double kWindowRefinement = 1e-4;

/// Bisects, separately towards p > 0 and p < 0, for the largest half-width on
/// which |T(p) - exp(-i alpha p)| <= tol |exp(-i alpha p)| holds at 512
/// evenly spaced samples. The search is capped at 10 max(K,1) / (e|alpha| + dx).
inline Window empirical_window(const Dad& dad, double tol, const PrecisionCtx& ctx) {
  if (!(tol > 0.0 && tol < 1.0)) throw ParameterError("window tolerance must lie in (0, 1)");
  const TransmissionEvaluator T(dad, ctx);
  const auto bits = T.bits();
  const Real rtol(tol, bits);

  auto within = [&](double p) {
    Real pr(p, bits);
    CReal ideal = ideal_transmission(dad.spec.alpha, pr);
    return abs(T(pr) - ideal) <= rtol * abs(ideal);
  };
  auto holds_up_to = [&](double width, int dir) {
    for (unsigned k = 1; k <= kWindowSamples; ++k)
      if (!within(dir * width * k / kWindowSamples)) return false;
    return true;
  };

  const double cap = 10.0 * std::max(dad.spec.K, 1u) / (M_E * alpha_modulus(dad.spec) + dad.spec.delta_x.get_d());
  Window w;
  w.kind = WindowKind::Empirical;
  w.tol = tol;
  double edge[2] = {cap, cap};
  bool capped[2] = {true, true};
  for (int side = 0; side < 2; ++side) {
    const int dir = side == 0 ? 1 : -1;
    if (holds_up_to(cap, dir)) continue;
    capped[side] = false;
    double lo = 0.0, hi = cap;
    while (hi - lo > kWindowRefinement * hi) {
      double mid = 0.5 * (lo + hi);
      (holds_up_to(mid, dir) ? lo : hi) = mid;
    }
    edge[side] = lo;
  }
  w.p_hi = edge[0];
  w.p_lo = -edge[1];
  w.unbounded = capped[0] && capped[1];
  return w;
}

/// A(p) = (1/2pi) (2/(pi sigma^2))^(1/4) sigma sqrt(pi) exp(-p^2 sigma^2 / 4).
inline double spectral_amplitude(const GaussianEnvelope& env, double p) {
  env.validate();
  const double s = env.sigma.get_d();
  return std::pow(2.0 / (M_PI * s * s), 0.25) * s * std::sqrt(M_PI) * std::exp(-p * p * s * s / 4.0) / (2.0 * M_PI);
}

inline Real spectral_amplitude(const GaussianEnvelope& env, const Real& p) {
  env.validate();
  const auto bits = p.bits();
  const Real s(env.sigma, bits);
  const Real pi = Real::pi(bits);
  const Real peak = sqrt(sqrt(Real(2L, bits) / (pi * s * s)));
  return peak * s * sqrt(pi) * exp(-(p * p * s * s) / Real(4L, bits)) / (Real(2L, bits) * pi);
}

struct BandwidthFit {
  bool fits = false;
  double margin = 0.0;  // (K / (e|alpha|)) / (2 / sigma)
  bool infinite_margin = false;
};

/// Whether the packet's momentum width 2/sigma fits inside the band.
inline BandwidthFit bandwidth_fit_check(const DadSpec& spec, const GaussianEnvelope& env) {
  env.validate();
  BandwidthFit fit;
  if (spec.alpha.is_zero()) {
    fit.fits = true;
    fit.infinite_margin = true;
    fit.margin = std::numeric_limits<double>::infinity();
    return fit;
  }
  const double band = spec.K / (M_E * alpha_modulus(spec));
  const double width = 2.0 / env.sigma.get_d();
  fit.margin = band / width;
  fit.fits = width < band;
  return fit;
}

struct SpectralIntegral {
  CDouble value;
  double cutoff = 0.0;  // |p| limit reached
  double error = 0.0;
};

/// Gt(X) from the plane-wave expansion int T(p) A(p) exp(i p X) dp. The range
/// starts at |p| <= 8/sigma and is widened by 25% slabs until a slab's L1
/// mass drops below 1e-15 of the running result.
inline SpectralIntegral envelope_from_spectrum(const Dad& dad, const GaussianEnvelope& env, double X,
                                               const PrecisionCtx& ctx) {
  const TransmissionEvaluator T(dad, ctx);
  auto integrand = [&](double p) {
    CDouble t = to_cdouble(T(p));
    double a = spectral_amplitude(env, p);
    return std::complex<double>(t.re, t.im) * a * std::polar(1.0, p * X);
  };
  constexpr double kTol = 1e-11;
  constexpr double kNegligible = 1e-15;
  double L = 8.0 / env.sigma.get_d();
  auto core = quadrature::integrate(integrand, -L, L, kTol);
  std::complex<double> total = core.value;
  double error = core.error;
  auto slab = [&](double a, double b) {
    auto probe = quadrature::integrate(integrand, a, b, kTol, 0);
    if (probe.l1 <= kNegligible * std::abs(total)) return std::optional<decltype(probe)>{};
    double rel = std::max(kTol, 1e-13 * std::abs(total) / probe.l1);
    return std::optional{quadrature::integrate(integrand, a, b, rel)};
  };
  for (int iter = 0; iter < 200; ++iter) {
    const double next = 1.25 * L;
    auto right = slab(L, next);
    auto left = slab(-next, -L);
    if (right) { total += right->value; error += right->error; }
    if (left) { total += left->value; error += left->error; }
    L = next;
    if (!right && !left) break;
  }
  return {{total.real(), total.imag()}, L, error};
}

}  // namespace qdirac

#endif  // QDIRAC_MOMENTUM_HPP
