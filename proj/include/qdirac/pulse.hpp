#ifndef QDIRAC_PULSE_HPP
#define QDIRAC_PULSE_HPP

// Coordinate-space envelopes in the comoving frame X = x - p0 t.
//
// The transmitted envelope is the distribution-weighted superposition of
// delayed copies of the free envelope,
//
//   Gt(X) = sum_m eta_m G(X + m dx),
//
// which for a quasi-Dirac distribution approximates G(X - alpha). The carrier
// exp(i p0 x - i p0^2 t / 2) and the global spin phases are never sampled.

#include "dad.hpp"
#include "postselect.hpp"
#include "quadrature.hpp"

#include <cmath>
#include <optional>
#include <vector>

namespace qdirac {

struct GaussianEnvelope {
  Rat sigma{1};

  void validate() const {
    if (sgn(sigma) <= 0) throw ParameterError("sigma must be positive");
  }
};

/// G(X) = (2 / pi sigma^2)^(1/4) exp(-X^2 / sigma^2) at the precision of X.
inline CReal envelope_eval(const GaussianEnvelope& env, const CReal& X) {
  env.validate();
  const auto bits = std::max(X.re.bits(), X.im.bits());
  const Real s2 = Real(env.sigma, bits) * Real(env.sigma, bits);
  const Real peak = sqrt(sqrt(Real(2L, bits) / (Real::pi(bits) * s2)));
  CReal arg = -(X * X) / s2;
  return exp(arg) * peak;
}

inline CDouble envelope_eval(const GaussianEnvelope& env, const CDouble& X) {
  env.validate();
  const double s = env.sigma.get_d();
  const double peak = std::pow(2.0 / (M_PI * s * s), 0.25);
  CDouble arg = -(X * X) / (s * s);
  return exp(arg) * peak;
}

/// G(X - alpha), the ideal shifted copy.
inline CReal target_envelope(const GaussianEnvelope& env, const CRat& alpha, const CReal& X) {
  const auto bits = std::max(X.re.bits(), X.im.bits());
  return envelope_eval(env, X - to_creal(alpha, bits));
}

enum class Normalization {
  Raw,                    // bare weighted sum
  PostSelected,           // divided by sqrt(N(a) N(b)) of the supplied states
  BestProbabilityScaled,  // optimal states, then multiplied by 1/sqrt(P_best)
};

struct TransmittedPulse {
  Dad dad;
  GaussianEnvelope envelope;
  Normalization normalization = Normalization::Raw;
  std::optional<SpinStates> states;  // required for PostSelected
};

/// Digits at which distribution-weighted sums are evaluated. Exact
/// distributions use their required precision unless Float mode asks for
/// more; Float mode below the requirement is an error.
inline unsigned working_digits(const Dad& dad, const PrecisionCtx& ctx) {
  const unsigned required = dad.exact ? dad.digits : required_digits(dad.spec);
  if (ctx.is_exact()) {
    if (!dad.exact && dad.digits < required)
      throw PrecisionError("distribution carries " + std::to_string(dad.digits) + " digits but " +
                               std::to_string(required) + " are required",
                           required, dad.digits);
    return dad.exact ? required : dad.digits;
  }
  if (ctx.digits < required)
    throw PrecisionError("working precision of " + std::to_string(ctx.digits) + " digits is below the " +
                             std::to_string(required) + " required for this distribution",
                         required, ctx.digits);
  if (!dad.exact && dad.digits < required)
    throw PrecisionError("distribution carries " + std::to_string(dad.digits) + " digits but " +
                             std::to_string(required) + " are required",
                         required, dad.digits);
  return ctx.digits;
}

/// Evaluates the transmitted envelope repeatedly with weights, shifts and the
/// normalisation factor prepared once.
class EnvelopeEvaluator {
 public:
  EnvelopeEvaluator(const TransmittedPulse& pulse, const PrecisionCtx& ctx)
      : envelope_(pulse.envelope), digits_(working_digits(pulse.dad, ctx)), bits_(bits_for_digits(digits_)) {
    pulse.envelope.validate();
    weights_ = pulse.dad.weights(digits_);
    for (unsigned m = 0; m < weights_.size(); ++m) shifts_.emplace_back(Rat(Rat(m) * pulse.dad.spec.delta_x), bits_);
    const Real s(pulse.envelope.sigma, bits_);
    inv_s2_ = Real(1L, bits_) / (s * s);
    peak_ = sqrt(sqrt(Real(2L, bits_) * inv_s2_ / Real::pi(bits_)));
    factor_ = normalization_factor(pulse);
    sum_ctx_ = PrecisionCtx::floating(digits_);
  }

  unsigned digits() const noexcept { return digits_; }
  mpfr_prec_t bits() const noexcept { return bits_; }
  const Real& factor() const noexcept { return factor_; }

  /// Weighted sum with its rounding bound, before the normalisation factor.
  CompensatedSum raw(const CReal& X) const {
    std::vector<CReal> terms;
    terms.reserve(weights_.size());
    for (size_t m = 0; m < weights_.size(); ++m) {
      if (weights_[m].is_zero()) continue;
      CReal y{X.re + shifts_[m], Real(X.im, bits_)};
      CReal g = exp(-(y * y) * inv_s2_) * peak_;
      terms.push_back(weights_[m] * g);
    }
    if (terms.empty()) return {CReal{Real(0L, bits_), Real(0L, bits_)}, Real(0L, bits_)};
    return sum_compensated(terms, sum_ctx_);
  }

  CReal operator()(const CReal& X) const { return raw(X).value * factor_; }
  CReal operator()(const Real& X) const { return (*this)(CReal{Real(X, bits_), Real(0L, bits_)}); }

 private:
  Real normalization_factor(const TransmittedPulse& pulse) const {
    switch (pulse.normalization) {
      case Normalization::Raw:
        return Real(1L, bits_);
      case Normalization::PostSelected: {
        if (!pulse.states) throw ParameterError("PostSelected normalisation needs spin states");
        Real n = pulse.states->norm_a() * pulse.states->norm_b();
        return Real(1L, bits_) / sqrt(Real(n, bits_));
      }
      case Normalization::BestProbabilityScaled: {
        auto opt = optimal_states(pulse.dad);
        Real n = Real(opt.states.norm_a(), bits_) * Real(opt.states.norm_b(), bits_);
        Real p(opt.p_best.value, bits_);
        return Real(1L, bits_) / (sqrt(p) * sqrt(n));
      }
    }
    return Real(1L, bits_);
  }

  GaussianEnvelope envelope_;
  unsigned digits_;
  mpfr_prec_t bits_;
  std::vector<CReal> weights_;
  std::vector<Real> shifts_;
  Real inv_s2_;
  Real peak_;
  Real factor_;
  PrecisionCtx sum_ctx_;
};

inline CReal transmitted_envelope(const TransmittedPulse& pulse, const CReal& X, const PrecisionCtx& ctx) {
  return EnvelopeEvaluator(pulse, ctx)(X);
}

/// Relative L2 distance between the best-probability-scaled envelope and
/// G(X - alpha) over Re(alpha) +- 5 sigma (||G|| = 1).
inline double distortion(const TransmittedPulse& pulse, const PrecisionCtx& ctx) {
  TransmittedPulse scaled = pulse;
  scaled.normalization = Normalization::BestProbabilityScaled;
  const EnvelopeEvaluator eval(scaled, ctx);
  const auto bits = eval.bits();
  const CRat& alpha = pulse.dad.spec.alpha;
  const CReal alpha_r = to_creal(alpha, bits);
  auto integrand = [&](double x) {
    CReal X{Real(x, bits), Real(0L, bits)};
    CReal diff = eval(X) - envelope_eval(pulse.envelope, X - alpha_r);
    return norm(diff).to_double();
  };
  const double centre = alpha.re.get_d();
  const double half = 5.0 * pulse.envelope.sigma.get_d();
  auto r = quadrature::integrate(integrand, centre - half, centre + half, 1e-10);
  return std::sqrt(std::max(r.value, 0.0));
}

struct EnvelopeSample {
  Rat X;
  CReal value;      // transmitted envelope (with the pulse's normalisation)
  Real reference;   // G(X - Re alpha)
  CReal target;     // G(X - alpha)
};

/// Default plotting range: the support, both pulse locations and 5 sigma
/// margins, i.e. [-K dx - 5 sigma, Re alpha + 5 sigma] for alpha >= 0.
inline std::pair<Rat, Rat> default_envelope_range(const DadSpec& spec, const GaussianEnvelope& env) {
  Rat left = std::min(Rat(-Rat(spec.K) * spec.delta_x), spec.alpha.re);
  Rat right = std::max(Rat(0), spec.alpha.re);
  return {Rat(left - 5 * env.sigma), Rat(right + 5 * env.sigma)};
}

inline constexpr unsigned kDefaultGridPoints = 2001;

inline std::vector<EnvelopeSample> envelope_grid(const TransmittedPulse& pulse, const PrecisionCtx& ctx,
                                                 const Rat& lo, const Rat& hi, unsigned points) {
  if (points < 2) throw ParameterError("grid needs at least two points");
  if (hi <= lo) throw ParameterError("grid range is empty");
  const EnvelopeEvaluator eval(pulse, ctx);
  const auto bits = eval.bits();
  const CReal alpha = to_creal(pulse.dad.spec.alpha, bits);
  std::vector<EnvelopeSample> out;
  out.reserve(points);
  for (unsigned k = 0; k < points; ++k) {
    Rat frac(k, points - 1);
    frac.canonicalize();
    Rat X = lo + (hi - lo) * frac;
    CReal Xc{Real(X, bits), Real(0L, bits)};
    CReal ref = envelope_eval(pulse.envelope, CReal{Real(Xc.re - alpha.re), Real(0L, bits)});
    out.push_back({X, eval(Xc), ref.re, envelope_eval(pulse.envelope, Xc - alpha)});
  }
  return out;
}

}  // namespace qdirac

#endif  // QDIRAC_PULSE_HPP
