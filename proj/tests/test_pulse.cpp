#include <gtest/gtest.h>

#include <qdirac/pulse.hpp>

#include "oracles.hpp"

using namespace qdirac;
using oracle::crat;

namespace {

constexpr mpfr_prec_t kBits = 256;

CReal cr(double re, double im = 0.0) { return {Real(re, kBits), Real(im, kBits)}; }

TransmittedPulse pulse_for(unsigned K, const CRat& beta, const Rat& sigma, Normalization n = Normalization::Raw) {
  return {eta_closed_form(DadSpec::from_beta(K, Rat(1), beta), PrecisionCtx::exact()), GaussianEnvelope{sigma}, n,
          std::nullopt};
}

}  // namespace

TEST(Envelope, PeakAndOneOverE) {
  GaussianEnvelope env{Rat(1)};
  CReal g0 = envelope_eval(env, cr(0));
  EXPECT_NEAR(g0.re.to_double(), std::pow(2.0 / M_PI, 0.25), 1e-15);
  EXPECT_TRUE(g0.im.is_zero());
  GaussianEnvelope wide{Rat(3)};
  CReal peak = envelope_eval(wide, cr(0));
  CReal at_sigma = envelope_eval(wide, cr(3));
  EXPECT_NEAR((at_sigma.re / peak.re).to_double(), std::exp(-1.0), 1e-15);
}

TEST(Envelope, UnitNorm) {
  GaussianEnvelope env{Rat(5, 2)};
  auto sq = [&](double x) { return std::norm(std::complex<double>(envelope_eval(env, CDouble{x, 0.0}).re, 0.0)); };
  auto r = quadrature::integrate(sq, -40.0, 40.0, 1e-14);
  EXPECT_NEAR(r.value, 1.0, 1e-12);
}

TEST(Envelope, RejectsNonPositiveSigma) {
  EXPECT_THROW(envelope_eval(GaussianEnvelope{Rat(0)}, cr(0)), ParameterError);
  EXPECT_THROW(envelope_eval(GaussianEnvelope{Rat(-1)}, cr(0)), ParameterError);
}

TEST(Envelope, ComplexArgumentMatchesGaussianAlgebra) {
  // G(X - i a) = G(X) exp(2 i X a / s^2 + a^2 / s^2)
  GaussianEnvelope env{Rat(2)};
  const double a = 0.7, s = 2.0;
  for (double X : {-1.5, 0.0, 0.4, 3.0}) {
    CReal lhs = target_envelope(env, {Rat(0), Rat(7, 10)}, cr(X));
    double g = envelope_eval(env, CDouble{X, 0.0}).re;
    std::complex<double> rhs = g * std::exp(std::complex<double>(a * a / (s * s), 2 * X * a / (s * s)));
    EXPECT_NEAR(lhs.re.to_double(), rhs.real(), 1e-14);
    EXPECT_NEAR(lhs.im.to_double(), rhs.imag(), 1e-14);
  }
}

TEST(Target, ZeroAndRealShifts) {
  GaussianEnvelope env{Rat(3)};
  for (double X : {-2.0, 0.5, 4.0}) {
    EXPECT_TRUE(target_envelope(env, crat(0), cr(X)).re == envelope_eval(env, cr(X)).re);
    CReal shifted = target_envelope(env, {Rat(5, 4), Rat(0)}, cr(X + 1.25));
    EXPECT_NEAR(shifted.re.to_double(), envelope_eval(env, cr(X)).re.to_double(), 1e-15);
    EXPECT_TRUE(shifted.im.is_zero());
  }
}

TEST(Transmitted, PureDelayForNegativeIntegerBeta) {
  // Exact weights evaluated at 70 digits; the reference is computed at 256 bits.
  auto p = pulse_for(6, crat(-4), Rat(3));
  for (double X : {-9.0, -4.0, 0.0, 2.5}) {
    CReal lhs = transmitted_envelope(p, cr(X), PrecisionCtx::floating(70));
    CReal rhs = target_envelope(p.envelope, p.dad.spec.alpha, cr(X));
    EXPECT_LT(abs(lhs - rhs).to_double(), 1e-60);
  }
}

TEST(Transmitted, TwoTermSumForKOne) {
  // Direct 5 G(X) - 4 G(X + 1) against the library, and against G(X - 4) at
  // the peak for a wide packet.
  GaussianEnvelope env{Rat(40)};
  auto p = pulse_for(1, crat(4), env.sigma);
  for (double X : {-3.0, 0.0, 4.0, 10.0}) {
    CReal direct = envelope_eval(env, cr(X)) * Real(5L, kBits) - envelope_eval(env, cr(X + 1)) * Real(4L, kBits);
    EXPECT_LT(abs(transmitted_envelope(p, cr(X), PrecisionCtx::exact()) - direct).to_double(), 1e-25);
  }
  const double at_peak = transmitted_envelope(p, cr(4), PrecisionCtx::exact()).re.to_double();
  const double g0 = envelope_eval(env, cr(0)).re.to_double();
  EXPECT_LT(std::abs(at_peak / g0 - 1.0), 20.0 / (40.0 * 40.0));
}

TEST(Transmitted, PrecisionInsufficientIsAnError) {
  auto p = pulse_for(30, crat(120), Rat(60));
  try {
    transmitted_envelope(p, cr(0), PrecisionCtx::floating(40));
    FAIL() << "expected PrecisionError";
  } catch (const PrecisionError& e) {
    EXPECT_EQ(e.required_digits(), 71u);
    EXPECT_EQ(e.supplied_digits(), 40u);
  }
  EXPECT_NO_THROW(transmitted_envelope(p, cr(0), PrecisionCtx::floating(71)));
}

TEST(Transmitted, FloatAndExactAgree) {
  auto p = pulse_for(30, crat(120), Rat(60));
  for (double X : {-30.0, 60.0, 120.0, 200.0}) {
    CReal e = transmitted_envelope(p, cr(X), PrecisionCtx::exact());
    CReal f = transmitted_envelope(p, cr(X), PrecisionCtx::floating(80));
    EXPECT_LT(abs(e - f).to_double(), 1e-25);
  }
}

TEST(Transmitted, LinearInWeights) {
  auto p = pulse_for(8, {Rat(17, 2), Rat(3)}, Rat(12));
  const Dad& d = p.dad;
  std::vector<CRat> lo(d.eta_exact), hi(d.eta_exact);
  for (unsigned m = 0; m <= 8; ++m) (m < 4 ? hi : lo)[m] = crat(0);
  auto part = [&](std::vector<CRat> w) {
    TransmittedPulse q = p;
    q.dad = make_exact_dad(d.spec, std::move(w));
    return q;
  };
  for (double X : {-5.0, 0.0, 9.0}) {
    CReal whole = transmitted_envelope(p, cr(X), PrecisionCtx::exact());
    CReal split = transmitted_envelope(part(lo), cr(X), PrecisionCtx::exact()) +
                  transmitted_envelope(part(hi), cr(X), PrecisionCtx::exact());
    EXPECT_LT(abs(whole - split).to_double(), 1e-30);
  }
}

TEST(Transmitted, BestProbabilityScaling) {
  auto raw = pulse_for(1, crat(4), Rat(10));
  auto scaled = raw;
  scaled.normalization = Normalization::BestProbabilityScaled;
  CReal r = transmitted_envelope(raw, cr(2), PrecisionCtx::exact());
  CReal s = transmitted_envelope(scaled, cr(2), PrecisionCtx::exact());
  // The optimal pair has N(a) N(b) = (sum |eta|)^2 = 1 / P_best, so the two
  // factors cancel and the scaled envelope is the bare sum.
  EXPECT_LT(abs(r - s).to_double(), 1e-40);
}

TEST(Transmitted, PostSelectedNeedsStates) {
  auto p = pulse_for(2, crat(1), Rat(4), Normalization::PostSelected);
  EXPECT_THROW(transmitted_envelope(p, cr(0), PrecisionCtx::exact()), ParameterError);
  p.states = optimal_states(p.dad).states;
  CReal v = transmitted_envelope(p, cr(0), PrecisionCtx::exact());
  auto raw = pulse_for(2, crat(1), Rat(4));
  CReal r = transmitted_envelope(raw, cr(0), PrecisionCtx::exact());
  EXPECT_NEAR((v.re * Real(7L, kBits) - r.re).to_double(), 0.0, 1e-30);
}

TEST(Polynomial, WitnessAtDegreeKPlusOne) {
  oracle::Gen gen(41);
  int witnesses = 0;
  for (int t = 0; t < 60; ++t) {
    unsigned K = static_cast<unsigned>(gen.integer(0, 12));
    CRat beta = gen.beta(300);
    const auto spec = DadSpec::from_beta(K, Rat(1), beta);
    const Dad d = eta_closed_form(spec, PrecisionCtx::exact());
    std::vector<CRat> mono(K + 2, crat(0));
    mono.back() = crat(1);
    const bool differs = apply_to_polynomial(d, mono) != polynomial_at_alpha(spec, mono);
    EXPECT_EQ(differs, !oracle::degenerate(K, beta)) << "K=" << K;
    witnesses += differs;
  }
  EXPECT_GT(witnesses, 50);
}

TEST(Distortion, ZeroForPureDelay) {
  auto p = pulse_for(10, crat(-7), Rat(8));
  EXPECT_LT(distortion(p, PrecisionCtx::exact()), 1e-8);
}

TEST(Distortion, GrowsWithShift) {
  // Fixed K = 10, sigma = 2 K dx; alpha / (K dx) from 1.5 to 4.
  double prev = 0.0;
  for (long b : {15L, 20L, 25L, 30L, 40L}) {
    double d = distortion(pulse_for(10, crat(b), Rat(20)), PrecisionCtx::exact());
    EXPECT_GT(d, prev) << "beta=" << b;
    prev = d;
  }
}

TEST(Distortion, LargeWhenBandwidthDoesNotFit) {
  // K = 30, alpha = 120 dx: the band is |p| < 0.092, so sigma = 10 (2/sigma = 0.2)
  // violates it while sigma = 60 (Fig. 3a) satisfies it.
  EXPECT_GT(distortion(pulse_for(30, crat(120), Rat(10)), PrecisionCtx::exact()), 0.1);
  EXPECT_LT(distortion(pulse_for(30, crat(120), Rat(60)), PrecisionCtx::exact()), 0.05);
}

TEST(Grid, DefaultRangeAndExactAbscissae) {
  auto p = pulse_for(30, crat(120), Rat(60));
  auto [lo, hi] = default_envelope_range(p.dad.spec, p.envelope);
  EXPECT_EQ(lo, Rat(-330));
  EXPECT_EQ(hi, Rat(420));
  auto grid = envelope_grid(p, PrecisionCtx::exact(), lo, hi, 7);
  ASSERT_EQ(grid.size(), 7u);
  EXPECT_EQ(grid[0].X, lo);
  EXPECT_EQ(grid[6].X, hi);
  EXPECT_EQ(grid[3].X, Rat(45));
  EXPECT_THROW(envelope_grid(p, PrecisionCtx::exact(), hi, lo, 7), ParameterError);
  EXPECT_THROW(envelope_grid(p, PrecisionCtx::exact(), lo, hi, 1), ParameterError);
}

TEST(Grid, NegativeShiftRange) {
  auto p = pulse_for(4, crat(-10), Rat(2));
  auto [lo, hi] = default_envelope_range(p.dad.spec, p.envelope);
  EXPECT_EQ(lo, Rat(-20));
  EXPECT_EQ(hi, Rat(10));
}
