#include <gtest/gtest.h>

#include <qdirac/postselect.hpp>
#include <qdirac/pulse.hpp>

#include "oracles.hpp"

using namespace qdirac;
using oracle::crat;

namespace {

Dad exact_dad(unsigned K, const CRat& beta, const Rat& dx = Rat(1)) {
  return eta_closed_form(DadSpec::from_beta(K, dx, beta), PrecisionCtx::exact());
}

Rat probability(const Dad& d, std::vector<Rat> z) {
  return *success_probability(d, SelectionWeights::from_exact(std::move(z), d.digits), PrecisionCtx::exact()).exact;
}

}  // namespace

TEST(SpinIndex, Bridge) {
  EXPECT_EQ(spin_component(0), 0);
  EXPECT_EQ(spin_component(3), -3);
  EXPECT_EQ(spin_slot(-3, 3), 0u);
  EXPECT_EQ(spin_slot(0, 3), 3u);
  EXPECT_EQ(spin_slot(3, 3), 6u);
}

TEST(SuccessProbability, Examples) {
  EXPECT_EQ(probability(exact_dad(4, crat(-2)), {Rat(0), Rat(0), Rat(1), Rat(0), Rat(0)}), Rat(1));
  EXPECT_EQ(probability(exact_dad(1, crat(4)), {Rat(1, 2), Rat(1, 2)}), Rat(1, 82));
  EXPECT_EQ(probability(exact_dad(1, crat(4)), {Rat(5, 9), Rat(4, 9)}), Rat(1, 81));
}

TEST(SuccessProbability, VanishingWeightAtLiveIndexIsAnError) {
  EXPECT_THROW(probability(exact_dad(1, crat(4)), {Rat(1), Rat(0)}), ParameterError);
  EXPECT_THROW(probability(exact_dad(1, crat(4)), {Rat(1)}), ParameterError);
  EXPECT_THROW(probability(exact_dad(1, crat(4)), {Rat(-1), Rat(2)}), ParameterError);
}

TEST(SuccessProbability, BoundedByBest) {
  oracle::Gen gen(61);
  for (int spec = 0; spec < 10; ++spec) {
    unsigned K = static_cast<unsigned>(gen.integer(1, 10));
    const Dad d = exact_dad(K, {gen.rational(200, 9), Rat(0)});
    const Rat best = *optimal_states(d).p_best.exact;
    for (int t = 0; t < 100; ++t) {
      Rat p = probability(d, gen.simplex(K + 1));
      EXPECT_LE(p, best);
      EXPECT_GT(p, 0);
    }
  }
}

TEST(SuccessProbability, FloatPathForComplexWeights) {
  const Dad d = exact_dad(3, {Rat(5), Rat(2)});
  auto opt = optimal_states(d);
  EXPECT_FALSE(opt.p_best.exact.has_value());
  auto at = success_probability(d, opt.z, PrecisionCtx::exact());
  EXPECT_LT(abs(at.value - opt.p_best.value).to_double(), 1e-40);
  oracle::Gen gen(62);
  for (int t = 0; t < 50; ++t) {
    auto w = SelectionWeights::from_exact(gen.simplex(4), d.digits);
    EXPECT_LE(success_probability(d, w, PrecisionCtx::exact()).value, opt.p_best.value + Real(1e-40, 128));
  }
}

TEST(OptimalStates, Examples) {
  EXPECT_EQ(*optimal_states(exact_dad(7, crat(-3))).p_best.exact, Rat(1));
  EXPECT_EQ(*optimal_states(exact_dad(1, crat(4))).p_best.exact, Rat(1, 81));
  EXPECT_EQ(*optimal_states(exact_dad(2, crat(1))).p_best.exact, Rat(1, 49));
  auto z = optimal_states(exact_dad(1, crat(4))).z;
  EXPECT_EQ(*z.exact, (std::vector<Rat>{Rat(5, 9), Rat(4, 9)}));
}

TEST(OptimalStates, AttainsBestExactly) {
  oracle::Gen gen(63);
  for (int t = 0; t < 20; ++t) {
    unsigned K = static_cast<unsigned>(gen.integer(0, 12));
    const Dad d = exact_dad(K, {gen.rational(300, 11), Rat(0)});
    auto opt = optimal_states(d);
    EXPECT_EQ(*success_probability(d, opt.z, PrecisionCtx::exact()).exact, *opt.p_best.exact);
  }
}

TEST(OptimalStates, BestIsOneOnlyForKronecker) {
  oracle::Gen gen(64);
  for (int t = 0; t < 40; ++t) {
    unsigned K = static_cast<unsigned>(gen.integer(1, 8));
    CRat beta{Rat(gen.integer(-10, 4), gen.coin() ? 1 : 2), Rat(0)};
    beta.re.canonicalize();
    auto opt = optimal_states(exact_dad(K, beta));
    EXPECT_EQ(*opt.p_best.exact == 1, oracle::degenerate(K, beta)) << "K=" << K << " beta=" << beta.re;
  }
}

TEST(OptimalStates, BestDecreasesWithShift) {
  Rat prev(2);
  for (long b = 12; b <= 60; b += 4) {
    Rat p = *optimal_states(exact_dad(10, crat(b))).p_best.exact;
    EXPECT_LT(p, prev) << b;
    prev = p;
  }
}

TEST(OptimalStates, StateStructure) {
  const Dad d = exact_dad(3, crat(5));
  auto opt = optimal_states(d);
  const auto& st = opt.states;
  ASSERT_EQ(st.a.size(), 7u);
  for (int s = 1; s <= 3; ++s) {
    EXPECT_TRUE(st.a_at(s).is_zero());
    EXPECT_TRUE(st.b_at(s).is_zero());
  }
  EXPECT_NEAR(st.norm_a().to_double(), 1.0, 1e-30);
  // N(a) N(b) = (sum |eta|)^2
  Real S(*d.abs_sum.exact, 256);
  EXPECT_LT(abs(st.norm_a() * st.norm_b() - S * S).to_double(), 1e-25);
  // a phases zero, real eta with zero phase step -> b real to working precision
  const Real tol(pow10(2 - static_cast<long>(d.digits)), 256);
  for (unsigned m = 0; m <= 3; ++m) {
    EXPECT_TRUE(st.a_at(spin_component(m)).im.is_zero());
    EXPECT_LE(abs(st.b_at(spin_component(m)).im), tol * abs(st.b_at(spin_component(m))));
  }
}

TEST(OptimalStates, KroneckerGivesBasisState) {
  auto opt = optimal_states(exact_dad(5, crat(-2)));
  for (int s = -5; s <= 5; ++s) {
    const bool on = s == -2;
    EXPECT_EQ(opt.states.b_at(s).is_zero(), !on) << s;
    EXPECT_EQ(opt.states.a_at(s).is_zero(), !on) << s;
  }
  EXPECT_NEAR(abs(opt.states.b_at(-2)).to_double(), 1.0, 1e-30);
}

TEST(OptimalStates, DegenerateIsAnError) {
  Dad d = exact_dad(2, crat(1));
  Dad zero = make_exact_dad(d.spec, {crat(0), crat(0), crat(0)});
  EXPECT_THROW(optimal_states(zero), ParameterError);
}

TEST(AssignPhases, RoundTripRandomised) {
  oracle::Gen gen(65);
  for (int t = 0; t < 25; ++t) {
    unsigned K = static_cast<unsigned>(gen.integer(0, 5));
    ScenarioParams sc{gen.rational(3, 5) + Rat(4), Rat(gen.integer(1, 4)), Rat(gen.integer(2, 9)), K, Rat(10)};
    CRat beta = gen.beta(30);
    const Dad d = eta_closed_form(to_dadspec(sc, {Rat(beta.re * sc.delta_x()), Rat(beta.im * sc.delta_x())}),
                                  PrecisionCtx::exact());
    const auto bits = bits_for_digits(d.digits);
    std::vector<Real> phases;
    for (unsigned m = 0; m <= K; ++m) phases.emplace_back(static_cast<double>(gen.integer(-300, 300)) / 100.0, bits);
    SpinStates st = assign_phases(d, sc, phases);
    Dad back = dad_from_states(st, sc, PrecisionCtx::exact());
    const Real tol(pow10(8 - static_cast<long>(d.digits)), bits);
    for (unsigned m = 0; m <= K; ++m) {
      CReal e = to_creal(d.eta_exact[m], bits);
      EXPECT_LE(abs(back.eta[m] - e), tol * std::max(Real(1L, bits), abs(e))) << "K=" << K << " m=" << m;
    }
    // With K = 0 the single weight is 1 for any alpha; the first moment is 0.
    const CReal expected_alpha = K == 0 ? to_creal(oracle::crat(0), bits) : to_creal(d.spec.alpha, bits);
    EXPECT_LT(abs(to_creal(back.spec.alpha, bits) - expected_alpha).to_double(), 1e-25) << "K=" << K;
  }
}

TEST(AssignPhases, GaugeInvariantObservables) {
  const Dad d = exact_dad(4, {Rat(7), Rat(1)});
  const Rat phase_step(3, 7);
  const auto bits = bits_for_digits(d.digits);
  const auto mod = optimal_moduli(d);
  std::vector<Real> zero(5, Real(0L, bits)), twisted;
  for (int m = 0; m <= 4; ++m) twisted.emplace_back(0.37 * m - 1.1, bits);
  SpinStates a = assign_phases(d, phase_step, zero, mod);
  SpinStates b = assign_phases(d, phase_step, twisted, mod);
  const Real na = a.norm_a() * a.norm_b();
  EXPECT_LE(abs(na - b.norm_a() * b.norm_b()), Real(pow10(2 - static_cast<long>(d.digits)), bits) * na);
  Dad da = dad_from_states(a, d.spec.delta_x, phase_step, PrecisionCtx::exact());
  Dad db = dad_from_states(b, d.spec.delta_x, phase_step, PrecisionCtx::exact());
  TransmittedPulse pa{da, GaussianEnvelope{Rat(8)}, Normalization::PostSelected, a};
  TransmittedPulse pb{db, GaussianEnvelope{Rat(8)}, Normalization::PostSelected, b};
  for (double X : {-2.0, 3.0, 7.0}) {
    CReal Xc{Real(X, bits), Real(0L, bits)};
    Real ga = abs(transmitted_envelope(pa, Xc, PrecisionCtx::exact()));
    Real gb = abs(transmitted_envelope(pb, Xc, PrecisionCtx::exact()));
    EXPECT_LT(abs(ga - gb).to_double(), 1e-25);
  }
}

TEST(AssignPhases, ModulusMismatchIsAnError) {
  const Dad d = exact_dad(2, crat(1));
  auto mod = optimal_moduli(d);
  mod.b[1] = mod.b[1] * Real(2L, mod.b[1].bits());
  std::vector<Real> zero(3, Real(0L, 128));
  EXPECT_THROW(assign_phases(d, Rat(0), zero, mod), ParameterError);
}

TEST(DadFromStates, Errors) {
  const Dad d = exact_dad(2, crat(1));
  auto st = optimal_states(d).states;
  SpinStates bad = st;
  bad.a[spin_slot(1, 2)] = CReal{Real(1L, 128), Real(0L, 128)};
  EXPECT_THROW(dad_from_states(bad, Rat(1), Rat(0), PrecisionCtx::exact()), ParameterError);
  SpinStates empty = st;
  for (auto& v : empty.b) v = CReal{Real(0L, 128), Real(0L, 128)};
  EXPECT_THROW(dad_from_states(empty, Rat(1), Rat(0), PrecisionCtx::exact()), ParameterError);
}
