#include <gtest/gtest.h>

#include <qdirac/scenario.hpp>

#include "oracles.hpp"

using namespace qdirac;

namespace {

ScenarioParams params(Rat omega, Rat d, Rat p0, unsigned K = 1) { return {omega, d, p0, K, Rat(1)}; }

}  // namespace

TEST(Scenario, DeltaX) {
  EXPECT_EQ(params(Rat(1), Rat(1), Rat(1)).delta_x(), Rat(1));
  EXPECT_EQ(params(Rat(2), Rat(3), Rat(2)).delta_x(), Rat(3, 2));
  EXPECT_EQ(params(Rat(2), Rat(3), Rat(4)).delta_x(), Rat(3, 8));
  EXPECT_EQ(params(Rat(2), Rat(3), Rat(2)).phase_step(), Rat(3));
}

TEST(Scenario, Validation) {
  EXPECT_THROW(params(Rat(0), Rat(1), Rat(1)).validate(), ParameterError);
  EXPECT_THROW(params(Rat(1), Rat(-1), Rat(1)).validate(), ParameterError);
  EXPECT_THROW(params(Rat(1), Rat(1), Rat(0)).validate(), ParameterError);
  ScenarioParams p = params(Rat(1), Rat(1), Rat(1));
  p.sigma = 0;
  EXPECT_THROW(p.validate(), ParameterError);
}

TEST(Scenario, ToDadSpec) {
  auto spec = to_dadspec(params(Rat(2), Rat(3), Rat(2), 4), {Rat(6), Rat(0)});
  EXPECT_EQ(spec.K, 4u);
  EXPECT_EQ(spec.delta_x, Rat(3, 2));
  EXPECT_EQ(spec.beta().re, Rat(4));
}

TEST(Scenario, WeightsInvariantUnderMomentumRescaling) {
  // (omega, d, p0) -> (c^2 omega, d, c p0) keeps dx and hence the weights.
  oracle::Gen gen(71);
  for (int t = 0; t < 10; ++t) {
    unsigned K = static_cast<unsigned>(gen.integer(1, 8));
    ScenarioParams a = params(Rat(gen.integer(1, 9)), Rat(gen.integer(1, 9)), Rat(gen.integer(1, 9)), K);
    Rat c(gen.integer(1, 7), gen.integer(1, 7));
    c.canonicalize();
    ScenarioParams b = params(Rat(c * c * a.omega_L), a.d, Rat(c * a.p0), K);
    CRat beta = gen.beta(50);
    auto da = eta_closed_form(to_dadspec(a, {Rat(beta.re * a.delta_x()), Rat(beta.im * a.delta_x())}),
                              PrecisionCtx::exact());
    auto db = eta_closed_form(to_dadspec(b, {Rat(beta.re * b.delta_x()), Rat(beta.im * b.delta_x())}),
                              PrecisionCtx::exact());
    EXPECT_EQ(da.eta_exact, db.eta_exact);
  }
}

TEST(Validity, Examples) {
  auto pass = validity_check(params(Rat(1), Rat(1), Rat(10), 1));
  EXPECT_EQ(*pass.ratio, Rat(50));
  EXPECT_TRUE(pass.passes);
  auto fail = validity_check(params(Rat(1), Rat(1), Rat(1), 30));
  EXPECT_EQ(*fail.ratio, Rat(1, 60));
  EXPECT_FALSE(fail.passes);
}

TEST(Validity, BoundaryIsInclusive) {
  ScenarioParams p = params(Rat(40), Rat(1), Rat(40), 1);  // p0^2 / 2 = 800 = 20 K omega
  auto r = validity_check(p);
  EXPECT_EQ(*r.ratio, Rat(20));
  EXPECT_TRUE(r.passes);
  EXPECT_FALSE(validity_check(p, Rat(21)).passes);
}

TEST(Validity, KZeroPassesWithInfiniteRatio) {
  auto r = validity_check(params(Rat(1), Rat(1), Rat(1), 0));
  EXPECT_TRUE(r.passes);
  EXPECT_FALSE(r.ratio.has_value());
  EXPECT_FALSE(r.note.empty());
}

TEST(ArrivalTimes, Examples) {
  ScenarioParams p = params(Rat(1), Rat(3), Rat(2));
  auto zero = arrival_times(p, Rat(0));
  EXPECT_EQ(zero.delay, Rat(0));
  EXPECT_EQ(zero.dwell, Rat(3, 2));
  EXPECT_FALSE(zero.dwell_negative);
  auto at_d = arrival_times(p, Rat(3));
  EXPECT_EQ(at_d.dwell, Rat(0));
  EXPECT_FALSE(at_d.dwell_negative);
  EXPECT_EQ(at_d.delay, Rat(-3, 2));
}

TEST(ArrivalTimes, FigureThreeStyleShiftIsNegativeDwell) {
  // K = 30, alpha = 4 K dx with dx = omega d / p0^2.
  ScenarioParams p = params(Rat(1, 100), Rat(2), Rat(1), 30);
  const Rat alpha = Rat(4 * 30) * p.delta_x();
  auto t = arrival_times(p, alpha);
  EXPECT_EQ(t.dwell, Rat((p.d - alpha) / p.p0));
  EXPECT_EQ(t.dwell, Rat(2) * (1 - Rat(4 * 30) * p.omega_L / (p.p0 * p.p0)));
  EXPECT_TRUE(t.dwell_negative);
}
