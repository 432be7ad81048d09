#ifndef QDIRAC_POSTSELECT_HPP
#define QDIRAC_POSTSELECT_HPP

// Spin pre- and post-selection.
//
// The weights of a distribution are realised as eta_m = exp(-i s phi) a_s b_s^*
// with s = -m the spin component feeding delay m dx and phi = omega_L d / p0.
// States are kept unnormalised; N(a) and N(b) are carried alongside. The
// post-selection succeeds with probability
//
//   P(z) = [ sum z_m * sum |eta_m|^2 / z_m ]^-1,   z_m = |a_m|^2,
//
// which Cauchy-Schwarz bounds by P_best = 1 / (sum |eta_m|)^2, attained at
// z_m proportional to |eta_m|. For complex weights the same optimum is used
// with |eta_m| the modulus.

#include "dad.hpp"
#include "scenario.hpp"

#include <optional>
#include <span>
#include <vector>

namespace qdirac {

/// Spin component carrying distribution index m (delay -m dx).
constexpr int spin_component(unsigned dad_index) noexcept { return -static_cast<int>(dad_index); }
/// Storage slot of spin component s in a (2K+1)-vector.
constexpr size_t spin_slot(int s, unsigned K) noexcept { return static_cast<size_t>(s + static_cast<int>(K)); }

struct SpinStates {
  unsigned K = 0;
  std::vector<CReal> a;  // slot spin_slot(s, K), s = -K..K
  std::vector<CReal> b;

  const CReal& a_at(int s) const { return a.at(spin_slot(s, K)); }
  const CReal& b_at(int s) const { return b.at(spin_slot(s, K)); }

  Real norm_a() const { return norm_of(a); }
  Real norm_b() const { return norm_of(b); }

 private:
  static Real norm_of(const std::vector<CReal>& v) {
    Real s = Real(0L, v.empty() ? Real::kDefaultBits : v.front().re.bits());
    for (const auto& c : v) s += norm(c);
    return s;
  }
};

/// Pre-selection probabilities z_m, indexed like the distribution (m = 0..K).
struct SelectionWeights {
  std::optional<std::vector<Rat>> exact;
  std::vector<Real> z;

  static SelectionWeights from_exact(std::vector<Rat> w, unsigned digits) {
    SelectionWeights s;
    for (const auto& v : w) s.z.emplace_back(v, bits_for_digits(digits));
    s.exact = std::move(w);
    return s;
  }
};

struct Probability {
  std::optional<Rat> exact;
  Real value;
};

namespace detail {

inline void check_weights(const Dad& dad, const SelectionWeights& w) {
  if (w.z.size() != dad.size())
    throw ParameterError("selection weights must have K+1 entries");
  for (size_t m = 0; m < dad.size(); ++m) {
    if (w.z[m].sign() < 0) throw ParameterError("selection weights must be non-negative");
    bool live = dad.exact ? !dad.eta_exact[m].is_zero() : !dad.eta[m].is_zero();
    if (live && w.z[m].is_zero())
      throw ParameterError("selection weight z_" + std::to_string(m) +
                           " vanishes where eta_m is nonzero");
  }
}

}  // namespace detail

/// P(z) = [sum z * sum |eta|^2/z]^-1. Exact when both the distribution is a
/// real rational one and z is exact.
inline Probability success_probability(const Dad& dad, const SelectionWeights& w, const PrecisionCtx& ctx) {
  detail::check_weights(dad, w);
  if (dad.exact && w.exact) {
    Rat zsum(0), ratio(0);
    for (size_t m = 0; m < dad.size(); ++m) {
      zsum += (*w.exact)[m];
      Rat mag2 = norm(dad.eta_exact[m]);
      if (sgn(mag2) != 0) ratio += mag2 / (*w.exact)[m];
    }
    Rat p = 1 / (zsum * ratio);
    p.canonicalize();
    return {p, Real(p, bits_for_digits(dad.digits))};
  }
  const unsigned digits = ctx.is_exact() ? dad.digits : std::max(ctx.digits, dad.digits);
  const auto bits = bits_for_digits(digits);
  auto eta = dad.weights(digits);
  Real zsum(0L, bits), ratio(0L, bits);
  for (size_t m = 0; m < dad.size(); ++m) {
    Real z(w.z[m], bits);
    zsum += z;
    Real mag2 = norm(eta[m]);
    if (!mag2.is_zero()) ratio += mag2 / z;
  }
  return {std::nullopt, Real(1L, bits) / (zsum * ratio)};
}

struct OptimalSelection {
  SelectionWeights z;
  SpinStates states;  // gauge N(a) = 1
  Probability p_best;
};

/// |eta_m| per index at the distribution's precision.
inline std::vector<Real> weight_moduli(const Dad& dad, mpfr_prec_t bits) {
  std::vector<Real> out;
  if (dad.exact) {
    for (const auto& w : dad.eta_exact) out.push_back(abs(to_creal(w, bits + 64)));
  } else {
    for (const auto& w : dad.eta) out.push_back(abs(w));
  }
  for (auto& v : out) v = Real(v, bits);
  return out;
}

struct Moduli {
  std::vector<Real> a;  // |a| per distribution index m
  std::vector<Real> b;
};

/// |a_m|^2 = C |eta_m|, |b_m|^2 = |eta_m| / C with C = 1 / sum|eta|, so N(a) = 1.
inline Moduli optimal_moduli(const Dad& dad) {
  const auto bits = bits_for_digits(dad.digits);
  auto mags = weight_moduli(dad, bits);
  Real S(dad.abs_sum.value, bits);
  Moduli mod;
  for (const auto& m : mags) {
    mod.a.push_back(sqrt(m / S));
    mod.b.push_back(sqrt(m * S));
  }
  return mod;
}

/// Builds states with the given moduli and a-phases; each b phase is chosen
/// so that exp(-i s phi) a_s b_s^* reproduces eta_m.
inline SpinStates assign_phases(const Dad& dad, const Rat& phase_step, std::span<const Real> a_phases,
                                const Moduli& moduli) {
  const unsigned K = dad.spec.K;
  if (a_phases.size() != dad.size() || moduli.a.size() != dad.size() || moduli.b.size() != dad.size())
    throw ParameterError("assign_phases: expected K+1 phases and moduli");
  const auto bits = bits_for_digits(dad.digits);
  auto mags = weight_moduli(dad, bits);
  const Real tol(pow10(5 - static_cast<long>(dad.digits)), bits);

  SpinStates st;
  st.K = K;
  const CReal zero{Real(0L, bits), Real(0L, bits)};
  st.a.assign(2 * K + 1, zero);
  st.b.assign(2 * K + 1, zero);
  const Real phi(phase_step, bits);
  for (unsigned m = 0; m < dad.size(); ++m) {
    Real product = moduli.a[m] * moduli.b[m];
    Real scale = std::max(mags[m], Real(1L, bits));
    if (abs(product - mags[m]) > tol * scale)
      throw ParameterError("assign_phases: |a_m||b_m| does not match |eta_m| at m = " + std::to_string(m));
    if (mags[m].is_zero()) continue;
    const int s = spin_component(m);
    const CReal w = dad.exact ? to_creal(dad.eta_exact[m], bits) : dad.eta[m];
    Real eta_phase(0L, bits);
    mpfr_atan2(eta_phase.get(), w.im.get(), w.re.get(), MPFR_RNDN);
    Real theta_a(a_phases[m], bits);
    Real theta_b = theta_a - eta_phase - Real(static_cast<long>(s), bits) * phi;
    st.a[spin_slot(s, K)] = moduli.a[m] * exp(CReal{Real(0L, bits), theta_a});
    st.b[spin_slot(s, K)] = moduli.b[m] * exp(CReal{Real(0L, bits), theta_b});
  }
  return st;
}

inline SpinStates assign_phases(const Dad& dad, const ScenarioParams& params, std::span<const Real> a_phases) {
  return assign_phases(dad, params.phase_step(), a_phases, optimal_moduli(dad));
}

/// Maximiser of P(z) and a state pair realising it (zero phases for a).
inline OptimalSelection optimal_states(const Dad& dad, const Rat& phase_step = Rat(0)) {
  bool any = false;
  for (const auto& w : dad.eta) any = any || !w.is_zero();
  if (!any) throw ParameterError("optimal_states: distribution has no nonzero weight");

  OptimalSelection out;
  const auto bits = bits_for_digits(dad.digits);
  if (dad.abs_sum.exact) {
    const Rat& S = *dad.abs_sum.exact;
    std::vector<Rat> z;
    for (const auto& w : dad.eta_exact) {
      Rat v = abs(w.re) / S;
      v.canonicalize();
      z.push_back(v);
    }
    out.z = SelectionWeights::from_exact(std::move(z), dad.digits);
    Rat p = 1 / (S * S);
    p.canonicalize();
    out.p_best = {p, Real(p, bits)};
  } else {
    auto mags = weight_moduli(dad, bits);
    Real S(dad.abs_sum.value, bits);
    for (const auto& m : mags) out.z.z.push_back(m / S);
    out.p_best = {std::nullopt, Real(1L, bits) / (S * S)};
  }
  std::vector<Real> zero_phases(dad.size(), Real(0L, bits));
  out.states = assign_phases(dad, phase_step, zero_phases, optimal_moduli(dad));
  return out;
}

/// eta_m = exp(-i s phi) a_s b_s^*, s = -m. The returned distribution is a
/// floating one at the states' precision; its alpha is the exact image of the
/// reconstructed first moment.
inline Dad dad_from_states(const SpinStates& states, const Rat& delta_x, const Rat& phase_step,
                           const PrecisionCtx& ctx) {
  const unsigned K = states.K;
  if (states.a.size() != 2 * K + 1 || states.b.size() != 2 * K + 1)
    throw ParameterError("dad_from_states: state vectors must have 2K+1 components");
  for (int s = 1; s <= static_cast<int>(K); ++s)
    if (!states.a_at(s).is_zero())
      throw ParameterError("dad_from_states: pre-selection must vanish for positive components");
  const mpfr_prec_t bits = states.a.front().re.bits();
  const unsigned digits = ctx.is_exact() ? digits_for_bits(bits) : ctx.digits;
  const Real phi(phase_step, bits);

  std::vector<CReal> eta;
  bool any = false;
  for (unsigned m = 0; m <= K; ++m) {
    const int s = spin_component(m);
    CReal phase = exp(CReal{Real(0L, bits), Real(-Real(static_cast<long>(s), bits) * phi)});
    CReal w = phase * states.a_at(s) * conj(states.b_at(s));
    any = any || !w.is_zero();
    eta.push_back(std::move(w));
  }
  if (!any) throw ParameterError("dad_from_states: degenerate distribution (all weights vanish)");

  CReal first{Real(0L, bits), Real(0L, bits)};
  for (unsigned m = 0; m <= K; ++m) first += eta[m] * Real(Rat(-Rat(m) * delta_x), bits);
  Rat are, aim;
  mpfr_get_q(are.get_mpq_t(), first.re.get());
  mpfr_get_q(aim.get_mpq_t(), first.im.get());
  DadSpec spec{K, delta_x, {are, aim}};
  spec.validate();
  return make_float_dad(spec, std::move(eta), std::max(digits, kMinDigits));
}

inline Dad dad_from_states(const SpinStates& states, const ScenarioParams& params, const PrecisionCtx& ctx) {
  return dad_from_states(states, params.delta_x(), params.phase_step(), ctx);
}

}  // namespace qdirac

#endif  // QDIRAC_POSTSELECT_HPP
