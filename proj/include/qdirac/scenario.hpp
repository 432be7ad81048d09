#ifndef QDIRAC_SCENARIO_HPP
#define QDIRAC_SCENARIO_HPP

// Physical front door: a spin-(K) particle of unit mass and mean momentum p0
// crossing a field region of width d with Larmor frequency omega_L. Each spin
// component m is shifted by m dx with dx = omega_L d / p0^2 and picks up the
// phase exp(-i m omega_L d / p0).

#include "dad.hpp"

#include <optional>
#include <string>

namespace qdirac {

inline const Rat kDefaultValidityThreshold{20};

struct ScenarioParams {
  Rat omega_L{1};
  Rat d{1};
  Rat p0{1};
  unsigned K = 0;
  Rat sigma{1};

  void validate() const {
    if (sgn(omega_L) <= 0) throw ParameterError("omega_L must be positive");
    if (sgn(d) <= 0) throw ParameterError("d must be positive");
    if (sgn(p0) <= 0) throw ParameterError("p0 must be positive");
    if (sgn(sigma) <= 0) throw ParameterError("sigma must be positive");
  }

  Rat delta_x() const { return Rat(omega_L * d / (p0 * p0)); }
  /// omega_L d / p0: the phase per unit spin component.
  Rat phase_step() const { return Rat(omega_L * d / p0); }
};

inline DadSpec to_dadspec(const ScenarioParams& params, const CRat& alpha) {
  params.validate();
  DadSpec spec{params.K, params.delta_x(), alpha};
  spec.validate();
  return spec;
}

struct ValidityReport {
  std::optional<Rat> ratio;  // (p0^2/2)/(K omega_L); absent (infinite) for K = 0
  Rat threshold;
  bool passes = false;
  std::string note;
};

/// Fast-particle regime p0^2/2 >> K omega_L, read as ratio >= threshold.
inline ValidityReport validity_check(const ScenarioParams& params,
                                     const Rat& threshold = kDefaultValidityThreshold) {
  params.validate();
  ValidityReport r;
  r.threshold = threshold;
  r.note =
      "reflection at the field edges is neglected and the packet is assumed not to spread; "
      "neither is simulated";
  if (params.K == 0) {
    r.passes = true;
    return r;
  }
  Rat ratio = params.p0 * params.p0 / 2 / (Rat(params.K) * params.omega_L);
  ratio.canonicalize();
  r.passes = ratio >= threshold;
  r.ratio = ratio;
  return r;
}

struct ArrivalTimes {
  Rat delay;  // Delta T = -alpha / p0
  Rat dwell;  // tau = (d - alpha) / p0, the naively inferred time in the field
  bool dwell_negative = false;
};

inline ArrivalTimes arrival_times(const ScenarioParams& params, const Rat& alpha) {
  params.validate();
  ArrivalTimes t{Rat(-alpha / params.p0), Rat((params.d - alpha) / params.p0), false};
  t.delay.canonicalize();
  t.dwell.canonicalize();
  t.dwell_negative = sgn(t.dwell) < 0;
  return t;
}

}  // namespace qdirac

#endif  // QDIRAC_SCENARIO_HPP
