#ifndef QDIRAC_CLI_HPP
#define QDIRAC_CLI_HPP

// Command-line front end. Every command resolves its parameters into one case
// per (K, alpha) pair and writes one table per case: CSV with '#' header
// comments plus a JSON sidecar, or a single self-describing JSON file.
// Numbers are decimal strings at min(required digits, 50) significant digits.

#include "dad.hpp"
#include "format.hpp"
#include "momentum.hpp"
#include "postselect.hpp"
#include "pulse.hpp"
#include "scenario.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace qdirac::cli {

enum ExitCode : int { kOk = 0, kParameterFailure = 1, kPrecisionFailure = 2, kIoFailure = 3 };

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using Json = nlohmann::ordered_json;

inline constexpr unsigned kMaxSerializedDigits = 50;
inline constexpr double kDefaultWindowTolerance = 0.01;

struct RunConfig {
  std::string command;
  std::vector<unsigned> K;
  std::vector<std::string> alpha_re{"0"};
  std::vector<std::string> alpha_im{"0"};
  std::string alpha_units = "x";  // x | dx | kdx
  std::string delta_x;            // empty: omega_L d / p0^2 if given, else 1
  std::string sigma;
  std::string sigma_units = "x";
  std::string omega_L, d, p0;
  std::optional<unsigned> n_max;
  unsigned grid_points = kDefaultGridPoints;
  std::optional<unsigned> digits;  // Float mode
  std::string format = "csv";
  std::string out = ".";
  std::string x_min, x_max, p_max;
  double window_tol = kDefaultWindowTolerance;
  std::string validity_threshold = "20";
  std::string normalization = "scaled";  // scaled | raw
  std::string prefix;                    // file name prefix
};

struct Case {
  DadSpec spec;
  std::optional<Rat> sigma;
  std::optional<ScenarioParams> scenario;
  PrecisionCtx ctx;
  unsigned required = 0;
  unsigned serialized = 0;
  std::string tag;
};

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

namespace detail {

inline std::string exact_string(const Rat& v) {
  Rat c = v;
  c.canonicalize();
  return c.get_str();
}

inline std::string dec(const Rat& v, unsigned sig) { return to_decimal(v, sig); }
inline std::string dec(const Real& v, unsigned sig) { return to_decimal(v, sig); }
inline std::string dec(double v) { return to_decimal(v, 15); }

inline std::string dec_re(const Value& v, unsigned sig) { return v.exact ? dec(v.exact->re, sig) : dec(v.approx.re, sig); }
inline std::string dec_im(const Value& v, unsigned sig) { return v.exact ? dec(v.exact->im, sig) : dec(v.approx.im, sig); }

inline Rat length_unit(const std::string& units, unsigned K, const Rat& dx, const char* what) {
  if (units == "x") return Rat(1);
  if (units == "dx") return dx;
  if (units == "kdx") {
    if (K == 0) throw ParameterError(std::string(what) + " in units of K dx needs K > 0");
    return Rat(Rat(K) * dx);
  }
  throw ParameterError("unknown units '" + units + "' for " + what + " (use x, dx or kdx)");
}

inline std::string beta_tag(const CRat& beta) {
  std::string t = "beta" + to_decimal(beta.re, 12);
  if (sgn(beta.im) != 0) t += (sgn(beta.im) > 0 ? "+" : "") + to_decimal(beta.im, 12) + "i";
  return t;
}

inline std::optional<ScenarioParams> scenario_of(const RunConfig& cfg, unsigned K) {
  const bool any = !cfg.omega_L.empty() || !cfg.d.empty() || !cfg.p0.empty();
  if (!any) return std::nullopt;
  if (cfg.omega_L.empty() || cfg.d.empty() || cfg.p0.empty())
    throw ParameterError("omega-L, d and p0 must be given together");
  ScenarioParams p;
  p.omega_L = parse_rational(cfg.omega_L);
  p.d = parse_rational(cfg.d);
  p.p0 = parse_rational(cfg.p0);
  p.K = K;
  p.validate();
  return p;
}

inline Rat resolve_delta_x(const RunConfig& cfg, const std::optional<ScenarioParams>& sc) {
  if (!cfg.delta_x.empty()) {
    Rat dx = parse_rational(cfg.delta_x);
    if (sc && sc->delta_x() != dx)
      throw ParameterError("delta-x disagrees with omega-L d / p0^2 = " + exact_string(sc->delta_x()));
    return dx;
  }
  return sc ? sc->delta_x() : Rat(1);
}

inline void check_precision(const Case& c) {
  if (!c.ctx.is_exact() && c.ctx.digits < c.required)
    throw PrecisionError("working precision of " + std::to_string(c.ctx.digits) + " digits is below the " +
                             std::to_string(c.required) + " required (K = " + std::to_string(c.spec.K) + ")",
                         c.required, c.ctx.digits);
}

}  // namespace detail

/// Expands the configuration into the cartesian product K x alpha.
inline std::vector<Case> resolve(const RunConfig& cfg) {
  if (cfg.K.empty()) throw ParameterError("--K is required");
  if (cfg.alpha_re.empty()) throw ParameterError("--alpha-re must not be empty");
  if (cfg.alpha_im.size() != 1 && cfg.alpha_im.size() != cfg.alpha_re.size())
    throw ParameterError("--alpha-im needs one value or as many as --alpha-re");
  if (cfg.format != "csv" && cfg.format != "json") throw ParameterError("--format must be csv or json");
  if (cfg.normalization != "scaled" && cfg.normalization != "raw")
    throw ParameterError("--normalization must be scaled or raw");
  if (cfg.grid_points < 2) throw ParameterError("--grid-points must be at least 2");

  std::vector<Case> cases;
  for (unsigned K : cfg.K) {
    auto sc = detail::scenario_of(cfg, K);
    const Rat dx = detail::resolve_delta_x(cfg, sc);
    const Rat a_unit = detail::length_unit(cfg.alpha_units, K, dx, "alpha");
    for (size_t i = 0; i < cfg.alpha_re.size(); ++i) {
      const std::string& im = cfg.alpha_im.size() == 1 ? cfg.alpha_im[0] : cfg.alpha_im[i];
      Case c;
      c.spec = DadSpec{K, dx, {Rat(parse_rational(cfg.alpha_re[i]) * a_unit), Rat(parse_rational(im) * a_unit)}};
      c.spec.alpha.re.canonicalize();
      c.spec.alpha.im.canonicalize();
      c.spec.validate();
      if (!cfg.sigma.empty()) {
        Rat s = parse_rational(cfg.sigma) * detail::length_unit(cfg.sigma_units, K, dx, "sigma");
        s.canonicalize();
        GaussianEnvelope{s}.validate();
        c.sigma = s;
      }
      if (sc) {
        c.scenario = sc;
        if (c.sigma) c.scenario->sigma = *c.sigma;
      }
      c.ctx = cfg.digits ? PrecisionCtx::floating(*cfg.digits) : PrecisionCtx::exact();
      c.required = required_digits(c.spec);
      c.serialized = std::min(c.ctx.is_exact() ? c.required : c.ctx.digits, kMaxSerializedDigits);
      c.tag = "K" + std::to_string(K) + "_" + detail::beta_tag(c.spec.beta());
      detail::check_precision(c);
      cases.push_back(std::move(c));
    }
  }
  return cases;
}

inline Dad build_dad(const Case& c) { return eta_closed_form(c.spec, c.ctx); }

inline Json config_echo(const RunConfig& cfg, const Case& c) {
  Json j;
  j["command"] = cfg.command;
  j["K"] = c.spec.K;
  j["delta_x"] = detail::exact_string(c.spec.delta_x);
  j["alpha_re"] = detail::exact_string(c.spec.alpha.re);
  j["alpha_im"] = detail::exact_string(c.spec.alpha.im);
  const CRat beta = c.spec.beta();
  j["beta_re"] = detail::exact_string(beta.re);
  j["beta_im"] = detail::exact_string(beta.im);
  if (c.sigma) j["sigma"] = detail::exact_string(*c.sigma);
  if (c.scenario) {
    j["omega_L"] = detail::exact_string(c.scenario->omega_L);
    j["d"] = detail::exact_string(c.scenario->d);
    j["p0"] = detail::exact_string(c.scenario->p0);
    j["phase_step"] = detail::exact_string(c.scenario->phase_step());
  }
  j["precision"] = {{"mode", c.ctx.is_exact() ? "exact" : "float"},
                    {"digits", c.ctx.is_exact() ? c.required : c.ctx.digits},
                    {"required_digits", c.required},
                    {"serialized_digits", c.serialized}};
  return j;
}

inline std::filesystem::path output_dir(const RunConfig& cfg) {
  std::filesystem::path dir(cfg.out);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) throw IoError("cannot create output directory '" + cfg.out + "'");
  return dir;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  os << text;
  os.close();
  if (!os) throw IoError("failed writing '" + path.string() + "'");
}

/// Writes `stem`.csv + `stem`.json, or `stem`.json alone, and returns the paths.
inline std::vector<std::filesystem::path> write_output(const RunConfig& cfg, const std::string& stem, Json meta,
                                                       const Table& table,
                                                       const std::vector<std::string>& warnings = {}) {
  const auto dir = output_dir(cfg);
  if (!warnings.empty()) meta["warnings"] = warnings;
  std::vector<std::filesystem::path> written;
  if (cfg.format == "json") {
    meta["columns"] = table.columns;
    meta["rows"] = table.rows;
    auto path = dir / (stem + ".json");
    write_text(path, meta.dump(1) + "\n");
    written.push_back(path);
    return written;
  }
  std::string csv = "# qdirac " + cfg.command + "\n";
  csv += "# sidecar: " + stem + ".json\n";
  csv += "# K = " + meta["config"]["K"].dump() + ", delta_x = " + meta["config"]["delta_x"].get<std::string>() +
         ", alpha = " + meta["config"]["alpha_re"].get<std::string>() + " + " +
         meta["config"]["alpha_im"].get<std::string>() + " i\n";
  for (const auto& w : warnings) csv += "# warning: " + w + "\n";
  for (size_t i = 0; i < table.columns.size(); ++i) csv += (i ? "," : "") + table.columns[i];
  csv += "\n";
  for (const auto& row : table.rows) {
    for (size_t i = 0; i < row.size(); ++i) csv += (i ? "," : "") + row[i];
    csv += "\n";
  }
  auto csv_path = dir / (stem + ".csv");
  auto json_path = dir / (stem + ".json");
  write_text(csv_path, csv);
  write_text(json_path, meta.dump(1) + "\n");
  written.push_back(csv_path);
  written.push_back(json_path);
  return written;
}

using Written = std::vector<std::filesystem::path>;

inline void append(Written& into, const Written& from) { into.insert(into.end(), from.begin(), from.end()); }

inline Written cmd_dad(const RunConfig& cfg) {
  Written out;
  for (const auto& c : resolve(cfg)) {
    const Dad dad = build_dad(c);
    const unsigned sig = c.serialized;
    Table t{{"m", "re_eta", "im_eta", "abs_eta"}, {}};
    Json eta = Json::array();
    const auto bits = bits_for_digits(dad.digits);
    for (unsigned m = 0; m < dad.size(); ++m) {
      std::string re, im, mag;
      if (dad.exact) {
        const CRat& w = dad.eta_exact[m];
        re = detail::dec(w.re, sig);
        im = detail::dec(w.im, sig);
        mag = w.is_real() ? detail::dec(Rat(abs(w.re)), sig) : detail::dec(abs(to_creal(w, bits)), sig);
      } else {
        re = detail::dec(dad.eta[m].re, sig);
        im = detail::dec(dad.eta[m].im, sig);
        mag = detail::dec(abs(dad.eta[m]), sig);
      }
      t.rows.push_back({std::to_string(m), re, im, mag});
      eta.push_back({{"re", re}, {"im", im}});
    }
    Json meta;
    meta["config"] = config_echo(cfg, c);
    meta["K"] = c.spec.K;
    meta["delta_x"] = detail::exact_string(c.spec.delta_x);
    meta["alpha_re"] = detail::exact_string(c.spec.alpha.re);
    meta["alpha_im"] = detail::exact_string(c.spec.alpha.im);
    meta["exact"] = dad.exact;
    meta["eta"] = eta;
    if (dad.exact) {
      Json ex = Json::array();
      for (const auto& w : dad.eta_exact) ex.push_back({{"re", detail::exact_string(w.re)}, {"im", detail::exact_string(w.im)}});
      meta["eta_exact"] = ex;
    }
    meta["abs_sum"] = dad.abs_sum.exact ? detail::dec(*dad.abs_sum.exact, sig) : detail::dec(dad.abs_sum.value, sig);
    if (dad.abs_sum.exact) meta["abs_sum_exact"] = detail::exact_string(*dad.abs_sum.exact);
    append(out, write_output(cfg, cfg.prefix + "dad_" + c.tag, meta, t));
  }
  return out;
}

inline Written cmd_moments(const RunConfig& cfg) {
  Written out;
  for (const auto& c : resolve(cfg)) {
    const Dad dad = build_dad(c);
    const unsigned n_max = cfg.n_max.value_or(c.spec.K + 10);
    const unsigned sig = c.serialized;
    Table t{{"n", "re_moment", "im_moment", "re_alpha_pow", "im_alpha_pow", "re_ratio", "im_ratio"}, {}};
    unsigned last_identity = 0;
    bool identity_holds = true;
    for (const auto& row : moment_table(dad, n_max, c.ctx)) {
      std::vector<std::string> r{std::to_string(row.n), detail::dec_re(row.moment, sig), detail::dec_im(row.moment, sig),
                                 detail::dec_re(row.alpha_power, sig), detail::dec_im(row.alpha_power, sig)};
      if (row.ratio) {
        r.push_back(detail::dec_re(*row.ratio, sig));
        r.push_back(detail::dec_im(*row.ratio, sig));
      } else {
        r.push_back("NA");
        r.push_back("NA");
      }
      if (identity_holds && row.moment.exact && row.alpha_power.exact && *row.moment.exact == *row.alpha_power.exact)
        last_identity = row.n;
      else
        identity_holds = false;
      t.rows.push_back(std::move(r));
    }
    Json meta;
    meta["config"] = config_echo(cfg, c);
    meta["n_max"] = n_max;
    if (dad.exact) meta["exact_identity_through_n"] = last_identity;
    meta["ratio_note"] = "ratio is NA where alpha^n = 0";
    append(out, write_output(cfg, cfg.prefix + "moments_" + c.tag, meta, t));
  }
  return out;
}

namespace detail {

inline Rat require_sigma(const Case& c) {
  if (!c.sigma) throw ParameterError("--sigma is required for this command");
  return *c.sigma;
}

inline Json bandwidth_json(const BandwidthFit& fit) {
  Json j;
  j["fits"] = fit.fits;
  j["margin"] = fit.infinite_margin ? Json("inf") : Json(dec(fit.margin));
  return j;
}

inline Json scenario_json(const Case& c, const Rat& threshold) {
  Json j;
  auto v = validity_check(*c.scenario, threshold);
  j["validity"] = {{"ratio", v.ratio ? exact_string(*v.ratio) : std::string("inf")},
                   {"threshold", exact_string(v.threshold)},
                   {"passes", v.passes},
                   {"note", v.note}};
  if (c.spec.alpha.is_real()) {
    auto at = arrival_times(*c.scenario, c.spec.alpha.re);
    j["arrival_times"] = {{"delay", exact_string(at.delay)},
                          {"dwell", exact_string(at.dwell)},
                          {"dwell_negative", at.dwell_negative}};
  }
  return j;
}

}  // namespace detail

inline Written cmd_envelope(const RunConfig& cfg, std::ostream& err) {
  Written out;
  const Rat threshold = parse_rational(cfg.validity_threshold);
  for (const auto& c : resolve(cfg)) {
    const GaussianEnvelope env{detail::require_sigma(c)};
    TransmittedPulse pulse{build_dad(c), env,
                           cfg.normalization == "raw" ? Normalization::Raw : Normalization::BestProbabilityScaled,
                           std::nullopt};
    auto [lo, hi] = default_envelope_range(c.spec, env);
    if (!cfg.x_min.empty()) lo = parse_rational(cfg.x_min);
    if (!cfg.x_max.empty()) hi = parse_rational(cfg.x_max);
    const unsigned sig = c.serialized;
    std::vector<std::string> warnings;
    const auto fit = bandwidth_fit_check(c.spec, env);
    if (!fit.fits) warnings.push_back("packet bandwidth 2/sigma exceeds the superoscillatory window");

    Table t{{"X", "re", "im", "abs", "reference", "target_re", "target_im"}, {}};
    for (const auto& s : envelope_grid(pulse, c.ctx, lo, hi, cfg.grid_points))
      t.rows.push_back({detail::dec(s.X, sig), detail::dec(s.value.re, sig), detail::dec(s.value.im, sig),
                        detail::dec(abs(s.value), sig), detail::dec(s.reference, sig), detail::dec(s.target.re, sig),
                        detail::dec(s.target.im, sig)});

    const auto opt = optimal_states(pulse.dad);
    Json meta;
    meta["config"] = config_echo(cfg, c);
    meta["normalization"] = cfg.normalization == "raw" ? "raw" : "best_probability_scaled";
    meta["grid"] = {{"x_min", detail::exact_string(lo)}, {"x_max", detail::exact_string(hi)}, {"points", cfg.grid_points}};
    meta["p_best"] = opt.p_best.exact ? detail::dec(*opt.p_best.exact, sig) : detail::dec(opt.p_best.value, sig);
    if (opt.p_best.exact) meta["p_best_exact"] = detail::exact_string(*opt.p_best.exact);
    meta["bandwidth"] = detail::bandwidth_json(fit);
    meta["distortion"] = detail::dec(distortion(pulse, c.ctx));
    if (c.scenario) meta["scenario"] = detail::scenario_json(c, threshold);
    for (const auto& w : warnings) err << "warning: " << c.tag << ": " << w << "\n";
    append(out, write_output(cfg, cfg.prefix + "envelope_" + c.tag, meta, t, warnings));
  }
  return out;
}

inline Written cmd_transmission(const RunConfig& cfg) {
  Written out;
  for (const auto& c : resolve(cfg)) {
    const GaussianEnvelope env{detail::require_sigma(c)};
    const Dad dad = build_dad(c);
    const TransmissionEvaluator T(dad, c.ctx);
    const auto bits = T.bits();
    const unsigned sig = c.serialized;
    const Window analytic = analytic_window(c.spec);
    Rat P;
    if (!cfg.p_max.empty()) {
      P = parse_rational(cfg.p_max);
      if (sgn(P) <= 0) throw ParameterError("--p-max must be positive");
    } else {
      double half = 8.0 / env.sigma.get_d();
      if (!analytic.unbounded) half = std::max(half, 2.0 * analytic.p_hi);
      P = parse_rational(detail::dec(Real(half, 53), 6));
    }
    const Real a0 = spectral_amplitude(env, Real(0L, bits));
    Table t{{"p", "re_T", "im_T", "abs_T", "re_target", "im_target", "abs_ratio", "A", "A_norm"}, {}};
    const unsigned n = cfg.grid_points;
    for (unsigned k = 0; k < n; ++k) {
      Rat frac(2 * k, n - 1);
      Rat p = P * (frac - 1);
      p.canonicalize();
      const Real pr(p, bits);
      const CReal tv = T(pr);
      const CReal target = ideal_transmission(c.spec.alpha, pr);
      const Real a = spectral_amplitude(env, pr);
      t.rows.push_back({detail::dec(p, sig), detail::dec(tv.re, sig), detail::dec(tv.im, sig),
                        detail::dec(abs(tv), sig), detail::dec(target.re, sig), detail::dec(target.im, sig),
                        detail::dec(Real(abs(tv) / abs(target)), sig), detail::dec(a, sig),
                        detail::dec(Real(a / a0), sig)});
    }
    const Window emp = empirical_window(dad, cfg.window_tol, c.ctx);
    auto window_json = [](const Window& w) {
      Json j;
      if (w.kind == WindowKind::Empirical) j["tol"] = detail::dec(w.tol);
      j["p_lo"] = std::isinf(w.p_lo) ? Json("-inf") : Json(detail::dec(w.p_lo));
      j["p_hi"] = std::isinf(w.p_hi) ? Json("inf") : Json(detail::dec(w.p_hi));
      j["unbounded"] = w.unbounded;
      return j;
    };
    Json meta;
    meta["config"] = config_echo(cfg, c);
    meta["grid"] = {{"p_max", detail::exact_string(P)}, {"points", n}};
    meta["analytic_window"] = window_json(analytic);
    meta["empirical_window"] = window_json(emp);
    meta["bandwidth"] = detail::bandwidth_json(bandwidth_fit_check(c.spec, env));
    append(out, write_output(cfg, cfg.prefix + "transmission_" + c.tag, meta, t));
  }
  return out;
}

inline Written cmd_postselect(const RunConfig& cfg) {
  Written out;
  for (const auto& c : resolve(cfg)) {
    const Dad dad = build_dad(c);
    const unsigned sig = c.serialized;
    const Rat phase_step = c.scenario ? c.scenario->phase_step() : Rat(0);
    const auto opt = optimal_states(dad, phase_step);
    const auto at_opt = success_probability(dad, opt.z, c.ctx);
    const auto bits = bits_for_digits(dad.digits);

    Json report;
    report["config"] = config_echo(cfg, c);
    Json eta = Json::array();
    for (unsigned m = 0; m < dad.size(); ++m) {
      const CReal w = dad.exact ? to_creal(dad.eta_exact[m], bits) : dad.eta[m];
      eta.push_back({{"m", m},
                     {"s", spin_component(m)},
                     {"re", dad.exact ? detail::dec(dad.eta_exact[m].re, sig) : detail::dec(w.re, sig)},
                     {"im", dad.exact ? detail::dec(dad.eta_exact[m].im, sig) : detail::dec(w.im, sig)},
                     {"abs", detail::dec(abs(w), sig)}});
    }
    report["eta"] = eta;
    report["abs_sum"] = dad.abs_sum.exact ? detail::dec(*dad.abs_sum.exact, sig) : detail::dec(dad.abs_sum.value, sig);
    if (dad.abs_sum.exact) report["abs_sum_exact"] = detail::exact_string(*dad.abs_sum.exact);
    report["p_best"] = opt.p_best.exact ? detail::dec(*opt.p_best.exact, sig) : detail::dec(opt.p_best.value, sig);
    if (opt.p_best.exact) report["p_best_exact"] = detail::exact_string(*opt.p_best.exact);
    report["p_at_optimal_z"] = at_opt.exact ? detail::dec(*at_opt.exact, sig) : detail::dec(at_opt.value, sig);
    Json z = Json::array();
    for (size_t m = 0; m < opt.z.z.size(); ++m) {
      Json e{{"m", m}, {"z", detail::dec(opt.z.z[m], sig)}};
      if (opt.z.exact) e["z_exact"] = detail::exact_string((*opt.z.exact)[m]);
      z.push_back(e);
    }
    report["optimal_z"] = z;
    Json a = Json::array(), b = Json::array();
    for (int s = -static_cast<int>(c.spec.K); s <= static_cast<int>(c.spec.K); ++s) {
      const CReal& as = opt.states.a_at(s);
      const CReal& bs = opt.states.b_at(s);
      a.push_back({{"s", s}, {"re", detail::dec(as.re, sig)}, {"im", detail::dec(as.im, sig)}});
      b.push_back({{"s", s}, {"re", detail::dec(bs.re, sig)}, {"im", detail::dec(bs.im, sig)}});
    }
    report["states"] = {{"phase_step", detail::exact_string(phase_step)},
                        {"a", a},
                        {"b", b},
                        {"norm_a", detail::dec(opt.states.norm_a(), sig)},
                        {"norm_b", detail::dec(opt.states.norm_b(), sig)}};
    report["gauge_note"] =
        "states are fixed up to a -> c a, b -> b / conj(c) and a common phase; this pair has N(a) = 1 and "
        "real non-negative a_s. eta_m = exp(-i s phase_step) a_s conj(b_s) with s = -m.";
    const auto dir = output_dir(cfg);
    auto path = dir / (cfg.prefix + "postselect_" + c.tag + ".json");
    write_text(path, report.dump(1) + "\n");
    out.push_back(path);
  }
  return out;
}

inline Written cmd_scenario(const RunConfig& cfg) {
  Written out;
  const Rat threshold = parse_rational(cfg.validity_threshold);
  for (const auto& c : resolve(cfg)) {
    if (!c.scenario) throw ParameterError("scenario needs --omega-L, --d and --p0");
    Json report;
    report["config"] = config_echo(cfg, c);
    report["delta_x"] = detail::exact_string(c.scenario->delta_x());
    report["required_digits"] = c.required;
    report.update(detail::scenario_json(c, threshold));
    const Window w = analytic_window(c.spec);
    report["analytic_window"] = w.unbounded ? Json("inf") : Json(detail::dec(w.p_hi));
    if (c.sigma) report["bandwidth"] = detail::bandwidth_json(bandwidth_fit_check(c.spec, GaussianEnvelope{*c.sigma}));
    const auto dir = output_dir(cfg);
    auto path = dir / (cfg.prefix + "scenario_" + c.tag + ".json");
    write_text(path, report.dump(1) + "\n");
    out.push_back(path);
  }
  return out;
}

/// Parameter sets of the three figures: moments for K = 1, 15, 30 at
/// alpha = 4 K dx; K = 30 weights at beta = -15, -15.5, 120; K = 30 envelopes
/// and transmission amplitudes at sigma = 2 K dx and alpha / (K dx) = 4, 4.5,
/// 3.5 + 2i. dx = 1 throughout.
inline std::vector<RunConfig> figure_configs(const RunConfig& base) {
  std::vector<RunConfig> out;
  RunConfig f = base;
  f.delta_x = "1";
  f.omega_L = f.d = f.p0 = "";
  f.digits.reset();

  RunConfig fig1 = f;
  fig1.command = "moments";
  fig1.prefix = "fig1_";
  fig1.K = {1, 15, 30};
  fig1.alpha_re = {"4"};
  fig1.alpha_im = {"0"};
  fig1.alpha_units = "kdx";
  fig1.n_max = 40;
  out.push_back(fig1);

  RunConfig fig2 = f;
  fig2.command = "dad";
  fig2.prefix = "fig2_";
  fig2.K = {30};
  fig2.alpha_re = {"-15", "-15.5", "120"};
  fig2.alpha_im = {"0"};
  fig2.alpha_units = "dx";
  out.push_back(fig2);

  RunConfig fig3 = f;
  fig3.K = {30};
  fig3.alpha_re = {"4", "4.5", "3.5"};
  fig3.alpha_im = {"0", "0", "2"};
  fig3.alpha_units = "kdx";
  fig3.sigma = "2";
  fig3.sigma_units = "kdx";
  fig3.normalization = "scaled";
  fig3.command = "envelope";
  fig3.prefix = "fig3_";
  out.push_back(fig3);
  fig3.command = "transmission";
  out.push_back(fig3);
  return out;
}

inline Written dispatch(const RunConfig& cfg, std::ostream& err);

inline Written cmd_figures(const RunConfig& cfg, std::ostream& err) {
  Written out;
  for (const auto& f : figure_configs(cfg)) append(out, dispatch(f, err));
  return out;
}

inline Written dispatch(const RunConfig& cfg, std::ostream& err) {
  if (cfg.command == "dad") return cmd_dad(cfg);
  if (cfg.command == "moments") return cmd_moments(cfg);
  if (cfg.command == "envelope") return cmd_envelope(cfg, err);
  if (cfg.command == "transmission") return cmd_transmission(cfg);
  if (cfg.command == "postselect") return cmd_postselect(cfg);
  if (cfg.command == "scenario") return cmd_scenario(cfg);
  if (cfg.command == "figures") return cmd_figures(cfg, err);
  throw ParameterError("unknown command '" + cfg.command + "'");
}

/// Runs a resolved configuration and maps failures onto exit codes.
inline int execute(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    for (const auto& p : dispatch(cfg, err)) out << p.string() << "\n";
    return kOk;
  } catch (const PrecisionError& e) {
    err << "precision error: " << e.what() << " (required digits: " << e.required_digits() << ")\n";
    return kPrecisionFailure;
  } catch (const RangeError& e) {
    err << "precision error: " << e.what() << "\n";
    return kPrecisionFailure;
  } catch (const ParameterError& e) {
    err << "parameter error: " << e.what() << "\n";
    return kParameterFailure;
  } catch (const std::invalid_argument& e) {
    err << "parameter error: " << e.what() << "\n";
    return kParameterFailure;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << "\n";
    return kIoFailure;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "i/o error: " << e.what() << "\n";
    return kIoFailure;
  }
}

inline int main(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  RunConfig cfg;
  CLI::App app{"Quasi-Dirac delay distributions and superoscillatory transmission"};
  app.set_config("--config", "", "flat key = value file; command-line flags override it");
  app.require_subcommand(1);
  app.fallthrough();

  app.add_option("--K", cfg.K, "distribution order(s), comma separated")->delimiter(',');
  app.add_option("--alpha-re", cfg.alpha_re, "real part(s) of the shift")->delimiter(',');
  app.add_option("--alpha-im", cfg.alpha_im, "imaginary part(s) of the shift")->delimiter(',');
  app.add_option("--alpha-units", cfg.alpha_units, "x, dx or kdx")->check(CLI::IsMember({"x", "dx", "kdx"}));
  app.add_option("--delta-x", cfg.delta_x, "node spacing (default omega_L d / p0^2, else 1)");
  app.add_option("--sigma", cfg.sigma, "Gaussian envelope width");
  app.add_option("--sigma-units", cfg.sigma_units, "x, dx or kdx")->check(CLI::IsMember({"x", "dx", "kdx"}));
  app.add_option("--omega-L", cfg.omega_L, "Larmor frequency");
  app.add_option("--d", cfg.d, "field region width");
  app.add_option("--p0", cfg.p0, "mean momentum");
  app.add_option("--n-max", cfg.n_max, "highest moment (default K + 10)");
  app.add_option("--grid-points", cfg.grid_points, "samples per grid");
  app.add_option("--digits", cfg.digits, "Float mode at this many significant digits (default Exact)");
  app.add_option("--format", cfg.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--out", cfg.out, "output directory");
  app.add_option("--x-min", cfg.x_min, "envelope grid start");
  app.add_option("--x-max", cfg.x_max, "envelope grid end");
  app.add_option("--p-max", cfg.p_max, "transmission grid half-width");
  app.add_option("--window-tol", cfg.window_tol, "relative tolerance of the empirical window");
  app.add_option("--validity-threshold", cfg.validity_threshold, "minimum (p0^2/2)/(K omega_L)");
  app.add_option("--normalization", cfg.normalization, "scaled or raw")->check(CLI::IsMember({"scaled", "raw"}));

  const std::vector<std::pair<std::string, std::string>> commands{
      {"dad", "distribution weights per m"},
      {"moments", "moments against alpha^n"},
      {"envelope", "transmitted envelope on a coordinate grid"},
      {"transmission", "transmission amplitude on a momentum grid"},
      {"postselect", "optimal pre/post-selection report"},
      {"scenario", "physical parameter report"},
      {"figures", "regenerate all figure data sets"},
  };
  for (const auto& [name, help] : commands) app.add_subcommand(name, help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kParameterFailure;
  }
  for (const auto* sub : app.get_subcommands()) cfg.command = sub->get_name();
  if (cfg.command != "figures" && cfg.K.empty()) {
    err << "parameter error: --K is required\n";
    return kParameterFailure;
  }
  return execute(cfg, out, err);
}

}  // namespace qdirac::cli

#endif  // QDIRAC_CLI_HPP
