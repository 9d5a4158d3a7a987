#pragma once

// Command implementations behind the bellfield executable. Each command maps
// a RunConfig to the text it prints, so the output can be tested without a
// process boundary.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bellfield/classical_mc.hpp"
#include "bellfield/correlation.hpp"
#include "bellfield/format.hpp"
#include "bellfield/homodyne.hpp"
#include "bellfield/inequalities.hpp"
#include "bellfield/optics.hpp"
#include "bellfield/state_io.hpp"
#include "bellfield/state_zoo.hpp"

namespace bellfield::cli {

using ojson = nlohmann::ordered_json;

inline constexpr int kJsonDigits = 9;
inline constexpr int kCsvDigits = 6;
inline constexpr int kDomainErrorExit = 2;

enum class Format { json, csv };

struct RunConfig {
  std::string source;                 ///< zoo name or state file
  std::string alpha = "1";            ///< "re" or "re,im"
  double phi = 0.0;
  std::optional<int> cutoff;
  double tol = 1e-9;
  std::uint64_t seed = 1;
  std::size_t samples = 100000;
  Format format = Format::json;
  std::string kind = "delta";
  std::string point = "1,1,1,1";      ///< delta point, one complex per field, "re" or "re:im"
  double nbar = 1.0;
  double mix = 0.5;                   ///< weight of the thermal part in a mixture
  int curve_samples = 101;
  std::vector<double> alphas{0.25, 0.5, 1.0};
  std::vector<double> phis{0.0, std::numbers::pi / 4, std::numbers::pi / 2, std::numbers::pi};
};

inline void validate(const RunConfig& cfg) {
  if (!(cfg.tol > 0.0)) fail(ErrorKind::invalid_argument, "--tol must be > 0");
  if (cfg.samples < 1) fail(ErrorKind::invalid_argument, "--samples must be >= 1");
}

inline double num(double v) { return round_significant(v, kJsonDigits); }

inline ojson num(cplx v) { return ojson::array({num(v.real()), num(v.imag())}); }

inline std::string csv_num(double v) { return format_number(v, kCsvDigits); }

inline double parse_real(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    fail(ErrorKind::invalid_argument, what + ": '" + text + "' is not a number");
  }
  if (used != text.size() || !std::isfinite(v)) {
    fail(ErrorKind::invalid_argument, what + ": '" + text + "' is not a finite number");
  }
  return v;
}

/// "x" or "x<sep>y" as x + iy.
inline cplx parse_complex(const std::string& text, char sep, const std::string& what) {
  const auto cut = text.find(sep);
  if (cut == std::string::npos) return parse_real(text, what);
  return {parse_real(text.substr(0, cut), what), parse_real(text.substr(cut + 1), what)};
}

inline std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep)) parts.push_back(item);
  if (!text.empty() && text.back() == sep) parts.emplace_back();
  return parts;
}

inline ojson error_json(const Error& e) {
  return ojson{{"error", std::string(to_string(e.kind()))}, {"message", e.what()}};
}

// ---------------------------------------------------------------------------
// Analysis shared by the state report and the amplitude-plane table

struct Analysis {
  std::string route;  ///< "network" or "coherence-functions"
  CorrelationAmplitudes amps;
  std::optional<CoherenceFunctions> g;
  std::optional<LOConfig> lo;
  double b_max = 0.0;
  double b_max_analytic = 0.0;
  std::optional<BellSettings> settings;
  bool is_epr = false;
  std::optional<EprVerdict> epr;
  InequalityReport report;
};

/// Four-mode states are analysed directly. Signal states on (a1, a2) get the
/// optimal local oscillators; when those vanish the amplitudes come from the
/// coherence functions alone. Single-mode states go through the splitting
/// network first.
inline Analysis analyze(const MultiModeState& state, double tol) {
  Analysis a;
  std::optional<MultiModeState> network;
  if (state.layout().size() == 1) {
    network = epr_split_network(state);
  } else if (state.layout().size() == 2) {
    a.g = coherence_functions(state);
    try {
      a.lo = optimal_lo_config(state);
      network = homodyne_network_state(state, *a.lo);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::degenerate_lo) throw;
      a.route = "coherence-functions";
      const auto [a1, a2] = amplitudes_from_g(*a.g);
      a.amps = {a1, a2, a1 > kZeroAmplitude ? std::arg(a.g->g11) : 0.0,
                a2 > kZeroAmplitude ? std::arg(a.g->g20) : 0.0};
      a.b_max = a.b_max_analytic = analytic_bell_max(a.amps);
      a.settings = analytic_bell_settings(a.amps);
      a.is_epr = std::abs(a.amps.total() - 1.0) <= tol;
    }
  } else {
    network = state;
  }
  if (network) {
    a.route = "network";
    const auto best = bell_max(*network);
    a.amps = best.amplitudes;
    a.b_max = best.b_max;
    a.b_max_analytic = best.analytic;
    a.settings = best.settings;
    a.epr = epr_check(*network, tol);
    a.is_epr = a.epr->is_epr;
  }
  a.report = classify(a.amps, a.b_max);
  return a;
}

inline MultiModeState resolve_state(const RunConfig& cfg, std::string& name) {
  if (is_zoo_name(cfg.source)) {
    name = cfg.source;
    const ZooOptions options{parse_complex(cfg.alpha, ',', "--alpha"), cfg.phi, cfg.cutoff};
    return zoo_state(cfg.source, options).state;
  }
  name = cfg.source;
  return load_state_file(cfg.source);
}

inline ojson correlators_json(const OutputCorrelators& c) {
  return ojson{{"cc", num(c.cc)}, {"cd", num(c.cd)}, {"dc", num(c.dc)}, {"dd", num(c.dd)}};
}

inline ojson settings_json(const BellSettings& s) {
  return ojson{{"theta1", num(s.theta1)}, {"theta1p", num(s.theta1p)},
               {"theta2", num(s.theta2)}, {"theta2p", num(s.theta2p)}};
}

inline ojson report_json(const InequalityReport& r) {
  return ojson{{"stochastic_ok", r.stochastic_ok},
               {"stochastic_margin", ojson::array({num(r.stochastic_margin[0]), num(r.stochastic_margin[1])})},
               {"bell_ok", r.bell_ok},
               {"bell_margin", num(r.bell_margin)},
               {"tsirelson_ok", r.tsirelson_ok},
               {"tsirelson_margin", num(r.tsirelson_margin)},
               {"quantum_ok", r.quantum_ok},
               {"quantum_margin", num(r.quantum_margin)},
               {"region", std::string(to_string(r.region))},
               {"epr_boundary", r.epr_boundary}};
}

inline ojson analysis_json(const std::string& name, const Analysis& a) {
  ojson out{{"state", name},
            {"route", a.route},
            {"a1", num(a.amps.a1)},
            {"a2", num(a.amps.a2)},
            {"xi", num(a.amps.xi)},
            {"zeta", num(a.amps.zeta)},
            {"a1_plus_a2", num(a.amps.total())},
            {"sum_of_squares", num(a.amps.sum_of_squares())},
            {"b_max", num(a.b_max)},
            {"b_max_analytic", num(a.b_max_analytic)}};
  if (a.settings) out["settings"] = settings_json(*a.settings);
  if (a.g) out["coherence"] = ojson{{"g11", num(a.g->g11)}, {"g20", num(a.g->g20)}, {"g22", num(a.g->g22)}};
  if (a.lo) out["local_oscillator"] = ojson{{"beta1", num(a.lo->beta1)}, {"beta2", num(a.lo->beta2)}};
  ojson epr{{"is_epr", a.is_epr}};
  if (a.epr && a.epr->phases) {
    epr["phases"] = ojson::array({num(a.epr->phases->theta1()), num(a.epr->phases->theta2())});
    epr["witness"] = correlators_json(*a.epr->witness);
    epr["anti_phases"] = ojson::array({num(a.epr->anti_phases->theta1()), num(a.epr->anti_phases->theta2())});
    epr["anti_witness"] = correlators_json(*a.epr->anti_witness);
    epr["witness_ok"] = a.epr->witness_ok;
  }
  out["epr"] = epr;
  out["inequalities"] = report_json(a.report);
  return out;
}

// key,value rows of the flattened report
inline void flatten_csv(const ojson& value, const std::string& prefix, std::string& out) {
  if (value.is_object()) {
    for (auto it = value.begin(); it != value.end(); ++it) {
      flatten_csv(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), out);
    }
  } else if (value.is_array()) {
    for (std::size_t i = 0; i < value.size(); ++i) flatten_csv(value[i], prefix + "." + std::to_string(i), out);
  } else if (value.is_number()) {
    out += prefix + "," + csv_num(value.get<double>()) + "\n";
  } else if (value.is_boolean()) {
    out += prefix + "," + (value.get<bool>() ? "true" : "false") + "\n";
  } else {
    out += prefix + "," + value.get<std::string>() + "\n";
  }
}

inline std::string emit(const ojson& doc, Format format) {
  if (format == Format::json) return doc.dump(2) + "\n";
  std::string out = "key,value\n";
  flatten_csv(doc, "", out);
  return out;
}

// ---------------------------------------------------------------------------
// Commands

inline std::string cmd_state(const RunConfig& cfg) {
  validate(cfg);
  std::string name;
  const auto state = resolve_state(cfg, name);
  return emit(analysis_json(name, analyze(state, cfg.tol)), cfg.format);
}

/// Zoo points drawn on the amplitude plane, with the parameters used.
inline std::vector<std::pair<std::string, ZooState>> plane_zoo_points() {
  std::vector<std::pair<std::string, ZooState>> rows;
  rows.emplace_back("eq28", zoo_state("eq28"));
  rows.emplace_back("eq29", zoo_state("eq29"));
  rows.emplace_back("two-photon", zoo_state("two-photon"));
  rows.emplace_back("coherent", zoo_state("coherent", {1.0, 0.0, {}}));
  rows.emplace_back("split-photon", zoo_state("split-photon"));
  rows.emplace_back("split-cat(alpha=0.5,phi=0)", zoo_state("split-cat", {0.5, 0.0, {}}));
  rows.emplace_back("split-cat(alpha=0.5,phi=pi)", zoo_state("split-cat", {0.5, std::numbers::pi, {}}));
  rows.emplace_back("split-cat(alpha=0.5,phi=pi/2)", zoo_state("split-cat", {0.5, std::numbers::pi / 2, {}}));
  return rows;
}

inline std::string cmd_plane(const RunConfig& cfg) {
  validate(cfg);
  std::string out = "curve,a1,a2,region\n";
  for (const auto& p : amplitude_plane_boundaries(cfg.curve_samples)) {
    out += p.curve + "," + csv_num(p.a1) + "," + csv_num(p.a2) + ",\n";
  }
  for (const auto& [label, zoo] : plane_zoo_points()) {
    const auto a = analyze(zoo.state, cfg.tol);
    out += "zoo:" + label + "," + csv_num(a.amps.a1) + "," + csv_num(a.amps.a2) + "," +
           std::string(to_string(a.report.region)) + (a.report.epr_boundary ? "+epr-boundary" : "") + "\n";
  }
  return out;
}

inline EnsembleSpec ensemble_spec(const RunConfig& cfg) {
  if (cfg.kind == "delta") {
    const auto fields = split(cfg.point, ',');
    if (fields.size() != 4) fail(ErrorKind::invalid_argument, "--point needs four fields alpha1,alpha2,beta1,beta2");
    std::array<cplx, 4> p{};
    for (int k = 0; k < 4; ++k) p[k] = parse_complex(fields[k], ':', "--point");
    return delta_spec(p[0], p[1], p[2], p[3]);
  }
  if (cfg.kind == "thermal") return thermal_spec(cfg.nbar);
  if (cfg.kind == "correlated_lo") return correlated_lo_spec(cfg.nbar);
  if (cfg.kind == "mixture") {
    if (!(cfg.mix >= 0.0 && cfg.mix <= 1.0)) fail(ErrorKind::invalid_argument, "--mix must lie in [0, 1]");
    return mixture_spec({{cfg.mix, thermal_spec(cfg.nbar)}, {1.0 - cfg.mix, correlated_lo_spec(cfg.nbar)}});
  }
  fail(ErrorKind::invalid_argument, "unknown ensemble kind '" + cfg.kind + "'");
}

inline std::string cmd_classical(const RunConfig& cfg) {
  validate(cfg);
  const auto ensemble = make_ensemble(ensemble_spec(cfg), cfg.samples, cfg.seed);
  const auto est = estimate_amplitudes(ensemble);
  const auto bound = bound_report(est);
  ojson doc{{"kind", cfg.kind},
            {"generator", ensemble.generator_id},
            {"a1_hat", num(est.a1_hat)},
            {"a2_hat", num(est.a2_hat)},
            {"se1", num(est.se1)},
            {"se2", num(est.se2)},
            {"n", est.n},
            {"seed", cfg.seed},
            {"within_bound", ojson::array({bound.within_bound[0], bound.within_bound[1]})},
            {"margin", ojson::array({num(bound.margin[0]), num(bound.margin[1])})},
            {"pointwise_violations", pointwise_violations(ensemble)}};
  return emit(doc, cfg.format);
}

struct CatSweepRow {
  double alpha = 0.0;
  double phi = 0.0;
  CoherenceFunctions g;
  double a1 = 0.0;
  double a2 = 0.0;
  double b_max = 0.0;
  CatPrediction predicted;
};

/// Split cat at each (alpha, phi): coherence functions of the signal state,
/// amplitudes and B_max of the full network with optimal oscillators.
inline CatSweepRow cat_sweep_point(double alpha, double phi, std::optional<int> cutoff) {
  CatSweepRow row;
  row.alpha = alpha;
  row.phi = phi;
  const CatParams p{alpha, phi};
  const auto signal = split_cat(p, cutoff);
  row.g = coherence_functions(signal);
  const auto best = bell_max(homodyne_network_state(signal, optimal_lo_config(signal)));
  row.a1 = best.amplitudes.a1;
  row.a2 = best.amplitudes.a2;
  row.b_max = best.b_max;
  row.predicted = cat_predictions(p);
  return row;
}

inline std::string cmd_sweep_cat(const RunConfig& cfg) {
  validate(cfg);
  const std::optional<int> cutoff = cfg.cutoff ? cfg.cutoff : std::optional<int>(20);
  std::vector<CatSweepRow> rows;
  for (double alpha : cfg.alphas) {
    for (double phi : cfg.phis) rows.push_back(cat_sweep_point(alpha, phi, cutoff));
  }
  if (cfg.format == Format::csv) {
    std::string out = "alpha,phi,g11,g20,g20_pred,g22,g22_pred,a1,a1_pred,a2,a2_pred,a1_plus_a2,b_max,b_max_pred\n";
    for (const auto& r : rows) {
      out += csv_num(r.alpha) + "," + csv_num(r.phi) + "," + csv_num(std::abs(r.g.g11)) + "," +
             csv_num(std::abs(r.g.g20)) + "," + csv_num(std::abs(r.predicted.g.g20)) + "," + csv_num(r.g.g22) + "," +
             csv_num(r.predicted.g.g22) + "," + csv_num(r.a1) + "," + csv_num(r.predicted.a1) + "," +
             csv_num(r.a2) + "," + csv_num(r.predicted.a2) + "," + csv_num(r.a1 + r.a2) + "," +
             csv_num(r.b_max) + "," + csv_num(r.predicted.b_max) + "\n";
    }
    return out;
  }
  ojson doc = ojson::array();
  for (const auto& r : rows) {
    doc.push_back(ojson{{"alpha", num(r.alpha)},
                        {"phi", num(r.phi)},
                        {"g11", num(r.g.g11)},
                        {"g20", num(r.g.g20)},
                        {"g22", num(r.g.g22)},
                        {"a1", num(r.a1)},
                        {"a2", num(r.a2)},
                        {"b_max", num(r.b_max)},
                        {"predicted", ojson{{"g20", num(r.predicted.g.g20.real())},
                                            {"g22", num(r.predicted.g.g22)},
                                            {"a1", num(r.predicted.a1)},
                                            {"a2", num(r.predicted.a2)},
                                            {"b_max", num(r.predicted.b_max)}}}});
  }
  return doc.dump(2) + "\n";
}

}  // namespace bellfield::cli
