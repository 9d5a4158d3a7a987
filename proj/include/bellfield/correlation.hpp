#pragma once

// Output-channel photon-number correlations of the two-sided interferometer,
// the normalized correlation E and the correlation amplitudes A1, A2.
//
// On side k the b-channel picks up exp(i theta_k) and is then mixed with a_k:
//   c_k = (a_k + e^{i theta_k} b_k)/sqrt(2),  d_k = (-a_k + e^{i theta_k} b_k)/sqrt(2)
// so  n_{c/d,k} = (n_a + n_b +/- e^{i theta} a^dag b +/- e^{-i theta} a b^dag) / 2.

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "bellfield/fock.hpp"
#include "bellfield/optics.hpp"

namespace bellfield {

/// Raw <S1 S2> below this makes E and the amplitudes undefined.
inline constexpr double kCoincidenceThreshold = 1e-12;
/// Roundoff allowance for correlators that must be nonnegative.
inline constexpr double kNegativeClip = 1e-12;
/// The two correlator backends must agree to this absolute tolerance.
inline constexpr double kBackendTolerance = 1e-9;

enum class Backend {
  expansion,  ///< 16 input-mode moments combined with phase factors
  evolution,  ///< phase shifters and beamsplitters applied to the state
  checked,    ///< both, throwing BackendMismatch if they disagree
};

/// <n_c1 n_c2>, <n_c1 n_d2>, <n_d1 n_c2>, <n_d1 n_d2>.
struct OutputCorrelators {
  double cc = 0.0;
  double cd = 0.0;
  double dc = 0.0;
  double dd = 0.0;

  double sum() const { return cc + cd + dc + dd; }
};

struct CorrelationAmplitudes {
  double a1 = 0.0;
  double a2 = 0.0;
  double xi = 0.0;    ///< arg <a1^dag b1 a2 b2^dag>
  double zeta = 0.0;  ///< arg <a1^dag b1 a2^dag b2>

  double total() const { return a1 + a2; }
  double sum_of_squares() const { return a1 * a1 + a2 * a2; }
};

namespace detail {

inline void require_interferometer_layout(const ModeLayout& layout) {
  const auto& want = interferometer_labels();
  bool ok = layout.size() == want.size();
  for (const auto& label : want) ok = ok && layout.contains(label);
  if (!ok) fail(ErrorKind::invalid_argument, "state must live on modes (a1, b1, a2, b2)");
}

inline double clip_correlator(double value, double scale) {
  if (value < -kNegativeClip * std::max(1.0, scale)) {
    fail(ErrorKind::invalid_argument, "negative photon-number correlator " + std::to_string(value));
  }
  return std::max(value, 0.0);
}

// Per side: n_a, n_b, a^dag b, a b^dag
inline MomentSpec side_term_product(int i, int j) {
  auto side = [](int term, const std::string& a, const std::string& b) -> std::vector<MomentFactor> {
    switch (term) {
      case 0: return {{a, 1, 1}};
      case 1: return {{b, 1, 1}};
      case 2: return {{a, 1, 0}, {b, 0, 1}};
      default: return {{a, 0, 1}, {b, 1, 0}};
    }
  };
  MomentSpec spec;
  for (auto& f : side(i, "a1", "b1")) spec.factors.push_back(f);
  for (auto& f : side(j, "a2", "b2")) spec.factors.push_back(f);
  return spec;
}

}  // namespace detail

/// The 16 moments < T_i^(1) T_j^(2) > with T = (n_a, n_b, a^dag b, a b^dag)
/// per side. Everything phase-dependent follows from these by linearity.
struct InterferometerMoments {
  std::array<std::array<cplx, 4>, 4> products{};

  template <FockState S>
  static InterferometerMoments of(const S& state) {
    detail::require_interferometer_layout(state.layout());
    InterferometerMoments m;
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) m.products[i][j] = normal_moment(state, detail::side_term_product(i, j));
    }
    return m;
  }

  /// <(n_a1 + n_b1)(n_a2 + n_b2)> = <S1 S2>
  double coincidence() const {
    return (products[0][0] + products[0][1] + products[1][0] + products[1][1]).real();
  }
  /// <a1^dag b1 a2 b2^dag>
  cplx difference_moment() const { return products[2][3]; }
  /// <a1^dag b1 a2^dag b2>
  cplx sum_moment() const { return products[2][2]; }

  OutputCorrelators correlators(const PhaseSetting& phases) const {
    auto port = [](double theta, double sign) {
      return std::array<cplx, 4>{0.5, 0.5, sign * 0.5 * std::polar(1.0, theta),
                                 sign * 0.5 * std::polar(1.0, -theta)};
    };
    auto pair = [&](const std::array<cplx, 4>& x, const std::array<cplx, 4>& y) {
      cplx sum = 0.0;
      for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) sum += x[i] * y[j] * products[i][j];
      }
      return sum.real();
    };
    const auto c1 = port(phases.theta1(), 1.0);
    const auto d1 = port(phases.theta1(), -1.0);
    const auto c2 = port(phases.theta2(), 1.0);
    const auto d2 = port(phases.theta2(), -1.0);
    const double scale = coincidence();
    return {detail::clip_correlator(pair(c1, c2), scale), detail::clip_correlator(pair(c1, d2), scale),
            detail::clip_correlator(pair(d1, c2), scale), detail::clip_correlator(pair(d1, d2), scale)};
  }
};

namespace detail {

inline OutputCorrelators evolve_correlators(const MultiModeState& state, const PhaseSetting& phases) {
  auto out = phase_shift(state, "b1", phases.theta1());
  out = phase_shift(out, "b2", phases.theta2());
  out = beamsplitter(out, "a1", "b1");
  out = beamsplitter(out, "a2", "b2");
  const auto& layout = out.layout();
  const auto c1 = layout.index_of("a1");
  const auto d1 = layout.index_of("b1");
  const auto c2 = layout.index_of("a2");
  const auto d2 = layout.index_of("b2");
  OutputCorrelators r;
  for (const auto& t : out.terms()) {
    const double p = std::norm(t.amp);
    r.cc += p * t.occ[c1] * t.occ[c2];
    r.cd += p * t.occ[c1] * t.occ[d2];
    r.dc += p * t.occ[d1] * t.occ[c2];
    r.dd += p * t.occ[d1] * t.occ[d2];
  }
  return r;
}

}  // namespace detail

template <FockState S>
OutputCorrelators output_correlators(const S& state, const PhaseSetting& phases,
                                     Backend backend = Backend::expansion) {
  detail::require_interferometer_layout(state.layout());
  auto evolution = [&] {
    OutputCorrelators r;
    for_each_component(state, [&](double w, const MultiModeState& s) {
      const auto part = detail::evolve_correlators(s, phases);
      r.cc += w * part.cc;
      r.cd += w * part.cd;
      r.dc += w * part.dc;
      r.dd += w * part.dd;
    });
    return r;
  };
  switch (backend) {
    case Backend::expansion: return InterferometerMoments::of(state).correlators(phases);
    case Backend::evolution: return evolution();
    case Backend::checked: {
      const auto x = InterferometerMoments::of(state).correlators(phases);
      const auto y = evolution();
      const double gap = std::max({std::abs(x.cc - y.cc), std::abs(x.cd - y.cd), std::abs(x.dc - y.dc),
                                   std::abs(x.dd - y.dd)});
      if (gap > kBackendTolerance) {
        fail(ErrorKind::backend_mismatch, "correlator backends differ by " + std::to_string(gap));
      }
      return x;
    }
  }
  return {};
}

/// E = <D1 D2>/<S1 S2> from output correlators.
inline double correlation_from(const OutputCorrelators& c) {
  const double denominator = c.sum();
  if (denominator <= kCoincidenceThreshold) {
    fail(ErrorKind::zero_coincidence, "no coincidences between the two sides; E is undefined");
  }
  return (c.cc - c.cd - c.dc + c.dd) / denominator;
}

template <FockState S>
double correlation_E(const S& state, const PhaseSetting& phases, Backend backend = Backend::expansion) {
  return correlation_from(output_correlators(state, phases, backend));
}

inline constexpr double kZeroAmplitude = 1e-12;

inline CorrelationAmplitudes amplitudes_from(const InterferometerMoments& m) {
  const double denominator = m.coincidence();
  if (denominator <= kCoincidenceThreshold) {
    fail(ErrorKind::zero_coincidence, "no coincidences between the two sides; amplitudes are undefined");
  }
  CorrelationAmplitudes r;
  r.a1 = 2.0 * std::abs(m.difference_moment()) / denominator;
  r.a2 = 2.0 * std::abs(m.sum_moment()) / denominator;
  // arg(0) := 0
  r.xi = r.a1 > kZeroAmplitude ? std::arg(m.difference_moment()) : 0.0;
  r.zeta = r.a2 > kZeroAmplitude ? std::arg(m.sum_moment()) : 0.0;
  return r;
}

template <FockState S>
CorrelationAmplitudes amplitudes(const S& state) {
  return amplitudes_from(InterferometerMoments::of(state));
}

/// E(theta1, theta2) = A1 cos(theta1 - theta2 + xi) + A2 cos(theta1 + theta2 + zeta)
inline double predict_E(const CorrelationAmplitudes& amps, const PhaseSetting& phases) {
  return amps.a1 * std::cos(phases.theta1() - phases.theta2() + amps.xi) +
         amps.a2 * std::cos(phases.theta1() + phases.theta2() + amps.zeta);
}

/// Largest deviation of the computed E from its two-sinusoid form over a
/// uniform grid_size x grid_size phase grid. Grid points without
/// coincidences are skipped.
template <FockState S>
double sinusoid_residual(const S& state, int grid_size, Backend backend = Backend::evolution) {
  if (grid_size < 4) fail(ErrorKind::invalid_argument, "grid_size must be at least 4");
  const auto amps = amplitudes(state);
  const double step = 2.0 * std::numbers::pi / grid_size;
  double worst = 0.0;
  int evaluated = 0;
  for (int i = 0; i < grid_size; ++i) {
    for (int j = 0; j < grid_size; ++j) {
      const PhaseSetting phases(i * step, j * step);
      const auto c = output_correlators(state, phases, backend);
      if (c.sum() <= kCoincidenceThreshold) continue;
      worst = std::max(worst, std::abs(correlation_from(c) - predict_E(amps, phases)));
      ++evaluated;
    }
  }
  if (evaluated == 0) fail(ErrorKind::zero_coincidence, "no grid point has coincidences");
  return worst;
}

/// Phases with theta1 - theta2 + xi = 0 and theta1 + theta2 + zeta = 0 (E = +A).
inline PhaseSetting epr_phases(const CorrelationAmplitudes& amps) {
  return {-(amps.xi + amps.zeta) / 2.0, (amps.xi - amps.zeta) / 2.0};
}

/// Phases with both cosines equal to -1 (E = -A).
inline PhaseSetting anti_epr_phases(const CorrelationAmplitudes& amps) {
  return {std::numbers::pi - (amps.xi + amps.zeta) / 2.0, (amps.xi - amps.zeta) / 2.0};
}

struct EprVerdict {
  bool is_epr = false;
  CorrelationAmplitudes amplitudes;
  std::optional<PhaseSetting> phases;
  std::optional<OutputCorrelators> witness;       ///< at `phases`: cd, dc vanish
  std::optional<PhaseSetting> anti_phases;
  std::optional<OutputCorrelators> anti_witness;  ///< at `anti_phases`: cc, dd vanish
  bool witness_ok = false;
};

/// A state is EPR iff A1 + A2 = 1 within tol. For EPR states the phases that
/// null the cross coincidences are returned together with the correlators
/// there; witness_ok records whether those really vanish (relative to
/// <S1 S2>), which checks the converse numerically instead of assuming it.
template <FockState S>
EprVerdict epr_check(const S& state, double tol, Backend backend = Backend::expansion) {
  const auto moments = InterferometerMoments::of(state);
  EprVerdict v;
  v.amplitudes = amplitudes_from(moments);
  v.is_epr = std::abs(v.amplitudes.total() - 1.0) <= tol;
  if (!v.is_epr) return v;
  v.phases = epr_phases(v.amplitudes);
  v.anti_phases = anti_epr_phases(v.amplitudes);
  if (backend == Backend::expansion) {
    v.witness = moments.correlators(*v.phases);
    v.anti_witness = moments.correlators(*v.anti_phases);
  } else {
    v.witness = output_correlators(state, *v.phases, backend);
    v.anti_witness = output_correlators(state, *v.anti_phases, backend);
  }
  const double scale = moments.coincidence();
  v.witness_ok = v.witness->cd <= tol * scale && v.witness->dc <= tol * scale &&
                 v.anti_witness->cc <= tol * scale && v.anti_witness->dd <= tol * scale;
  return v;
}

}  // namespace bellfield
