#pragma once

// Local-oscillator setup: the b-channels carry coherent states
// |beta_k e^{i theta_k}>, so the correlation amplitudes reduce to coherence
// functions of the two signal arms a1, a2.

#include <cmath>
#include <complex>
#include <string>
#include <utility>
#include <vector>

#include "bellfield/correlation.hpp"
#include "bellfield/fock.hpp"

namespace bellfield {

inline constexpr double kIntensityThreshold = 1e-12;
inline constexpr double kDegenerateLOThreshold = 1e-12;

struct CoherenceFunctions {
  cplx g11;     ///< <a1^dag a2> / sqrt(<n1><n2>)
  cplx g20;     ///< <a1^dag a2^dag> / sqrt(<n1><n2>)
  double g22;   ///< <a1^dag a2^dag a2 a1> / (<n1><n2>)
};

/// Real oscillator amplitudes; the phases carry the local settings.
struct LOConfig {
  double beta1 = 0.0;
  double beta2 = 0.0;
  double theta1 = 0.0;
  double theta2 = 0.0;
};

namespace detail {

inline void require_signal_layout(const ModeLayout& layout) {
  if (layout.size() != 2 || !layout.contains("a1") || !layout.contains("a2")) {
    fail(ErrorKind::invalid_argument, "signal state must live on modes (a1, a2)");
  }
}

struct SignalMoments {
  double n1 = 0.0;
  double n2 = 0.0;
  double n12 = 0.0;  // <n1 n2>
  cplx first;        // <a1^dag a2>
  cplx anomalous;    // <a1^dag a2^dag>
};

template <FockState S>
SignalMoments signal_moments(const S& state) {
  require_signal_layout(state.layout());
  SignalMoments m;
  m.n1 = normal_moment(state, MomentSpec{{{"a1", 1, 1}}}).real();
  m.n2 = normal_moment(state, MomentSpec{{{"a2", 1, 1}}}).real();
  m.n12 = normal_moment(state, MomentSpec{{{"a1", 1, 1}, {"a2", 1, 1}}}).real();
  m.first = normal_moment(state, MomentSpec{{{"a1", 1, 0}, {"a2", 0, 1}}});
  m.anomalous = normal_moment(state, MomentSpec{{{"a1", 1, 0}, {"a2", 1, 0}}});
  return m;
}

inline void require_intensity(const SignalMoments& m) {
  if (m.n1 <= kIntensityThreshold) fail(ErrorKind::zero_intensity, "mode a1 carries no photons");
  if (m.n2 <= kIntensityThreshold) fail(ErrorKind::zero_intensity, "mode a2 carries no photons");
}

}  // namespace detail

template <FockState S>
CoherenceFunctions coherence_functions(const S& state_a) {
  const auto m = detail::signal_moments(state_a);
  detail::require_intensity(m);
  const double root = std::sqrt(m.n1 * m.n2);
  return {m.first / root, m.anomalous / root, std::max(0.0, m.n12 / (m.n1 * m.n2))};
}

/// beta1 beta2 = sqrt(<n1 n2>),  beta1 / beta2 = sqrt(<n1> / <n2>).
template <FockState S>
std::pair<double, double> optimal_lo(const S& state_a) {
  const auto m = detail::signal_moments(state_a);
  detail::require_intensity(m);
  if (m.n12 <= kDegenerateLOThreshold) {
    fail(ErrorKind::degenerate_lo,
         "<n1 n2> vanishes: the optimal local oscillator amplitudes are zero");
  }
  const double product = std::sqrt(m.n12);
  const double ratio = std::sqrt(m.n1 / m.n2);
  return {std::sqrt(product * ratio), std::sqrt(product / ratio)};
}

/// A1 = |g11| / (1 + sqrt(g22)),  A2 = |g20| / (1 + sqrt(g22)).
inline std::pair<double, double> amplitudes_from_g(const CoherenceFunctions& g) {
  if (!(g.g22 >= 0.0)) fail(ErrorKind::invalid_argument, "g22 must be nonnegative");
  const double denominator = 1.0 + std::sqrt(g.g22);
  return {std::abs(g.g11) / denominator, std::abs(g.g20) / denominator};
}

/// Four-mode state (a1, b1, a2, b2): the signal arms tensored with the two
/// oscillators |beta_k e^{i theta_k}>, each truncated by the coherent cutoff
/// policy unless `lo_cutoff` overrides it.
inline MultiModeState homodyne_network_state(const MultiModeState& state_a, const LOConfig& lo,
                                             int lo_cutoff = -1) {
  detail::require_signal_layout(state_a.layout());
  if (!(lo.beta1 >= 0.0) || !(lo.beta2 >= 0.0)) {
    fail(ErrorKind::invalid_argument, "oscillator amplitudes must be nonnegative");
  }
  auto oscillator = [&](const char* label, double beta, double theta) {
    const int cutoff = lo_cutoff >= 0 ? lo_cutoff : coherent_cutoff(beta);
    return make_coherent(ModeLayout({label}, cutoff), {std::polar(beta, theta)});
  };
  const auto joint = tensor(tensor(state_a, oscillator("b1", lo.beta1, lo.theta1)),
                            oscillator("b2", lo.beta2, lo.theta2));
  if (joint.layout().cutoff() > kMaxCutoff) fail(ErrorKind::cutoff_too_small, "combined cutoff exhausted");
  return permute_modes(joint, interferometer_labels());
}

inline MixedState homodyne_network_state(const MixedState& state_a, const LOConfig& lo, int lo_cutoff = -1) {
  return map_components(state_a,
                        [&](const MultiModeState& s) { return homodyne_network_state(s, lo, lo_cutoff); });
}

/// The oscillator configuration with optimal amplitudes and zero phases.
template <FockState S>
LOConfig optimal_lo_config(const S& state_a) {
  const auto [b1, b2] = optimal_lo(state_a);
  return {b1, b2, 0.0, 0.0};
}

}  // namespace bellfield
