#pragma once

// Example states with closed-form predictions: the two maximally entangled
// four-mode kets, the two-photon network, coherent pairs, the split single
// photon and split cat states.

#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "bellfield/homodyne.hpp"
#include "bellfield/optics.hpp"

namespace bellfield {

/// Which interference term the maximally entangled ket switches on.
enum class EntangledVariant {
  phase_sum,         // |1010> + |0101>: A1 = 0, A2 = 1
  phase_difference,  // |1001> + |0110>: A1 = 1, A2 = 0
};

inline MultiModeState entangled(EntangledVariant variant) {
  const ModeLayout layout(interferometer_labels(), 2);
  const double h = 1.0 / std::numbers::sqrt2;
  if (variant == EntangledVariant::phase_sum) {
    return make_pure(layout, {{{1, 0, 1, 0}, h}, {{0, 1, 0, 1}, h}});
  }
  return make_pure(layout, {{{1, 0, 0, 1}, h}, {{0, 1, 1, 0}, h}});
}

inline MultiModeState coherent_pair(cplx alpha1, cplx alpha2, std::optional<int> cutoff = std::nullopt) {
  const double magnitude = std::sqrt(std::norm(alpha1) + std::norm(alpha2));
  return make_coherent(ModeLayout({"a1", "a2"}, cutoff.value_or(coherent_cutoff(magnitude))), {alpha1, alpha2});
}

/// (|1,0> + |0,1>)/sqrt(2) on (a1, a2).
inline MultiModeState split_single_photon() {
  const double h = 1.0 / std::numbers::sqrt2;
  return make_pure(ModeLayout({"a1", "a2"}, 1), {{{1, 0}, h}, {{0, 1}, h}});
}

struct CatParams {
  cplx alpha = 1.0;
  double phi = 0.0;
};

inline constexpr double kCatDegeneracy = 1e-12;

/// N = [2 (1 + exp(-4|alpha|^2) cos phi)]^(-1/2)
inline double cat_normalization(const CatParams& p) {
  const double overlap = std::exp(-4.0 * std::norm(p.alpha)) * std::cos(p.phi);
  if (1.0 + overlap <= kCatDegeneracy) fail(ErrorKind::cat_degenerate, "cat superposition cancels to zero");
  return 1.0 / std::sqrt(2.0 * (1.0 + overlap));
}

namespace detail {

// amplitudes of N(|a> + e^{i phi}|-a>) on `modes` modes sharing amplitude a:
// N exp(-modes |a|^2 / 2) prod a^{n_k}/sqrt(n_k!) (1 + e^{i phi} (-1)^{sum n})
inline MultiModeState cat_expansion(const ModeLayout& layout, cplx a, double phi, double normalization) {
  std::vector<cplx> powers(layout.cutoff() + 1);
  powers[0] = 1.0;
  for (int n = 1; n <= layout.cutoff(); ++n) powers[n] = powers[n - 1] * a / std::sqrt(static_cast<double>(n));
  const double envelope = normalization * std::exp(-0.5 * static_cast<double>(layout.size()) * std::norm(a));
  const cplx relative = std::polar(1.0, phi);
  std::vector<BasisTerm> terms;
  double kept = 0.0;
  for_each_occupation(layout.size(), layout.cutoff(), [&](std::span<const int> counts) {
    cplx amp = envelope;
    int total = 0;
    for (int n : counts) {
      amp *= powers[n];
      total += n;
    }
    amp *= 1.0 + (total % 2 == 0 ? relative : -relative);
    kept += std::norm(amp);
    terms.push_back({Occupation::from(counts), amp});
  });
  // the analytic normalization makes 1 - kept the probability lost to truncation
  if (1.0 - kept >= kCoherentTailTolerance) {
    fail(ErrorKind::cutoff_too_small, "cutoff " + std::to_string(layout.cutoff()) +
                                          " truncates cat state probability " + std::to_string(1.0 - kept));
  }
  return MultiModeState::assemble(layout, std::move(terms), Normalization::renormalize);
}

}  // namespace detail

/// N(|alpha>|alpha> + e^{i phi}|-alpha>|-alpha>) on (a1, a2), expanded
/// directly. The default cutoff follows the coherent policy for sqrt(2)|alpha|;
/// any smaller cutoff is accepted as long as the truncated probability stays
/// below the coherent tail tolerance.
inline MultiModeState split_cat(const CatParams& p, std::optional<int> cutoff = std::nullopt) {
  const double n = cat_normalization(p);
  const ModeLayout layout({"a1", "a2"}, cutoff.value_or(coherent_cutoff(std::numbers::sqrt2 * std::abs(p.alpha))));
  return detail::cat_expansion(layout, p.alpha, p.phi, n);
}

/// Single-mode cat N'(|sqrt2 alpha> + e^{i phi}|-sqrt2 alpha>) on mode "a".
inline MultiModeState single_mode_cat(const CatParams& p, int cutoff) {
  const CatParams wide{std::numbers::sqrt2 * p.alpha, p.phi};
  // N' for amplitude sqrt2 alpha: [2(1 + exp(-2|sqrt2 alpha|^2) cos phi)]^(-1/2) = N
  const double n = cat_normalization(p);
  return detail::cat_expansion(ModeLayout({"a"}, cutoff), wide.alpha, p.phi, n);
}

/// The split cat produced by mixing the single-mode cat with vacuum: the cat
/// enters the second port so both outputs carry +alpha.
inline MultiModeState split_cat_by_beamsplitter(const CatParams& p, int cutoff) {
  const auto input = tensor(vacuum(ModeLayout({"a1"}, 0)), relabel(single_mode_cat(p, cutoff), {"a2"}));
  return beamsplitter(input, "a1", "a2");
}

struct CatPrediction {
  CoherenceFunctions g;
  double a1 = 0.0;
  double a2 = 0.0;
  double sum_sq = 0.0;
  double b_max = 0.0;
};

inline CatPrediction cat_predictions(const CatParams& p) {
  const double x = std::exp(-4.0 * std::norm(p.alpha)) * std::cos(p.phi);
  if (1.0 - x <= kCatDegeneracy) {
    fail(ErrorKind::cat_degenerate, "g20 is singular: exp(-4|alpha|^2) cos(phi) = 1");
  }
  if (1.0 + x <= kCatDegeneracy) {
    fail(ErrorKind::cat_degenerate, "cat superposition cancels to zero");
  }
  CatPrediction r;
  const double g20 = (1.0 + x) / (1.0 - x);
  r.g = {1.0, g20, g20 * g20};
  r.a1 = 0.5 * (1.0 - x);
  r.a2 = 0.5 * (1.0 + x);
  r.sum_sq = 0.5 * (1.0 + x * x);
  r.b_max = 2.0 * std::numbers::sqrt2 * std::sqrt(r.sum_sq);
  return r;
}

// ---------------------------------------------------------------------------
// Named lookup

struct ZooOptions {
  cplx alpha = 1.0;
  double phi = 0.0;
  std::optional<int> cutoff;
};

struct ZooState {
  std::string name;
  MultiModeState state;
  bool signal_only = false;  ///< two-mode (a1, a2) state awaiting local oscillators
};

inline const std::vector<std::string>& zoo_names() {
  static const std::vector<std::string> names{"eq28", "eq29", "two-photon", "coherent", "split-photon", "split-cat"};
  return names;
}

inline bool is_zoo_name(const std::string& name) {
  for (const auto& n : zoo_names()) {
    if (n == name) return true;
  }
  return false;
}

inline ZooState zoo_state(const std::string& name, const ZooOptions& options = {}) {
  if (name == "eq28") return {name, entangled(EntangledVariant::phase_sum), false};
  if (name == "eq29") return {name, entangled(EntangledVariant::phase_difference), false};
  if (name == "two-photon") return {name, two_photon_network(), false};
  if (name == "coherent") return {name, coherent_pair(options.alpha, options.alpha, options.cutoff), true};
  if (name == "split-photon") return {name, split_single_photon(), true};
  if (name == "split-cat") return {name, split_cat({options.alpha, options.phi}, options.cutoff), true};
  fail(ErrorKind::invalid_argument, "unknown zoo state '" + name + "'");
}

}  // namespace bellfield
