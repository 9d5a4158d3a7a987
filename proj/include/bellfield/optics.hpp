#pragma once

// Phase shifters and 50/50 beamsplitters acting on sparse Fock states, and the
// interferometer networks built from them.
//
// Beamsplitter convention (used everywhere, including the splitting network):
//   c = (a + b)/sqrt(2),  d = (-a + b)/sqrt(2)
// with c written back into the slot of the first mode and d into the second.
// Equivalently a^dag -> (c^dag - d^dag)/sqrt(2), b^dag -> (c^dag + d^dag)/sqrt(2).

#include <cmath>
#include <complex>
#include <map>
#include <mutex>
#include <numbers>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "bellfield/fock.hpp"

namespace bellfield {

inline double canonical_angle(double theta) {
  if (!std::isfinite(theta)) fail(ErrorKind::invalid_argument, "phase must be finite");
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double t = std::fmod(theta, two_pi);
  if (t < 0.0) t += two_pi;
  if (t >= two_pi) t = 0.0;
  return t;
}

/// Interferometer phases (theta_1, theta_2), canonicalized into [0, 2pi).
class PhaseSetting {
 public:
  PhaseSetting() = default;
  PhaseSetting(double theta1, double theta2)
      : theta1_(canonical_angle(theta1)), theta2_(canonical_angle(theta2)) {}

  double theta1() const noexcept { return theta1_; }
  double theta2() const noexcept { return theta2_; }

  bool operator==(const PhaseSetting&) const = default;

 private:
  double theta1_ = 0.0;
  double theta2_ = 0.0;
};

/// Multiplies every amplitude by exp(i n theta), n the occupation of `mode`.
inline MultiModeState phase_shift(const MultiModeState& state, const std::string& mode, double theta) {
  const auto m = state.layout().index_of(mode);
  std::vector<cplx> factor(state.layout().cutoff() + 1);
  for (std::size_t n = 0; n < factor.size(); ++n) factor[n] = std::polar(1.0, theta * static_cast<double>(n));
  std::vector<BasisTerm> terms(state.terms().begin(), state.terms().end());
  for (auto& t : terms) t.amp *= factor[t.occ[m]];
  return MultiModeState::assemble(state.layout(), std::move(terms), Normalization::require);
}

inline MixedState phase_shift(const MixedState& state, const std::string& mode, double theta) {
  return map_components(state, [&](const MultiModeState& s) { return phase_shift(s, mode, theta); });
}

namespace detail {

/// Real (N+1)x(N+1) matrix of the two-mode beamsplitter in the sector with N
/// photons; element (j, k) is <j, N-j| U |k, N-k>.
struct SectorMatrix {
  int total = 0;
  std::vector<double> elements;

  double operator()(int out, int in) const { return elements[out * (total + 1) + in]; }
};

/// Sector matrices are built on first use as U = exp(pi/4 G) with the real
/// antisymmetric generator G = a^dag b - b^dag a restricted to N photons,
///   G|k, N-k> = sqrt((k+1)(N-k)) |k+1, N-k-1> - sqrt(k(N-k+1)) |k-1, N-k+1>,
/// which gives U a^dag U^dag = (a^dag - b^dag)/sqrt2, U b^dag U^dag = (a^dag + b^dag)/sqrt2.
/// The exponential goes through the eigendecomposition of the Hermitian -iG,
/// so every sector is orthogonal to rounding regardless of N.
class SectorCache {
 public:
  static SectorCache& instance() {
    static SectorCache cache;
    return cache;
  }

  const SectorMatrix& get(int total) {
    std::lock_guard lock(mutex_);
    auto it = sectors_.find(total);
    if (it == sectors_.end()) it = sectors_.emplace(total, build(total)).first;
    return it->second;
  }

 private:
  SectorCache() = default;

  static SectorMatrix build(int n) {
    SectorMatrix out;
    out.total = n;
    out.elements.assign(static_cast<std::size_t>((n + 1) * (n + 1)), 0.0);
    if (n == 0) {
      out.elements[0] = 1.0;
      return out;
    }
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(n + 1, n + 1);
    for (int k = 0; k < n; ++k) {
      const double g = std::sqrt(static_cast<double>((k + 1) * (n - k)));
      h(k + 1, k) = cplx(0.0, -g);  // -i G(k+1, k)
      h(k, k + 1) = cplx(0.0, g);   // -i G(k, k+1), G(k, k+1) = -g
    }
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(h);
    const double angle = std::numbers::pi / 4.0;
    Eigen::VectorXcd phases(n + 1);
    for (int i = 0; i <= n; ++i) phases(i) = std::polar(1.0, angle * eig.eigenvalues()(i));
    const Eigen::MatrixXcd u = eig.eigenvectors() * phases.asDiagonal() * eig.eigenvectors().adjoint();
    for (int j = 0; j <= n; ++j) {
      for (int k = 0; k <= n; ++k) out.elements[j * (n + 1) + k] = u(j, k).real();
    }
    return out;
  }

  std::mutex mutex_;
  std::map<int, SectorMatrix> sectors_;  // node-based: references stay valid
};

}  // namespace detail

inline const detail::SectorMatrix& beamsplitter_sector(int total) {
  return detail::SectorCache::instance().get(total);
}

/// 50/50 beamsplitter between two distinct modes; photon number is conserved
/// sector by sector, so the truncated space is mapped onto itself exactly.
inline MultiModeState beamsplitter(const MultiModeState& state, const std::string& mode_a,
                                   const std::string& mode_b) {
  const auto& layout = state.layout();
  const auto ia = layout.index_of(mode_a);
  const auto ib = layout.index_of(mode_b);
  if (ia == ib) fail(ErrorKind::invalid_argument, "beamsplitter needs two distinct modes");

  struct Group {
    Occupation base;  // a-slot holds the sector total, b-slot zero
    std::vector<cplx> input;
  };
  std::vector<Group> groups;
  std::unordered_map<std::uint64_t, std::size_t> index;
  index.reserve(state.terms().size());
  int max_total = 0;
  for (const auto& t : state.terms()) {
    const int na = t.occ[ia];
    const int n = na + t.occ[ib];
    max_total = std::max(max_total, n);
    const Occupation key = t.occ.with(ia, n).with(ib, 0);
    auto [it, inserted] = index.try_emplace(key.bits(), groups.size());
    if (inserted) groups.push_back({key, std::vector<cplx>(static_cast<std::size_t>(n + 1))});
    groups[it->second].input[na] = t.amp;
  }
  std::vector<const detail::SectorMatrix*> sectors(max_total + 1);
  for (int n = 0; n <= max_total; ++n) sectors[n] = &beamsplitter_sector(n);

  std::vector<BasisTerm> out;
  for (const auto& g : groups) {
    const int n = g.base[ia];
    const auto& u = *sectors[n];
    for (int j = 0; j <= n; ++j) {
      cplx amp = 0.0;
      for (int k = 0; k <= n; ++k) amp += u(j, k) * g.input[k];
      if (amp != 0.0) out.push_back({g.base.with(ia, j).with(ib, n - j), amp});
    }
  }
  return MultiModeState::assemble(layout, std::move(out), Normalization::require);
}

inline MixedState beamsplitter(const MixedState& state, const std::string& mode_a,
                               const std::string& mode_b) {
  return map_components(state, [&](const MultiModeState& s) { return beamsplitter(s, mode_a, mode_b); });
}

/// Labels of the four interferometer input channels, side 1 then side 2.
inline const std::vector<std::string>& interferometer_labels() {
  static const std::vector<std::string> labels{"a1", "b1", "a2", "b2"};
  return labels;
}

/// Splits a single-mode state over the four channels: mixed with vacuum once
/// (one output per side), then each output mixed with vacuum again.
inline MultiModeState epr_split_network(const MultiModeState& input) {
  if (input.layout().size() != 1) {
    fail(ErrorKind::invalid_argument, "splitting network takes a single-mode input");
  }
  const auto padded = tensor(relabel(input, {"a1"}), vacuum(ModeLayout({"b1", "a2", "b2"}, 0)));
  auto state = beamsplitter(padded, "a1", "a2");
  state = beamsplitter(state, "a1", "b1");
  return beamsplitter(state, "a2", "b2");
}

inline MixedState epr_split_network(const MixedState& input) {
  if (input.layout().size() != 1) {
    fail(ErrorKind::invalid_argument, "splitting network takes a single-mode input");
  }
  return map_components(input, [](const MultiModeState& s) { return epr_split_network(s); });
}

/// Two independent photons, each mixed with vacuum: photon 1 enters the second
/// port of the (a1, a2) splitter and photon 2 the second port of (b1, b2),
/// giving (|10> + |01>)_{a1 a2} (|10> + |01>)_{b1 b2} / 2.
inline MultiModeState two_photon_network() {
  const ModeLayout layout(interferometer_labels(), 2);
  auto state = fock_ket(layout, {0, 0, 1, 1});
  state = beamsplitter(state, "a1", "a2");
  return beamsplitter(state, "b1", "b2");
}

}  // namespace bellfield
