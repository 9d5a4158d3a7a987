#pragma once

// Truncated multimode Fock space: sparse pure states, convex mixtures and
// normally ordered moments.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <concepts>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "bellfield/errors.hpp"

namespace bellfield {

using cplx = std::complex<double>;

/// Relative tolerance on the squared norm of a state flagged normalized.
inline constexpr double kNormTolerance = 1e-9;
/// Occupations are packed one byte per mode into a 64-bit key.
inline constexpr std::size_t kMaxModes = 8;
inline constexpr int kMaxCutoff = 255;
/// Largest Poisson tail a truncated coherent state may drop.
inline constexpr double kCoherentTailTolerance = 1e-12;

class ModeLayout {
 public:
  ModeLayout(std::vector<std::string> labels, int cutoff)
      : labels_(std::move(labels)), cutoff_(cutoff) {
    if (labels_.empty()) fail(ErrorKind::invalid_argument, "mode layout needs at least one mode");
    if (labels_.size() > kMaxModes) {
      fail(ErrorKind::invalid_argument,
           "mode layout supports at most " + std::to_string(kMaxModes) + " modes");
    }
    if (cutoff_ < 0 || cutoff_ > kMaxCutoff) {
      fail(ErrorKind::invalid_argument,
           "cutoff must lie in [0, " + std::to_string(kMaxCutoff) + "], got " +
               std::to_string(cutoff_));
    }
    for (std::size_t i = 0; i < labels_.size(); ++i) {
      if (labels_[i].empty()) fail(ErrorKind::invalid_argument, "mode labels must be nonempty");
      for (std::size_t j = 0; j < i; ++j) {
        if (labels_[i] == labels_[j]) {
          fail(ErrorKind::invalid_argument, "duplicate mode label '" + labels_[i] + "'");
        }
      }
    }
  }

  const std::vector<std::string>& labels() const noexcept { return labels_; }
  std::size_t size() const noexcept { return labels_.size(); }
  int cutoff() const noexcept { return cutoff_; }

  bool contains(std::string_view label) const noexcept {
    return std::find(labels_.begin(), labels_.end(), label) != labels_.end();
  }

  std::size_t index_of(std::string_view label) const {
    auto it = std::find(labels_.begin(), labels_.end(), label);
    if (it == labels_.end()) {
      fail(ErrorKind::unknown_mode, "unknown mode '" + std::string(label) + "'");
    }
    return static_cast<std::size_t>(it - labels_.begin());
  }

  bool operator==(const ModeLayout&) const = default;

 private:
  std::vector<std::string> labels_;
  int cutoff_;
};

/// Photon numbers of every mode, packed so that mode 0 is the most
/// significant byte; the integer order is therefore lexicographic.
class Occupation {
 public:
  constexpr Occupation() = default;

  static Occupation from(std::span<const int> counts) {
    if (counts.size() > kMaxModes) fail(ErrorKind::invalid_argument, "too many modes in occupation");
    Occupation occ;
    for (std::size_t m = 0; m < counts.size(); ++m) {
      if (counts[m] < 0 || counts[m] > kMaxCutoff) {
        fail(ErrorKind::invalid_argument,
             "occupation number " + std::to_string(counts[m]) + " out of range");
      }
      occ = occ.with(m, counts[m]);
    }
    return occ;
  }

  static constexpr Occupation from_bits(std::uint64_t bits) {
    Occupation occ;
    occ.bits_ = bits;
    return occ;
  }

  constexpr int operator[](std::size_t mode) const {
    return static_cast<int>((bits_ >> shift(mode)) & 0xffu);
  }

  constexpr Occupation with(std::size_t mode, int n) const {
    Occupation occ;
    occ.bits_ = (bits_ & ~(std::uint64_t{0xff} << shift(mode))) |
                (static_cast<std::uint64_t>(n) << shift(mode));
    return occ;
  }

  constexpr int total() const {
    int sum = 0;
    for (std::size_t m = 0; m < kMaxModes; ++m) sum += (*this)[m];
    return sum;
  }

  std::vector<int> to_vector(std::size_t modes) const {
    std::vector<int> out(modes);
    for (std::size_t m = 0; m < modes; ++m) out[m] = (*this)[m];
    return out;
  }

  constexpr std::uint64_t bits() const { return bits_; }

  auto operator<=>(const Occupation&) const = default;

 private:
  static constexpr int shift(std::size_t mode) { return static_cast<int>(8 * (kMaxModes - 1 - mode)); }

  std::uint64_t bits_ = 0;
};

struct BasisTerm {
  Occupation occ;
  cplx amp;
};

enum class Normalization { require, renormalize };

/// A normalized pure state on a truncated multimode Fock space. Amplitudes
/// are stored sparsely, sorted by occupation; the object is immutable.
class MultiModeState {
 public:
  static MultiModeState assemble(ModeLayout layout, std::vector<BasisTerm> terms,
                                 Normalization policy) {
    for (const auto& t : terms) {
      for (std::size_t m = layout.size(); m < kMaxModes; ++m) {
        if (t.occ[m] != 0) fail(ErrorKind::invalid_argument, "occupation has more modes than layout");
      }
      if (t.occ.total() > layout.cutoff()) {
        fail(ErrorKind::invalid_argument,
             "occupation total " + std::to_string(t.occ.total()) + " exceeds cutoff " +
                 std::to_string(layout.cutoff()));
      }
    }
    std::sort(terms.begin(), terms.end(),
              [](const BasisTerm& x, const BasisTerm& y) { return x.occ < y.occ; });
    std::vector<BasisTerm> merged;
    merged.reserve(terms.size());
    for (const auto& t : terms) {
      if (!merged.empty() && merged.back().occ == t.occ) {
        merged.back().amp += t.amp;
      } else {
        merged.push_back(t);
      }
    }
    double norm2 = 0.0;
    for (const auto& t : merged) norm2 += std::norm(t.amp);
    const double floor = kPruneAmplitude * std::sqrt(norm2);
    std::erase_if(merged, [floor](const BasisTerm& t) { return std::abs(t.amp) <= floor; });
    norm2 = 0.0;
    for (const auto& t : merged) norm2 += std::norm(t.amp);
    if (policy == Normalization::renormalize) {
      if (norm2 == 0.0) fail(ErrorKind::invalid_argument, "state has no nonzero amplitude");
      const double scale = 1.0 / std::sqrt(norm2);
      for (auto& t : merged) t.amp *= scale;
    } else if (std::abs(norm2 - 1.0) > kNormTolerance) {
      fail(ErrorKind::invalid_argument,
           "state is not normalized (|psi|^2 = " + std::to_string(norm2) + ")");
    }
    return MultiModeState(std::move(layout), std::move(merged));
  }

  const ModeLayout& layout() const noexcept { return layout_; }
  std::span<const BasisTerm> terms() const noexcept { return terms_; }

  cplx amplitude(Occupation occ) const {
    auto it = std::lower_bound(terms_.begin(), terms_.end(), occ,
                               [](const BasisTerm& t, Occupation o) { return t.occ < o; });
    if (it != terms_.end() && it->occ == occ) return it->amp;
    return {0.0, 0.0};
  }

  cplx amplitude(std::span<const int> counts) const { return amplitude(Occupation::from(counts)); }

  double norm_squared() const {
    double sum = 0.0;
    for (const auto& t : terms_) sum += std::norm(t.amp);
    return sum;
  }

 private:
  // Relative to the state norm. Amplitudes this small carry no weight at
  // double precision and only bloat the sparse map after interference.
  static constexpr double kPruneAmplitude = 1e-17;

  MultiModeState(ModeLayout layout, std::vector<BasisTerm> terms)
      : layout_(std::move(layout)), terms_(std::move(terms)) {}

  ModeLayout layout_;
  std::vector<BasisTerm> terms_;
};

struct WeightedState {
  double weight;
  MultiModeState state;
};

/// Convex mixture of pure states sharing one layout (a density operator as a
/// pure-state ensemble).
class MixedState {
 public:
  explicit MixedState(std::vector<WeightedState> components) : components_(std::move(components)) {
    if (components_.empty()) fail(ErrorKind::invalid_argument, "mixture needs at least one component");
    double total = 0.0;
    for (const auto& c : components_) {
      if (!(c.weight >= 0.0) || !std::isfinite(c.weight)) {
        fail(ErrorKind::invalid_argument, "mixture weights must be nonnegative");
      }
      if (!(c.state.layout() == components_.front().state.layout())) {
        fail(ErrorKind::invalid_argument, "mixture components must share one mode layout");
      }
      total += c.weight;
    }
    if (std::abs(total - 1.0) > kNormTolerance) {
      fail(ErrorKind::invalid_argument, "mixture weights sum to " + std::to_string(total));
    }
  }

  MixedState(MultiModeState pure) : MixedState(std::vector<WeightedState>{{1.0, std::move(pure)}}) {}

  const ModeLayout& layout() const noexcept { return components_.front().state.layout(); }
  std::span<const WeightedState> components() const noexcept { return components_; }

 private:
  std::vector<WeightedState> components_;
};

template <typename S>
concept FockState = std::same_as<std::remove_cvref_t<S>, MultiModeState> ||
                    std::same_as<std::remove_cvref_t<S>, MixedState>;

template <typename F>
void for_each_component(const MultiModeState& s, F&& f) {
  f(1.0, s);
}

template <typename F>
void for_each_component(const MixedState& s, F&& f) {
  for (const auto& c : s.components()) f(c.weight, c.state);
}

/// Applies a state-to-state map to every component, keeping the weights.
template <typename F>
MixedState map_components(const MixedState& s, F&& f) {
  std::vector<WeightedState> out;
  out.reserve(s.components().size());
  for (const auto& c : s.components()) out.push_back({c.weight, f(c.state)});
  return MixedState(std::move(out));
}

// ---------------------------------------------------------------------------
// Construction

struct KetTerm {
  std::vector<int> occ;
  cplx amp;
};

/// Normalized superposition proportional to the given terms.
inline MultiModeState make_pure(const ModeLayout& layout, std::span<const KetTerm> terms) {
  std::vector<BasisTerm> basis;
  basis.reserve(terms.size());
  for (const auto& t : terms) {
    if (t.occ.size() != layout.size()) {
      fail(ErrorKind::invalid_argument, "occupation tuple has " + std::to_string(t.occ.size()) +
                                            " entries, layout has " +
                                            std::to_string(layout.size()) + " modes");
    }
    basis.push_back({Occupation::from(t.occ), t.amp});
  }
  return MultiModeState::assemble(layout, std::move(basis), Normalization::renormalize);
}

inline MultiModeState make_pure(const ModeLayout& layout, std::initializer_list<KetTerm> terms) {
  return make_pure(layout, std::span<const KetTerm>(terms.begin(), terms.size()));
}

inline MultiModeState vacuum(const ModeLayout& layout) {
  return MultiModeState::assemble(layout, {{Occupation{}, 1.0}}, Normalization::require);
}

inline MultiModeState fock_ket(const ModeLayout& layout, std::span<const int> counts) {
  if (counts.size() != layout.size()) fail(ErrorKind::invalid_argument, "occupation size mismatch");
  return MultiModeState::assemble(layout, {{Occupation::from(counts), 1.0}}, Normalization::require);
}

inline MultiModeState fock_ket(const ModeLayout& layout, std::initializer_list<int> counts) {
  return fock_ket(layout, std::span<const int>(counts.begin(), counts.size()));
}

/// Cutoff policy for a coherent amplitude: ceil(|a|^2 + 8|a| + 10). The mean
/// photon number plus eight standard deviations plus a constant margin keeps
/// the dropped Poisson tail below 1e-12 for every |a|.
inline int coherent_cutoff(double abs_alpha) {
  return static_cast<int>(std::ceil(abs_alpha * abs_alpha + 8.0 * abs_alpha + 10.0));
}

/// Probability mass of Poisson(mean) above `cutoff`.
inline double poisson_tail(double mean, int cutoff) {
  if (mean <= 0.0) return 0.0;
  double tail = 0.0;
  for (int n = cutoff + 1;; ++n) {
    const double term =
        std::exp(-mean + n * std::log(mean) - std::lgamma(static_cast<double>(n) + 1.0));
    tail += term;
    if (n > mean && term < 1e-30) break;
    if (n > cutoff + 100000) break;
  }
  return tail;
}

namespace detail {

template <typename F>
void for_each_occupation(std::size_t modes, int cutoff, F&& f) {
  std::vector<int> counts(modes, 0);
  auto rec = [&](auto&& self, std::size_t m, int remaining) -> void {
    if (m == modes) {
      f(std::span<const int>(counts));
      return;
    }
    for (int n = 0; n <= remaining; ++n) {
      counts[m] = n;
      self(self, m + 1, remaining - n);
    }
    counts[m] = 0;
  };
  rec(rec, 0, cutoff);
}

// sqrt(n! / (n-k)!)
inline double sqrt_falling(int n, int k) {
  double v = 1.0;
  for (int i = 0; i < k; ++i) v *= static_cast<double>(n - i);
  return std::sqrt(v);
}

}  // namespace detail

/// Product coherent state truncated at the layout cutoff and renormalized.
inline MultiModeState make_coherent(const ModeLayout& layout, std::span<const cplx> alphas) {
  if (alphas.size() != layout.size()) {
    fail(ErrorKind::invalid_argument, "need one coherent amplitude per mode");
  }
  double mean = 0.0;
  for (auto a : alphas) {
    if (!std::isfinite(a.real()) || !std::isfinite(a.imag())) {
      fail(ErrorKind::invalid_argument, "coherent amplitude must be finite");
    }
    mean += std::norm(a);
  }
  const double tail = poisson_tail(mean, layout.cutoff());
  if (tail >= kCoherentTailTolerance) {
    fail(ErrorKind::cutoff_too_small,
         "cutoff " + std::to_string(layout.cutoff()) + " drops Poisson tail " +
             std::to_string(tail) + " for mean photon number " + std::to_string(mean) +
             "; use at least " + std::to_string(coherent_cutoff(std::sqrt(mean))));
  }
  // alpha^n / sqrt(n!) per mode, by recurrence
  std::vector<std::vector<cplx>> powers(layout.size(), std::vector<cplx>(layout.cutoff() + 1));
  for (std::size_t m = 0; m < layout.size(); ++m) {
    powers[m][0] = 1.0;
    for (int n = 1; n <= layout.cutoff(); ++n) {
      powers[m][n] = powers[m][n - 1] * alphas[m] / std::sqrt(static_cast<double>(n));
    }
  }
  std::vector<BasisTerm> terms;
  detail::for_each_occupation(layout.size(), layout.cutoff(), [&](std::span<const int> counts) {
    cplx amp = 1.0;
    for (std::size_t m = 0; m < counts.size(); ++m) amp *= powers[m][counts[m]];
    terms.push_back({Occupation::from(counts), amp});
  });
  return MultiModeState::assemble(layout, std::move(terms), Normalization::renormalize);
}

inline MultiModeState make_coherent(const ModeLayout& layout, std::initializer_list<cplx> alphas) {
  return make_coherent(layout, std::span<const cplx>(alphas.begin(), alphas.size()));
}

/// Single-mode coherent state with the policy cutoff.
inline MultiModeState coherent_state(const std::string& label, cplx alpha) {
  return make_coherent(ModeLayout({label}, coherent_cutoff(std::abs(alpha))), {alpha});
}

// ---------------------------------------------------------------------------
// Structural operations

inline MultiModeState tensor(const MultiModeState& s1, const MultiModeState& s2) {
  const auto& l1 = s1.layout();
  const auto& l2 = s2.layout();
  std::vector<std::string> labels = l1.labels();
  for (const auto& label : l2.labels()) {
    if (l1.contains(label)) fail(ErrorKind::invalid_argument, "mode label collision '" + label + "'");
    labels.push_back(label);
  }
  ModeLayout layout(std::move(labels), l1.cutoff() + l2.cutoff());
  const int shift = static_cast<int>(8 * l1.size());
  std::vector<BasisTerm> terms;
  terms.reserve(s1.terms().size() * s2.terms().size());
  for (const auto& t1 : s1.terms()) {
    for (const auto& t2 : s2.terms()) {
      terms.push_back({Occupation::from_bits(t1.occ.bits() | (t2.occ.bits() >> shift)), t1.amp * t2.amp});
    }
  }
  const double norm2 = s1.norm_squared() * s2.norm_squared();
  return MultiModeState::assemble(std::move(layout), std::move(terms),
                                  std::abs(norm2 - 1.0) <= kNormTolerance ? Normalization::require
                                                                          : Normalization::renormalize);
}

/// Same amplitudes under new mode names (positionally).
inline MultiModeState relabel(const MultiModeState& s, std::vector<std::string> labels) {
  if (labels.size() != s.layout().size()) fail(ErrorKind::invalid_argument, "relabel size mismatch");
  ModeLayout layout(std::move(labels), s.layout().cutoff());
  return MultiModeState::assemble(std::move(layout), {s.terms().begin(), s.terms().end()},
                                  Normalization::require);
}

/// Reorders modes so that the layout follows `order`, which must be a
/// permutation of the current labels.
inline MultiModeState permute_modes(const MultiModeState& s, const std::vector<std::string>& order) {
  const auto& layout = s.layout();
  if (order.size() != layout.size()) fail(ErrorKind::invalid_argument, "permutation size mismatch");
  std::vector<std::size_t> source(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) source[i] = layout.index_of(order[i]);
  ModeLayout target(order, layout.cutoff());
  std::vector<BasisTerm> terms;
  terms.reserve(s.terms().size());
  for (const auto& t : s.terms()) {
    Occupation occ;
    for (std::size_t i = 0; i < order.size(); ++i) occ = occ.with(i, t.occ[source[i]]);
    terms.push_back({occ, t.amp});
  }
  return MultiModeState::assemble(std::move(target), std::move(terms), Normalization::require);
}

inline cplx inner_product(const MultiModeState& bra, const MultiModeState& ket) {
  if (bra.layout().labels() != ket.layout().labels()) {
    fail(ErrorKind::invalid_argument, "inner product needs identical mode labels");
  }
  cplx sum = 0.0;
  auto b = bra.terms().begin();
  auto k = ket.terms().begin();
  while (b != bra.terms().end() && k != ket.terms().end()) {
    if (b->occ < k->occ) {
      ++b;
    } else if (k->occ < b->occ) {
      ++k;
    } else {
      sum += std::conj(b->amp) * k->amp;
      ++b;
      ++k;
    }
  }
  return sum;
}

inline double fidelity(const MultiModeState& a, const MultiModeState& b) {
  return std::norm(inner_product(a, b));
}

// ---------------------------------------------------------------------------
// Moments

struct MomentFactor {
  std::string mode;
  int creations = 0;
  int annihilations = 0;
};

/// Normally ordered product  prod_m (a_m^dag)^{p_m} (a_m)^{q_m}.
struct MomentSpec {
  std::vector<MomentFactor> factors;

  MomentSpec adjoint() const {
    MomentSpec out;
    for (const auto& f : factors) out.factors.push_back({f.mode, f.annihilations, f.creations});
    return out;
  }
};

namespace detail {

struct ResolvedMoment {
  std::array<int, kMaxModes> create{};
  std::array<int, kMaxModes> annihilate{};
};

inline ResolvedMoment resolve(const ModeLayout& layout, const MomentSpec& spec) {
  ResolvedMoment r;
  std::array<bool, kMaxModes> seen{};
  for (const auto& f : spec.factors) {
    const auto m = layout.index_of(f.mode);
    if (seen[m]) fail(ErrorKind::invalid_argument, "mode '" + f.mode + "' appears twice in moment");
    if (f.creations < 0 || f.annihilations < 0) {
      fail(ErrorKind::invalid_argument, "moment exponents must be nonnegative");
    }
    seen[m] = true;
    r.create[m] = f.creations;
    r.annihilate[m] = f.annihilations;
  }
  return r;
}

inline cplx pure_moment(const MultiModeState& s, const ResolvedMoment& r) {
  const std::size_t modes = s.layout().size();
  const int cutoff = s.layout().cutoff();
  cplx sum = 0.0;
  for (const auto& t : s.terms()) {
    Occupation target = t.occ;
    double factor = 1.0;
    bool alive = true;
    int total = 0;
    for (std::size_t m = 0; m < modes; ++m) {
      const int n = t.occ[m];
      const int lowered = n - r.annihilate[m];
      if (lowered < 0) {
        alive = false;
        break;
      }
      const int raised = lowered + r.create[m];
      total += raised;
      if (total > cutoff) {
        alive = false;
        break;
      }
      factor *= sqrt_falling(n, r.annihilate[m]) * sqrt_falling(raised, r.create[m]);
      target = target.with(m, raised);
    }
    if (!alive) continue;
    const cplx bra = s.amplitude(target);
    if (bra != 0.0) sum += std::conj(bra) * t.amp * factor;
  }
  return sum;
}

}  // namespace detail

/// Expectation value of a normally ordered monomial, exact on the truncated
/// space: annihilators act on the ket, creators on the bra. Mixtures are
/// averaged by weight.
template <FockState S>
cplx normal_moment(const S& state, const MomentSpec& spec) {
  const auto resolved = detail::resolve(state.layout(), spec);
  cplx sum = 0.0;
  for_each_component(state, [&](double w, const MultiModeState& s) {
    sum += w * detail::pure_moment(s, resolved);
  });
  return sum;
}

/// <n_m> for one mode.
template <FockState S>
double mean_photon_number(const S& state, const std::string& mode) {
  return normal_moment(state, MomentSpec{{{mode, 1, 1}}}).real();
}

// ---------------------------------------------------------------------------
// Density matrices

inline constexpr double kEigenvalueDropThreshold = 1e-12;

/// Eigendecomposition of a single-mode density matrix (Fock basis |0>..|d-1>)
/// into a pure-state ensemble ordered by decreasing weight. Each eigenvector's
/// phase is fixed so its largest component is real and positive.
inline MixedState mixture_from_density(const Eigen::MatrixXcd& rho, const std::string& label = "a") {
  if (rho.rows() == 0 || rho.rows() != rho.cols()) {
    fail(ErrorKind::invalid_argument, "density matrix must be square and nonempty");
  }
  if (rho.rows() - 1 > kMaxCutoff) fail(ErrorKind::invalid_argument, "density matrix too large");
  if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > kNormTolerance) {
    fail(ErrorKind::invalid_argument, "density matrix is not hermitian");
  }
  const double trace = rho.trace().real();
  if (std::abs(trace - 1.0) > kNormTolerance) {
    fail(ErrorKind::invalid_argument, "density matrix trace is " + std::to_string(trace));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(rho);
  if (solver.info() != Eigen::Success) fail(ErrorKind::invalid_argument, "eigendecomposition failed");
  const auto& values = solver.eigenvalues();
  const auto& vectors = solver.eigenvectors();
  if (values.minCoeff() < -kNormTolerance) {
    fail(ErrorKind::invalid_argument,
         "density matrix has negative eigenvalue " + std::to_string(values.minCoeff()));
  }

  const ModeLayout layout({label}, static_cast<int>(rho.rows()) - 1);
  std::vector<WeightedState> components;
  double kept = 0.0;
  for (Eigen::Index k = values.size() - 1; k >= 0; --k) {
    if (values[k] < kEigenvalueDropThreshold) continue;
    Eigen::VectorXcd v = vectors.col(k);
    Eigen::Index peak = 0;
    for (Eigen::Index i = 1; i < v.size(); ++i) {
      if (std::abs(v[i]) > std::abs(v[peak]) + 1e-14) peak = i;
    }
    v *= std::conj(v[peak]) / std::abs(v[peak]);
    std::vector<BasisTerm> terms;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      terms.push_back({Occupation{}.with(0, static_cast<int>(i)), v[i]});
    }
    components.push_back(
        {values[k], MultiModeState::assemble(layout, std::move(terms), Normalization::renormalize)});
    kept += values[k];
  }
  for (auto& c : components) c.weight /= kept;
  return MixedState(std::move(components));
}

}  // namespace bellfield
