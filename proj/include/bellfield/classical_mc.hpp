#pragma once

// Monte Carlo ensembles of classical field amplitudes (alpha1, alpha2, beta1,
// beta2) drawn from nonnegative P-distributions, and the correlation
// amplitudes they imply.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <future>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <tuple>
#include <type_traits>
#include <vector>

#include "bellfield/errors.hpp"
#include "bellfield/fock.hpp"

namespace bellfield {

struct FieldSample {
  double weight = 0.0;
  cplx alpha1, alpha2, beta1, beta2;
};

struct ClassicalEnsemble {
  std::vector<FieldSample> samples;
  std::uint64_t seed = 0;
  std::string generator_id;
};

enum class EnsembleKind { delta, thermal, correlated_lo, mixture };

struct EnsembleSpec {
  EnsembleKind kind = EnsembleKind::delta;
  std::array<cplx, 4> point{};      ///< delta: (alpha1, alpha2, beta1, beta2)
  std::array<double, 4> nbar{};     ///< thermal: mean photon number per field; correlated_lo uses the first two
  std::vector<double> part_weights;  ///< mixture
  std::vector<EnsembleSpec> parts;
};

inline EnsembleSpec delta_spec(cplx a1, cplx a2, cplx b1, cplx b2) {
  EnsembleSpec s;
  s.kind = EnsembleKind::delta;
  s.point = {a1, a2, b1, b2};
  return s;
}

inline EnsembleSpec thermal_spec(double nbar) {
  EnsembleSpec s;
  s.kind = EnsembleKind::thermal;
  s.nbar = {nbar, nbar, nbar, nbar};
  return s;
}

inline EnsembleSpec correlated_lo_spec(double nbar) {
  EnsembleSpec s;
  s.kind = EnsembleKind::correlated_lo;
  s.nbar = {nbar, nbar, nbar, nbar};
  return s;
}

inline EnsembleSpec mixture_spec(std::vector<std::pair<double, EnsembleSpec>> parts) {
  EnsembleSpec s;
  s.kind = EnsembleKind::mixture;
  for (auto& [w, spec] : parts) {
    s.part_weights.push_back(w);
    s.parts.push_back(std::move(spec));
  }
  return s;
}

inline constexpr std::size_t kSampleChunk = 4096;

namespace detail {

inline std::string kind_name(EnsembleKind k) {
  switch (k) {
    case EnsembleKind::delta: return "delta";
    case EnsembleKind::thermal: return "thermal";
    case EnsembleKind::correlated_lo: return "correlated_lo";
    case EnsembleKind::mixture: return "mixture";
  }
  return "unknown";
}

inline void validate(const EnsembleSpec& spec) {
  switch (spec.kind) {
    case EnsembleKind::delta:
      for (auto v : spec.point) {
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
          fail(ErrorKind::invalid_argument, "delta point must be finite");
        }
      }
      break;
    case EnsembleKind::thermal:
    case EnsembleKind::correlated_lo:
      for (double n : spec.nbar) {
        if (!(n >= 0.0) || !std::isfinite(n)) {
          fail(ErrorKind::invalid_argument, "thermal mean photon numbers must be finite and >= 0");
        }
      }
      break;
    case EnsembleKind::mixture: {
      if (spec.parts.empty()) fail(ErrorKind::invalid_argument, "mixture needs at least one part");
      if (spec.part_weights.size() != spec.parts.size()) {
        fail(ErrorKind::invalid_argument, "mixture needs one weight per part");
      }
      double total = 0.0;
      for (std::size_t k = 0; k < spec.parts.size(); ++k) {
        const double w = spec.part_weights[k];
        if (!(w >= 0.0) || !std::isfinite(w)) {
          fail(ErrorKind::invalid_argument, "mixture weights must be finite and >= 0");
        }
        validate(spec.parts[k]);
        total += w;
      }
      if (!(total > 0.0)) fail(ErrorKind::invalid_argument, "mixture weights sum to zero");
      break;
    }
  }
}

// circular complex Gaussian with E|z|^2 = nbar
inline cplx circular_gaussian(std::mt19937_64& rng, double nbar) {
  if (nbar == 0.0) return 0.0;
  std::normal_distribution<double> normal(0.0, std::sqrt(nbar / 2.0));
  const double re = normal(rng);
  const double im = normal(rng);
  return {re, im};
}

// chunk c draws from its own engine seeded by (seed, c), so the result does
// not depend on how chunks are scheduled
inline std::vector<FieldSample> gaussian_samples(const EnsembleSpec& spec, std::size_t n, std::uint64_t seed) {
  std::vector<FieldSample> out(n);
  const std::size_t chunks = (n + kSampleChunk - 1) / kSampleChunk;
  const double w = 1.0 / static_cast<double>(n);
  auto fill = [&](std::size_t c) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(c >> 32)};
    std::mt19937_64 rng(seq);
    const std::size_t end = std::min(n, (c + 1) * kSampleChunk);
    for (std::size_t i = c * kSampleChunk; i < end; ++i) {
      FieldSample& s = out[i];
      s.weight = w;
      s.alpha1 = circular_gaussian(rng, spec.nbar[0]);
      s.alpha2 = circular_gaussian(rng, spec.nbar[1]);
      if (spec.kind == EnsembleKind::correlated_lo) {
        s.beta1 = s.alpha1;
        s.beta2 = s.alpha2;
      } else {
        s.beta1 = circular_gaussian(rng, spec.nbar[2]);
        s.beta2 = circular_gaussian(rng, spec.nbar[3]);
      }
    }
  };
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(chunks, std::thread::hardware_concurrency()));
  std::vector<std::future<void>> jobs;
  for (std::size_t t = 0; t < workers; ++t) {
    jobs.push_back(std::async(std::launch::async, [&, t] {
      for (std::size_t c = t; c < chunks; c += workers) fill(c);
    }));
  }
  for (auto& j : jobs) j.get();
  return out;
}

inline std::vector<FieldSample> draw(const EnsembleSpec& spec, std::size_t n, std::uint64_t seed) {
  switch (spec.kind) {
    case EnsembleKind::delta: {
      const auto& p = spec.point;
      return {FieldSample{1.0, p[0], p[1], p[2], p[3]}};
    }
    case EnsembleKind::thermal:
    case EnsembleKind::correlated_lo:
      return gaussian_samples(spec, n, seed);
    case EnsembleKind::mixture: {
      const double total = std::accumulate(spec.part_weights.begin(), spec.part_weights.end(), 0.0);
      std::vector<FieldSample> out;
      for (std::size_t k = 0; k < spec.parts.size(); ++k) {
        const double w = spec.part_weights[k];
        if (w == 0.0) continue;
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(k), 0x6d6978u};
        std::array<std::uint32_t, 2> words{};
        seq.generate(words.begin(), words.end());
        const std::uint64_t sub_seed = (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
        for (auto s : draw(spec.parts[k], n, sub_seed)) {
          s.weight *= w / total;
          out.push_back(s);
        }
      }
      return out;
    }
  }
  return {};
}

}  // namespace detail

/// Deterministic in (spec, n, seed). Thermal kinds draw n samples of weight
/// 1/n; a delta is one point of weight 1; a mixture draws each part with n
/// samples and scales its weights by the part weight.
inline ClassicalEnsemble make_ensemble(const EnsembleSpec& spec, std::size_t n, std::uint64_t seed) {
  if (n < 1) fail(ErrorKind::invalid_argument, "sample count must be >= 1");
  detail::validate(spec);
  ClassicalEnsemble e;
  e.samples = detail::draw(spec, n, seed);
  e.seed = seed;
  e.generator_id = detail::kind_name(spec.kind) + "/mt19937_64/chunk" + std::to_string(kSampleChunk);
  return e;
}

/// Neumaier compensated sum.
template <typename T>
class CompensatedSum {
 public:
  void add(T x) {
    const T t = sum_ + x;
    if constexpr (std::is_same_v<T, double>) {
      if (std::abs(sum_) >= std::abs(x)) {
        comp_ += (sum_ - t) + x;
      } else {
        comp_ += (x - t) + sum_;
      }
    } else {
      compensate(sum_.real(), x.real(), t.real(), re_);
      compensate(sum_.imag(), x.imag(), t.imag(), im_);
    }
    sum_ = t;
  }
  T value() const {
    if constexpr (std::is_same_v<T, double>) {
      return sum_ + comp_;
    } else {
      return sum_ + T(re_, im_);
    }
  }

 private:
  static void compensate(double s, double x, double t, double& c) {
    c += std::abs(s) >= std::abs(x) ? (s - t) + x : (x - t) + s;
  }
  T sum_{};
  double comp_ = 0.0;
  double re_ = 0.0;
  double im_ = 0.0;
};

struct AmplitudeEstimate {
  double a1_hat = 0.0;
  double a2_hat = 0.0;
  double se1 = 0.0;
  double se2 = 0.0;
  std::size_t n = 0;
};

inline constexpr int kBootstrapResamples = 200;
inline constexpr double kDenominatorThreshold = 1e-12;

namespace detail {

struct FieldMoments {
  cplx difference;  // alpha1* beta1 alpha2 beta2*
  cplx sum;         // alpha1* beta1 alpha2* beta2
  double intensity; // (|alpha1|^2 + |beta1|^2)(|alpha2|^2 + |beta2|^2)
};

inline FieldMoments field_moments(const FieldSample& s) {
  const cplx side1 = std::conj(s.alpha1) * s.beta1;
  return {side1 * s.alpha2 * std::conj(s.beta2), side1 * std::conj(s.alpha2) * s.beta2,
          (std::norm(s.alpha1) + std::norm(s.beta1)) * (std::norm(s.alpha2) + std::norm(s.beta2))};
}

inline std::pair<double, double> ratio(cplx difference, cplx sum, double intensity) {
  if (!(intensity > kDenominatorThreshold)) {
    fail(ErrorKind::zero_denominator, "mean field intensity product vanishes");
  }
  return {2.0 * std::abs(difference) / intensity, 2.0 * std::abs(sum) / intensity};
}

}  // namespace detail

/// a1 = 2|<alpha1* beta1 alpha2 beta2*>| / <(|alpha1|^2+|beta1|^2)(|alpha2|^2+|beta2|^2)>,
/// a2 likewise with alpha2* beta2. Standard errors from a weighted bootstrap
/// seeded by the ensemble seed.
inline AmplitudeEstimate estimate_amplitudes(const ClassicalEnsemble& e) {
  if (e.samples.empty()) fail(ErrorKind::invalid_argument, "empty ensemble");
  std::vector<detail::FieldMoments> moments;
  moments.reserve(e.samples.size());
  CompensatedSum<cplx> difference, sum;
  CompensatedSum<double> intensity, weight;
  for (const auto& s : e.samples) {
    if (!(s.weight >= 0.0)) fail(ErrorKind::invalid_argument, "negative sample weight");
    const auto m = detail::field_moments(s);
    moments.push_back(m);
    difference.add(s.weight * m.difference);
    sum.add(s.weight * m.sum);
    intensity.add(s.weight * m.intensity);
    weight.add(s.weight);
  }
  if (std::abs(weight.value() - 1.0) > kNormTolerance) {
    fail(ErrorKind::invalid_argument, "ensemble weights do not sum to 1");
  }
  AmplitudeEstimate est;
  est.n = e.samples.size();
  std::tie(est.a1_hat, est.a2_hat) = detail::ratio(difference.value(), sum.value(), intensity.value());
  if (est.n == 1) return est;

  // resample r draws from its own engine seeded by (ensemble seed, r);
  // resamples run in parallel and are reduced in index order
  std::vector<double> weights(e.samples.size());
  for (std::size_t i = 0; i < weights.size(); ++i) weights[i] = e.samples[i].weight;
  const bool uniform = std::all_of(weights.begin(), weights.end(), [&](double w) { return w == weights.front(); });
  const std::discrete_distribution<std::size_t> weighted(weights.begin(), weights.end());
  std::vector<std::optional<std::pair<double, double>>> replicas(kBootstrapResamples);
  auto resample = [&](int r) {
    std::seed_seq seq{static_cast<std::uint32_t>(e.seed), static_cast<std::uint32_t>(e.seed >> 32),
                      static_cast<std::uint32_t>(r), 0x626f6f74u};
    std::mt19937_64 rng(seq);
    std::uniform_int_distribution<std::size_t> flat(0, est.n - 1);
    auto pick = weighted;
    CompensatedSum<cplx> d, s;
    CompensatedSum<double> in;
    for (std::size_t i = 0; i < est.n; ++i) {
      const auto& m = moments[uniform ? flat(rng) : pick(rng)];
      d.add(m.difference);
      s.add(m.sum);
      in.add(m.intensity);
    }
    const double scale = 1.0 / static_cast<double>(est.n);
    if (in.value() * scale > kDenominatorThreshold) {
      replicas[r] = detail::ratio(d.value() * scale, s.value() * scale, in.value() * scale);
    }
  };
  const int workers = std::max(1, std::min<int>(kBootstrapResamples, std::thread::hardware_concurrency()));
  std::vector<std::future<void>> jobs;
  for (int t = 0; t < workers; ++t) {
    jobs.push_back(std::async(std::launch::async, [&, t] {
      for (int r = t; r < kBootstrapResamples; r += workers) resample(r);
    }));
  }
  for (auto& j : jobs) j.get();

  std::array<CompensatedSum<double>, 2> first, second;
  int usable = 0;
  for (const auto& rep : replicas) {
    if (!rep) continue;
    first[0].add(rep->first);
    second[0].add(rep->first * rep->first);
    first[1].add(rep->second);
    second[1].add(rep->second * rep->second);
    ++usable;
  }
  if (usable > 1) {
    auto spread = [&](int k) {
      const double mean = first[k].value() / usable;
      const double var = (second[k].value() - usable * mean * mean) / (usable - 1);
      return std::sqrt(std::max(0.0, var));
    };
    est.se1 = spread(0);
    est.se2 = spread(1);
  }
  return est;
}

inline constexpr double kStochasticBound = 0.5;
inline constexpr double kBoundSigmas = 3.0;
/// Slack for ensembles whose every resample sits exactly on the bound (SE 0).
inline constexpr double kBoundRounding = 1e-12;

struct BoundReport {
  std::array<bool, 2> within_bound{};
  std::array<double, 2> margin{};  ///< 1/2 - a_k
};

inline BoundReport bound_report(const AmplitudeEstimate& est) {
  BoundReport r;
  r.margin = {kStochasticBound - est.a1_hat, kStochasticBound - est.a2_hat};
  r.within_bound = {est.a1_hat <= kStochasticBound + kBoundSigmas * est.se1 + kBoundRounding,
                    est.a2_hat <= kStochasticBound + kBoundSigmas * est.se2 + kBoundRounding};
  return r;
}

/// |alpha|^2 + |beta|^2 >= 2|alpha beta| on one side of one sample, up to
/// rounding of the three products.
inline bool pointwise_bound_holds(cplx alpha, cplx beta) {
  const double lhs = std::norm(alpha) + std::norm(beta);
  const double rhs = 2.0 * std::abs(alpha) * std::abs(beta);
  return lhs >= rhs * (1.0 - 8.0 * std::numeric_limits<double>::epsilon());
}

/// Number of (sample, side) pairs violating the pointwise bound.
inline std::size_t pointwise_violations(const ClassicalEnsemble& e) {
  std::size_t bad = 0;
  for (const auto& s : e.samples) {
    if (!pointwise_bound_holds(s.alpha1, s.beta1)) ++bad;
    if (!pointwise_bound_holds(s.alpha2, s.beta2)) ++bad;
  }
  return bad;
}

}  // namespace bellfield
