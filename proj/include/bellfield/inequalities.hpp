#pragma once

// Bell quantity B, its maximum over the four local phases, and the
// classification of (A1, A2) against the stochastic-field, Bell, Tsirelson
// and quantum bounds.

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "bellfield/correlation.hpp"
#include "bellfield/format.hpp"

namespace bellfield {

struct BellSettings {
  double theta1 = 0.0;
  double theta1p = 0.0;
  double theta2 = 0.0;
  double theta2p = 0.0;
};

/// B = E(t1, t2) - E(t1', t2) + E(t1, t2') + E(t1', t2')
template <typename CorrelationFn>
double bell_combination(CorrelationFn&& e, const BellSettings& s) {
  return e(s.theta1, s.theta2) - e(s.theta1p, s.theta2) + e(s.theta1, s.theta2p) +
         e(s.theta1p, s.theta2p);
}

template <FockState S>
double bell_B(const S& state, const BellSettings& settings, Backend backend = Backend::expansion) {
  for (double t : {settings.theta1, settings.theta1p, settings.theta2, settings.theta2p}) {
    if (!std::isfinite(t)) fail(ErrorKind::invalid_argument, "Bell settings must be finite");
  }
  if (backend == Backend::expansion) {
    const auto moments = InterferometerMoments::of(state);
    return bell_combination(
        [&](double x, double y) { return correlation_from(moments.correlators({x, y})); }, settings);
  }
  return bell_combination([&](double x, double y) { return correlation_E(state, {x, y}, backend); },
                          settings);
}

/// 2 sqrt(2) sqrt(A1^2 + A2^2)
inline double analytic_bell_max(const CorrelationAmplitudes& amps) {
  return 2.0 * std::numbers::sqrt2 * std::sqrt(amps.sum_of_squares());
}

/// Settings reaching the analytic maximum. With unit vectors u(x) = (cos x,
/// sin x) the correlation is bilinear, E(x, y) = u(x)^T K u(y); the CHSH
/// optimum over unit vectors takes the singular vectors of K.
inline BellSettings analytic_bell_settings(const CorrelationAmplitudes& amps) {
  const double cx = std::cos(amps.xi), sx = std::sin(amps.xi);
  const double cz = std::cos(amps.zeta), sz = std::sin(amps.zeta);
  Eigen::Matrix2d k;
  k << amps.a1 * cx + amps.a2 * cz, amps.a1 * sx - amps.a2 * sz,  //
      -amps.a1 * sx - amps.a2 * sz, amps.a1 * cx - amps.a2 * cz;
  Eigen::JacobiSVD<Eigen::Matrix2d> svd(k, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto s = svd.singularValues();
  const Eigen::Matrix2d u = svd.matrixU();
  const Eigen::Matrix2d v = svd.matrixV();
  const double t = std::atan2(s[1], s[0]);
  const Eigen::Vector2d b = std::cos(t) * v.col(0) - std::sin(t) * v.col(1);
  const Eigen::Vector2d bp = std::cos(t) * v.col(0) + std::sin(t) * v.col(1);
  auto angle = [](const Eigen::Vector2d& w) { return canonical_angle(std::atan2(w[1], w[0])); };
  return {angle(u.col(0)), angle(u.col(1)), angle(b), angle(bp)};
}

struct BellMaxResult {
  double b_max = 0.0;       ///< from the numeric search
  BellSettings settings;    ///< where the search ended
  double analytic = 0.0;    ///< 2 sqrt(2) sqrt(A1^2 + A2^2)
  BellSettings analytic_settings;
  CorrelationAmplitudes amplitudes;
};

/// Search results this far below the analytic value indicate a bug.
inline constexpr double kOptimizerShortfall = 1e-4;

namespace detail {

/// Coarse grid over the 4-torus followed by coordinate ascent. B is a pure
/// first-harmonic sinusoid in each angle separately, so every coordinate step
/// is an exact maximization from three samples.
template <typename CorrelationFn>
BellSettings search_bell_max(CorrelationFn&& e, int grid) {
  const double step = 2.0 * std::numbers::pi / grid;
  std::vector<double> table(static_cast<std::size_t>(grid * grid));
  for (int i = 0; i < grid; ++i) {
    for (int j = 0; j < grid; ++j) table[i * grid + j] = e(i * step, j * step);
  }
  auto at = [&](int i, int j) { return table[i * grid + j]; };
  double best = -std::numeric_limits<double>::infinity();
  std::array<int, 4> arg{};
  // strict comparison in lexicographic loop order: ties go to the first setting
  for (int i = 0; i < grid; ++i) {
    for (int ip = 0; ip < grid; ++ip) {
      for (int j = 0; j < grid; ++j) {
        for (int jp = 0; jp < grid; ++jp) {
          const double b = at(i, j) - at(ip, j) + at(i, jp) + at(ip, jp);
          if (b > best) {
            best = b;
            arg = {i, ip, j, jp};
          }
        }
      }
    }
  }
  std::array<double, 4> x{arg[0] * step, arg[1] * step, arg[2] * step, arg[3] * step};
  auto value = [&](const std::array<double, 4>& p) {
    return bell_combination(e, BellSettings{p[0], p[1], p[2], p[3]});
  };
  double current = value(x);
  for (int sweep = 0; sweep < 5000; ++sweep) {
    const double before = current;
    for (int c = 0; c < 4; ++c) {
      auto probe = x;
      probe[c] = 0.0;
      const double f0 = value(probe);
      probe[c] = std::numbers::pi / 2.0;
      const double f1 = value(probe);
      probe[c] = std::numbers::pi;
      const double f2 = value(probe);
      const double mean = 0.5 * (f0 + f2);
      const double cos_part = 0.5 * (f0 - f2);
      const double sin_part = f1 - mean;
      probe[c] = std::atan2(sin_part, cos_part);
      const double candidate = value(probe);
      if (candidate > current) {
        x = probe;
        current = candidate;
      }
    }
    if (current - before <= 1e-15) break;
  }
  return {canonical_angle(x[0]), canonical_angle(x[1]), canonical_angle(x[2]), canonical_angle(x[3])};
}

}  // namespace detail

template <FockState S>
BellMaxResult bell_max(const S& state, int grid = 24) {
  const auto moments = InterferometerMoments::of(state);
  BellMaxResult r;
  r.amplitudes = amplitudes_from(moments);  // throws ZeroCoincidence
  r.analytic = analytic_bell_max(r.amplitudes);
  r.analytic_settings = analytic_bell_settings(r.amplitudes);
  auto e = [&](double x, double y) { return correlation_from(moments.correlators({x, y})); };
  r.settings = detail::search_bell_max(e, grid);
  r.b_max = bell_combination(e, r.settings);
  if (r.b_max < r.analytic - kOptimizerShortfall) {
    fail(ErrorKind::optimizer_shortfall, "Bell search reached " + std::to_string(r.b_max) +
                                             " below analytic " + std::to_string(r.analytic));
  }
  return r;
}

// ---------------------------------------------------------------------------
// Classification

inline constexpr double kBoundaryTolerance = 1e-9;

enum class Region { classical, nonclassical_local, bell_violating, unphysical };

constexpr std::string_view to_string(Region r) noexcept {
  switch (r) {
    case Region::classical: return "classical";
    case Region::nonclassical_local: return "nonclassical-local";
    case Region::bell_violating: return "bell-violating";
    case Region::unphysical: return "unphysical";
  }
  return "unknown";
}

struct InequalityReport {
  double a1 = 0.0;
  double a2 = 0.0;
  std::array<double, 2> stochastic_margin{};  ///< 1/2 - A_k
  bool stochastic_ok = false;
  double bell_margin = 0.0;  ///< 1/2 - (A1^2 + A2^2)
  bool bell_ok = false;
  double tsirelson_margin = 0.0;  ///< 1 - (A1^2 + A2^2)
  bool tsirelson_ok = false;
  double quantum_margin = 0.0;  ///< 1 - (A1 + A2)
  bool quantum_ok = false;
  double b_max = 0.0;
  Region region = Region::classical;
  bool epr_boundary = false;  ///< on the line A1 + A2 = 1; a flag on top of the region
};

/// Region precedence: unphysical, then bell-violating, then classical (both
/// A_k <= 1/2) or nonclassical-local.
inline InequalityReport classify(const CorrelationAmplitudes& amps, double state_b_max) {
  InequalityReport r;
  r.a1 = amps.a1;
  r.a2 = amps.a2;
  r.b_max = state_b_max;
  r.stochastic_margin = {0.5 - amps.a1, 0.5 - amps.a2};
  r.stochastic_ok = r.stochastic_margin[0] >= -kBoundaryTolerance && r.stochastic_margin[1] >= -kBoundaryTolerance;
  const double sum_sq = amps.sum_of_squares();
  r.bell_margin = 0.5 - sum_sq;
  // the b_max condition keeps bell_ok consistent with a reported B_max > 2
  r.bell_ok = r.bell_margin >= -kBoundaryTolerance / 2.0 && state_b_max <= 2.0 + kBoundaryTolerance;
  r.tsirelson_margin = 1.0 - sum_sq;
  r.tsirelson_ok = r.tsirelson_margin >= -kBoundaryTolerance;
  r.quantum_margin = 1.0 - amps.total();
  r.quantum_ok = r.quantum_margin >= -kBoundaryTolerance;
  r.epr_boundary = std::abs(r.quantum_margin) <= kBoundaryTolerance;
  if (!r.quantum_ok) {
    r.region = Region::unphysical;
  } else if (!r.bell_ok) {
    r.region = Region::bell_violating;
  } else if (r.stochastic_ok) {
    r.region = Region::classical;
  } else {
    r.region = Region::nonclassical_local;
  }
  return r;
}

struct BoundaryPoint {
  std::string curve;
  double a1 = 0.0;
  double a2 = 0.0;
};

/// Boundary curves of the amplitude plane, first quadrant only: the quantum
/// line A1 + A2 = 1, the Bell circle A1^2 + A2^2 = 1/2, the stochastic box
/// edges A_k = 1/2 and the Tsirelson circle A1^2 + A2^2 = 1. Every curve is
/// traversed with increasing A1 and includes its endpoints exactly.
inline std::vector<BoundaryPoint> amplitude_plane_boundaries(int samples_per_curve) {
  if (samples_per_curve < 2) fail(ErrorKind::invalid_argument, "need at least two samples per curve");
  const int n = samples_per_curve;
  std::vector<BoundaryPoint> rows;
  auto fraction = [n](int i) { return static_cast<double>(i) / (n - 1); };
  for (int i = 0; i < n; ++i) rows.push_back({"quantum", fraction(i), 1.0 - fraction(i)});
  auto circle = [&](const char* id, double radius) {
    for (int i = 0; i < n; ++i) {
      const double t = 0.5 * std::numbers::pi * fraction(i);
      double a1 = radius * std::sin(t);
      double a2 = radius * std::cos(t);
      if (i == n - 1) {
        a1 = radius;
        a2 = 0.0;
      }
      rows.push_back({id, a1, a2});
    }
  };
  circle("bell", std::sqrt(0.5));
  // (0, 1/2) -> (1/2, 1/2) -> (1/2, 0)
  for (int i = 0; i < n; ++i) rows.push_back({"stochastic", 0.5 * fraction(i), 0.5});
  for (int i = 1; i < n; ++i) rows.push_back({"stochastic", 0.5, 0.5 * (1.0 - fraction(i))});
  circle("tsirelson", 1.0);
  return rows;
}

inline std::string boundaries_csv(const std::vector<BoundaryPoint>& rows) {
  std::string out = "curve,a1,a2\n";
  for (const auto& r : rows) {
    out += r.curve + "," + format_number(r.a1, 6) + "," + format_number(r.a2, 6) + "\n";
  }
  return out;
}

}  // namespace bellfield
