#pragma once

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "bellfield/fock.hpp"

namespace testing {

using bellfield::cplx;

/// Random normalized state: every occupation up to the cutoff gets an
/// amplitude with probability `density`.
inline bellfield::MultiModeState random_state(const bellfield::ModeLayout& layout, std::mt19937_64& rng,
                                              double density = 1.0) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> coin;
  std::vector<bellfield::KetTerm> terms;
  bellfield::detail::for_each_occupation(layout.size(), layout.cutoff(), [&](std::span<const int> counts) {
    if (coin(rng) < density) terms.push_back({{counts.begin(), counts.end()}, {normal(rng), normal(rng)}});
  });
  if (terms.empty()) terms.push_back({std::vector<int>(layout.size(), 0), 1.0});
  return bellfield::make_pure(layout, terms);
}

/// Random density matrix of rank `rank` on `dim` Fock levels.
inline Eigen::MatrixXcd random_density(int dim, int rank, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXcd g(dim, rank);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < rank; ++j) g(i, j) = cplx(normal(rng), normal(rng));
  }
  Eigen::MatrixXcd rho = g * g.adjoint();
  return rho / rho.trace().real();
}

/// Annihilation operator on `dim` Fock levels.
inline Eigen::MatrixXcd lowering(int dim) {
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(dim, dim);
  for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

/// Dense oracle: <psi| prod (a_m^dag)^p (a_m)^q |psi> on the product space
/// with cutoff+1 levels per mode (mode 0 most significant).
inline cplx dense_moment(const bellfield::MultiModeState& s, const std::vector<int>& creations,
                         const std::vector<int>& annihilations) {
  const int modes = static_cast<int>(s.layout().size());
  const int levels = s.layout().cutoff() + 1;
  int dim = 1;
  for (int m = 0; m < modes; ++m) dim *= levels;
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(dim);
  for (const auto& t : s.terms()) {
    int index = 0;
    for (int m = 0; m < modes; ++m) index = index * levels + t.occ[m];
    psi(index) = t.amp;
  }
  Eigen::MatrixXcd op = Eigen::MatrixXcd::Identity(1, 1);
  const Eigen::MatrixXcd a = lowering(levels);
  for (int m = 0; m < modes; ++m) {
    Eigen::MatrixXcd factor = Eigen::MatrixXcd::Identity(levels, levels);
    for (int k = 0; k < creations[m]; ++k) factor = factor * a.adjoint();
    for (int k = 0; k < annihilations[m]; ++k) factor = factor * a;
    Eigen::MatrixXcd next(op.rows() * levels, op.cols() * levels);
    for (int i = 0; i < op.rows(); ++i) {
      for (int j = 0; j < op.cols(); ++j) next.block(i * levels, j * levels, levels, levels) = op(i, j) * factor;
    }
    op = next;
  }
  return psi.dot(op * psi);  // dot conjugates the first argument
}

}  // namespace testing
