#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "bellfield/correlation.hpp"
#include "bellfield/homodyne.hpp"
#include "bellfield/state_zoo.hpp"
#include "support.hpp"

using namespace bellfield;
using Catch::Matchers::WithinAbs;

namespace {

constexpr double kPi = std::numbers::pi;

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::invalid_argument;
}

MultiModeState random_four_mode(std::mt19937_64& rng, int cutoff = 3, double density = 0.5) {
  return testing::random_state(ModeLayout(interferometer_labels(), cutoff), rng, density);
}

MultiModeState coherent_with_lo() {
  const auto pair = coherent_pair(1.0, 1.0);
  return homodyne_network_state(pair, optimal_lo_config(pair));
}

}  // namespace

TEST_CASE("correlators of the phase-sum entangled state") {
  const auto s = entangled(EntangledVariant::phase_sum);
  for (auto backend : {Backend::expansion, Backend::evolution}) {
    const auto c = output_correlators(s, {0.0, 0.0}, backend);
    CHECK_THAT(c.cd, WithinAbs(0.0, 1e-15));
    CHECK_THAT(c.dc, WithinAbs(0.0, 1e-15));
    CHECK_THAT(c.cc + c.dd, WithinAbs(1.0, 1e-15));
  }
  CHECK_THAT(correlation_E(s, {0.0, 0.0}), WithinAbs(1.0, 1e-15));
  CHECK_THAT(correlation_E(s, {kPi / 3, 2 * kPi / 3}), WithinAbs(-1.0, 1e-15));
  CHECK_THAT(correlation_E(s, {kPi / 3, 2 * kPi / 3}, Backend::evolution), WithinAbs(-1.0, 1e-14));
}

TEST_CASE("correlators of the two-photon network at zero phases") {
  const auto c = output_correlators(two_photon_network(), {0.0, 0.0}, Backend::checked);
  CHECK_THAT(c.cd, WithinAbs(0.0, 1e-15));
  CHECK_THAT(c.dc, WithinAbs(0.0, 1e-15));
}

TEST_CASE("vacuum has no coincidences") {
  const auto vac = vacuum(ModeLayout(interferometer_labels(), 0));
  const auto c = output_correlators(vac, {0.3, 0.4}, Backend::checked);
  CHECK(c.sum() == 0.0);
  CHECK(kind_of([&] { correlation_E(vac, {0.0, 0.0}); }) == ErrorKind::zero_coincidence);
  CHECK(kind_of([&] { amplitudes(vac); }) == ErrorKind::zero_coincidence);
  CHECK(kind_of([&] { sinusoid_residual(vac, 8); }) == ErrorKind::zero_coincidence);
}

TEST_CASE("layout must be the four interferometer channels") {
  const auto two = vacuum(ModeLayout({"a1", "a2"}, 1));
  CHECK(kind_of([&] { output_correlators(two, {0.0, 0.0}); }) == ErrorKind::invalid_argument);
  const auto shuffled = permute_modes(entangled(EntangledVariant::phase_sum), {"b2", "a2", "b1", "a1"});
  const auto amps = amplitudes(shuffled);
  CHECK_THAT(amps.a2, WithinAbs(1.0, 1e-15));
}

TEST_CASE("amplitude examples") {
  const auto sum = amplitudes(entangled(EntangledVariant::phase_sum));
  CHECK_THAT(sum.a1, WithinAbs(0.0, 1e-15));
  CHECK_THAT(sum.a2, WithinAbs(1.0, 1e-15));
  const auto diff = amplitudes(entangled(EntangledVariant::phase_difference));
  CHECK_THAT(diff.a1, WithinAbs(1.0, 1e-15));
  CHECK_THAT(diff.a2, WithinAbs(0.0, 1e-15));
  const auto split = amplitudes(epr_split_network(coherent_state("a", 1.0)));
  CHECK_THAT(split.a1, WithinAbs(0.5, 1e-12));
  CHECK_THAT(split.a2, WithinAbs(0.5, 1e-12));
}

TEST_CASE("predict_E examples") {
  CHECK_THAT(predict_E({1, 0, 0, 0}, {0.4, 0.4}), WithinAbs(1.0, 1e-15));
  CHECK_THAT(predict_E({0, 1, 0, 0}, {kPi / 2, kPi / 2}), WithinAbs(-1.0, 1e-15));
  CHECK_THAT(predict_E({0.5, 0.5, 0, 0}, {0.0, 0.0}), WithinAbs(1.0, 1e-15));
}

TEST_CASE("E is a first-harmonic sinusoid in the phases") {
  CHECK(sinusoid_residual(entangled(EntangledVariant::phase_sum), 8) < 1e-9);
  CHECK(sinusoid_residual(coherent_with_lo(), 8) < 1e-9);
  const auto cat = split_cat({0.5, 0.0});
  CHECK(sinusoid_residual(homodyne_network_state(cat, optimal_lo_config(cat)), 8) < 1e-8);
  CHECK(kind_of([] { sinusoid_residual(entangled(EntangledVariant::phase_sum), 3); }) ==
        ErrorKind::invalid_argument);
}

TEST_CASE("backends agree on random four-mode states") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> angle(-2 * kPi, 2 * kPi);
  for (int trial = 0; trial < 40; ++trial) {
    const auto s = random_four_mode(rng);
    const PhaseSetting phases(angle(rng), angle(rng));
    const auto e = output_correlators(s, phases, Backend::expansion);
    const auto v = output_correlators(s, phases, Backend::evolution);
    CHECK_THAT(e.cc, WithinAbs(v.cc, 1e-12));
    CHECK_THAT(e.cd, WithinAbs(v.cd, 1e-12));
    CHECK_THAT(e.dc, WithinAbs(v.dc, 1e-12));
    CHECK_THAT(e.dd, WithinAbs(v.dd, 1e-12));
  }
}

TEST_CASE("backends agree on mixtures") {
  std::mt19937_64 rng(5);
  const auto mix = mixture_from_density(testing::random_density(5, 3, rng));
  const auto network = epr_split_network(mix);
  CHECK_NOTHROW(output_correlators(network, {0.2, 1.9}, Backend::checked));
  CHECK_THAT(correlation_E(network, {0.2, 1.9}, Backend::evolution),
             WithinAbs(correlation_E(network, {0.2, 1.9}), 1e-12));
}

TEST_CASE("E stays within [-1, 1] and A1 + A2 <= 1") {
  std::mt19937_64 rng(2718);
  std::uniform_real_distribution<double> angle(0.0, 2 * kPi);
  for (int trial = 0; trial < 100; ++trial) {
    const auto s = random_four_mode(rng, 3, 0.4);
    const auto amps = amplitudes(s);
    CHECK(amps.a1 >= 0.0);
    CHECK(amps.a2 >= 0.0);
    CHECK(amps.total() <= 1.0 + 1e-9);
    for (int k = 0; k < 5; ++k) {
      const PhaseSetting phases(angle(rng), angle(rng));
      const double e = correlation_E(s, phases);
      CHECK(std::abs(e) <= 1.0 + 1e-12);
      CHECK_THAT(e, WithinAbs(predict_E(amps, phases), 1e-12));
    }
  }
}

TEST_CASE("amplitudes are invariant under global phase") {
  std::mt19937_64 rng(17);
  const auto s = random_four_mode(rng);
  std::vector<KetTerm> rotated;
  for (const auto& t : s.terms()) rotated.push_back({t.occ.to_vector(4), t.amp * std::polar(1.0, 2.1)});
  const auto r = make_pure(s.layout(), rotated);
  const auto a = amplitudes(s), b = amplitudes(r);
  CHECK_THAT(a.a1, WithinAbs(b.a1, 1e-14));
  CHECK_THAT(a.a2, WithinAbs(b.a2, 1e-14));
  CHECK_THAT(a.xi, WithinAbs(b.xi, 1e-12));
  CHECK_THAT(a.zeta, WithinAbs(b.zeta, 1e-12));
}

TEST_CASE("swapping the sides conjugates the phase-difference term") {
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 10; ++trial) {
    const auto s = random_four_mode(rng);
    const auto swapped = relabel(s, {"a2", "b2", "a1", "b1"});
    const auto a = amplitudes(s), b = amplitudes(swapped);
    CHECK_THAT(a.a1, WithinAbs(b.a1, 1e-13));
    CHECK_THAT(a.a2, WithinAbs(b.a2, 1e-13));
    CHECK_THAT(std::remainder(a.xi + b.xi, 2 * kPi), WithinAbs(0.0, 1e-10));
    CHECK_THAT(std::remainder(a.zeta - b.zeta, 2 * kPi), WithinAbs(0.0, 1e-10));
  }
}

TEST_CASE("EPR check") {
  const auto coherent = epr_check(coherent_with_lo(), 1e-9);
  CHECK(coherent.is_epr);
  CHECK(coherent.witness_ok);

  for (double phi : {0.0, 1.0, kPi / 2, kPi}) {
    const auto cat = split_cat({0.5, phi});
    const auto v = epr_check(homodyne_network_state(cat, optimal_lo_config(cat)), 1e-8);
    INFO("phi " << phi);
    CHECK(v.is_epr);
    CHECK(v.witness_ok);
  }

  const auto eq28 = epr_check(entangled(EntangledVariant::phase_sum), 1e-9);
  REQUIRE(eq28.is_epr);
  CHECK_THAT(eq28.phases->theta1(), WithinAbs(0.0, 1e-15));
  CHECK_THAT(eq28.phases->theta2(), WithinAbs(0.0, 1e-15));
  CHECK(eq28.witness->cd == 0.0);
  CHECK(eq28.witness->dc == 0.0);
  CHECK(eq28.witness->cc + eq28.witness->dd > 0.0);
  // second EPR phase choice: E = -1 with cc, dd vanishing
  CHECK(eq28.anti_witness->cc < 1e-12);
  CHECK(eq28.anti_witness->dd < 1e-12);
  CHECK_THAT(correlation_E(entangled(EntangledVariant::phase_sum), *eq28.anti_phases), WithinAbs(-1.0, 1e-12));

  std::mt19937_64 rng(4);
  const auto split = epr_split_network(testing::random_state(ModeLayout({"a"}, 5), rng));
  const auto v = epr_check(split, 1e-9, Backend::evolution);
  CHECK(v.is_epr);
  CHECK(v.witness->cd < 1e-9);
  CHECK(v.witness->dc < 1e-9);

  std::mt19937_64 rng2(6);
  const auto generic = epr_check(random_four_mode(rng2), 1e-9);
  CHECK_FALSE(generic.is_epr);
  CHECK_FALSE(generic.phases.has_value());
}
