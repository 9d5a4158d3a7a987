#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "bellfield/fock.hpp"
#include "bellfield/state_io.hpp"
#include "support.hpp"

using namespace bellfield;
using Catch::Approx;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::invalid_argument;
}

const double kHalfRoot = 1.0 / std::numbers::sqrt2;

}  // namespace

TEST_CASE("mode layout validation") {
  CHECK_NOTHROW(ModeLayout({"a1", "b1"}, 0));
  CHECK(kind_of([] { ModeLayout({}, 2); }) == ErrorKind::invalid_argument);
  CHECK(kind_of([] { ModeLayout({"a", "a"}, 2); }) == ErrorKind::invalid_argument);
  CHECK(kind_of([] { ModeLayout({"a"}, -1); }) == ErrorKind::invalid_argument);
  CHECK(kind_of([] { ModeLayout({""}, 1); }) == ErrorKind::invalid_argument);
  const ModeLayout layout({"a1", "b1", "a2"}, 3);
  CHECK(layout.index_of("a2") == 2);
  CHECK(kind_of([&] { (void)layout.index_of("zz"); }) == ErrorKind::unknown_mode);
}

TEST_CASE("make_pure normalizes and orthogonal kets have zero overlap") {
  const ModeLayout two({"a", "b"}, 1);
  const auto vac = make_pure(two, {{{0, 0}, 1.0}});
  CHECK(vac.norm_squared() == Approx(1.0));
  CHECK(vac.terms().size() == 1);

  const auto plus = make_pure(two, {{{1, 0}, 1.0}, {{0, 1}, 1.0}});
  CHECK_THAT(plus.amplitude(std::vector<int>{1, 0}).real(), WithinAbs(kHalfRoot, 1e-15));
  CHECK_THAT(plus.amplitude(std::vector<int>{0, 1}).real(), WithinAbs(kHalfRoot, 1e-15));

  const auto minus = make_pure(two, {{{1, 0}, 1.0}, {{0, 1}, -1.0}});
  CHECK_THAT(std::abs(inner_product(plus, minus)), WithinAbs(0.0, 1e-15));
}

TEST_CASE("make_pure rejects bad input") {
  const ModeLayout two({"a", "b"}, 1);
  CHECK(kind_of([&] { make_pure(two, {{{0, 0}, 0.0}}); }) == ErrorKind::invalid_argument);
  CHECK(kind_of([&] { make_pure(two, {{{1, 1}, 1.0}}); }) == ErrorKind::invalid_argument);
  CHECK(kind_of([&] { make_pure(two, {{{1}, 1.0}}); }) == ErrorKind::invalid_argument);
  CHECK(kind_of([&] { make_pure(two, {{{-1, 0}, 1.0}}); }) == ErrorKind::invalid_argument);
}

TEST_CASE("repeated occupations are merged") {
  const ModeLayout one({"a"}, 2);
  const auto s = make_pure(one, {{{1}, 1.0}, {{1}, 1.0}, {{2}, 2.0}});
  CHECK(s.terms().size() == 2);
  CHECK_THAT(std::abs(s.amplitude(std::vector<int>{1})), WithinAbs(kHalfRoot, 1e-15));
}

TEST_CASE("coherent state moments") {
  const ModeLayout one({"a"}, 20);
  const auto s = make_coherent(one, {1.0});
  CHECK_THAT(normal_moment(s, {{{"a", 1, 1}}}).real(), WithinAbs(1.0, 1e-10));
  CHECK_THAT(normal_moment(s, {{{"a", 2, 2}}}).real(), WithinAbs(1.0, 1e-9));
  CHECK_THAT(std::abs(normal_moment(s, {{{"a", 0, 1}}}) - cplx(1.0)), WithinAbs(0.0, 1e-10));

  const auto vac = make_coherent(one, {0.0});
  CHECK(vac.terms().size() == 1);
  CHECK(vac.amplitude(std::vector<int>{0}) == cplx(1.0));
}

TEST_CASE("coherent cutoff policy bounds the Poisson tail") {
  for (double a : {0.0, 0.1, 0.5, 1.0, 2.0, 3.0, 5.0, 8.0}) {
    INFO("alpha = " << a);
    CHECK(poisson_tail(a * a, coherent_cutoff(a)) < kCoherentTailTolerance);
  }
  CHECK(kind_of([] { make_coherent(ModeLayout({"a"}, 5), {2.0}); }) == ErrorKind::cutoff_too_small);
}

TEST_CASE("large coherent amplitudes stay finite") {
  const cplx alpha(9.0, 3.0);
  const auto s = coherent_state("a", alpha);
  CHECK(s.layout().cutoff() == coherent_cutoff(std::abs(alpha)));
  CHECK_THAT(mean_photon_number(s, "a"), WithinAbs(std::norm(alpha), 1e-8));
  CHECK_THAT(std::abs(normal_moment(s, {{{"a", 0, 1}}}) - alpha), WithinAbs(0.0, 1e-8));
}

TEST_CASE("tensor products") {
  const ModeLayout a({"a"}, 1), b({"b"}, 1);
  const auto vv = tensor(vacuum(a), vacuum(b));
  CHECK(vv.layout().labels() == std::vector<std::string>{"a", "b"});
  CHECK(vv.layout().cutoff() == 2);
  CHECK(vv.amplitude(std::vector<int>{0, 0}) == cplx(1.0));

  const auto one_one = tensor(fock_ket(a, {1}), fock_ket(b, {1}));
  CHECK(one_one.terms().size() == 1);
  CHECK(one_one.amplitude(std::vector<int>{1, 1}) == cplx(1.0));

  CHECK(kind_of([&] { tensor(vacuum(a), vacuum(a)); }) == ErrorKind::invalid_argument);
}

TEST_CASE("tensor product moments factorize") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const auto s1 = testing::random_state(ModeLayout({"x", "y"}, 3), rng);
    const auto s2 = testing::random_state(ModeLayout({"z"}, 4), rng);
    const auto joint = tensor(s1, s2);
    CHECK_THAT(joint.norm_squared(), WithinAbs(s1.norm_squared() * s2.norm_squared(), 1e-12));
    const MomentSpec left{{{"x", 1, 2}, {"y", 0, 1}}};
    const MomentSpec right{{{"z", 2, 1}}};
    const MomentSpec both{{{"x", 1, 2}, {"y", 0, 1}, {"z", 2, 1}}};
    const cplx expected = normal_moment(s1, left) * normal_moment(s2, right);
    CHECK_THAT(std::abs(normal_moment(joint, both) - expected), WithinAbs(0.0, 1e-12));
  }
}

TEST_CASE("normal moment examples") {
  const ModeLayout one({"a"}, 2);
  CHECK_THAT(normal_moment(fock_ket(one, {2}), {{{"a", 2, 2}}}).real(), WithinAbs(2.0, 1e-15));

  const ModeLayout four({"a1", "b1", "a2", "b2"}, 2);
  const auto eq28 = make_pure(four, {{{1, 0, 1, 0}, 1.0}, {{0, 1, 0, 1}, 1.0}});
  const MomentSpec cross{{{"a1", 1, 0}, {"b1", 0, 1}, {"a2", 1, 0}, {"b2", 0, 1}}};
  CHECK_THAT(normal_moment(eq28, cross).real(), WithinAbs(0.5, 1e-15));
  CHECK_THAT(normal_moment(eq28, cross).imag(), WithinAbs(0.0, 1e-15));

  CHECK(kind_of([&] { normal_moment(eq28, {{{"c", 1, 1}}}); }) == ErrorKind::unknown_mode);
  CHECK(kind_of([&] { normal_moment(eq28, {{{"a1", 1, 1}, {"a1", 1, 0}}}); }) == ErrorKind::invalid_argument);
  CHECK(kind_of([&] { normal_moment(eq28, {{{"a1", -1, 1}}}); }) == ErrorKind::invalid_argument);
}

TEST_CASE("normal moment properties on random states") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> exponent(0, 2);
  for (int trial = 0; trial < 30; ++trial) {
    const ModeLayout layout({"p", "q", "r"}, 4);
    const auto s = testing::random_state(layout, rng, 0.6);
    CHECK_THAT(normal_moment(s, MomentSpec{}).real(), WithinAbs(1.0, 1e-12));
    for (const auto& m : layout.labels()) {
      const cplx n = normal_moment(s, {{{m, 1, 1}}});
      CHECK(std::abs(n.imag()) < 1e-14);
      CHECK(n.real() >= 0.0);
      CHECK(n.real() <= layout.cutoff() + 1e-12);
    }
    MomentSpec spec;
    std::vector<int> p(3), q(3);
    for (int m = 0; m < 3; ++m) {
      p[m] = exponent(rng);
      q[m] = exponent(rng);
      spec.factors.push_back({layout.labels()[m], p[m], q[m]});
    }
    const cplx value = normal_moment(s, spec);
    CHECK_THAT(std::abs(normal_moment(s, spec.adjoint()) - std::conj(value)), WithinAbs(0.0, 1e-12));
    CHECK_THAT(std::abs(value - testing::dense_moment(s, p, q)), WithinAbs(0.0, 1e-10));
  }
}

TEST_CASE("mixture moments average over components") {
  const ModeLayout one({"a"}, 3);
  const MixedState mix({{0.25, fock_ket(one, {1})}, {0.75, fock_ket(one, {3})}});
  CHECK_THAT(normal_moment(mix, {{{"a", 1, 1}}}).real(), WithinAbs(0.25 + 2.25, 1e-15));
  CHECK(kind_of([&] { MixedState({{0.5, fock_ket(one, {1})}, {0.4, fock_ket(one, {2})}}); }) ==
        ErrorKind::invalid_argument);
  CHECK(kind_of([&] {
          MixedState({{0.5, fock_ket(one, {1})}, {0.5, fock_ket(ModeLayout({"b"}, 3), {2})}});
        }) == ErrorKind::invalid_argument);
}

TEST_CASE("mixture_from_density examples") {
  Eigen::MatrixXcd vac = Eigen::MatrixXcd::Zero(1, 1);
  vac(0, 0) = 1.0;
  const auto m = mixture_from_density(vac);
  REQUIRE(m.components().size() == 1);
  CHECK(m.components()[0].weight == Approx(1.0));
  CHECK(m.components()[0].state.amplitude(std::vector<int>{0}) == cplx(1.0));

  Eigen::MatrixXcd proj(2, 2);
  proj << 0.5, 0.5, 0.5, 0.5;
  const auto pm = mixture_from_density(proj);
  REQUIRE(pm.components().size() == 1);
  const auto plus = make_pure(ModeLayout({"a"}, 1), {{{0}, 1.0}, {{1}, 1.0}});
  CHECK_THAT(fidelity(pm.components()[0].state, plus), WithinAbs(1.0, 1e-12));
}

TEST_CASE("thermal density decomposes into Bose-Einstein weights") {
  const double nbar = 0.5;
  const int dim = 11;
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(dim, dim);
  std::vector<double> p(dim);
  double total = 0.0;
  for (int n = 0; n < dim; ++n) {
    p[n] = std::pow(nbar, n) / std::pow(1.0 + nbar, n + 1);
    total += p[n];
  }
  for (int n = 0; n < dim; ++n) rho(n, n) = p[n] / total;
  const auto mix = mixture_from_density(rho);
  REQUIRE(mix.components().size() == static_cast<std::size_t>(dim));
  // descending weights: component k is the Fock state |k>
  for (int n = 0; n < dim; ++n) {
    CHECK_THAT(mix.components()[n].weight, WithinAbs(p[n] / total, 1e-13));
    CHECK_THAT(std::abs(mix.components()[n].state.amplitude(std::vector<int>{n})), WithinAbs(1.0, 1e-12));
  }
}

TEST_CASE("mixture_from_density rejects invalid matrices") {
  Eigen::MatrixXcd neg(2, 2);
  neg << 1.2, 0.0, 0.0, -0.2;
  CHECK(kind_of([&] { mixture_from_density(neg); }) == ErrorKind::invalid_argument);
  Eigen::MatrixXcd trace(2, 2);
  trace << 0.6, 0.0, 0.0, 0.6;
  CHECK(kind_of([&] { mixture_from_density(trace); }) == ErrorKind::invalid_argument);
  Eigen::MatrixXcd skew(2, 2);
  skew << 0.5, 0.3, -0.3, 0.5;
  CHECK(kind_of([&] { mixture_from_density(skew); }) == ErrorKind::invalid_argument);
}

TEST_CASE("mixture moments match trace(rho A) on small dimensions") {
  std::mt19937_64 rng(99);
  for (int dim = 1; dim <= 6; ++dim) {
    for (int rank = 1; rank <= dim; ++rank) {
      const Eigen::MatrixXcd rho = testing::random_density(dim, rank, rng);
      const auto mix = mixture_from_density(rho);
      const Eigen::MatrixXcd a = testing::lowering(dim);
      for (int p = 0; p <= 2; ++p) {
        for (int q = 0; q <= 2; ++q) {
          Eigen::MatrixXcd op = Eigen::MatrixXcd::Identity(dim, dim);
          for (int k = 0; k < p; ++k) op = op * a.adjoint();
          for (int k = 0; k < q; ++k) op = op * a;
          const cplx oracle = (rho * op).trace();
          const cplx value = normal_moment(mix, {{{"a", p, q}}});
          INFO("dim " << dim << " rank " << rank << " p " << p << " q " << q);
          CHECK_THAT(std::abs(value - oracle), WithinAbs(0.0, 1e-10));
        }
      }
    }
  }
}

TEST_CASE("relabel and permute modes") {
  const ModeLayout layout({"x", "y"}, 2);
  const auto s = make_pure(layout, {{{2, 0}, 1.0}, {{0, 1}, cplx(0.0, 1.0)}});
  const auto r = relabel(s, {"u", "v"});
  CHECK(r.layout().labels() == std::vector<std::string>{"u", "v"});
  const auto p = permute_modes(s, {"y", "x"});
  CHECK(p.amplitude(std::vector<int>{0, 2}) == s.amplitude(std::vector<int>{2, 0}));
  CHECK(p.amplitude(std::vector<int>{1, 0}) == s.amplitude(std::vector<int>{0, 1}));
  CHECK(kind_of([&] { permute_modes(s, {"x"}); }) == ErrorKind::invalid_argument);
}

TEST_CASE("state files round-trip") {
  const auto text = R"({"modes":["a1","a2"],"cutoff":2,
    "terms":[{"occ":[1,0],"re":3,"im":0},{"occ":[0,2],"re":0,"im":4}]})";
  const auto s = parse_state_json(text);
  CHECK(s.layout().labels() == std::vector<std::string>{"a1", "a2"});
  CHECK_THAT(s.amplitude(std::vector<int>{1, 0}).real(), WithinAbs(0.6, 1e-15));
  CHECK_THAT(s.amplitude(std::vector<int>{0, 2}).imag(), WithinAbs(0.8, 1e-15));
  const auto again = parse_state_json(state_to_json(s).dump());
  CHECK_THAT(fidelity(s, again), WithinAbs(1.0, 1e-15));
}

TEST_CASE("state file errors name the line or field") {
  try {
    parse_state_json("{\n  \"modes\": [\"a\"],\n  \"cutoff\": 1,\n  \"terms\": [ }\n");
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::parse_error);
    CHECK_THAT(e.what(), ContainsSubstring("line 4"));
  }
  try {
    parse_state_json(R"({"modes":["a"],"cutoff":1,"terms":[{"occ":[0],"re":1,"im":0},{"occ":[1],"re":"x","im":0}]})");
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::parse_error);
    CHECK_THAT(e.what(), ContainsSubstring("terms[1].re"));
  }
  CHECK(kind_of([] { parse_state_json(R"({"modes":["a"],"cutoff":1,"terms":[{"occ":[2],"re":1,"im":0}]})"); }) ==
        ErrorKind::parse_error);
  CHECK(kind_of([] { load_state_file("/nonexistent/state.json"); }) == ErrorKind::parse_error);
}
