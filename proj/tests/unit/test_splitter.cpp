#include <doctest.h>

#include <array>
#include <cmath>
#include <map>

#include "sio/error.hpp"
#include "sio/generators.hpp"
#include "sio/splitter.hpp"

using namespace sio;

namespace {

/// Direct mass summation of E^k cap Q for every Q of side 2^-n.
double oracle_max_deviation(const DiscreteMeasure& sigma, const SeparatedPartition& part) {
  const double side = std::ldexp(1.0, -part.level);
  std::map<std::vector<long>, std::array<double, 3>> cubes;
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    std::vector<long> key;
    for (double v : sigma.point(i)) key.push_back(static_cast<long>(std::floor(v / side)));
    auto& c = cubes[key];
    c[0] += sigma.weight(i);
    const int s = part.side(sigma.point(i));
    if (s > 0) c[s] += sigma.weight(i);
  }
  double worst = 0.0;
  for (const auto& [k, c] : cubes) {
    worst = std::max(worst, std::abs(c[1] - c[0] / 2.0) / c[0]);
    worst = std::max(worst, std::abs(c[2] - c[0] / 2.0) / c[0]);
  }
  return worst;
}

}  // namespace

TEST_SUITE("splitter") {
  TEST_CASE("lebesgue unit interval") {
    const auto sigma = lebesgue_grid(1, 0.0, 1.0, std::ldexp(1.0, -12));
    const auto part = build_partition(sigma, 2);
    CHECK(part.max_deviation() < 0.25);
    CHECK(oracle_max_deviation(sigma, part) == doctest::Approx(part.max_deviation()).epsilon(1e-12));
    CHECK(part.separation == doctest::Approx((1.0 - part.tau) * part.fine_side));
    CHECK(exhaustive_separation(part) >= part.separation * (1.0 - 1e-12));
    CHECK(part.fine_side <= 0.25);
    for (const auto& c : balance_cascade(sigma, part)) CHECK(c.max_deviation < 0.25);
  }

  TEST_CASE("two fine cubes in one Q") {
    const DiscreteMeasure sigma(1, {0.1, 0.3}, {1.0, 1.0}, {false, false}, 0.2);
    const auto part = build_partition(sigma, 0);
    REQUIRE(part.e1.size() == 1);
    REQUIRE(part.e2.size() == 1);
    CHECK(part.side(std::vector<double>{0.1}) != part.side(std::vector<double>{0.3}));
    CHECK(part.max_deviation() == 0.0);
  }

  TEST_CASE("empty dyadic cube contributes nothing") {
    // mass in [0, 1/2) only; [1/2, 1) is empty
    const auto sigma = lebesgue_grid(1, 0.0, 0.5, std::ldexp(1.0, -10));
    const auto part = build_partition(sigma, 1);
    for (const auto& c : part.e1) CHECK(c[0] < 0.5);
    for (const auto& c : part.e2) CHECK(c[0] < 0.5);
    CHECK(part.balance.size() == 1);
  }

  TEST_CASE("two dimensional grid") {
    const auto sigma = lebesgue_grid(2, 0.0, 1.0, std::ldexp(1.0, -6));
    for (int n = 1; n <= 3; ++n) {
      const auto part = build_partition(sigma, n);
      CHECK(part.max_deviation() < std::ldexp(1.0, -n));
      CHECK(exhaustive_separation(part) >= part.separation * (1.0 - 1e-12));
      for (const auto& c : balance_cascade(sigma, part)) CHECK(c.max_deviation < std::ldexp(1.0, -n));
    }
  }

  TEST_CASE("determinism") {
    const auto sigma = lebesgue_grid(2, 0.0, 1.0, std::ldexp(1.0, -5));
    const auto a = build_partition(sigma, 2);
    const auto b = build_partition(sigma, 2);
    CHECK(a.e1 == b.e1);
    CHECK(a.e2 == b.e2);
  }

  TEST_CASE("resolution error") {
    // one heavy cell cannot be split below h
    const DiscreteMeasure sigma(1, {0.125, 0.375, 0.625}, {10.0, 1.0, 1.0}, {false, false, false}, 0.25);
    try {
      build_partition(sigma, 2);
      FAIL("expected resolution error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::resolution);
    }
    const auto atoms = DiscreteMeasure(1, {0.5}, {1.0}, {true});
    CHECK_THROWS_AS(build_partition(atoms, 1), Error);
    CHECK_THROWS_AS(build_partition(lebesgue_grid(1, 0, 1, 0.125), 1, 1.0), Error);
  }

  TEST_CASE("atom aware reduces to base without atoms") {
    const auto sigma = lebesgue_grid(1, 0.0, 1.0, std::ldexp(1.0, -10));
    const DiscreteMeasure empty(1);
    const auto a = atom_aware_partition(sigma, empty, 3);
    const auto b = build_partition(sigma, 3);
    CHECK(a.e1 == b.e1);
    CHECK(a.e2 == b.e2);
    CHECK(a.removed.empty());
  }

  TEST_CASE("atom aware with far atoms") {
    const auto base = lebesgue_grid(1, 0.0, 1.0, std::ldexp(1.0, -10));
    const auto mu = sum(base, DiscreteMeasure(1, {5.0}, {2.0}, {true}));
    const DiscreteMeasure nu(1, {-5.0}, {3.0}, {true});
    const auto part = atom_aware_partition(mu, nu, 3);
    CHECK(part.side(std::vector<double>{5.0}) == 1);
    CHECK(part.side(std::vector<double>{-5.0}) == 2);
    for (const auto& b : part.removed) CHECK(b.mass == 0.0);
    CHECK(part.max_deviation() < 0.125);
    CHECK(exhaustive_separation(part) >= part.separation * (1.0 - 1e-12));
  }

  TEST_CASE("atom inside an opposite cube is carved out") {
    const double h = std::ldexp(1.0, -10);
    const auto base = lebesgue_grid(1, 0.0, 1.0, h);
    const auto probe = build_partition(base, 2);
    // an E2 cube, atom slightly inside it
    const Point c = probe.e2.front();
    const double x = c[0] + h / 3.0;
    const auto mu = sum(base, DiscreteMeasure(1, {x}, {1.0}, {true}));
    const auto part = atom_aware_partition(mu, DiscreteMeasure(1), 2);
    CHECK(part.side(std::vector<double>{x}) == 1);
    REQUIRE(part.removed.size() == 1);
    CHECK(part.removed[0].removed_from == 2);
    CHECK(part.removed[0].mass < 0.25 / 4.0);
    CHECK(part.separation > 0.0);
    CHECK(exhaustive_separation(part) >= part.separation * (1.0 - 1e-12));
    try {
      atom_aware_partition(DiscreteMeasure(1, {0.5}, {1.0}, {true}), DiscreteMeasure(1, {0.5}, {1.0}, {true}), 2);
      FAIL("expected precondition");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::precondition);
    }
  }

  TEST_CASE("shrink stability") {
    const double h = std::ldexp(1.0, -6);
    const auto sigma = lebesgue_grid(2, 0.0, 1.0, h);
    const Cube unit{{0.0, 0.0}, 1.0};
    const std::vector<double> taus{0.25, 0.5, 0.75, 0.99, 1.0};
    const auto r = shrink_stability(sigma, unit, taus);
    CHECK(r.monotone);
    CHECK(r.masses.back() == doctest::Approx(r.full_mass));
    CHECK(std::abs(r.masses[1] - 0.25) <= h * 2.0);
    const auto e = shrink_stability(DiscreteMeasure(2), unit, taus);
    for (double m : e.masses) CHECK(m == 0.0);
  }
}
