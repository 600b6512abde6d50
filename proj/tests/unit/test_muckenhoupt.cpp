#include <doctest.h>

#include <cmath>
#include <random>

#include "sio/error.hpp"
#include "sio/generators.hpp"
#include "sio/muckenhoupt.hpp"

using namespace sio;

namespace {

/// Brute force over the same scan, masses by direct summation.
double oracle_constant(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double p, double alpha,
                       const BallScan& scan) {
  double best = 0.0;
  for (const auto& c : scan.centers) {
    for (double r : scan.radii) {
      double a = 0.0;
      double b = 0.0;
      for (std::size_t i = 0; i < mu.size(); ++i) {
        if (distance(mu.point(i), c) < r) a += mu.weight(i);
      }
      for (std::size_t i = 0; i < nu.size(); ++i) {
        if (distance(nu.point(i), c) < r) b += nu.weight(i);
      }
      best = std::max(best, std::pow(2 * r, -alpha) * std::pow(a, 1 - 1 / p) * std::pow(b, 1 / p));
    }
  }
  return best;
}

std::vector<double> at(const KernelSpec& k, const Point& s, const Point& t) { return k(s, t); }

}  // namespace

TEST_SUITE("muckenhoupt") {
  TEST_CASE("single point mass") {
    const DiscreteMeasure d(1, {0.0}, {1.0}, {true});
    for (double alpha : {0.5, 1.0, 2.0}) {
      const auto r = ap_alpha_constant(d, d, 2.0, alpha, BallScan{{{0.0}}, {1.0}});
      CHECK(r.constant == doctest::Approx(std::pow(2.0, -alpha)).epsilon(1e-15));
    }
  }

  TEST_CASE("zero measure") {
    const auto mu = lebesgue_grid(1, 0.0, 1.0, 1.0 / 16);
    const auto r = ap_alpha_constant(mu, DiscreteMeasure(1), 2.0, 1.0);
    CHECK(r.constant == 0.0);
  }

  TEST_CASE("errors") {
    const auto mu = lebesgue_grid(1, 0.0, 1.0, 1.0 / 16);
    CHECK_THROWS_AS(ap_alpha_constant(mu, mu, 1.0, 1.0), Error);
    CHECK_THROWS_AS(ap_alpha_constant(mu, mu, 2.0, 0.0), Error);
    try {
      ap_alpha_constant(mu, mu, 2.0, 1.0, BallScan{{}, {1.0}});
      FAIL("no throw");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::input);
    }
  }

  TEST_CASE("lebesgue interval matches brute force") {
    const auto mu = lebesgue_grid(1, 0.0, 1.0, 1.0 / 256);
    const auto scan = default_scan(mu, mu);
    const auto r = ap_alpha_constant(mu, mu, 2.0, 1.0, scan);
    CHECK(r.constant == doctest::Approx(oracle_constant(mu, mu, 2.0, 1.0, scan)).epsilon(1e-12));
    // interior ball of radius r carries mass 2r up to one cell
    BallScan wide = scan;
    std::erase_if(wide.radii, [](double x) { return x < 32.0 / 256; });
    const double c = ap_alpha_constant(mu, mu, 2.0, 1.0, wide).constant;
    CHECK(c == doctest::Approx(1.0).epsilon(1.0 / 32));
    CHECK(ap_ball_value(mu, mu, 2.0, 1.0, r.witness_center, r.witness_radius) ==
          doctest::Approx(r.constant).epsilon(1e-12));
  }

  TEST_CASE("p independence, scaling and monotonicity") {
    std::mt19937_64 rng(9);
    const auto mu = random_atoms(40, 2, 0.0, 1.0, rng);
    const auto nu = random_atoms(30, 2, 0.0, 1.0, rng);
    const auto scan = default_scan(mu, nu);
    const double c2 = ap_alpha_constant(mu, mu, 2.0, 1.0, scan).constant;
    for (double p : {1.2, 3.0, 7.5}) {
      CHECK(std::abs(ap_alpha_constant(mu, mu, p, 1.0, scan).constant - c2) <= 1e-12 * c2);
    }
    for (double p : {1.5, 2.0, 4.0}) {
      const double base = ap_alpha_constant(mu, nu, p, 1.3, scan).constant;
      const double scaled = ap_alpha_constant(mu.scaled(3.5), nu.scaled(3.5), p, 1.3, scan).constant;
      CHECK(std::abs(scaled - 3.5 * base) <= 1e-12 * scaled);
      CHECK(base == doctest::Approx(oracle_constant(mu, nu, p, 1.3, scan)).epsilon(1e-12));
    }
    BallScan coarse = scan;
    coarse.radii.resize(coarse.radii.size() / 2);
    CHECK(ap_alpha_constant(mu, nu, 2.0, 1.0, coarse).constant <=
          ap_alpha_constant(mu, nu, 2.0, 1.0, scan).constant);
  }

  TEST_CASE("default scan") {
    const DiscreteMeasure mu(1, {0.0, 1.0}, {1.0, 1.0}, {true, true});
    const auto s = default_scan(mu, DiscreteMeasure(1));
    CHECK(s.centers.size() == 3);
    CHECK(s.radii.front() == doctest::Approx(1.0));
    CHECK(s.radii.back() >= 1.0);
    const DiscreteMeasure one(1, {0.0}, {1.0}, {true});
    CHECK(default_scan(one, one).radii == std::vector<double>{1.0});
  }

  TEST_CASE("homogeneity check") {
    std::mt19937_64 rng(1);
    const VectorMap identity = [](std::span<const double> x, std::span<double> out) {
      for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i];
    };
    CHECK(homogeneity_check(identity, 2, 2, 1.0, 500, rng).max_deviation < 1e-14);
    const VectorMap unit = [](std::span<const double> x, std::span<double> out) {
      const double r = std::hypot(x[0], x[1]);
      out[0] = x[0] / r;
      out[1] = x[1] / r;
    };
    const auto bad = homogeneity_check(unit, 2, 2, 1.0, 500, rng);
    // |1/c - 1| with c in [0.1, 10]
    CHECK(bad.max_deviation > 1.0);
    CHECK(bad.max_deviation <= 9.0 + 1e-12);
    const VectorMap one = [](std::span<const double>, std::span<double> out) { out[0] = 1.0; };
    CHECK(homogeneity_check(one, 3, 1, 0.0, 100, rng).max_deviation == 0.0);
  }

  TEST_CASE("necessity bump") {
    CHECK(necessity_bump(0.0) == 1.0);
    CHECK(necessity_bump(2.0) == 1.0);
    CHECK(necessity_bump(3.0) == 0.0);
    CHECK(necessity_bump(2.5) > 0.0);
    CHECK(necessity_bump(2.5) < 1.0);
  }

  TEST_CASE("necessity kernel closed form for Riesz d = alpha = 1") {
    // B(x) = x, A(r) = r^-2: K_eps(s, t) = phi(|x|/eps) / eps
    const auto k = make_riesz_generalized(1.0, 2);
    const double eps = 0.3;
    const auto ke = necessity_kernel(k, 1.0, eps);
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
      const Point s = {u(rng), u(rng)};
      const Point t = {u(rng), u(rng)};
      const double r = std::hypot(t[0] - s[0], t[1] - s[1]);
      REQUIRE(ke(s, t)[0] == doctest::Approx(necessity_bump(r / eps) / eps).epsilon(1e-12));
    }
    CHECK(at(ke, {0.0, 0.0}, {0.0, 0.0})[0] == 0.0);
  }

  TEST_CASE("necessity experiment on disks") {
    const Point o = {0.0, 0.0};
    const auto mu = ball_uniform(o, 0.25, 0.25 / 6, 1.0, 0.5);
    const auto nu = ball_uniform(o, 0.25, 0.25 / 6, 1.0, 0.0);
    NecessityOptions opt;
    opt.eps_list = {0.25};
    opt.centers = {o};
    opt.heuristic_trials = 8;
    const auto rep = necessity_experiment(make_riesz_generalized(1.0, 2), mu, nu, opt);
    CHECK(rep.sphere_inf == doctest::Approx(1.0));
    CHECK(rep.c_prime == doctest::Approx(1.0));
    CHECK(rep.schur_bound > 1.0);
    CHECK(rep.restricted_norm > 0.0);
    CHECK(rep.ratio > 0.0);
    REQUIRE(rep.balls.size() == 1);
    const auto& b = rep.balls[0];
    CHECK(b.pairs_checked == 1000);
    CHECK(b.pointwise_violations == 0);
    CHECK(b.min_pointwise_ratio >= 1.0 - 1e-12);
    CHECK(b.lower <= b.form * (1 + 1e-12));
    CHECK(b.chain_holds);
  }

  TEST_CASE("necessity preconditions") {
    const auto mu = ball_uniform(Point{0.0, 0.0}, 0.25, 0.05, 1.0, 0.5);
    const auto nu = ball_uniform(Point{0.0, 0.0}, 0.25, 0.05, 1.0, 0.0);
    NecessityOptions opt;
    opt.eps_list = {0.25};
    opt.alpha = 0.5;
    try {
      necessity_experiment(make_cauchy(), mu, nu, opt);
      FAIL("no throw");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::parameter);
    }
    // A(r) = r^-1.5 after conversion to d = 1 falls short of r^-2 for small r
    opt.alpha = 1.0;
    try {
      necessity_experiment(make_riesz_generalized(0.5, 2), mu, nu, opt);
      FAIL("no throw");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::hypothesis);
    }
    const auto b = make_bounded("one", 2, [](auto, auto) { return 1.0; });
    CHECK_THROWS_AS(necessity_experiment(b, mu, nu, opt), Error);
  }
}
