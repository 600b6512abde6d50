#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include <Eigen/SVD>

#include "sio/error.hpp"
#include "sio/forms.hpp"
#include "sio/generators.hpp"
#include "sio/kernels.hpp"
#include "sio/mollifiers.hpp"
#include "sio/splitter.hpp"

using namespace sio;

namespace {

constexpr double pi = std::numbers::pi;

DiscreteMeasure atoms_1d(std::vector<double> xs, std::vector<double> w) {
  return DiscreteMeasure(1, std::move(xs), std::move(w), std::vector<bool>(w.size(), true));
}

KernelMatrix random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols, bool positive = false) {
  std::uniform_real_distribution<double> u(positive ? 0.0 : -1.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = u(rng);
  }
  return KernelMatrix::scalar(m);
}

double svd_oracle(const KernelMatrix& k, const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  Eigen::MatrixXd a = k.components[0];
  for (Eigen::Index i = 0; i < a.rows(); ++i) a.row(i) *= std::sqrt(nu.weight(i));
  for (Eigen::Index j = 0; j < a.cols(); ++j) a.col(j) *= std::sqrt(mu.weight(j));
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  return svd.singularValues()(0);
}

/// Random no-common-point pair with up to `n` atoms each.
std::pair<DiscreteMeasure, DiscreteMeasure> random_pair(std::mt19937_64& rng, std::size_t n) {
  std::uniform_int_distribution<std::size_t> count(1, n);
  auto mu = random_atoms(count(rng), 2, 0.0, 1.0, rng);
  auto nu = random_atoms(count(rng), 2, 0.0, 1.0, rng);
  return {mu, nu};
}

double lp(const Eigen::VectorXd& v, double p) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) s += std::pow(std::abs(v(i)), p);
  return std::pow(s, 1.0 / p);
}

}  // namespace

TEST_SUITE("forms") {
  TEST_CASE("bilinear form of constant kernel") {
    const auto mu = atoms_1d({0.0, 1.0, 2.0}, {0.5, 1.0, 2.0});
    const auto nu = atoms_1d({5.0, 6.0}, {3.0, 0.25});
    const auto one = make_bounded("one", 1, [](auto, auto) { return 1.0; });
    const std::vector<double> f{1.0, 0.0, 1.0};
    const std::vector<double> g{0.0, 1.0};
    const auto r = bilinear_form(one, f, g, mu, nu);
    CHECK(r.value[0] == doctest::Approx(2.5 * 0.25));
    CHECK(r.separation == doctest::Approx(4.0));
    const std::vector<double> zero{0.0, 0.0};
    CHECK(bilinear_form(one, f, zero, mu, nu).value[0] == 0.0);
  }

  TEST_CASE("hilbert two point form") {
    const auto mu = atoms_1d({0.0, 1.0}, {1.0, 1.0});
    const std::vector<double> f{1.0, 0.0};
    const std::vector<double> g{0.0, 1.0};
    const auto r = bilinear_form(make_hilbert(), f, g, mu, mu);
    CHECK(r.value[0] == doctest::Approx(1.0 / pi).epsilon(1e-14));
    CHECK(r.separation == 1.0);
    const std::vector<double> both{1.0, 1.0};
    CHECK_THROWS_AS(bilinear_form(make_hilbert(), both, both, mu, mu), Error);
    try {
      bilinear_form(make_hilbert(), both, both, mu, mu);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::separation);
    }
  }

  TEST_CASE("identity and rank one") {
    const auto mu = atoms_1d({0.0, 1.0, 2.0, 3.0}, {0.5, 2.0, 1.0, 0.25});
    Eigen::MatrixXd id = Eigen::MatrixXd::Zero(4, 4);
    for (int j = 0; j < 4; ++j) id(j, j) = 1.0 / mu.weight(j);
    CHECK(operator_norm_p2(KernelMatrix::scalar(id), mu, mu).value == doctest::Approx(1.0).epsilon(1e-10));

    const Eigen::Vector4d a(1.0, -2.0, 0.5, 3.0);
    const Eigen::Vector3d b(2.0, 1.0, -1.0);
    const auto nu = atoms_1d({10.0, 11.0, 12.0}, {1.0, 0.5, 2.0});
    // rows on mu (as target), columns on nu (as source)
    const KernelMatrix k = KernelMatrix::scalar(a * b.transpose());
    double na = 0.0;
    double nb = 0.0;
    for (int i = 0; i < 4; ++i) na += a(i) * a(i) * mu.weight(i);
    for (int j = 0; j < 3; ++j) nb += b(j) * b(j) * nu.weight(j);
    const auto e = operator_norm_p2(k, nu, mu);
    CHECK(e.value == doctest::Approx(std::sqrt(na * nb)).epsilon(1e-10));
    CHECK(witness_value(k, nu, mu, e) == doctest::Approx(e.value).epsilon(1e-9));
  }

  TEST_CASE("power iteration against full svd") {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 10; ++trial) {
      const auto mu = random_atoms(8, 1, 0.0, 1.0, rng);
      const auto nu = random_atoms(8, 1, 2.0, 3.0, rng);
      const auto k = random_matrix(rng, 8, 8);
      const auto e = operator_norm_p2(k, mu, nu);
      CHECK(e.value == doctest::Approx(svd_oracle(k, mu, nu)).epsilon(1e-8));
      CHECK(witness_value(k, mu, nu, e) == doctest::Approx(e.value).epsilon(1e-9));
      NormOptions dense;
      dense.method = SvdMethod::dense;
      CHECK(operator_norm_p2(k, mu, nu, dense).value == doctest::Approx(e.value).epsilon(1e-10));
    }
  }

  TEST_CASE("complex and vector kernels") {
    std::mt19937_64 rng(9);
    const auto mu = random_atoms(6, 2, 0.0, 1.0, rng);
    const auto nu = random_atoms(5, 2, 2.0, 3.0, rng);
    const auto km = materialize(make_cauchy(), mu, nu);
    Eigen::MatrixXcd c(5, 6);
    for (Eigen::Index i = 0; i < 5; ++i) {
      for (Eigen::Index j = 0; j < 6; ++j) {
        c(i, j) = std::complex<double>(km.components[0](i, j), km.components[1](i, j)) *
                  std::sqrt(nu.weight(i) * mu.weight(j));
      }
    }
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(c);
    const auto e = operator_norm_p2(km, mu, nu);
    CHECK(e.value == doctest::Approx(svd.singularValues()(0)).epsilon(1e-9));
    CHECK(witness_value(km, mu, nu, e) == doctest::Approx(e.value).epsilon(1e-9));

    const auto rz = materialize(make_riesz_generalized(1.0, 2), mu, nu);
    const auto er = operator_norm_p2(rz, mu, nu);
    Eigen::MatrixXd stacked(10, 6);
    for (Eigen::Index i = 0; i < 5; ++i) {
      for (Eigen::Index j = 0; j < 6; ++j) {
        const double w = std::sqrt(nu.weight(i) * mu.weight(j));
        stacked(i, j) = rz.components[0](i, j) * w;
        stacked(5 + i, j) = rz.components[1](i, j) * w;
      }
    }
    CHECK(er.value == doctest::Approx(Eigen::JacobiSVD<Eigen::MatrixXd>(stacked).singularValues()(0)).epsilon(1e-9));
  }

  TEST_CASE("p norms") {
    std::mt19937_64 rng(10);
    const auto mu = atoms_1d({0.0, 1.0, 2.0, 3.0}, {1.0, 1.0, 1.0, 1.0});
    Eigen::MatrixXd d = Eigen::Vector4d(0.5, 3.0, 1.0, 2.0).asDiagonal();
    for (double p : {1.3, 2.0, 3.0, 6.0}) {
      const auto e = operator_norm_p(KernelMatrix::scalar(d), mu, mu, p);
      CHECK(e.value == doctest::Approx(3.0).epsilon(1e-10));
      CHECK(witness_value(KernelMatrix::scalar(d), mu, mu, e) == doctest::Approx(3.0).epsilon(1e-9));
    }
    for (int trial = 0; trial < 5; ++trial) {
      const auto a = random_atoms(7, 1, 0.0, 1.0, rng);
      const auto b = random_atoms(6, 1, 2.0, 3.0, rng);
      const auto k = random_matrix(rng, 6, 7);
      CHECK(operator_norm_p(k, a, b, 2.0).value == doctest::Approx(operator_norm_p2(k, a, b).value).epsilon(1e-6));
    }
    // nonnegative matrix: lower bound beats random search
    const auto a = random_atoms(6, 1, 0.0, 1.0, rng);
    const auto b = random_atoms(5, 1, 2.0, 3.0, rng);
    const auto k = random_matrix(rng, 5, 6, true);
    for (double p : {1.5, 3.0}) {
      const auto e = operator_norm_p(k, a, b, p);
      for (std::size_t s = 1; s < e.history.size(); ++s) CHECK(e.history[s] >= e.history[s - 1]);
      CHECK(witness_value(k, a, b, e) == doctest::Approx(e.value).epsilon(1e-9));
      const Eigen::MatrixXd w = weighted_operator(k, a, b, p);
      std::uniform_real_distribution<double> u(-1.0, 1.0);
      double best = 0.0;
      for (int t = 0; t < 1000; ++t) {
        Eigen::VectorXd x(6);
        for (Eigen::Index j = 0; j < 6; ++j) x(j) = u(rng);
        best = std::max(best, lp(w * x, p) / lp(x, p));
      }
      CHECK(e.value >= best - 1e-12);
    }
    CHECK_THROWS_AS(operator_norm_p(k, a, b, 1.0), Error);
    CHECK_THROWS_AS(operator_norm_p(materialize(make_cauchy(), random_atoms(2, 2, 0, 1, rng),
                                                random_atoms(2, 2, 2, 3, rng)),
                                    random_atoms(2, 2, 0, 1, rng), random_atoms(2, 2, 2, 3, rng), 3.0),
                    Error);
  }

  TEST_CASE("restricted norm without common points equals operator norm") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
      auto [mu, nu] = random_pair(rng, 10);
      const auto k = random_matrix(rng, nu.size(), mu.size());
      const auto r = restricted_norm_exact(k, mu, nu);
      CHECK(r.value == doctest::Approx(operator_norm_p2(k, mu, nu).value).epsilon(1e-9));
      CHECK(witness_value(k, mu, nu, r) == doctest::Approx(r.value).epsilon(1e-9));
    }
  }

  TEST_CASE("restricted norm edge cases") {
    const auto mu = atoms_1d({0.0, 1.0}, {1.0, 2.0});
    const auto zero = KernelMatrix::scalar(Eigen::MatrixXd::Zero(2, 2));
    CHECK(restricted_norm_exact(zero, mu, mu).value == 0.0);
    const auto single = atoms_1d({0.0}, {1.0});
    const auto k = KernelMatrix::scalar(Eigen::MatrixXd::Constant(1, 1, 5.0));
    CHECK(restricted_norm_exact(k, single, single).value == 0.0);
    const auto big = lebesgue_grid(1, 0.0, 1.0, 1.0 / 16.0);
    try {
      restricted_norm_exact(make_bounded("one", 1, [](auto, auto) { return 1.0; }), big, big);
      FAIL("expected cap_exceeded");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::cap_exceeded);
    }
  }

  TEST_CASE("restricted norm with shared points") {
    // two shared points: best split puts one on each side
    const auto mu = atoms_1d({0.0, 1.0}, {1.0, 1.0});
    const auto km = materialize_masked(make_hilbert(), mu, mu);
    const auto r = restricted_norm_exact(km, mu, mu);
    CHECK(r.value == doctest::Approx(1.0 / pi).epsilon(1e-12));
    CHECK(witness_value(km, mu, mu, r) == doctest::Approx(r.value).epsilon(1e-9));
  }

  TEST_CASE("seminorm and modulation") {
    std::mt19937_64 rng(12);
    const auto mu = random_atoms(5, 1, 0.0, 1.0, rng);
    auto nu_pts = random_atoms(4, 1, 0.0, 1.0, rng);
    // share two points of mu
    std::vector<double> coords = nu_pts.coords();
    std::vector<double> w = nu_pts.weights();
    coords.push_back(mu.point(0)[0]);
    coords.push_back(mu.point(3)[0]);
    w.push_back(0.7);
    w.push_back(1.1);
    const DiscreteMeasure nu(1, coords, w, std::vector<bool>(6, false));
    for (int trial = 0; trial < 10; ++trial) {
      auto k1 = random_matrix(rng, 6, 5);
      auto k2 = random_matrix(rng, 6, 5);
      KernelMatrix s = KernelMatrix::scalar(k1.components[0] + k2.components[0]);
      const double a = restricted_norm_exact(k1, mu, nu).value;
      const double b = restricted_norm_exact(k2, mu, nu).value;
      CHECK(restricted_norm_exact(s, mu, nu).value <= a + b + 1e-9);
      KernelMatrix scaled = KernelMatrix::scalar(-2.5 * k1.components[0]);
      CHECK(restricted_norm_exact(scaled, mu, nu).value == doctest::Approx(2.5 * a).epsilon(1e-9));

      const double freq = std::uniform_real_distribution<double>(-5.0, 5.0)(rng);
      KernelMatrix mod;
      mod.complex_valued = true;
      mod.components = {Eigen::MatrixXd(6, 5), Eigen::MatrixXd(6, 5)};
      for (int i = 0; i < 6; ++i) {
        for (int j = 0; j < 5; ++j) {
          const auto z = std::polar(1.0, freq * (nu.point(i)[0] - mu.point(j)[0])) * k1.components[0](i, j);
          mod.components[0](i, j) = z.real();
          mod.components[1](i, j) = z.imag();
        }
      }
      CHECK(restricted_norm_exact(mod, mu, nu).value == doctest::Approx(a).epsilon(1e-9));
    }
  }

  TEST_CASE("heuristic against exact") {
    std::mt19937_64 rng(13);
    int good = 0;
    for (int trial = 0; trial < 50; ++trial) {
      const auto grid = lebesgue_grid(1, 0.0, 1.0, 1.0 / 8.0);
      std::vector<std::size_t> idx;
      for (std::size_t i = 0; i < grid.size(); ++i) {
        if (std::bernoulli_distribution(0.7)(rng)) idx.push_back(i);
      }
      if (idx.empty()) idx.push_back(0);
      const auto mu = grid.subset(idx);
      const auto nu = grid;
      const auto k = random_matrix(rng, nu.size(), mu.size());
      const double exact = restricted_norm_exact(k, mu, nu).value;
      const double heur = restricted_norm_heuristic(k, mu, nu, 2.0, 32, rng).value;
      CHECK(heur <= exact * (1.0 + 1e-9) + 1e-12);
      if (heur >= 0.9 * exact) ++good;
    }
    CHECK(good == 50);
  }

  TEST_CASE("heuristic finds the cross cluster block") {
    std::vector<double> xs;
    for (int i = 0; i < 20; ++i) xs.push_back(i < 10 ? 0.01 * i : 10.0 + 0.01 * i);
    const DiscreteMeasure mu(1, xs, std::vector<double>(20, 0.05), std::vector<bool>(20, false));
    std::mt19937_64 rng(14);
    const auto e = restricted_norm_heuristic(make_hilbert(), mu, mu, 2.0, 32, rng);
    CHECK(e.value > 0.0);
    std::vector<double> f_pos;
    std::vector<double> g_pos;
    for (std::size_t j = 0; j < mu.size(); ++j) {
      if (e.f[j] != 0.0) f_pos.push_back(mu.point(j)[0]);
      if (e.g[j] != 0.0) g_pos.push_back(mu.point(j)[0]);
    }
    double min_gap = 1e300;
    for (double a : f_pos) {
      for (double b : g_pos) min_gap = std::min(min_gap, std::abs(a - b));
    }
    CHECK(min_gap > 0.0);
  }

  TEST_CASE("factor two") {
    std::mt19937_64 rng(15);
    const auto one = make_bounded("one", 2, [](auto, auto) { return 1.0; });
    for (int trial = 0; trial < 10; ++trial) {
      auto [mu, nu] = random_pair(rng, 8);
      const auto r = factor2_check(one, mu, nu, 2.0, rng);
      CHECK(r.ratio == doctest::Approx(1.0).epsilon(1e-9));
      CHECK(r.holds);
    }
    const auto a = atoms_1d({0.0, 1.0}, {1.0, 1.0});
    try {
      factor2_check(make_hilbert(), a, a, 2.0, rng);
      FAIL("expected precondition");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::precondition);
    }
    const auto zero = make_bounded("zero", 1, [](auto, auto) { return 0.0; });
    const auto b = atoms_1d({0.5}, {1.0});
    const auto z = factor2_check(zero, a, b, 2.0, rng);
    CHECK(z.op.value == 0.0);
    CHECK(z.ratio == 1.0);
    CHECK(z.holds);
  }

  TEST_CASE("factor two on interleaved grids with gaussian mollifier") {
    const auto [mu, nu] = interleaved_grids(1, 0.0, 1.0, 1.0 / 8.0);
    const auto m = scale(gaussian_mollifier(1), 0.25);
    const auto k = regularize(make_hilbert(), m.pair_multiplier());
    std::mt19937_64 rng(16);
    const auto r = factor2_check(k, mu, nu, 2.0, rng);
    CHECK(r.ratio >= 1.0 - 1e-9);
    CHECK(r.ratio <= 2.0 + 1e-6);
  }

  TEST_CASE("projection convergence for constant kernel") {
    const auto sigma = lebesgue_grid(1, 0.0, 1.0, 1.0 / 1024.0);
    std::vector<SeparatedPartition> parts;
    for (int n = 1; n <= 4; ++n) parts.push_back(build_partition(sigma, n));
    const std::vector<double> one(sigma.size(), 1.0);
    const auto k = make_bounded("one", 1, [](auto, auto) { return 1.0; });
    const auto r = projection_convergence_test(k, one, one, sigma, parts);
    CHECK(r.full_form == doctest::Approx(1.0));
    for (const auto& l : r.levels) {
      CHECK(l.deviation <= 2.0 * std::ldexp(1.0, -l.level));
      CHECK(l.norm_deviation <= std::ldexp(1.0, -l.level));
    }
  }

  TEST_CASE("projection identity on E1") {
    const auto sigma = lebesgue_grid(1, 0.0, 1.0, 1.0 / 256.0);
    const auto part = build_partition(sigma, 2);
    std::vector<double> f(sigma.size(), 0.0);
    for (std::size_t i = 0; i < sigma.size(); ++i) f[i] = part.side(sigma.point(i)) == 1 ? 1.0 + i % 3 : 0.0;
    const auto k = make_bounded("one", 1, [](auto, auto) { return 1.0; });
    const std::vector<SeparatedPartition> parts{part};
    const auto r = projection_convergence_test(k, f, f, sigma, parts);
    CHECK(r.levels[0].norm_ratio == doctest::Approx(1.0).epsilon(1e-14));
  }
}
