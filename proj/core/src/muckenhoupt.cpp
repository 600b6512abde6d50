#include "sio/muckenhoupt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "sio/error.hpp"

namespace sio {

namespace {

double norm2(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

void check_p(double p) {
  if (!(p > 1.0) || !std::isfinite(p)) throw Error(ErrorCode::parameter, "p must lie in (1, inf)", {{"p", p}});
}

std::vector<Point> joint_support(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  std::vector<Point> pts;
  for (const auto* m : {&mu, &nu}) {
    for (std::size_t i = 0; i < m->size(); ++i) pts.push_back(m->point_copy(i));
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

/// Masses of the open balls B(center, r) for ascending radii.
std::vector<double> ball_masses(const DiscreteMeasure& m, std::span<const double> center,
                                std::span<const double> radii) {
  std::vector<std::pair<double, double>> dw;
  dw.reserve(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) dw.emplace_back(distance(m.point(i), center), m.weight(i));
  std::sort(dw.begin(), dw.end());
  std::vector<double> out(radii.size(), 0.0);
  double acc = 0.0;
  std::size_t k = 0;
  for (std::size_t r = 0; r < radii.size(); ++r) {
    while (k < dw.size() && dw[k].first < radii[r]) acc += dw[k++].second;
    out[r] = acc;
  }
  return out;
}

double ap_value(double radius, double mu_b, double nu_b, double p, double alpha) {
  if (mu_b == 0.0 || nu_b == 0.0) return 0.0;
  const double pp = p / (p - 1.0);
  return std::pow(2.0 * radius, -alpha) * std::pow(mu_b, 1.0 / pp) * std::pow(nu_b, 1.0 / p);
}

}  // namespace

BallScan default_scan(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  BallScan scan;
  const auto pts = joint_support(mu, nu);
  scan.centers = pts;
  if (pts.size() < 2) {
    scan.radii = {1.0};
    return scan;
  }
  double gap = std::numeric_limits<double>::infinity();
  double diam = 0.0;
  std::vector<std::size_t> nearest(pts.size(), 0);
  std::vector<double> nearest_d(pts.size(), std::numeric_limits<double>::infinity());
  for (std::size_t a = 0; a < pts.size(); ++a) {
    for (std::size_t b = a + 1; b < pts.size(); ++b) {
      const double d = distance(pts[a], pts[b]);
      gap = std::min(gap, d);
      diam = std::max(diam, d);
      if (d < nearest_d[a]) {
        nearest_d[a] = d;
        nearest[a] = b;
      }
      if (d < nearest_d[b]) {
        nearest_d[b] = d;
        nearest[b] = a;
      }
    }
  }
  std::vector<Point> mids;
  for (std::size_t a = 0; a < pts.size(); ++a) {
    Point m(pts[a].size());
    for (std::size_t c = 0; c < m.size(); ++c) m[c] = 0.5 * (pts[a][c] + pts[nearest[a]][c]);
    mids.push_back(std::move(m));
  }
  std::sort(mids.begin(), mids.end());
  mids.erase(std::unique(mids.begin(), mids.end()), mids.end());
  scan.centers.insert(scan.centers.end(), mids.begin(), mids.end());
  std::sort(scan.centers.begin(), scan.centers.end());
  scan.centers.erase(std::unique(scan.centers.begin(), scan.centers.end()), scan.centers.end());
  for (double r = gap; r <= diam * std::numbers::sqrt2; r *= std::numbers::sqrt2) scan.radii.push_back(r);
  return scan;
}

double ap_ball_value(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double p, double alpha,
                     std::span<const double> center, double radius) {
  check_p(p);
  return ap_value(radius, mass_in_ball(mu, center, radius), mass_in_ball(nu, center, radius), p, alpha);
}

MuckenhouptReport ap_alpha_constant(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double p, double alpha,
                                    std::optional<BallScan> scan) {
  check_p(p);
  if (!(alpha > 0.0)) throw Error(ErrorCode::parameter, "alpha must be positive", {{"alpha", alpha}});
  if (mu.dimension() != nu.dimension()) throw Error(ErrorCode::input, "measure dimensions differ");
  BallScan s = scan ? std::move(*scan) : default_scan(mu, nu);
  if (s.centers.empty() || s.radii.empty()) throw Error(ErrorCode::input, "empty ball scan");
  std::sort(s.radii.begin(), s.radii.end());
  for (double r : s.radii) {
    if (!(r > 0.0) || !std::isfinite(r)) throw Error(ErrorCode::input, "radii must be positive and finite");
  }
  MuckenhouptReport rep;
  rep.p = p;
  rep.alpha = alpha;
  rep.centers = s.centers.size();
  rep.radii = s.radii;
  rep.witness_center = s.centers.front();
  rep.witness_radius = s.radii.front();
  for (const auto& c : s.centers) {
    if (c.size() != mu.dimension()) throw Error(ErrorCode::input, "center has the wrong dimension");
    const auto mb = ball_masses(mu, c, s.radii);
    const auto nb = ball_masses(nu, c, s.radii);
    for (std::size_t r = 0; r < s.radii.size(); ++r) {
      const double v = ap_value(s.radii[r], mb[r], nb[r], p, alpha);
      if (v > rep.constant) {
        rep.constant = v;
        rep.witness_center = c;
        rep.witness_radius = s.radii[r];
        rep.witness_mu = mb[r];
        rep.witness_nu = nb[r];
      }
    }
  }
  return rep;
}

HomogeneityReport homogeneity_check(const VectorMap& b, std::size_t dimension, std::size_t value_dim, double d,
                                    std::size_t samples, std::mt19937_64& rng) {
  HomogeneityReport rep;
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> logc(std::log(0.1), std::log(10.0));
  std::vector<double> x(dimension);
  std::vector<double> cx(dimension);
  std::vector<double> bx(value_dim);
  std::vector<double> bcx(value_dim);
  for (std::size_t i = 0; i < samples; ++i) {
    for (double& v : x) v = normal(rng);
    const double c = std::exp(logc(rng));
    for (std::size_t a = 0; a < dimension; ++a) cx[a] = c * x[a];
    b(x, bx);
    b(cx, bcx);
    const double scale = std::pow(c, d);
    double num = 0.0;
    double den = 0.0;
    for (std::size_t k = 0; k < value_dim; ++k) {
      num += (bcx[k] - scale * bx[k]) * (bcx[k] - scale * bx[k]);
      den += scale * bx[k] * scale * bx[k];
    }
    if (den > 0.0) {
      rep.max_deviation = std::max(rep.max_deviation, std::sqrt(num / den));
      ++rep.samples;
    }
  }
  return rep;
}

double necessity_bump(double x) { return falling_step(x, 2.0, 3.0); }

KernelSpec necessity_kernel(const KernelSpec& k, double d, double eps) {
  if (!k.profile()) throw Error(ErrorCode::unsupported, "kernel '" + k.name() + "' has no convolution profile");
  if (!(eps > 0.0)) throw Error(ErrorCode::parameter, "eps must be positive", {{"eps", eps}});
  const ConvolutionProfile hom = k.profile()->form == ConvolutionProfile::Form::homogeneous
                                     ? *k.profile()
                                     : to_homogeneous(*k.profile(), d);
  const std::size_t n = k.dimension();
  const std::size_t vd = k.value_dim();
  if (n > 8 || vd > 8) throw Error(ErrorCode::unsupported, "dimension above 8");
  auto base = std::make_shared<KernelSpec>(k);
  return KernelSpec(
      k.name() + "_necessity", n, 1, 0.0,
      [base, hom, eps, n, vd](std::span<const double> s, std::span<const double> t, std::span<double> out) {
        double x[8];
        for (std::size_t a = 0; a < n; ++a) x[a] = (t[a] - s[a]) / eps;
        const double r = norm2(std::span<const double>(x, n));
        const double phi = r > 0.0 ? necessity_bump(r) : 0.0;
        if (phi == 0.0) {
          out[0] = 0.0;
          return;
        }
        double bm[8];
        double kv[8];
        hom.angular(std::span<const double>(x, n), std::span<double>(bm, vd));
        base->evaluate(s, t, std::span<double>(kv, vd));
        double v = 0.0;
        for (std::size_t c = 0; c < vd; ++c) v += bm[c] * kv[c];
        out[0] = phi * v;
      },
      false);
}

NecessityReport necessity_experiment(const KernelSpec& k, const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                     const NecessityOptions& o) {
  check_p(o.p);
  if (!(o.d > 0.0)) throw Error(ErrorCode::parameter, "homogeneity order d must be positive", {{"d", o.d}});
  if (o.alpha < o.d) {
    throw Error(ErrorCode::parameter, "alpha must be at least d", {{"alpha", o.alpha}, {"d", o.d}});
  }
  if (!k.profile()) throw Error(ErrorCode::unsupported, "kernel '" + k.name() + "' has no convolution profile");
  const auto atoms = common_atoms(mu, nu);
  if (!atoms.empty()) {
    throw Error(ErrorCode::precondition, "measures share atoms", {{"common_atoms", static_cast<double>(atoms.size())}});
  }
  if (o.eps_list.empty()) throw Error(ErrorCode::input, "empty eps list");
  const ConvolutionProfile hom = k.profile()->form == ConvolutionProfile::Form::homogeneous
                                     ? *k.profile()
                                     : to_homogeneous(*k.profile(), o.d);
  const std::size_t n = k.dimension();
  const std::size_t vd = k.value_dim();

  NecessityReport rep;
  rep.p = o.p;
  rep.alpha = o.alpha;
  rep.d = o.d;

  // A(r) >= r^{-d-alpha}
  for (int i = -60; i <= 60; ++i) {
    const double r = std::pow(10.0, i / 10.0);
    const double a = hom.radial(r);
    const double need = std::pow(r, -o.d - o.alpha);
    ++rep.hypothesis_samples;
    if (!(a >= need * (1.0 - 1e-12))) {
      throw Error(ErrorCode::hypothesis, "radial profile violates A(r) >= r^(-d-alpha)",
                  {{"r", r}, {"A", a}, {"bound", need}});
    }
  }

  // C = inf |B| on the sphere
  {
    std::mt19937_64 rng(o.seed);
    std::normal_distribution<double> normal;
    std::vector<double> x(n);
    std::vector<double> b(vd);
    double lo = std::numeric_limits<double>::infinity();
    const std::size_t samples = n == 1 ? 2 : (n == 2 ? 4096 : 20000);
    for (std::size_t i = 0; i < samples; ++i) {
      if (n == 1) {
        x[0] = i == 0 ? 1.0 : -1.0;
      } else if (n == 2) {
        const double a = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(samples);
        x[0] = std::cos(a);
        x[1] = std::sin(a);
      } else {
        for (double& v : x) v = normal(rng);
        const double r = norm2(x);
        for (double& v : x) v /= r;
      }
      hom.angular(x, b);
      lo = std::min(lo, norm2(b));
    }
    if (!(lo > 0.0)) throw Error(ErrorCode::hypothesis, "B vanishes on the unit sphere");
    rep.sphere_inf = lo;
  }
  rep.c_prime = rep.sphere_inf * rep.sphere_inf * std::pow(2.0, o.d - o.alpha);

  // Schur bound of m(x) = B(x) phi(|x|)
  {
    Grid g = o.schur_grid.value_or(default_grid(n, 3.0, Tail::one_minus_compact));
    if (!o.schur_grid && n == 2) g.points = 512;
    std::vector<ComplexFunction> entries;
    for (std::size_t c = 0; c < vd; ++c) {
      entries.push_back([hom, c, n, vd](std::span<const double> x) {
        const double r = norm2(x);
        const double phi = r > 0.0 ? necessity_bump(r) : 0.0;
        if (phi == 0.0 || r == 0.0) return std::complex<double>(0.0, 0.0);
        double bm[8];
        hom.angular(x, std::span<double>(bm, vd));
        return std::complex<double>(phi * bm[c], 0.0);
      });
    }
    rep.schur_bound = entrywise_schur_bound(entries, n, g).bound;
  }

  // restricted norm of K
  {
    const KernelMatrix km = materialize_masked(k, mu, nu);
    std::mt19937_64 rng(o.seed);
    if (o.p != 2.0 && (km.value_dim() != 1 || km.complex_valued)) {
      throw Error(ErrorCode::unsupported, "p != 2 needs a real scalar kernel");
    }
    const auto est = restricted_norm_heuristic(km, mu, nu, o.p, o.heuristic_trials, rng, o.norm);
    rep.restricted_norm = est.value;
    rep.restricted_kind = est.kind;
  }

  rep.ap = ap_alpha_constant(mu, nu, o.p, o.alpha);
  rep.ratio = rep.ap.constant > 0.0 ? rep.restricted_norm / rep.ap.constant : std::numeric_limits<double>::infinity();

  const std::vector<Point> centers = o.centers.empty() ? std::vector<Point>{rep.ap.witness_center} : o.centers;
  const double pp = o.p / (o.p - 1.0);
  std::mt19937_64 rng(o.seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (double eps : o.eps_list) {
    const KernelSpec ke = necessity_kernel(k, o.d, eps);
    const double floor_value = rep.c_prime * std::pow(eps, -o.alpha);
    for (const auto& t0 : centers) {
      NecessityBall b;
      b.center = t0;
      b.eps = eps;
      b.mu_mass = mass_in_ball(mu, t0, eps);
      b.nu_mass = mass_in_ball(nu, t0, eps);
      b.ap_value = ap_value(eps, b.mu_mass, b.nu_mass, o.p, o.alpha);

      // pointwise lower bound on random pairs of the ball
      auto sample = [&]() {
        Point x(n);
        for (double& v : x) v = normal(rng);
        const double r = norm2(x);
        const double rad = eps * std::pow(unit(rng), 1.0 / static_cast<double>(n));
        for (std::size_t a = 0; a < n; ++a) x[a] = t0[a] + rad * x[a] / r;
        return x;
      };
      double kv[1];
      b.min_pointwise_ratio = std::numeric_limits<double>::infinity();
      for (std::size_t q = 0; q < o.pair_samples; ++q) {
        const Point s = sample();
        const Point t = sample();
        if (s == t) continue;
        ke.evaluate(s, t, std::span<double>(kv, 1));
        ++b.pairs_checked;
        const double ratio = kv[0] / floor_value;
        b.min_pointwise_ratio = std::min(b.min_pointwise_ratio, ratio);
        if (kv[0] < floor_value * (1.0 - 1e-12)) ++b.pointwise_violations;
      }

      // <T_eps 1_B, h> with h = 1_B / nu(B)^{1/p'}
      if (b.nu_mass > 0.0 && b.mu_mass > 0.0) {
        double form = 0.0;
        for (std::size_t i = 0; i < nu.size(); ++i) {
          if (!(distance(nu.point(i), t0) < eps)) continue;
          double row = 0.0;
          for (std::size_t j = 0; j < mu.size(); ++j) {
            if (!(distance(mu.point(j), t0) < eps)) continue;
            ke.evaluate(nu.point(i), mu.point(j), std::span<double>(kv, 1));
            row += kv[0] * mu.weight(j);
          }
          form += row * nu.weight(i);
        }
        b.form = form / std::pow(b.nu_mass, 1.0 / pp);
      }
      b.lower = floor_value * b.mu_mass * std::pow(b.nu_mass, 1.0 / o.p);
      b.upper = rep.schur_bound * rep.restricted_norm * std::pow(b.mu_mass, 1.0 / o.p);
      const double tol = 1e-12 + 1e-9 * b.upper;
      b.chain_holds = b.lower <= b.form * (1.0 + 1e-12) + 1e-300 && b.form <= b.upper + tol;
      rep.balls.push_back(std::move(b));
    }
  }
  return rep;
}

}  // namespace sio
