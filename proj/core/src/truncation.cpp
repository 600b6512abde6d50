#include "sio/truncation.hpp"

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

double dist(std::span<const double> s, std::span<const double> t) {
  double d = 0.0;
  for (std::size_t a = 0; a < s.size(); ++a) d += (t[a] - s[a]) * (t[a] - s[a]);
  return std::sqrt(d);
}

/// K(s, t) scaled by w(|s - t| / eps); K is not evaluated where w vanishes.
KernelSpec radial_cut(const KernelSpec& k, std::string name, double eps, std::function<double(double)> w) {
  auto base = std::make_shared<KernelSpec>(k);
  KernelSpec out(
      std::move(name), k.dimension(), k.value_dim(), k.order(),
      [base, eps, w = std::move(w)](std::span<const double> s, std::span<const double> t, std::span<double> o) {
        const double f = w(dist(s, t) / eps);
        if (f == 0.0) {
          std::fill(o.begin(), o.end(), 0.0);
          return;
        }
        base->evaluate(s, t, o);
        for (double& v : o) v *= f;
      },
      false);
  return k.complex_valued() ? out.as_complex() : out;
}

void check_eps(double eps) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw Error(ErrorCode::parameter, "eps must be positive", {{"eps", eps}});
}

std::vector<double> sphere_points(std::size_t dimension, std::size_t count) {
  std::vector<double> pts;
  if (dimension == 1) return {-1.0, 1.0};
  if (dimension == 2) {
    for (std::size_t i = 0; i < count; ++i) {
      const double a = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(count);
      pts.push_back(std::cos(a));
      pts.push_back(std::sin(a));
    }
    return pts;
  }
  std::mt19937_64 rng(0x5ec7);
  std::normal_distribution<double> normal;
  std::vector<double> x(dimension);
  for (std::size_t i = 0; i < count; ++i) {
    for (double& v : x) v = normal(rng);
    const double n = norm2(x);
    for (double v : x) pts.push_back(v / n);
  }
  return pts;
}

}  // namespace

KernelSpec truncate(const KernelSpec& k, double eps) {
  check_eps(eps);
  return radial_cut(k, k.name() + "_trunc", eps, [](double r) { return r > 1.0 ? 1.0 : 0.0; });
}

double annulus_step(double r, double delta) { return smooth_step((r - (1.0 - delta)) / delta); }

double psi_part(double r, double delta) { return annulus_step(r, delta) - (r > 1.0 ? 1.0 : 0.0); }

double annulus_indicator(double r, double delta) { return r >= 1.0 - delta && r <= 1.0 ? 1.0 : 0.0; }

KernelSpec smooth_truncate(const KernelSpec& k, double eps, double delta) {
  check_eps(eps);
  return radial_cut(k, k.name() + "_smooth", eps, [delta](double r) { return annulus_step(r, delta); });
}

KernelSpec psi_kernel(const KernelSpec& k, double eps, double delta) {
  check_eps(eps);
  return radial_cut(k, k.name() + "_psi", eps, [delta](double r) { return psi_part(r, delta); });
}

SectorialityReport sectoriality_check(std::span<const std::vector<double>> samples, std::optional<std::vector<double>> x0,
                                      double kappa) {
  if (samples.empty()) throw Error(ErrorCode::input, "no samples for the sectoriality check");
  const std::size_t m = samples.front().size();
  SectorialityReport r;
  r.target = kappa;
  std::vector<std::vector<double>> unit;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].size() != m) throw Error(ErrorCode::input, "samples have different lengths");
    const double n = norm2(samples[i]);
    if (n == 0.0) {
      r.skipped.push_back(i);
      continue;
    }
    std::vector<double> u(samples[i]);
    for (double& v : u) v /= n;
    unit.push_back(std::move(u));
  }
  if (unit.empty()) throw Error(ErrorCode::input, "all samples vanish");

  auto min_ratio = [&](const std::vector<double>& x) {
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& u : unit) {
      double d = 0.0;
      for (std::size_t a = 0; a < m; ++a) d += u[a] * x[a];
      worst = std::min(worst, d);
    }
    return worst;
  };

  std::vector<double> best;
  if (x0) {
    if (x0->size() != m) throw Error(ErrorCode::input, "direction has the wrong length");
    const double n = norm2(*x0);
    if (std::abs(n - 1.0) > 1e-12) throw Error(ErrorCode::parameter, "direction must be a unit vector", {{"norm", n}});
    best = *x0;
  } else if (m == 1) {
    best = {min_ratio({1.0}) >= min_ratio({-1.0}) ? 1.0 : -1.0};
  } else if (m == 2) {
    // complement of the largest angular gap is the smallest arc covering all samples
    std::vector<double> ang;
    for (const auto& u : unit) ang.push_back(std::atan2(u[1], u[0]));
    std::sort(ang.begin(), ang.end());
    double gap = ang.front() + 2.0 * std::numbers::pi - ang.back();
    double start = ang.front();
    for (std::size_t i = 1; i < ang.size(); ++i) {
      if (ang[i] - ang[i - 1] > gap) {
        gap = ang[i] - ang[i - 1];
        start = ang[i];
      }
    }
    const double mid = start + (2.0 * std::numbers::pi - gap) / 2.0;
    best = {std::cos(mid), std::sin(mid)};
  } else {
    std::vector<double> x(m, 0.0);
    for (const auto& u : unit) {
      for (std::size_t a = 0; a < m; ++a) x[a] += u[a];
    }
    double n = norm2(x);
    if (n == 0.0) {
      x = unit.front();
      n = 1.0;
    }
    for (double& v : x) v /= n;
    best = x;
    double best_val = min_ratio(x);
    for (int step = 0; step < 200; ++step) {
      std::size_t worst = 0;
      double wv = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < unit.size(); ++i) {
        double d = 0.0;
        for (std::size_t a = 0; a < m; ++a) d += unit[i][a] * x[a];
        if (d < wv) {
          wv = d;
          worst = i;
        }
      }
      const double eta = 0.5 / std::sqrt(static_cast<double>(step) + 1.0);
      for (std::size_t a = 0; a < m; ++a) x[a] += eta * unit[worst][a];
      n = norm2(x);
      if (n == 0.0) break;
      for (double& v : x) v /= n;
      const double val = min_ratio(x);
      if (val > best_val) {
        best_val = val;
        best = x;
      }
    }
  }
  r.direction = best;
  r.min_ratio = min_ratio(best);
  r.kappa_achieved = r.min_ratio;
  r.sectorial = r.kappa_achieved >= kappa;
  std::size_t k = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (std::find(r.skipped.begin(), r.skipped.end(), i) != r.skipped.end()) continue;
    double d = 0.0;
    for (std::size_t a = 0; a < m; ++a) d += unit[k][a] * best[a];
    if (d < kappa) r.offending.push_back(i);
    ++k;
  }
  return r;
}

double sectorial_bump(double x) { return plateau_bump(x, 0.8, 0.9, 1.0, 1.1); }

void SectorialMultiplier::evaluate(std::span<const double> s, std::span<const double> t, std::span<double> out) const {
  double x[8];
  double th[8];
  const std::size_t n = dimension;
  for (std::size_t a = 0; a < n; ++a) x[a] = t[a] - s[a];
  const double d = norm2(std::span<const double>(x, n));
  const double phi = d > 0.0 ? sectorial_bump(d / r) : 0.0;
  if (phi == 0.0) {
    std::fill(out.begin(), out.end(), 0.0);
    return;
  }
  for (std::size_t a = 0; a < n; ++a) th[a] = x[a] / d;
  angular(std::span<const double>(th, n), out);
  for (double& v : out) v *= constant * phi;
}

double SectorialMultiplier::pair(std::span<const double> s, std::span<const double> t,
                                 std::span<const double> kernel_value) const {
  double row[8];
  evaluate(s, t, std::span<double>(row, value_dim));
  double v = 0.0;
  for (std::size_t c = 0; c < value_dim; ++c) v += row[c] * kernel_value[c];
  return v;
}

std::vector<ComplexFunction> SectorialMultiplier::entries() const {
  std::vector<ComplexFunction> out;
  for (std::size_t c = 0; c < value_dim; ++c) {
    out.push_back([c, self = *this](std::span<const double> x) {
      const std::vector<double> zero(self.dimension, 0.0);
      double row[8];
      SectorialMultiplier unit = self;
      unit.r = 1.0;
      unit.evaluate(zero, x, std::span<double>(row, self.value_dim));
      return std::complex<double>(row[c], 0.0);
    });
  }
  return out;
}

SectorialMultiplier build_sectorial_multiplier(const KernelSpec& k, double r, std::size_t sphere_samples) {
  check_eps(r);
  if (!k.profile()) throw Error(ErrorCode::unsupported, "kernel '" + k.name() + "' has no convolution profile");
  if (k.profile()->form != ConvolutionProfile::Form::unit_sphere) {
    throw Error(ErrorCode::unsupported, "sectorial multiplier needs the unit-sphere form A(|x|) B(x/|x|)");
  }
  if (k.dimension() > 8 || k.value_dim() > 8) throw Error(ErrorCode::unsupported, "dimension above 8");
  SectorialMultiplier m;
  m.dimension = k.dimension();
  m.value_dim = k.value_dim();
  m.r = r;
  m.angular = k.profile()->angular;
  const auto pts = sphere_points(m.dimension, sphere_samples);
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  std::vector<double> b(m.value_dim);
  for (std::size_t i = 0; i * m.dimension < pts.size(); ++i) {
    m.angular(std::span<const double>(pts.data() + i * m.dimension, m.dimension), b);
    const double n = norm2(b);
    lo = std::min(lo, n);
    hi = std::max(hi, n);
  }
  m.min_abs_b = lo;
  if (!(lo > 1e-8 * hi)) {
    throw Error(ErrorCode::not_sectorializable, "B vanishes on the unit sphere", {{"min_abs_b", lo}, {"max_abs_b", hi}});
  }
  m.constant = 1.0 / lo;
  return m;
}

SchurBound sectorial_schur_bound(const SectorialMultiplier& m, std::optional<Grid> grid) {
  // the bump transitions over 0.1, so N = 2 needs a finer grid than the default
  Grid g = grid.value_or(default_grid(m.dimension, 1.1, Tail::one_minus_compact));
  if (!grid && m.dimension == 2) g.points = 1024;
  const auto entries = m.entries();
  return entrywise_schur_bound(entries, m.dimension, g);
}

std::vector<PointPair> annulus_pairs(std::size_t dimension, double lo, double hi, std::size_t count,
                                     std::mt19937_64& rng) {
  if (!(lo >= 0.0 && hi >= lo)) throw Error(ErrorCode::parameter, "invalid annulus");
  std::uniform_real_distribution<double> box(-1.0, 1.0);
  std::uniform_real_distribution<double> radius(lo, hi);
  std::normal_distribution<double> normal;
  std::vector<PointPair> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Point s(dimension);
    Point dir(dimension);
    for (double& v : s) v = box(rng);
    for (double& v : dir) v = normal(rng);
    const double n = norm2(dir);
    const double rr = radius(rng);
    Point t(dimension);
    for (std::size_t a = 0; a < dimension; ++a) t[a] = s[a] + rr * dir[a] / n;
    out.emplace_back(std::move(s), std::move(t));
  }
  return out;
}

TruncationStudy compare_truncations(const KernelSpec& k, const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                    std::span<const double> eps_list, const TruncationOptions& options) {
  if (!(options.delta > 0.0 && options.delta < 1.0)) throw Error(ErrorCode::parameter, "delta must lie in (0, 1)");
  if (!(options.kappa > 0.0 && options.kappa <= 1.0)) throw Error(ErrorCode::parameter, "kappa must lie in (0, 1]");
  const auto atoms = common_atoms(mu, nu);
  if (!atoms.empty()) {
    throw Error(ErrorCode::precondition, "measures share atoms", {{"common_atoms", static_cast<double>(atoms.size())}});
  }
  TruncationStudy study;
  const KernelMatrix full = materialize_masked(k, mu, nu);
  if (common_support(mu, nu).empty()) {
    study.restricted_norm = operator_norm_p2(full, mu, nu, options.norm).value;
  } else if (mu.size() + nu.size() <= kRestrictedCap) {
    study.restricted_norm = restricted_norm_exact(full, mu, nu, 2.0, kRestrictedCap, options.norm).value;
  } else {
    std::mt19937_64 rng(options.norm.seed);
    study.restricted_norm = restricted_norm_heuristic(full, mu, nu, 2.0, 64, rng, options.norm).value;
  }

  std::optional<SectorialMultiplier> mult;
  if (k.profile() && k.profile()->form == ConvolutionProfile::Form::unit_sphere) {
    mult = build_sectorial_multiplier(k, 1.0);
    study.schur_bound = sectorial_schur_bound(*mult, options.schur_grid).bound;
  }

  const std::size_t vd = k.value_dim();
  std::vector<double> kv(vd);
  for (double eps : eps_list) {
    check_eps(eps);
    TruncationComparison row;
    row.eps = eps;
    const auto hard = materialize(truncate(k, eps), mu, nu);
    const auto smooth = materialize(smooth_truncate(k, eps, options.delta), mu, nu);
    const auto psi = materialize(psi_kernel(k, eps, options.delta), mu, nu);
    row.norm_truncated = operator_norm_p2(hard, mu, nu, options.norm).value;
    row.norm_smooth = operator_norm_p2(smooth, mu, nu, options.norm).value;
    row.norm_psi_part = operator_norm_p2(psi, mu, nu, options.norm).value;

    Eigen::MatrixXd chi = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(nu.size()), static_cast<Eigen::Index>(mu.size()));
    Eigen::MatrixXd sect = chi;
    double margin = std::numeric_limits<double>::infinity();
    if (mult) mult->r = eps;
    for (std::size_t i = 0; i < nu.size(); ++i) {
      for (std::size_t j = 0; j < mu.size(); ++j) {
        const auto ii = static_cast<Eigen::Index>(i);
        const auto jj = static_cast<Eigen::Index>(j);
        for (std::size_t c = 0; c < vd; ++c) {
          const double e = std::abs(hard.components[c](ii, jj) + psi.components[c](ii, jj) - smooth.components[c](ii, jj));
          row.split_identity_error = std::max(row.split_identity_error, e);
        }
        const double rr = dist(nu.point(i), mu.point(j)) / eps;
        const double x = annulus_indicator(rr, options.delta);
        if (x == 0.0 && psi_part(rr, options.delta) == 0.0 && !(mult && rr >= 0.8 && rr < 1.1)) continue;
        k.evaluate(nu.point(i), mu.point(j), kv);
        const double absk = norm2(kv);
        double psi_abs = 0.0;
        for (std::size_t c = 0; c < vd; ++c) psi_abs += psi.components[c](ii, jj) * psi.components[c](ii, jj);
        if (std::sqrt(psi_abs) > x * absk * (1.0 + 1e-12)) row.psi_dominated = false;
        chi(ii, jj) = x * absk;
        if (mult) {
          const double v = mult->pair(nu.point(i), mu.point(j), kv);
          sect(ii, jj) = v;
          if (x != 0.0) {
            margin = std::min(margin, v - options.kappa * absk);
            ++row.annulus_entries;
          }
        }
      }
    }
    row.norm_chi = operator_norm_p2(KernelMatrix::scalar(chi), mu, nu, options.norm).value;
    const double tol = 1e-12 + 1e-9 * row.norm_truncated;
    row.triangle_holds = row.norm_truncated <= row.norm_smooth + row.norm_psi_part + tol;
    if (mult) {
      row.norm_sectorial = operator_norm_p2(KernelMatrix::scalar(sect), mu, nu, options.norm).value;
      if (row.annulus_entries > 0) row.domination_margin = margin;
      row.chain_bound = row.norm_smooth + *study.schur_bound * study.restricted_norm / options.kappa;
      row.chain_holds = row.norm_truncated <= *row.chain_bound + tol;
    }
    study.rows.push_back(row);
  }
  return study;
}

}  // namespace sio
