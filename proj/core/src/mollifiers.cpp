#include "sio/mollifiers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <unsupported/Eigen/FFT>

#include "sio/error.hpp"

namespace sio {

namespace {

using cplx = std::complex<double>;

double norm2(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

constexpr std::size_t kMaxGridSamples = std::size_t{1} << 24;

std::size_t grid_size(std::size_t dimension, std::size_t m) {
  std::size_t total = 1;
  for (std::size_t a = 0; a < dimension; ++a) {
    if (total > kMaxGridSamples / m) throw Error(ErrorCode::parameter, "DFT grid too large");
    total *= m;
  }
  return total;
}

void check_grid(const Grid& g) {
  if (!(g.half_width > 0.0) || !std::isfinite(g.half_width)) throw Error(ErrorCode::parameter, "grid half-width must be positive");
  if (g.points < 2) throw Error(ErrorCode::parameter, "grid needs at least 2 points per axis");
}

/// Inverse DFT (1/M^N scaled) of the samples f(-L + j ds). With `window_sigma`
/// set, samples are multiplied by exp(-|s|^2 / (2 sigma^2)) when f has not
/// decayed at the grid edge; `windowed` reports whether that happened.
std::vector<cplx> transform(const ComplexFunction& f, std::size_t dimension, const Grid& grid,
                            std::optional<double> window_sigma, bool* windowed = nullptr) {
  check_grid(grid);
  const std::size_t m = grid.points;
  const std::size_t total = grid_size(dimension, m);
  const double ds = 2.0 * grid.half_width / static_cast<double>(m);

  std::vector<cplx> data(total);
  std::vector<double> radius2(total);
  double peak = 0.0;
  double edge = 0.0;
  std::vector<double> s(dimension);
  std::vector<std::size_t> idx(dimension, 0);
  for (std::size_t flat = 0; flat < total; ++flat) {
    double r2 = 0.0;
    bool on_edge = false;
    for (std::size_t a = 0; a < dimension; ++a) {
      s[a] = -grid.half_width + static_cast<double>(idx[a]) * ds;
      r2 += s[a] * s[a];
      on_edge = on_edge || idx[a] == 0;
    }
    const cplx v = f(s);
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      throw Error(ErrorCode::input, "non-finite sample in Wiener norm estimate", {{"s0", s[0]}});
    }
    data[flat] = v;
    radius2[flat] = r2;
    peak = std::max(peak, std::abs(v));
    if (on_edge) edge = std::max(edge, std::abs(v));
    for (std::size_t a = dimension; a-- > 0;) {
      if (++idx[a] < m) break;
      idx[a] = 0;
    }
  }
  const bool apply = window_sigma && edge > 1e-12 * peak;
  if (apply) {
    const double two_var = 2.0 * *window_sigma * *window_sigma;
    for (std::size_t flat = 0; flat < total; ++flat) data[flat] *= std::exp(-radius2[flat] / two_var);
  }
  if (windowed) *windowed = apply;

  Eigen::FFT<double> fft;
  std::vector<cplx> line(m);
  std::vector<cplx> out(m);
  std::size_t stride = 1;
  for (std::size_t axis = dimension; axis-- > 0;) {
    const std::size_t block = stride * m;
    for (std::size_t base = 0; base < total; base += block) {
      for (std::size_t off = 0; off < stride; ++off) {
        for (std::size_t j = 0; j < m; ++j) line[j] = data[base + off + j * stride];
        fft.inv(out, line);
        for (std::size_t j = 0; j < m; ++j) data[base + off + j * stride] = out[j];
      }
    }
    stride = block;
  }
  return data;
}

double abs_sum(const std::vector<cplx>& v) {
  double s = 0.0;
  for (const auto& c : v) s += std::abs(c);
  return s;
}

Grid coarse_of(const Grid& g) { return {g.half_width / 2.0, std::max<std::size_t>(g.points / 4, 2)}; }

std::optional<double> window_for(const Grid& g, bool window) {
  if (!window) return std::nullopt;
  return g.half_width / 8.0;
}

void check_reliable(double fine, double coarse, const std::string& what) {
  const double gap = std::abs(fine - coarse);
  if (gap > 1e-12 && gap > 0.05 * std::max(std::abs(fine), std::abs(coarse))) {
    throw Error(ErrorCode::unreliable_estimate, what + ": grid resolutions disagree by more than 5%",
                {{"fine", fine}, {"coarse", coarse}});
  }
}

ComplexFunction one_minus(const Mollifier& m) {
  return [p = m.profile](std::span<const double> x) { return cplx(1.0, 0.0) - p(x); };
}

}  // namespace

double smooth_step(double u) {
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / u);
  const double b = std::exp(-1.0 / (1.0 - u));
  return a / (a + b);
}

double plateau_bump(double x, double a0, double a1, double b1, double b0) {
  if (x <= a0 || x >= b0) return 0.0;
  if (x < a1) return smooth_step((x - a0) / (a1 - a0));
  if (x > b1) return smooth_step((b0 - x) / (b0 - b1));
  return 1.0;
}

double falling_step(double x, double a, double b) { return smooth_step((b - x) / (b - a)); }

Mollifier gaussian_mollifier(std::size_t dimension) {
  if (dimension == 0) throw Error(ErrorCode::parameter, "dimension must be positive");
  Mollifier m;
  m.name = "gaussian";
  m.dimension = dimension;
  m.profile = [](std::span<const double> x) {
    double r2 = 0.0;
    for (double v : x) r2 += v * v;
    return cplx(-std::expm1(-r2 / 2.0), 0.0);
  };
  m.vanishing_order = 2.0;
  m.tail = Tail::one_minus_integrable;
  return m;
}

Mollifier complex_shift_mollifier() {
  Mollifier m;
  m.name = "complex_shift";
  m.dimension = 1;
  m.value_dim = 2;
  // s / (s - i) = (s^2 + i s) / (s^2 + 1)
  m.profile = [](std::span<const double> x) {
    const double s = x[0];
    const double d = s * s + 1.0;
    return cplx(s * s / d, s / d);
  };
  m.vanishing_order = 1.0;
  m.tail = Tail::one_minus_integrable;
  return m;
}

Mollifier smooth_annulus_mollifier(double delta, std::size_t dimension) {
  if (!(delta > 0.0 && delta < 1.0)) throw Error(ErrorCode::parameter, "annulus delta must lie in (0, 1)");
  if (dimension == 0) throw Error(ErrorCode::parameter, "dimension must be positive");
  Mollifier m;
  m.name = "annulus";
  m.dimension = dimension;
  m.profile = [delta](std::span<const double> x) {
    return cplx(smooth_step((norm2(x) - (1.0 - delta)) / delta), 0.0);
  };
  m.vanishing_radius = 1.0 - delta;
  m.vanishing_order = std::numeric_limits<double>::infinity();
  m.tail = Tail::one_minus_compact;
  m.scale = 1.0;
  return m;
}

Mollifier unit_mollifier(std::size_t dimension) {
  if (dimension == 0) throw Error(ErrorCode::parameter, "dimension must be positive");
  Mollifier m;
  m.name = "unit";
  m.dimension = dimension;
  m.profile = [](std::span<const double>) { return cplx(1.0, 0.0); };
  m.tail = Tail::one_minus_compact;
  return m;
}

Mollifier multiplier_power(const Mollifier& m, int k) {
  if (k < 1) throw Error(ErrorCode::parameter, "multiplier power must be a positive integer");
  if (k == 1) return m;
  auto base = m.power ? m.power->base : std::make_shared<const Mollifier>(m);
  const int total = m.power ? m.power->k * k : k;
  Mollifier out = m;
  out.name = base->name + "^" + std::to_string(total);
  out.profile = [p = base->profile, total](std::span<const double> x) {
    const cplx v = p(x);
    cplx r(1.0, 0.0);
    for (int i = 0; i < total; ++i) r *= v;
    return r;
  };
  out.vanishing_order = base->vanishing_order * total;
  out.power = Mollifier::Power{base, total};
  return out;
}

ScaledMultiplier::ScaledMultiplier(Mollifier m, double eps) : m_(std::move(m)), eps_(eps) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw Error(ErrorCode::parameter, "scale eps must be positive");
}

std::complex<double> ScaledMultiplier::operator()(std::span<const double> s, std::span<const double> t) const {
  double buf[8];
  const std::size_t n = s.size();
  for (std::size_t k = 0; k < n; ++k) buf[k] = (t[k] - s[k]) / eps_;
  return m_.profile(std::span<const double>(buf, n));
}

PairMultiplier ScaledMultiplier::pair_multiplier() const {
  PairMultiplier pm;
  pm.value_dim = m_.value_dim;
  const std::vector<double> zero(m_.dimension, 0.0);
  pm.vanishes_on_diagonal = m_.profile(zero) == cplx(0.0, 0.0);
  pm.evaluate = [self = *this](std::span<const double> s, std::span<const double> t, std::span<double> out) {
    const cplx v = self(s, t);
    out[0] = v.real();
    if (out.size() > 1) out[1] = v.imag();
  };
  return pm;
}

ScaledMultiplier scale(const Mollifier& m, double eps) { return {m, eps}; }
ScaledMultiplier scale(const ScaledMultiplier& m, double eps) { return {m.mollifier(), m.eps() * eps}; }

Grid default_grid(std::size_t dimension, double scale, Tail tail) {
  const double l = (tail == Tail::one_minus_compact ? 8.0 : 16.0) * scale;
  const std::size_t pts = dimension == 1 ? 2048 : dimension == 2 ? 256 : 32;
  return {l, pts};
}

Grid default_grid(const Mollifier& m) { return default_grid(m.dimension, m.scale, m.tail); }

double wiener_norm_single(const ComplexFunction& f, std::size_t dimension, const Grid& grid,
                          std::optional<double> window_sigma) {
  return abs_sum(transform(f, dimension, grid, window_sigma));
}

WienerEstimate wiener_norm(const ComplexFunction& f, std::size_t dimension, const Grid& grid, bool window) {
  WienerEstimate est;
  est.grid = grid;
  est.coarse_grid = coarse_of(grid);
  est.value = abs_sum(transform(f, dimension, grid, window_for(grid, window), &est.windowed));
  est.coarse_value = wiener_norm_single(f, dimension, est.coarse_grid, window_for(est.coarse_grid, window));
  est.error_estimate = std::abs(est.value - est.coarse_value);
  return est;
}

std::string_view to_string(SchurMethod m) noexcept {
  switch (m) {
    case SchurMethod::wiener_dft: return "wiener_dft";
    case SchurMethod::sobolev: return "sobolev";
    case SchurMethod::exact_formula: return "exact_formula";
  }
  return "unknown";
}

SchurBound schur_bound_direct(const Mollifier& m, std::optional<Grid> grid) {
  const Grid g = grid.value_or(default_grid(m));
  const auto est = wiener_norm(one_minus(m), m.dimension, g, m.tail == Tail::one_minus_integrable);
  check_reliable(est.value, est.coarse_value, "Schur bound of '" + m.name + "'");
  SchurBound b;
  b.bound = 1.0 + est.value;
  b.method = SchurMethod::wiener_dft;
  b.grid = g;
  b.error_estimate = est.error_estimate;
  return b;
}

SchurBound schur_bound(const Mollifier& m, std::optional<Grid> grid) {
  if (!m.power) return schur_bound_direct(m, grid);
  const SchurBound base = schur_bound(*m.power->base, grid);
  const int k = m.power->k;
  SchurBound b = base;
  b.bound = std::pow(base.bound, k);
  b.error_estimate = k * std::pow(base.bound, k - 1) * base.error_estimate;
  b.power = k;
  b.base_bound = base.bound;
  return b;
}

double sobolev_constant(std::size_t dimension, int k) {
  if (2 * k <= static_cast<int>(dimension)) {
    throw Error(ErrorCode::parameter, "Sobolev constant needs k > N/2", {{"k", k}, {"N", double(dimension)}});
  }
  const double n = static_cast<double>(dimension);
  const double sphere = 2.0 * std::pow(std::numbers::pi, n / 2.0) / std::tgamma(n / 2.0);
  boost::math::quadrature::exp_sinh<double> integrator;
  const double radial = integrator.integrate([n, k](double r) {
    const double q = 1.0 + std::pow(r, k);
    return std::pow(r, n - 1.0) / (q * q);
  });
  return std::sqrt(sphere * radial);
}

namespace {

double weighted_l2(const std::vector<cplx>& t, std::size_t dimension, const Grid& grid, int k) {
  const std::size_t m = grid.points;
  const double dx = std::numbers::pi / grid.half_width;
  double acc = 0.0;
  std::vector<std::size_t> idx(dimension, 0);
  for (std::size_t flat = 0; flat < t.size(); ++flat) {
    double r2 = 0.0;
    for (std::size_t a = 0; a < dimension; ++a) {
      const double j = idx[a] < m / 2 ? static_cast<double>(idx[a]) : static_cast<double>(idx[a]) - static_cast<double>(m);
      r2 += j * dx * j * dx;
    }
    const double w = 1.0 + std::pow(std::sqrt(r2), k);
    acc += w * w * std::norm(t[flat]);
    for (std::size_t a = dimension; a-- > 0;) {
      if (++idx[a] < m) break;
      idx[a] = 0;
    }
  }
  // |rho(x_k)| = |t_k| / dx^N, integrated against dx^N
  return std::sqrt(acc / std::pow(dx, static_cast<double>(dimension)));
}

}  // namespace

SchurBound sobolev_bound(const Mollifier& m, int k, std::optional<Grid> grid) {
  const double c = sobolev_constant(m.dimension, k);
  const Grid g = grid.value_or(default_grid(m));
  const Grid gc = coarse_of(g);
  const bool window = m.tail == Tail::one_minus_integrable;
  const auto f = one_minus(m);
  const double fine = weighted_l2(transform(f, m.dimension, g, window_for(g, window)), m.dimension, g, k);
  const double coarse = weighted_l2(transform(f, m.dimension, gc, window_for(gc, window)), m.dimension, gc, k);
  check_reliable(fine, coarse, "Sobolev bound of '" + m.name + "'");
  SchurBound b;
  b.bound = 1.0 + c * fine;
  b.method = SchurMethod::sobolev;
  b.grid = g;
  b.error_estimate = c * std::abs(fine - coarse);
  return b;
}

SchurBound entrywise_schur_bound(std::span<const ComplexFunction> entries, std::size_t dimension, const Grid& grid) {
  SchurBound b;
  b.method = SchurMethod::wiener_dft;
  b.grid = grid;
  for (const auto& e : entries) {
    const auto est = wiener_norm(e, dimension, grid, false);
    check_reliable(est.value, est.coarse_value, "entrywise Schur bound");
    b.bound += est.value;
    b.error_estimate += est.error_estimate;
  }
  return b;
}

GridSamples sample_grid(std::size_t dimension, double lo, double hi, double h,
                        const std::function<double(std::span<const double>)>& f) {
  if (!(h > 0.0) || !(hi > lo)) throw Error(ErrorCode::parameter, "invalid sampling grid");
  const auto n = static_cast<std::size_t>(std::llround((hi - lo) / h));
  if (n == 0) throw Error(ErrorCode::parameter, "sampling grid is empty");
  GridSamples g;
  g.dimension = dimension;
  g.cell_volume = std::pow(h, static_cast<double>(dimension));
  const std::size_t total = grid_size(dimension, n);
  std::vector<std::size_t> idx(dimension, 0);
  std::vector<double> x(dimension);
  g.points.reserve(total * dimension);
  g.values.reserve(total);
  for (std::size_t flat = 0; flat < total; ++flat) {
    for (std::size_t a = 0; a < dimension; ++a) x[a] = lo + (static_cast<double>(idx[a]) + 0.5) * h;
    g.points.insert(g.points.end(), x.begin(), x.end());
    g.values.push_back(f(x));
    for (std::size_t a = dimension; a-- > 0;) {
      if (++idx[a] < n) break;
      idx[a] = 0;
    }
  }
  return g;
}

namespace {

void multi_indices(std::size_t dimension, int degree, std::vector<int>& cur, std::size_t pos,
                   std::vector<std::vector<int>>& out) {
  if (pos + 1 == dimension) {
    cur[pos] = degree;
    out.push_back(cur);
    return;
  }
  for (int d = degree; d >= 0; --d) {
    cur[pos] = d;
    multi_indices(dimension, degree - d, cur, pos + 1, out);
  }
}

double fit_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  double n = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!(ys[i] > 0.0)) continue;
    const double lx = std::log(xs[i]);
    const double ly = std::log(ys[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    n += 1;
  }
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

MomentReport moment_order(const GridSamples& rho, int k, double mass_tolerance, double moment_tolerance) {
  if (k < 1) throw Error(ErrorCode::parameter, "moment order cap must be positive");
  if (rho.size() == 0) throw Error(ErrorCode::input, "no samples");
  const std::size_t n = rho.dimension;
  MomentReport r;
  for (double v : rho.values) r.mass += v * rho.cell_volume;
  if (std::abs(r.mass - 1.0) > mass_tolerance) {
    throw Error(ErrorCode::normalization, "integral of rho differs from 1", {{"mass", r.mass}});
  }

  r.order = 1;
  bool vanishing = true;
  for (int q = 1; q < k; ++q) {
    std::vector<std::vector<int>> alphas;
    std::vector<int> cur(n, 0);
    multi_indices(n, q, cur, 0, alphas);
    bool all_zero = true;
    for (const auto& alpha : alphas) {
      double mom = 0.0;
      for (std::size_t i = 0; i < rho.size(); ++i) {
        double mono = 1.0;
        const auto x = rho.point(i);
        for (std::size_t a = 0; a < n; ++a) mono *= std::pow(x[a], alpha[a]);
        mom += mono * rho.values[i] * rho.cell_volume;
      }
      r.moments.emplace_back(alpha, mom);
      if (std::abs(mom) > moment_tolerance) all_zero = false;
    }
    if (vanishing && all_zero) r.order = q + 1;
    vanishing = vanishing && all_zero;
  }

  std::vector<std::vector<double>> directions;
  for (std::size_t a = 0; a < n; ++a) {
    std::vector<double> e(n, 0.0);
    e[a] = 1.0;
    directions.push_back(e);
  }
  if (n > 1) directions.emplace_back(n, 1.0 / std::sqrt(static_cast<double>(n)));

  std::vector<double> ss(9);
  for (int i = 0; i < 9; ++i) ss[i] = std::pow(10.0, -3.0 + 0.25 * i);
  r.fitted_slope = std::numeric_limits<double>::infinity();
  for (const auto& u : directions) {
    std::vector<double> mags;
    for (double s : ss) {
      // M(s u) = sum rho (1 - e^{-i s u.x}) dV with 1 - e^{-i th} = 2 sin^2(th/2) + i sin(th)
      double re = 0.0, im = 0.0;
      for (std::size_t i = 0; i < rho.size(); ++i) {
        const auto x = rho.point(i);
        double th = 0.0;
        for (std::size_t a = 0; a < n; ++a) th += s * u[a] * x[a];
        const double h = std::sin(th / 2.0);
        re += rho.values[i] * 2.0 * h * h;
        im += rho.values[i] * std::sin(th);
      }
      mags.push_back(std::hypot(re, im) * rho.cell_volume);
    }
    const double slope = fit_slope(ss, mags);
    if (slope < r.fitted_slope || std::isnan(slope)) {
      r.fitted_slope = slope;
      r.fit_s = ss;
      r.fit_abs_m = mags;
    }
  }
  return r;
}

}  // namespace sio
