#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sio/kernels.hpp"

namespace sio {

using ComplexFunction = std::function<std::complex<double>(std::span<const double>)>;

/// Uniform grid [-L, L)^N with `points` samples per axis.
struct Grid {
  double half_width = 0.0;
  std::size_t points = 0;
};

enum class Tail { one_minus_compact, one_minus_integrable };

/// Cut-off profile m on R^N. Real profiles have value_dim 1 and a zero
/// imaginary part; complex profiles (value_dim 2) act as complex scalars.
struct Mollifier {
  std::string name;
  std::size_t dimension = 1;
  std::size_t value_dim = 1;
  ComplexFunction profile;
  double vanishing_radius = 0.0;
  double vanishing_order = 0.0;
  Tail tail = Tail::one_minus_integrable;
  /// Radius of supp(1 - m) for compact tails, decay length otherwise.
  double scale = 1.0;

  struct Power {
    std::shared_ptr<const Mollifier> base;
    int k = 1;
  };
  std::optional<Power> power;

  std::complex<double> operator()(std::span<const double> x) const { return profile(x); }
};

/// Smooth step: 0 for u <= 0, 1 for u >= 1, e^{-1/u} / (e^{-1/u} + e^{-1/(1-u)}) between.
double smooth_step(double u);
/// 1 on [a1, b1], 0 outside (a0, b0), smooth steps in between.
double plateau_bump(double x, double a0, double a1, double b1, double b0);
/// 1 for x <= a, 0 for x >= b.
double falling_step(double x, double a, double b);

Mollifier gaussian_mollifier(std::size_t dimension);
/// m(s) = s / (s - i) on R.
Mollifier complex_shift_mollifier();
/// Radial m(|x|): 0 for |x| <= 1 - delta, 1 for |x| >= 1.
Mollifier smooth_annulus_mollifier(double delta, std::size_t dimension);
/// m = 1; no regularization.
Mollifier unit_mollifier(std::size_t dimension);
Mollifier multiplier_power(const Mollifier& m, int k);

/// M_eps(s, t) = m((t - s) / eps).
class ScaledMultiplier {
 public:
  ScaledMultiplier(Mollifier m, double eps);

  const Mollifier& mollifier() const noexcept { return m_; }
  double eps() const noexcept { return eps_; }
  double vanishing_radius() const noexcept { return eps_ * m_.vanishing_radius; }

  std::complex<double> operator()(std::span<const double> s, std::span<const double> t) const;
  PairMultiplier pair_multiplier() const;

 private:
  Mollifier m_;
  double eps_;
};

ScaledMultiplier scale(const Mollifier& m, double eps);
ScaledMultiplier scale(const ScaledMultiplier& m, double eps);

/// Grid defaults: L = 8 * scale for compact tails, 16 * scale otherwise;
/// 2048 points per axis for N = 1, 256 for N = 2, 32 beyond.
Grid default_grid(const Mollifier& m);
Grid default_grid(std::size_t dimension, double scale, Tail tail);

struct WienerEstimate {
  double value = 0.0;
  double error_estimate = 0.0;  ///< |fine - coarse|
  Grid grid;
  Grid coarse_grid;
  double coarse_value = 0.0;
  bool windowed = false;
};

/// ||h||_1 for f = h^ with h^(s) = int h(x) e^{-i s.x} dx, from one DFT on `grid`.
/// `window_sigma` multiplies the samples by exp(-|s|^2 / (2 sigma^2)) unless f
/// has already decayed at the grid edge.
double wiener_norm_single(const ComplexFunction& f, std::size_t dimension, const Grid& grid,
                          std::optional<double> window_sigma = std::nullopt);

/// Estimate on `grid` and on the coarse grid (L/2, M/4); the gap is the error estimate.
/// With `window` set and f not decayed at the grid edge, a Gaussian window of
/// sigma = L/8 damps the truncation; the result is then a lower estimate,
/// exact when the preimage is nonnegative.
WienerEstimate wiener_norm(const ComplexFunction& f, std::size_t dimension, const Grid& grid,
                           bool window = false);

enum class SchurMethod { wiener_dft, sobolev, exact_formula };
std::string_view to_string(SchurMethod m) noexcept;

struct SchurBound {
  double bound = 0.0;
  SchurMethod method = SchurMethod::wiener_dft;
  Grid grid;
  double error_estimate = 0.0;
  /// For powers of a base mollifier: bound = base_bound^power.
  std::optional<int> power;
  std::optional<double> base_bound;
};

/// 1 + ||rho||_1 where 1 - m = rho^. Powers report base^k. Throws
/// unreliable_estimate when the two resolutions differ by more than 5%.
SchurBound schur_bound(const Mollifier& m, std::optional<Grid> grid = std::nullopt);
/// 1 + ||rho||_1 computed from the profile itself, ignoring power provenance.
SchurBound schur_bound_direct(const Mollifier& m, std::optional<Grid> grid = std::nullopt);

/// (|S^{N-1}| int_0^inf r^{N-1} (1 + r^k)^{-2} dr)^{1/2}; requires k > N/2.
double sobolev_constant(std::size_t dimension, int k);
/// 1 + C(N, k) ||(1 + |x|^k) rho||_2.
SchurBound sobolev_bound(const Mollifier& m, int k, std::optional<Grid> grid = std::nullopt);

/// Sum of the Wiener norms of the entries of a matrix-valued multiplier.
SchurBound entrywise_schur_bound(std::span<const ComplexFunction> entries, std::size_t dimension,
                                 const Grid& grid);

/// Real function sampled at cell centers of a uniform grid with cell volume h^N.
struct GridSamples {
  std::size_t dimension = 1;
  std::vector<double> points;  ///< flat, dimension coordinates per sample
  std::vector<double> values;
  double cell_volume = 0.0;

  std::size_t size() const { return values.size(); }
  std::span<const double> point(std::size_t i) const { return {points.data() + i * dimension, dimension}; }
};

GridSamples sample_grid(std::size_t dimension, double lo, double hi, double h,
                        const std::function<double(std::span<const double>)>& f);

struct MomentReport {
  int order = 0;
  std::vector<std::pair<std::vector<int>, double>> moments;  ///< multi-index, value
  double mass = 0.0;
  double fitted_slope = 0.0;
  std::vector<double> fit_s;
  std::vector<double> fit_abs_m;
};

/// Vanishing order of M = 1 - rho^ at 0 from the moments of rho, capped at k,
/// plus a log-log fit of |M(s)| over s in [1e-3, 1e-1] (minimum over the axes
/// and the diagonal direction).
MomentReport moment_order(const GridSamples& rho, int k, double mass_tolerance = 1e-4,
                          double moment_tolerance = 1e-6);

}  // namespace sio
