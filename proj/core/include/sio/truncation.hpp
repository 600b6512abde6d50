#pragma once

#include <optional>
#include <random>
#include <span>
#include <vector>

#include "sio/forms.hpp"
#include "sio/kernels.hpp"
#include "sio/mollifiers.hpp"

namespace sio {

/// K(s, t) 1_{|s-t| > eps}; zero on the closed ball |s - t| <= eps.
KernelSpec truncate(const KernelSpec& k, double eps);

/// psi(r) = m(r) - 1_{r > 1} for the annulus step m (0 below 1 - delta, 1 from 1 on).
double annulus_step(double r, double delta);
double psi_part(double r, double delta);
/// chi = 1_{[1 - delta, 1]}
double annulus_indicator(double r, double delta);

/// m(|s-t|/eps) K(s, t) and psi(|s-t|/eps) K(s, t); both finite on the diagonal.
KernelSpec smooth_truncate(const KernelSpec& k, double eps, double delta);
KernelSpec psi_kernel(const KernelSpec& k, double eps, double delta);

struct SectorialityReport {
  double kappa_achieved = 0.0;
  std::vector<double> direction;  ///< x0, unit length
  double min_ratio = 0.0;
  double target = 0.0;
  bool sectorial = false;  ///< kappa_achieved >= target
  std::vector<std::size_t> offending;  ///< samples with ratio below target
  std::vector<std::size_t> skipped;    ///< zero samples
};

/// min_i <F_i, x0> / |F_i|, maximized over x0 when none is given.
SectorialityReport sectoriality_check(std::span<const std::vector<double>> samples,
                                      std::optional<std::vector<double>> x0 = std::nullopt, double kappa = 1.0);

/// M_r(s, t) = C phi(|s-t|/r) B^T((t-s)/|t-s|), a row vector acting on kernel values.
struct SectorialMultiplier {
  std::size_t dimension = 1;
  std::size_t value_dim = 1;
  double constant = 1.0;  ///< C = max 1/|B| on the sphere
  double min_abs_b = 0.0;
  double r = 1.0;
  VectorMap angular;

  /// Row entries at (s, t).
  void evaluate(std::span<const double> s, std::span<const double> t, std::span<double> out) const;
  /// <M_r(s, t), K(s, t)> for a kernel value.
  double pair(std::span<const double> s, std::span<const double> t, std::span<const double> kernel_value) const;
  /// Entries of m(x) = C phi(|x|) B^T(x/|x|) at r = 1.
  std::vector<ComplexFunction> entries() const;
};

/// Plateau [0.9, 1], support (0.8, 1.1).
double sectorial_bump(double x);

SectorialMultiplier build_sectorial_multiplier(const KernelSpec& k, double r, std::size_t sphere_samples = 4096);

/// Schur bound of the r = 1 multiplier through the Wiener norms of its entries.
SchurBound sectorial_schur_bound(const SectorialMultiplier& m, std::optional<Grid> grid = std::nullopt);

/// Random pairs (s, t) with lo <= |s - t| <= hi.
std::vector<PointPair> annulus_pairs(std::size_t dimension, double lo, double hi, std::size_t count,
                                     std::mt19937_64& rng);

struct TruncationComparison {
  double eps = 0.0;
  double norm_truncated = 0.0;
  double norm_smooth = 0.0;
  double norm_psi_part = 0.0;
  double norm_chi = 0.0;        ///< kernel chi(|s-t|/eps) |K|
  double norm_sectorial = 0.0;  ///< kernel <M_eps K, x0>
  std::size_t annulus_entries = 0;
  /// min over annulus entries of <M_eps K, x0> - kappa |K|; nullopt without entries or profile
  std::optional<double> domination_margin;
  bool psi_dominated = true;       ///< |psi part| <= chi |K| entrywise
  double split_identity_error = 0.0;  ///< max |hard + psi - smooth|
  bool triangle_holds = true;      ///< truncated <= smooth + psi part
  std::optional<double> chain_bound;  ///< smooth + kappa^-1 Schur(M) restricted
  bool chain_holds = true;
};

struct TruncationOptions {
  double delta = 0.1;
  double kappa = 1.0;
  NormOptions norm;
  std::optional<Grid> schur_grid;
};

struct TruncationStudy {
  double restricted_norm = 0.0;
  std::optional<double> schur_bound;
  std::vector<TruncationComparison> rows;
};

/// p = 2 operator norms of the hard, smooth and psi kernels for each eps.
TruncationStudy compare_truncations(const KernelSpec& k, const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                    std::span<const double> eps_list, const TruncationOptions& options = {});

}  // namespace sio
