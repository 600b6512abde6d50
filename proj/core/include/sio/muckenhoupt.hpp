#pragma once

#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "sio/forms.hpp"
#include "sio/kernels.hpp"
#include "sio/mollifiers.hpp"

namespace sio {

/// Centers and radii of the open balls to scan.
struct BallScan {
  std::vector<Point> centers;
  std::vector<double> radii;
};

/// Support points of mu + nu and midpoints of nearest-neighbour pairs as
/// centers; radii geometric with ratio sqrt 2 from the smallest gap to past the
/// support diameter.
BallScan default_scan(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

/// (2r)^-alpha mu(B)^{1/p'} nu(B)^{1/p} for the open ball B(center, r).
double ap_ball_value(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double p, double alpha,
                     std::span<const double> center, double radius);

struct MuckenhouptReport {
  double constant = 0.0;
  Point witness_center;
  double witness_radius = 0.0;
  double witness_mu = 0.0;
  double witness_nu = 0.0;
  double p = 2.0;
  double alpha = 1.0;
  std::size_t centers = 0;
  std::vector<double> radii;
};

MuckenhouptReport ap_alpha_constant(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double p, double alpha,
                                    std::optional<BallScan> scan = std::nullopt);

struct HomogeneityReport {
  double max_deviation = 0.0;  ///< max |B(cx) - c^d B(x)| / |c^d B(x)|
  std::size_t samples = 0;
};

HomogeneityReport homogeneity_check(const VectorMap& b, std::size_t dimension, std::size_t value_dim, double d,
                                    std::size_t samples, std::mt19937_64& rng);

/// phi for the necessity multiplier: 1 on [0, 2], 0 from 3 on.
double necessity_bump(double x);

struct NecessityOptions {
  double p = 2.0;
  double alpha = 1.0;
  double d = 1.0;  ///< homogeneity order of B
  std::vector<double> eps_list;
  /// Ball centers t0; defaults to the witness center of the A_p^alpha scan.
  std::vector<Point> centers;
  std::size_t pair_samples = 1000;
  int heuristic_trials = 32;
  std::uint64_t seed = 0x5105eedULL;
  std::optional<Grid> schur_grid;
  NormOptions norm;
};

struct NecessityBall {
  Point center;
  double eps = 0.0;
  double mu_mass = 0.0;
  double nu_mass = 0.0;
  double ap_value = 0.0;  ///< (2 eps)^-alpha mu(B)^{1/p'} nu(B)^{1/p}
  double form = 0.0;      ///< <T_eps 1_B, h>, h = 1_B / nu(B)^{1/p'}
  double lower = 0.0;     ///< C' eps^-alpha mu(B) nu(B)^{1/p}
  double upper = 0.0;     ///< Schur bound * restricted norm * mu(B)^{1/p}
  bool chain_holds = true;
  std::size_t pairs_checked = 0;
  std::size_t pointwise_violations = 0;
  double min_pointwise_ratio = 0.0;  ///< min K_eps / (C' eps^-alpha) over sampled pairs
};

struct NecessityReport {
  double p = 2.0;
  double alpha = 1.0;
  double d = 1.0;
  double sphere_inf = 0.0;  ///< C = inf |B| on the unit sphere
  double c_prime = 0.0;     ///< C^2 2^{d - alpha}
  double schur_bound = 0.0;
  double restricted_norm = 0.0;
  NormKind restricted_kind = NormKind::restricted_heuristic;
  MuckenhouptReport ap;
  double ratio = 0.0;  ///< restricted norm / A_p^alpha constant
  std::size_t hypothesis_samples = 0;
  std::vector<NecessityBall> balls;
};

/// K_eps(s, t) = m((t-s)/eps)^T K(s, t) with m(x) = B(x) phi(|x|), B homogeneous of order d.
KernelSpec necessity_kernel(const KernelSpec& k, double d, double eps);

NecessityReport necessity_experiment(const KernelSpec& k, const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                     const NecessityOptions& options);

}  // namespace sio
