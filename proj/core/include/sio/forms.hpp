#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "sio/kernels.hpp"
#include "sio/measure.hpp"

namespace sio {

struct SeparatedPartition;

struct BilinearFormResult {
  std::vector<double> value;  ///< one entry per kernel component
  double separation = std::numeric_limits<double>::infinity();
};

/// sum_i sum_j K(s_i, t_j) f(t_j) g(s_i) mu_j nu_i with f on supp mu and g on supp nu.
/// Singular kernels need dist(supp f, supp g) > 0.
BilinearFormResult bilinear_form(const KernelSpec& k, std::span<const double> f, std::span<const double> g,
                                 const DiscreteMeasure& mu, const DiscreteMeasure& nu);
std::vector<double> bilinear_form(const KernelMatrix& k, std::span<const double> f, std::span<const double> g,
                                  const DiscreteMeasure& mu, const DiscreteMeasure& nu);

enum class NormKind { restricted_exact, restricted_heuristic, operator_exact_p2, operator_lower_p };
std::string_view to_string(NormKind k) noexcept;

/// Witness functions live on the real form of the operator: f has
/// (input components) x |supp mu| entries, g has (output components) x |supp nu|,
/// component-major. Scalar kernels have one component on each side, R^m-valued
/// kernels m output components, complex kernels two on each side (Re, Im).
struct NormEstimate {
  double value = 0.0;
  NormKind kind = NormKind::operator_exact_p2;
  double p = 2.0;
  std::vector<double> f;
  std::vector<double> g;
  std::vector<std::size_t> support_f;  ///< indices into supp mu
  std::vector<std::size_t> support_g;  ///< indices into supp nu
  std::size_t iterations = 0;
  double residual = 0.0;
  std::vector<double> history;  ///< best value after each seed / candidate
};

enum class SvdMethod { power, dense, automatic };

struct NormOptions {
  std::uint64_t seed = 0x5105eedULL;
  int seeds = 16;
  std::size_t max_iterations = 200000;
  SvdMethod method = SvdMethod::automatic;
};

/// Real matrix of the operator in L^2 coordinates:
/// nu_i^{1/p} K_ij mu_j^{1/p'} on the real form described at NormEstimate.
Eigen::MatrixXd weighted_operator(const KernelMatrix& k, const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                  double p = 2.0);

/// L^2(mu) -> L^2(nu) norm (largest singular value, power iteration on the normal operator).
NormEstimate operator_norm_p2(const KernelMatrix& k, const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                              const NormOptions& options = {});

/// Certified lower bound on the L^p(mu) -> L^p(nu) norm of a scalar kernel by
/// the nonlinear power method, restarted from several seeds.
NormEstimate operator_norm_p(const KernelMatrix& k, const DiscreteMeasure& mu, const DiscreteMeasure& nu, double p,
                             const NormOptions& options = {});

/// |<T f, g>| / (||f||_p ||g||_p') for the stored witness.
double witness_value(const KernelMatrix& k, const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                     const NormEstimate& e);

/// Kernel matrix with NaN at coincident support points of a singular kernel.
KernelMatrix materialize_masked(const KernelSpec& k, const DiscreteMeasure& mu, const DiscreteMeasure& nu);

constexpr std::size_t kRestrictedCap = 24;

/// Sup of block norms over separated (S_f, S_g). Every shared support point goes
/// to one side; all other points sit on both.
NormEstimate restricted_norm_exact(const KernelMatrix& k, const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                   double p = 2.0, std::size_t cap = kRestrictedCap, const NormOptions& options = {});
NormEstimate restricted_norm_exact(const KernelSpec& k, const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                   double p = 2.0, std::size_t cap = kRestrictedCap, const NormOptions& options = {});

/// Lower bound from random hyperplane and ball cuts of the shared points,
/// followed by single-flip ascent on the best cut.
NormEstimate restricted_norm_heuristic(const KernelMatrix& k, const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                       double p, int trials, std::mt19937_64& rng, const NormOptions& options = {});
NormEstimate restricted_norm_heuristic(const KernelSpec& k, const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                       double p, int trials, std::mt19937_64& rng, const NormOptions& options = {});

struct Factor2Report {
  NormEstimate restricted;
  NormEstimate op;
  double ratio = 1.0;  ///< op / restricted, 1 for 0/0
  bool holds = true;   ///< op <= 2 restricted + tolerance
};

/// Needs mu and nu without common atoms.
Factor2Report factor2_check(const KernelSpec& k, const DiscreteMeasure& mu, const DiscreteMeasure& nu, double p,
                            std::mt19937_64& rng, const NormOptions& options = {});

struct ProjectionLevel {
  int level = 0;
  double form = 0.0;          ///< <T P1 f, P2 g>
  double deviation = 0.0;     ///< |form - <Tf, g>/4|
  double norm_ratio = 0.0;    ///< ||P1 f||_p / ||f||_p
  double norm_deviation = 0.0;  ///< |norm_ratio - 2^{-1/p}|
};

struct ProjectionReport {
  double full_form = 0.0;  ///< <T f, g>
  double f_norm = 0.0;
  double g_norm = 0.0;
  std::vector<ProjectionLevel> levels;
  double fitted_exponent = 0.0;  ///< -slope of log2 deviation against n
};

/// Scalar kernel on sigma x sigma, f and g on supp sigma; P^k_n multiplies by 1_{E^k_n}.
ProjectionReport projection_convergence_test(const KernelSpec& k, std::span<const double> f,
                                             std::span<const double> g, const DiscreteMeasure& sigma,
                                             std::span<const SeparatedPartition> partitions, double p = 2.0);

}  // namespace sio
