#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sio/measure.hpp"

namespace sio {

using VectorMap = std::function<void(std::span<const double> x, std::span<double> out)>;

/// K(s, t) = K1(t - s) with K1(x) = A(|x|) B(x/|x|) (unit_sphere form) or
/// K1(x) = A(|x|) B(x) with B homogeneous of `degree` (homogeneous form).
struct ConvolutionProfile {
  enum class Form { unit_sphere, homogeneous };

  std::function<double(double)> radial;
  VectorMap angular;
  Form form = Form::unit_sphere;
  double degree = 0.0;

  void evaluate(std::span<const double> x, std::span<double> out) const;
};

/// A (possibly vector-valued) kernel on R^N x R^N.
///
/// `singular` kernels are undefined on the diagonal s = t; regularized,
/// truncated, clamped and bounded kernels are finite everywhere.
class KernelSpec {
 public:
  using Evaluator =
      std::function<void(std::span<const double> s, std::span<const double> t, std::span<double> out)>;

  KernelSpec(std::string name, std::size_t dimension, std::size_t value_dim, double order,
             Evaluator evaluate, bool singular = true,
             std::optional<ConvolutionProfile> profile = std::nullopt);

  const std::string& name() const noexcept { return name_; }
  std::size_t dimension() const noexcept { return dimension_; }
  std::size_t value_dim() const noexcept { return value_dim_; }
  double order() const noexcept { return order_; }
  bool singular() const noexcept { return singular_; }
  const std::optional<ConvolutionProfile>& profile() const noexcept { return profile_; }
  /// value_dim 2 read as a complex number (Cauchy, Ahlfors-Beurling, complex multipliers).
  bool complex_valued() const noexcept { return complex_; }

  KernelSpec with_order(double d) const;
  KernelSpec as_complex() const;

  void evaluate(std::span<const double> s, std::span<const double> t, std::span<double> out) const {
    evaluate_(s, t, out);
  }
  std::vector<double> operator()(std::span<const double> s, std::span<const double> t) const;

  /// K1(x) through the convolution profile; requires profile().
  std::vector<double> profile_value(std::span<const double> x) const;

 private:
  std::string name_;
  std::size_t dimension_;
  std::size_t value_dim_;
  double order_;
  Evaluator evaluate_;
  bool singular_;
  std::optional<ConvolutionProfile> profile_;
  bool complex_ = false;
};

/// Multiplier M(s, t) acting on kernel values. value_dim 1 is real scaling,
/// value_dim 2 is a complex number acting by the real 2x2 rotation-dilation.
struct PairMultiplier {
  std::size_t value_dim = 1;
  std::function<void(std::span<const double> s, std::span<const double> t, std::span<double> out)> evaluate;
  bool vanishes_on_diagonal = false;
};

/// Dense kernel values: one (|supp nu| x |supp mu|) matrix per value component.
/// Row i is the target point s_i of nu, column j the source point t_j of mu.
struct KernelMatrix {
  std::vector<Eigen::MatrixXd> components;
  /// Two components read as real and imaginary parts.
  bool complex_valued = false;

  static KernelMatrix scalar(Eigen::MatrixXd m);

  std::size_t rows() const { return components.empty() ? 0 : static_cast<std::size_t>(components[0].rows()); }
  std::size_t cols() const { return components.empty() ? 0 : static_cast<std::size_t>(components[0].cols()); }
  std::size_t value_dim() const { return components.size(); }

  bool all_finite() const;
  KernelMatrix block(std::span<const std::size_t> row_idx, std::span<const std::size_t> col_idx) const;
  /// Entry (i, j) as an m-vector.
  std::vector<double> entry(std::size_t i, std::size_t j) const;
};

// Catalog -------------------------------------------------------------------

/// 1/(pi (s - t)) on R.
KernelSpec make_hilbert();
/// K1(z) = 1/z on C = R^2, values as (Re, Im).
KernelSpec make_cauchy();
/// K1(x) = x / |x|^(alpha + 1) on R^N with values in R^N.
KernelSpec make_riesz_generalized(double alpha, std::size_t dimension);
/// K1(z) = 1/z^2 on C = R^2, values as (Re, Im).
KernelSpec make_ahlfors_beurling();
/// Bounded scalar kernel from a user function; finite on the diagonal.
KernelSpec make_bounded(std::string name, std::size_t dimension,
                        std::function<double(std::span<const double>, std::span<const double>)> k);

/// Same kernel through K1(x) = A(|x|) B(x) with B homogeneous of degree d.
/// Requires a unit_sphere profile; B(x) = |x|^d B(x/|x|), A(r) -> A(r) r^{-d}.
ConvolutionProfile to_homogeneous(const ConvolutionProfile& profile, double degree);

// Operations ----------------------------------------------------------------

struct OrderReport {
  double sup = 0.0;  ///< max over samples of |K(s,t)| |s-t|^d
  std::vector<std::size_t> offending;  ///< sample indices with tilde value above the cap
  std::vector<double> tilde_values;
};

using PointPair = std::pair<Point, Point>;

/// Empirical near-diagonal sup of |K(s,t)| |s-t|^d (Euclidean norm of vector values).
OrderReport order_check(const KernelSpec& k, std::span<const PointPair> samples,
                        double cap = std::numeric_limits<double>::infinity());

/// Kernel value times multiplier value for one entry.
std::size_t product_value_dim(std::size_t kernel_dim, std::size_t multiplier_dim, bool kernel_complex = true);
void apply_multiplier(std::span<const double> kernel_value, std::span<const double> multiplier_value,
                      std::span<double> out);

/// K * M as a kernel finite on the diagonal (value 0 there). Throws
/// diagonal_singularity when evaluated at s = t with a multiplier that does
/// not vanish on the diagonal.
KernelSpec regularize(const KernelSpec& k, const PairMultiplier& m);

struct MaterializeOptions {
  const PairMultiplier* multiplier = nullptr;
  /// Value written at coincident points s_i = t_j when neither the kernel
  /// nor the multiplier makes the entry finite. NaN marks the entry excluded.
  std::optional<double> diagonal_value;
};

KernelMatrix materialize(const KernelSpec& k, const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                         const MaterializeOptions& options = {});

/// min{K, R} for a nonnegative scalar kernel; R = +inf returns K unchanged.
/// At s = t a singular K is taken to be +inf, so the clamped value is R.
KernelSpec clamp(const KernelSpec& k, double r);
KernelMatrix clamp(const KernelMatrix& k, double r);

}  // namespace sio
