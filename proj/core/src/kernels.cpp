#include "sio/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "sio/error.hpp"

namespace sio {

namespace {

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

bool same_point(std::span<const double> a, std::span<const double> b) {
  return std::equal(a.begin(), a.end(), b.begin(), b.end());
}

}  // namespace

void ConvolutionProfile::evaluate(std::span<const double> x, std::span<double> out) const {
  const double r = norm2(x);
  if (form == Form::unit_sphere) {
    std::vector<double> theta(x.begin(), x.end());
    for (double& c : theta) c /= r;
    angular(theta, out);
  } else {
    angular(x, out);
  }
  const double a = radial(r);
  for (double& c : out) c *= a;
}

KernelSpec::KernelSpec(std::string name, std::size_t dimension, std::size_t value_dim, double order,
                       Evaluator evaluate, bool singular, std::optional<ConvolutionProfile> profile)
    : name_(std::move(name)),
      dimension_(dimension),
      value_dim_(value_dim),
      order_(order),
      evaluate_(std::move(evaluate)),
      singular_(singular),
      profile_(std::move(profile)) {
  if (dimension_ == 0 || value_dim_ == 0) throw Error(ErrorCode::parameter, "kernel dimensions must be positive");
  if (!(order_ >= 0.0)) throw Error(ErrorCode::parameter, "kernel order must be nonnegative");
}

std::vector<double> KernelSpec::operator()(std::span<const double> s, std::span<const double> t) const {
  std::vector<double> out(value_dim_);
  evaluate_(s, t, out);
  return out;
}

KernelSpec KernelSpec::with_order(double d) const {
  KernelSpec k = *this;
  if (!(d >= 0.0)) throw Error(ErrorCode::parameter, "kernel order must be nonnegative");
  k.order_ = d;
  return k;
}

KernelSpec KernelSpec::as_complex() const {
  if (value_dim_ != 2) throw Error(ErrorCode::unsupported, "complex kernels have two components");
  KernelSpec k = *this;
  k.complex_ = true;
  return k;
}

std::vector<double> KernelSpec::profile_value(std::span<const double> x) const {
  if (!profile_) throw Error(ErrorCode::unsupported, "kernel '" + name_ + "' has no convolution profile");
  std::vector<double> out(value_dim_);
  profile_->evaluate(x, out);
  return out;
}

KernelMatrix KernelMatrix::scalar(Eigen::MatrixXd m) {
  KernelMatrix k;
  k.components.push_back(std::move(m));
  return k;
}

bool KernelMatrix::all_finite() const {
  return std::all_of(components.begin(), components.end(), [](const Eigen::MatrixXd& c) { return c.allFinite(); });
}

KernelMatrix KernelMatrix::block(std::span<const std::size_t> row_idx, std::span<const std::size_t> col_idx) const {
  KernelMatrix out;
  for (const auto& c : components) {
    Eigen::MatrixXd b(row_idx.size(), col_idx.size());
    for (std::size_t i = 0; i < row_idx.size(); ++i) {
      for (std::size_t j = 0; j < col_idx.size(); ++j) {
        b(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            c(static_cast<Eigen::Index>(row_idx[i]), static_cast<Eigen::Index>(col_idx[j]));
      }
    }
    out.components.push_back(std::move(b));
  }
  out.complex_valued = complex_valued;
  return out;
}

std::vector<double> KernelMatrix::entry(std::size_t i, std::size_t j) const {
  std::vector<double> v;
  v.reserve(components.size());
  for (const auto& c : components) v.push_back(c(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
  return v;
}

// Catalog -------------------------------------------------------------------

KernelSpec make_hilbert() {
  // Stored as a plain evaluator: 1/(pi (s - t)) is -K1(t - s) for K1(x) = 1/(pi x),
  // and keeping it profile-free avoids mixing the two sign conventions.
  return KernelSpec(
      "hilbert", 1, 1, 1.0,
      [](std::span<const double> s, std::span<const double> t, std::span<double> out) {
        out[0] = 1.0 / (std::numbers::pi * (s[0] - t[0]));
      });
}

namespace {

KernelSpec convolution_kernel(std::string name, std::size_t dimension, std::size_t value_dim, double order,
                              ConvolutionProfile profile, VectorMap direct) {
  auto eval = [direct = std::move(direct), dimension](std::span<const double> s, std::span<const double> t,
                                                      std::span<double> out) {
    double x[8];
    for (std::size_t k = 0; k < dimension; ++k) x[k] = t[k] - s[k];
    direct(std::span<const double>(x, dimension), out);
  };
  return KernelSpec(std::move(name), dimension, value_dim, order, std::move(eval), true, std::move(profile));
}

}  // namespace

KernelSpec make_cauchy() {
  ConvolutionProfile profile{
      [](double r) { return 1.0 / r; },
      [](std::span<const double> th, std::span<double> out) {
        out[0] = th[0];
        out[1] = -th[1];
      },
      ConvolutionProfile::Form::unit_sphere, 0.0};
  // 1/z = conj(z) / |z|^2
  VectorMap direct = [](std::span<const double> x, std::span<double> out) {
    const double r2 = x[0] * x[0] + x[1] * x[1];
    out[0] = x[0] / r2;
    out[1] = -x[1] / r2;
  };
  return convolution_kernel("cauchy", 2, 2, 1.0, std::move(profile), std::move(direct)).as_complex();
}

KernelSpec make_riesz_generalized(double alpha, std::size_t dimension) {
  if (!(alpha > 0.0)) throw Error(ErrorCode::parameter, "generalized Riesz kernel needs alpha > 0");
  if (dimension == 0 || dimension > 8) throw Error(ErrorCode::parameter, "Riesz dimension must be in [1, 8]");
  ConvolutionProfile profile{
      [alpha](double r) { return std::pow(r, -alpha); },
      [](std::span<const double> th, std::span<double> out) { std::copy(th.begin(), th.end(), out.begin()); },
      ConvolutionProfile::Form::unit_sphere, 0.0};
  VectorMap direct = [alpha](std::span<const double> x, std::span<double> out) {
    const double r = norm2(x);
    const double scale = std::pow(r, -(alpha + 1.0));
    for (std::size_t k = 0; k < x.size(); ++k) out[k] = x[k] * scale;
  };
  return convolution_kernel("riesz", dimension, dimension, alpha, std::move(profile), std::move(direct));
}

KernelSpec make_ahlfors_beurling() {
  ConvolutionProfile profile{
      [](double r) { return 1.0 / (r * r); },
      [](std::span<const double> th, std::span<double> out) {
        // conj(theta)^2
        out[0] = th[0] * th[0] - th[1] * th[1];
        out[1] = -2.0 * th[0] * th[1];
      },
      ConvolutionProfile::Form::unit_sphere, 0.0};
  // 1/z^2 = conj(z)^2 / |z|^4
  VectorMap direct = [](std::span<const double> x, std::span<double> out) {
    const double r2 = x[0] * x[0] + x[1] * x[1];
    const double r4 = r2 * r2;
    out[0] = (x[0] * x[0] - x[1] * x[1]) / r4;
    out[1] = -2.0 * x[0] * x[1] / r4;
  };
  return convolution_kernel("ahlfors_beurling", 2, 2, 2.0, std::move(profile), std::move(direct)).as_complex();
}

KernelSpec make_bounded(std::string name, std::size_t dimension,
                        std::function<double(std::span<const double>, std::span<const double>)> k) {
  return KernelSpec(
      std::move(name), dimension, 1, 0.0,
      [k = std::move(k)](std::span<const double> s, std::span<const double> t, std::span<double> out) {
        out[0] = k(s, t);
      },
      false);
}

ConvolutionProfile to_homogeneous(const ConvolutionProfile& profile, double degree) {
  if (profile.form != ConvolutionProfile::Form::unit_sphere) {
    throw Error(ErrorCode::unsupported, "profile is already in homogeneous form");
  }
  ConvolutionProfile out;
  out.form = ConvolutionProfile::Form::homogeneous;
  out.degree = degree;
  out.radial = [a = profile.radial, degree](double r) { return a(r) * std::pow(r, -degree); };
  out.angular = [b = profile.angular, degree](std::span<const double> x, std::span<double> o) {
    const double r = norm2(x);
    std::vector<double> theta(x.begin(), x.end());
    for (double& c : theta) c /= r;
    b(theta, o);
    const double scale = std::pow(r, degree);
    for (double& c : o) c *= scale;
  };
  return out;
}

// Operations ----------------------------------------------------------------

OrderReport order_check(const KernelSpec& k, std::span<const PointPair> samples, double cap) {
  OrderReport report;
  std::vector<double> value(k.value_dim());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& [s, t] = samples[i];
    const double r = distance(s, t);
    if (!(r > 0.0)) throw Error(ErrorCode::input, "order_check samples need s != t");
    k.evaluate(s, t, value);
    const double tilde = norm2(value) * std::pow(r, k.order());
    report.tilde_values.push_back(tilde);
    report.sup = std::max(report.sup, tilde);
    if (tilde > cap) report.offending.push_back(i);
  }
  return report;
}

std::size_t product_value_dim(std::size_t kernel_dim, std::size_t multiplier_dim, bool kernel_complex) {
  if (multiplier_dim == 1) return kernel_dim;
  if (multiplier_dim == 2 && (kernel_dim == 1 || (kernel_dim == 2 && kernel_complex))) return 2;
  throw Error(ErrorCode::unsupported, "multiplier/kernel value dimensions are incompatible");
}

void apply_multiplier(std::span<const double> kv, std::span<const double> mv, std::span<double> out) {
  if (mv.size() == 1) {
    for (std::size_t c = 0; c < kv.size(); ++c) out[c] = kv[c] * mv[0];
  } else if (kv.size() == 1) {
    out[0] = kv[0] * mv[0];
    out[1] = kv[0] * mv[1];
  } else {
    const double re = kv[0] * mv[0] - kv[1] * mv[1];
    const double im = kv[0] * mv[1] + kv[1] * mv[0];
    out[0] = re;
    out[1] = im;
  }
}

KernelSpec regularize(const KernelSpec& k, const PairMultiplier& m) {
  const std::size_t out_dim = product_value_dim(k.value_dim(), m.value_dim, k.complex_valued());
  auto eval = [k, m](std::span<const double> s, std::span<const double> t, std::span<double> out) {
    if (same_point(s, t) && k.singular()) {
      if (!m.vanishes_on_diagonal) {
        throw Error(ErrorCode::diagonal_singularity, "regularized kernel evaluated on the diagonal with a "
                                                     "multiplier that does not vanish there");
      }
      std::fill(out.begin(), out.end(), 0.0);
      return;
    }
    double kv[8];
    double mv[2];
    k.evaluate(s, t, std::span<double>(kv, k.value_dim()));
    m.evaluate(s, t, std::span<double>(mv, m.value_dim));
    apply_multiplier(std::span<const double>(kv, k.value_dim()), std::span<const double>(mv, m.value_dim), out);
  };
  KernelSpec out(k.name() + "*M", k.dimension(), out_dim, k.order(), std::move(eval), false);
  return (k.complex_valued() || m.value_dim == 2) ? out.as_complex() : out;
}

KernelMatrix materialize(const KernelSpec& k, const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                         const MaterializeOptions& options) {
  if (mu.dimension() != k.dimension() || nu.dimension() != k.dimension()) {
    throw Error(ErrorCode::input, "kernel and measure dimensions disagree");
  }
  const PairMultiplier* m = options.multiplier;
  const std::size_t kd = k.value_dim();
  const std::size_t out_dim = m ? product_value_dim(kd, m->value_dim, k.complex_valued()) : kd;
  const auto rows = static_cast<Eigen::Index>(nu.size());
  const auto cols = static_cast<Eigen::Index>(mu.size());
  KernelMatrix out;
  out.components.assign(out_dim, Eigen::MatrixXd(rows, cols));
  out.complex_valued = k.complex_valued() || (m && m->value_dim == 2);

  std::vector<double> kv(kd);
  std::vector<double> mv(m ? m->value_dim : 0);
  std::vector<double> pv(out_dim);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto s = nu.point(static_cast<std::size_t>(i));
    for (Eigen::Index j = 0; j < cols; ++j) {
      const auto t = mu.point(static_cast<std::size_t>(j));
      if (k.singular() && same_point(s, t)) {
        double v = 0.0;
        if (m && m->vanishes_on_diagonal) {
          v = 0.0;
        } else if (options.diagonal_value) {
          v = *options.diagonal_value;
        } else {
          throw Error(ErrorCode::diagonal_singularity,
                      "coincident support points need a multiplier vanishing on the diagonal or a diagonal "
                      "policy",
                      {{"row", static_cast<double>(i)}, {"col", static_cast<double>(j)}});
        }
        for (std::size_t c = 0; c < out_dim; ++c) out.components[c](i, j) = v;
        continue;
      }
      k.evaluate(s, t, kv);
      if (m) {
        m->evaluate(s, t, mv);
        apply_multiplier(kv, mv, pv);
        for (std::size_t c = 0; c < out_dim; ++c) out.components[c](i, j) = pv[c];
      } else {
        for (std::size_t c = 0; c < out_dim; ++c) out.components[c](i, j) = kv[c];
      }
    }
  }
  return out;
}

KernelSpec clamp(const KernelSpec& k, double r) {
  if (k.value_dim() != 1) throw Error(ErrorCode::unsupported, "clamp needs a scalar kernel");
  if (!(r > 0.0)) throw Error(ErrorCode::parameter, "clamp level must be positive");
  if (std::isinf(r)) return k;
  auto eval = [k, r](std::span<const double> s, std::span<const double> t, std::span<double> out) {
    if (k.singular() && same_point(s, t)) {
      out[0] = r;
      return;
    }
    k.evaluate(s, t, out);
    if (out[0] < 0.0) throw Error(ErrorCode::precondition, "clamp needs a nonnegative kernel");
    out[0] = std::min(out[0], r);
  };
  return KernelSpec(k.name() + "^R", k.dimension(), 1, k.order(), std::move(eval), false);
}

KernelMatrix clamp(const KernelMatrix& k, double r) {
  if (k.value_dim() != 1) throw Error(ErrorCode::unsupported, "clamp needs a scalar kernel");
  if (!(r > 0.0)) throw Error(ErrorCode::parameter, "clamp level must be positive");
  if ((k.components[0].array() < 0.0).any()) throw Error(ErrorCode::precondition, "clamp needs a nonnegative kernel");
  return KernelMatrix::scalar(k.components[0].cwiseMin(r));
}

}  // namespace sio
