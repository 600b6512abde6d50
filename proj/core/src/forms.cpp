#include "sio/forms.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "sio/error.hpp"
#include "sio/splitter.hpp"

namespace sio {

namespace {

struct TopSingular {
  double sigma = 0.0;
  Eigen::VectorXd x;  ///< right singular vector
  Eigen::VectorXd y;  ///< left singular vector
  std::size_t iterations = 0;
  double residual = 0.0;
};

TopSingular top_singular_dense(const Eigen::MatrixXd& a) {
  TopSingular r;
  r.x = Eigen::VectorXd::Zero(a.cols());
  r.y = Eigen::VectorXd::Zero(a.rows());
  if (a.cols() <= a.rows()) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a.transpose() * a);
    const double lambda = std::max(es.eigenvalues()(a.cols() - 1), 0.0);
    r.sigma = std::sqrt(lambda);
    r.x = es.eigenvectors().col(a.cols() - 1);
    if (r.sigma > 0.0) r.y = a * r.x / r.sigma;
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a * a.transpose());
    const double lambda = std::max(es.eigenvalues()(a.rows() - 1), 0.0);
    r.sigma = std::sqrt(lambda);
    r.y = es.eigenvectors().col(a.rows() - 1);
    if (r.sigma > 0.0) r.x = a.transpose() * r.y / r.sigma;
  }
  return r;
}

TopSingular top_singular_power(const Eigen::MatrixXd& a, std::size_t max_iterations, std::uint64_t seed) {
  TopSingular r;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::VectorXd x(a.cols());
  for (Eigen::Index j = 0; j < x.size(); ++j) x(j) = normal(rng);
  x.normalize();

  double lambda = 0.0;
  int flat = 0;
  for (std::size_t it = 1; it <= max_iterations; ++it) {
    const Eigen::VectorXd w = a * x;
    const Eigen::VectorXd z = a.transpose() * w;
    const double next = x.dot(z);
    r.iterations = it;
    if (!(next > 0.0)) {
      // A x = 0 for a generic x: the zero operator
      r.sigma = 0.0;
      r.x = Eigen::VectorXd::Zero(a.cols());
      r.y = Eigen::VectorXd::Zero(a.rows());
      return r;
    }
    r.residual = (z - next * x).norm() / next;
    flat = (next - lambda <= 1e-15 * next) ? flat + 1 : 0;
    lambda = next;
    if (r.residual <= 1e-11 || flat >= 50) {
      r.x = x;
      r.sigma = std::sqrt(lambda);
      r.y = a * x / r.sigma;
      return r;
    }
    x = z / z.norm();
  }
  throw Error(ErrorCode::non_convergence, "power iteration did not converge",
              {{"residual", r.residual}, {"iterations", static_cast<double>(max_iterations)}});
}

TopSingular top_singular(const Eigen::MatrixXd& a, const NormOptions& o) {
  if (a.rows() == 0 || a.cols() == 0) {
    TopSingular r;
    r.x = Eigen::VectorXd::Zero(a.cols());
    r.y = Eigen::VectorXd::Zero(a.rows());
    return r;
  }
  const bool dense = o.method == SvdMethod::dense ||
                     (o.method == SvdMethod::automatic && std::min(a.rows(), a.cols()) <= 64);
  return dense ? top_singular_dense(a) : top_singular_power(a, o.max_iterations, o.seed);
}

std::size_t in_components(const KernelMatrix& k) { return k.complex_valued ? 2 : 1; }
std::size_t out_components(const KernelMatrix& k) { return k.complex_valued ? 2 : k.value_dim(); }

/// Unweighted real form of the kernel matrix.
Eigen::MatrixXd real_form(const KernelMatrix& k) {
  const auto n_nu = static_cast<Eigen::Index>(k.rows());
  const auto n_mu = static_cast<Eigen::Index>(k.cols());
  if (k.complex_valued) {
    Eigen::MatrixXd a(2 * n_nu, 2 * n_mu);
    a.topLeftCorner(n_nu, n_mu) = k.components[0];
    a.topRightCorner(n_nu, n_mu) = -k.components[1];
    a.bottomLeftCorner(n_nu, n_mu) = k.components[1];
    a.bottomRightCorner(n_nu, n_mu) = k.components[0];
    return a;
  }
  Eigen::MatrixXd a(static_cast<Eigen::Index>(k.value_dim()) * n_nu, n_mu);
  for (std::size_t c = 0; c < k.value_dim(); ++c) a.middleRows(static_cast<Eigen::Index>(c) * n_nu, n_nu) = k.components[c];
  return a;
}

double lp_norm(const Eigen::VectorXd& v, double p) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) s += std::pow(std::abs(v(i)), p);
  return std::pow(s, 1.0 / p);
}

/// sign(v) |v|^{r-1} / ||v||_r^{r-1}: unit vector in l^{r'} pairing with v to ||v||_r.
Eigen::VectorXd dual_vector(const Eigen::VectorXd& v, double r) {
  const double n = lp_norm(v, r);
  Eigen::VectorXd d(v.size());
  if (!(n > 0.0)) return Eigen::VectorXd::Zero(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double a = std::abs(v(i)) / n;
    d(i) = (v(i) < 0.0 ? -1.0 : 1.0) * std::pow(a, r - 1.0);
  }
  return d;
}

void check_p(double p) {
  if (!(p > 1.0) || !std::isfinite(p)) throw Error(ErrorCode::parameter, "exponent p must lie in (1, inf)", {{"p", p}});
}

void check_shapes(const KernelMatrix& k, const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  if (k.value_dim() == 0 || k.rows() != nu.size() || k.cols() != mu.size()) {
    if (!(k.value_dim() == 0 && (mu.empty() || nu.empty()))) {
      throw Error(ErrorCode::input, "kernel matrix shape does not match the measures");
    }
  }
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

std::vector<std::size_t> iota(std::size_t n) {
  std::vector<std::size_t> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = i;
  return v;
}

/// Pairs (j in mu, i in nu) of coincident support points, ordered lexicographically.
std::vector<std::pair<std::size_t, std::size_t>> shared_points(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  std::map<Point, std::size_t> in_nu;
  for (std::size_t i = 0; i < nu.size(); ++i) in_nu.emplace(nu.point_copy(i), i);
  std::vector<std::pair<Point, std::pair<std::size_t, std::size_t>>> found;
  for (std::size_t j = 0; j < mu.size(); ++j) {
    auto it = in_nu.find(mu.point_copy(j));
    if (it != in_nu.end()) found.push_back({it->first, {j, it->second}});
  }
  std::sort(found.begin(), found.end());
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (auto& f : found) out.push_back(f.second);
  return out;
}

/// Spreads a witness on a sub-block back onto the full supports.
std::vector<double> expand(const std::vector<double>& sub, std::size_t components, std::span<const std::size_t> idx,
                           std::size_t full) {
  std::vector<double> out(components * full, 0.0);
  if (sub.empty()) return out;
  for (std::size_t c = 0; c < components; ++c) {
    for (std::size_t a = 0; a < idx.size(); ++a) out[c * full + idx[a]] = sub[c * idx.size() + a];
  }
  return out;
}

NormEstimate block_norm(const KernelMatrix& k, const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                        std::span<const std::size_t> rows, std::span<const std::size_t> cols, double p,
                        const NormOptions& options) {
  NormEstimate e;
  e.p = p;
  e.support_f.assign(cols.begin(), cols.end());
  e.support_g.assign(rows.begin(), rows.end());
  if (rows.empty() || cols.empty()) {
    e.f.assign(in_components(k) * mu.size(), 0.0);
    e.g.assign(out_components(k) * nu.size(), 0.0);
    return e;
  }
  const KernelMatrix sub = k.block(rows, cols);
  const DiscreteMeasure mu_s = mu.subset(cols);
  const DiscreteMeasure nu_s = nu.subset(rows);
  NormOptions o = options;
  if (o.method == SvdMethod::power) o.method = SvdMethod::automatic;
  NormEstimate inner = p == 2.0 ? operator_norm_p2(sub, mu_s, nu_s, o) : operator_norm_p(sub, mu_s, nu_s, p, o);
  e.value = inner.value;
  e.iterations = inner.iterations;
  e.residual = inner.residual;
  e.f = expand(inner.f, in_components(k), cols, mu.size());
  e.g = expand(inner.g, out_components(k), rows, nu.size());
  return e;
}

/// Block of the assignment: shared point q on the f side when side[q] is true.
NormEstimate assignment_norm(const KernelMatrix& k, const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                             const std::vector<std::pair<std::size_t, std::size_t>>& shared,
                             const std::vector<bool>& side, double p, const NormOptions& options) {
  std::vector<bool> drop_mu(mu.size(), false);
  std::vector<bool> drop_nu(nu.size(), false);
  for (std::size_t q = 0; q < shared.size(); ++q) {
    if (side[q]) {
      drop_nu[shared[q].second] = true;
    } else {
      drop_mu[shared[q].first] = true;
    }
  }
  std::vector<std::size_t> cols;
  std::vector<std::size_t> rows;
  for (std::size_t j = 0; j < mu.size(); ++j) {
    if (!drop_mu[j]) cols.push_back(j);
  }
  for (std::size_t i = 0; i < nu.size(); ++i) {
    if (!drop_nu[i]) rows.push_back(i);
  }
  return block_norm(k, mu, nu, rows, cols, p, options);
}

std::string describe_points(const std::vector<Point>& pts) {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t q = 0; q < pts.size() && q < 5; ++q) {
    os << (q ? ", " : "") << '(';
    for (std::size_t c = 0; c < pts[q].size(); ++c) os << (c ? ", " : "") << pts[q][c];
    os << ')';
  }
  if (pts.size() > 5) os << ", ...";
  return os.str();
}

}  // namespace

std::string_view to_string(NormKind k) noexcept {
  switch (k) {
    case NormKind::restricted_exact: return "restricted_exact";
    case NormKind::restricted_heuristic: return "restricted_heuristic";
    case NormKind::operator_exact_p2: return "operator_exact_p2";
    case NormKind::operator_lower_p: return "operator_lower_p";
  }
  return "unknown";
}

BilinearFormResult bilinear_form(const KernelSpec& k, std::span<const double> f, std::span<const double> g,
                                 const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  if (f.size() != mu.size() || g.size() != nu.size()) throw Error(ErrorCode::input, "f and g must live on the supports");
  if (mu.dimension() != k.dimension() || nu.dimension() != k.dimension()) {
    throw Error(ErrorCode::input, "kernel and measure dimensions disagree");
  }
  BilinearFormResult r;
  r.value.assign(k.value_dim(), 0.0);
  std::vector<std::size_t> sf;
  std::vector<std::size_t> sg;
  for (std::size_t j = 0; j < f.size(); ++j) {
    if (f[j] != 0.0) sf.push_back(j);
  }
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g[i] != 0.0) sg.push_back(i);
  }
  for (std::size_t i : sg) {
    for (std::size_t j : sf) {
      const double d = distance(nu.point(i), mu.point(j));
      if (d < r.separation) r.separation = d;
      if (d == 0.0 && k.singular()) {
        const auto s = nu.point(i);
        throw Error(ErrorCode::separation, "supports of f and g touch; the kernel is singular there",
                    {{"s0", s[0]}, {"row", static_cast<double>(i)}, {"col", static_cast<double>(j)}});
      }
    }
  }
  std::vector<double> v(k.value_dim());
  for (std::size_t i : sg) {
    for (std::size_t j : sf) {
      k.evaluate(nu.point(i), mu.point(j), v);
      const double w = f[j] * g[i] * mu.weight(j) * nu.weight(i);
      for (std::size_t c = 0; c < v.size(); ++c) r.value[c] += v[c] * w;
    }
  }
  return r;
}

std::vector<double> bilinear_form(const KernelMatrix& k, std::span<const double> f, std::span<const double> g,
                                  const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  check_shapes(k, mu, nu);
  if (f.size() != mu.size() || g.size() != nu.size()) throw Error(ErrorCode::input, "f and g must live on the supports");
  std::vector<double> out(k.value_dim(), 0.0);
  for (std::size_t c = 0; c < k.value_dim(); ++c) {
    const auto& m = k.components[c];
    for (std::size_t i = 0; i < nu.size(); ++i) {
      if (g[i] == 0.0) continue;
      for (std::size_t j = 0; j < mu.size(); ++j) {
        if (f[j] == 0.0) continue;
        const double v = m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        if (std::isnan(v)) {
          throw Error(ErrorCode::separation, "form touches an excluded (coincident) entry",
                      {{"row", static_cast<double>(i)}, {"col", static_cast<double>(j)}});
        }
        out[c] += v * f[j] * g[i] * mu.weight(j) * nu.weight(i);
      }
    }
  }
  return out;
}

Eigen::MatrixXd weighted_operator(const KernelMatrix& k, const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                  double p) {
  check_shapes(k, mu, nu);
  Eigen::MatrixXd a = real_form(k);
  if (!a.allFinite()) throw Error(ErrorCode::input, "kernel matrix has non-finite entries");
  const double pp = p / (p - 1.0);
  const auto n_nu = nu.size();
  const auto n_mu = mu.size();
  for (Eigen::Index r = 0; r < a.rows(); ++r) a.row(r) *= std::pow(nu.weight(static_cast<std::size_t>(r) % n_nu), 1.0 / p);
  for (Eigen::Index c = 0; c < a.cols(); ++c) a.col(c) *= std::pow(mu.weight(static_cast<std::size_t>(c) % n_mu), 1.0 / pp);
  return a;
}

NormEstimate operator_norm_p2(const KernelMatrix& k, const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                              const NormOptions& options) {
  NormEstimate e;
  e.kind = NormKind::operator_exact_p2;
  e.p = 2.0;
  e.support_f = iota(mu.size());
  e.support_g = iota(nu.size());
  if (mu.empty() || nu.empty()) return e;
  const Eigen::MatrixXd a = weighted_operator(k, mu, nu, 2.0);
  const TopSingular t = top_singular(a, options);
  e.value = t.sigma;
  e.iterations = t.iterations;
  e.residual = t.residual;
  e.f = to_std(t.x);
  e.g = to_std(t.y);
  for (std::size_t r = 0; r < e.f.size(); ++r) e.f[r] /= std::sqrt(mu.weight(r % mu.size()));
  for (std::size_t r = 0; r < e.g.size(); ++r) e.g[r] /= std::sqrt(nu.weight(r % nu.size()));
  e.history = {e.value};
  return e;
}

NormEstimate operator_norm_p(const KernelMatrix& k, const DiscreteMeasure& mu, const DiscreteMeasure& nu, double p,
                             const NormOptions& options) {
  check_p(p);
  if (k.value_dim() != 1 || k.complex_valued) {
    throw Error(ErrorCode::unsupported, "L^p norms beyond p = 2 need a real scalar kernel");
  }
  NormEstimate e;
  e.kind = NormKind::operator_lower_p;
  e.p = p;
  e.support_f = iota(mu.size());
  e.support_g = iota(nu.size());
  e.f.assign(mu.size(), 0.0);
  e.g.assign(nu.size(), 0.0);
  if (mu.empty() || nu.empty()) return e;

  const double pp = p / (p - 1.0);
  const Eigen::MatrixXd a = weighted_operator(k, mu, nu, p);
  const auto n = a.cols();

  std::vector<Eigen::VectorXd> starts;
  {
    NormOptions o = options;
    if (o.method == SvdMethod::power) o.method = SvdMethod::automatic;
    const TopSingular t = top_singular(weighted_operator(k, mu, nu, 2.0), o);
    Eigen::VectorXd u(n);
    for (Eigen::Index j = 0; j < n; ++j) {
      const double w = mu.weight(static_cast<std::size_t>(j));
      u(j) = t.x(j) / std::sqrt(w) * std::pow(w, 1.0 / p);
    }
    starts.push_back(u);
  }
  starts.push_back(Eigen::VectorXd::Ones(n));
  std::mt19937_64 rng(options.seed);
  std::bernoulli_distribution coin;
  for (int s = 2; s < options.seeds; ++s) {
    Eigen::VectorXd u(n);
    for (Eigen::Index j = 0; j < n; ++j) u(j) = coin(rng) ? 1.0 : -1.0;
    starts.push_back(u);
  }

  double best = -1.0;
  Eigen::VectorXd best_x;
  Eigen::VectorXd best_y;
  for (auto& x : starts) {
    const double nx = lp_norm(x, p);
    if (!(nx > 0.0)) continue;
    x /= nx;
    Eigen::VectorXd y = a * x;
    double gamma = lp_norm(y, p);
    for (std::size_t it = 0; it < 10000 && gamma > 0.0; ++it) {
      const Eigen::VectorXd z = a.transpose() * dual_vector(y, p);
      Eigen::VectorXd xn = dual_vector(z, pp);
      const Eigen::VectorXd yn = a * xn;
      const double gn = lp_norm(yn, p);
      ++e.iterations;
      if (!(gn > gamma * (1.0 + 1e-13))) {
        if (gn > gamma) {
          x = xn;
          y = yn;
          gamma = gn;
        }
        break;
      }
      x = xn;
      y = yn;
      gamma = gn;
    }
    if (gamma > best) {
      best = gamma;
      best_x = x;
      best_y = y;
    }
    e.history.push_back(std::max(best, 0.0));
  }
  if (best < 0.0) return e;
  e.value = best;
  const Eigen::VectorXd d = dual_vector(best_y, p);
  for (Eigen::Index j = 0; j < n; ++j) e.f[j] = best_x(j) / std::pow(mu.weight(static_cast<std::size_t>(j)), 1.0 / p);
  for (Eigen::Index i = 0; i < d.size(); ++i) e.g[i] = d(i) / std::pow(nu.weight(static_cast<std::size_t>(i)), 1.0 / pp);
  return e;
}

double witness_value(const KernelMatrix& k, const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                     const NormEstimate& e) {
  const Eigen::MatrixXd a = real_form(k);
  const std::size_t cin = in_components(k);
  const std::size_t cout = out_components(k);
  if (e.f.size() != cin * mu.size() || e.g.size() != cout * nu.size()) {
    throw Error(ErrorCode::input, "witness does not match the kernel shape");
  }
  double value = 0.0;
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    const double gv = e.g[static_cast<std::size_t>(r)];
    if (gv == 0.0) continue;
    const double wr = nu.weight(static_cast<std::size_t>(r) % nu.size());
    for (Eigen::Index c = 0; c < a.cols(); ++c) {
      const double fv = e.f[static_cast<std::size_t>(c)];
      if (fv == 0.0) continue;
      value += a(r, c) * fv * mu.weight(static_cast<std::size_t>(c) % mu.size()) * gv * wr;
    }
  }
  const double pp = e.p / (e.p - 1.0);
  auto norm = [](const std::vector<double>& v, const DiscreteMeasure& m, std::size_t comps, double q) {
    double s = 0.0;
    for (std::size_t j = 0; j < m.size(); ++j) {
      double a2 = 0.0;
      for (std::size_t c = 0; c < comps; ++c) a2 += v[c * m.size() + j] * v[c * m.size() + j];
      s += m.weight(j) * std::pow(std::sqrt(a2), q);
    }
    return std::pow(s, 1.0 / q);
  };
  const double nf = norm(e.f, mu, cin, e.p);
  const double ng = norm(e.g, nu, cout, pp);
  if (!(nf > 0.0) || !(ng > 0.0)) return 0.0;
  return std::abs(value) / (nf * ng);
}

KernelMatrix materialize_masked(const KernelSpec& k, const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  MaterializeOptions o;
  if (k.singular()) o.diagonal_value = std::numeric_limits<double>::quiet_NaN();
  return materialize(k, mu, nu, o);
}

NormEstimate restricted_norm_exact(const KernelMatrix& k, const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                   double p, std::size_t cap, const NormOptions& options) {
  check_p(p);
  check_shapes(k, mu, nu);
  if (mu.size() + nu.size() > cap) {
    throw Error(ErrorCode::cap_exceeded,
                "too many support points for exact enumeration; use restricted_norm_heuristic",
                {{"points", static_cast<double>(mu.size() + nu.size())}, {"cap", static_cast<double>(cap)}});
  }
  const auto shared = shared_points(mu, nu);
  const std::size_t c = shared.size();
  NormEstimate best;
  best.kind = NormKind::restricted_exact;
  best.p = p;
  best.value = -1.0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << c); ++mask) {
    std::vector<bool> side(c);
    for (std::size_t q = 0; q < c; ++q) side[q] = (mask >> q) & 1U;
    NormEstimate e = assignment_norm(k, mu, nu, shared, side, p, options);
    if (e.value > best.value) {
      e.kind = NormKind::restricted_exact;
      e.history = best.history;
      best = std::move(e);
    }
    best.history.push_back(best.value);
  }
  return best;
}

NormEstimate restricted_norm_exact(const KernelSpec& k, const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                   double p, std::size_t cap, const NormOptions& options) {
  if (mu.size() + nu.size() > cap) {
    throw Error(ErrorCode::cap_exceeded,
                "too many support points for exact enumeration; use restricted_norm_heuristic",
                {{"points", static_cast<double>(mu.size() + nu.size())}, {"cap", static_cast<double>(cap)}});
  }
  return restricted_norm_exact(materialize_masked(k, mu, nu), mu, nu, p, cap, options);
}

NormEstimate restricted_norm_heuristic(const KernelMatrix& k, const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                       double p, int trials, std::mt19937_64& rng, const NormOptions& options) {
  check_p(p);
  check_shapes(k, mu, nu);
  const auto shared = shared_points(mu, nu);
  const std::size_t c = shared.size();
  const std::size_t dim = mu.dimension();

  std::vector<std::vector<bool>> candidates;
  candidates.emplace_back(c, true);
  candidates.emplace_back(c, false);
  if (c > 0) {
    std::normal_distribution<double> normal;
    std::uniform_int_distribution<std::size_t> pick(0, c - 1);
    for (int t = 0; t < trials; ++t) {
      std::vector<bool> side(c);
      if (t % 2 == 0) {
        std::vector<double> u(dim);
        for (double& v : u) v = normal(rng);
        auto proj = [&](std::size_t q) {
          const auto x = mu.point(shared[q].first);
          double s = 0.0;
          for (std::size_t a = 0; a < dim; ++a) s += u[a] * x[a];
          return s;
        };
        const double threshold = proj(pick(rng));
        for (std::size_t q = 0; q < c; ++q) side[q] = proj(q) <= threshold;
      } else {
        const auto center = mu.point(shared[pick(rng)].first);
        const double radius = distance(center, mu.point(shared[pick(rng)].first));
        for (std::size_t q = 0; q < c; ++q) side[q] = distance(mu.point(shared[q].first), center) <= radius;
      }
      candidates.push_back(side);
      side.flip();
      candidates.push_back(std::move(side));
    }
  }

  std::set<std::vector<bool>> seen;
  NormEstimate best;
  best.value = -1.0;
  std::vector<bool> best_side;
  std::vector<double> history;
  for (const auto& side : candidates) {
    if (!seen.insert(side).second) continue;
    NormEstimate e = assignment_norm(k, mu, nu, shared, side, p, options);
    if (e.value > best.value) {
      best = std::move(e);
      best_side = side;
    }
    history.push_back(best.value);
  }
  // single-flip ascent
  const int passes = c <= 64 ? 4 : 1;
  for (int pass = 0; pass < passes; ++pass) {
    bool improved = false;
    for (std::size_t q = 0; q < c; ++q) {
      auto side = best_side;
      side[q] = !side[q];
      if (!seen.insert(side).second) continue;
      NormEstimate e = assignment_norm(k, mu, nu, shared, side, p, options);
      if (e.value > best.value * (1.0 + 1e-12)) {
        best = std::move(e);
        best_side = side;
        improved = true;
      }
      history.push_back(best.value);
    }
    if (!improved) break;
  }
  best.kind = NormKind::restricted_heuristic;
  best.p = p;
  best.history = std::move(history);
  return best;
}

NormEstimate restricted_norm_heuristic(const KernelSpec& k, const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                       double p, int trials, std::mt19937_64& rng, const NormOptions& options) {
  return restricted_norm_heuristic(materialize_masked(k, mu, nu), mu, nu, p, trials, rng, options);
}

Factor2Report factor2_check(const KernelSpec& k, const DiscreteMeasure& mu, const DiscreteMeasure& nu, double p,
                            std::mt19937_64& rng, const NormOptions& options) {
  check_p(p);
  const auto atoms = common_atoms(mu, nu);
  if (!atoms.empty()) {
    throw Error(ErrorCode::precondition, "measures share atoms: " + describe_points(atoms),
                {{"common_atoms", static_cast<double>(atoms.size())}});
  }
  const KernelMatrix km = materialize_masked(k, mu, nu);
  Factor2Report r;
  r.restricted = mu.size() + nu.size() <= kRestrictedCap ? restricted_norm_exact(km, mu, nu, p, kRestrictedCap, options)
                                                         : restricted_norm_heuristic(km, mu, nu, p, 64, rng, options);
  if (!km.all_finite()) {
    throw Error(ErrorCode::precondition,
                "kernel is singular on shared support points; regularize or clamp it before the operator norm");
  }
  r.op = p == 2.0 ? operator_norm_p2(km, mu, nu, options) : operator_norm_p(km, mu, nu, p, options);
  const double rs = r.restricted.value;
  const double op = r.op.value;
  if (rs == 0.0) {
    r.ratio = op == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
  } else {
    r.ratio = op / rs;
  }
  r.holds = op <= 2.0 * rs + 1e-12 + 1e-9 * rs;
  return r;
}

ProjectionReport projection_convergence_test(const KernelSpec& k, std::span<const double> f,
                                             std::span<const double> g, const DiscreteMeasure& sigma,
                                             std::span<const SeparatedPartition> partitions, double p) {
  check_p(p);
  if (k.value_dim() != 1) throw Error(ErrorCode::unsupported, "projection test needs a scalar kernel");
  if (k.singular()) throw Error(ErrorCode::precondition, "projection test needs a kernel finite on the diagonal");
  if (f.size() != sigma.size() || g.size() != sigma.size()) {
    throw Error(ErrorCode::input, "f and g must live on supp sigma");
  }
  const std::size_t n = sigma.size();
  const std::size_t levels = partitions.size();
  std::vector<std::vector<char>> in1(levels, std::vector<char>(n));
  std::vector<std::vector<char>> in2(levels, std::vector<char>(n));
  for (std::size_t l = 0; l < levels; ++l) {
    for (std::size_t i = 0; i < n; ++i) {
      const int s = partitions[l].side(sigma.point(i));
      in1[l][i] = s == 1;
      in2[l][i] = s == 2;
    }
  }

  ProjectionReport r;
  std::vector<double> form(levels, 0.0);
  double v[1];
  std::vector<double> row(levels);
  for (std::size_t i = 0; i < n; ++i) {
    double full_row = 0.0;
    std::fill(row.begin(), row.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (f[j] == 0.0) continue;
      k.evaluate(sigma.point(i), sigma.point(j), std::span<double>(v, 1));
      const double term = v[0] * f[j] * sigma.weight(j);
      full_row += term;
      for (std::size_t l = 0; l < levels; ++l) {
        if (in1[l][j]) row[l] += term;
      }
    }
    const double gi = g[i] * sigma.weight(i);
    r.full_form += full_row * gi;
    for (std::size_t l = 0; l < levels; ++l) {
      if (in2[l][i]) form[l] += row[l] * gi;
    }
  }

  auto lp = [&](std::span<const double> h, const std::vector<char>* mask) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask && !(*mask)[i]) continue;
      s += sigma.weight(i) * std::pow(std::abs(h[i]), p);
    }
    return std::pow(s, 1.0 / p);
  };
  r.f_norm = lp(f, nullptr);
  r.g_norm = lp(g, nullptr);

  double sx = 0, sy = 0, sxx = 0, sxy = 0, cnt = 0;
  for (std::size_t l = 0; l < levels; ++l) {
    ProjectionLevel pl;
    pl.level = partitions[l].level;
    pl.form = form[l];
    pl.deviation = std::abs(form[l] - r.full_form / 4.0);
    pl.norm_ratio = r.f_norm > 0.0 ? lp(f, &in1[l]) / r.f_norm : 0.0;
    pl.norm_deviation = std::abs(pl.norm_ratio - std::pow(2.0, -1.0 / p));
    if (pl.deviation > 0.0) {
      const double x = pl.level;
      const double y = std::log2(pl.deviation);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      cnt += 1;
    }
    r.levels.push_back(pl);
  }
  r.fitted_exponent = cnt >= 2 ? -(cnt * sxy - sx * sy) / (cnt * sxx - sx * sx) : std::numeric_limits<double>::infinity();
  return r;
}

}  // namespace sio
