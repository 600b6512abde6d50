#include "sio/measure.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "sio/error.hpp"

namespace sio {

namespace {

std::vector<std::size_t> lex_order(const std::vector<double>& coords, std::size_t dim) {
  std::vector<std::size_t> order(dim == 0 ? 0 : coords.size() / dim);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::lexicographical_compare(coords.begin() + a * dim, coords.begin() + (a + 1) * dim,
                                        coords.begin() + b * dim, coords.begin() + (b + 1) * dim);
  });
  return order;
}

std::string format_point(std::span<const double> x) {
  std::ostringstream os;
  os.precision(17);
  os << '(';
  for (std::size_t k = 0; k < x.size(); ++k) os << (k ? ", " : "") << x[k];
  os << ')';
  return os.str();
}

}  // namespace

bool Cube::contains(std::span<const double> x) const {
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (x[k] < corner[k] || x[k] >= corner[k] + side) return false;
  }
  return true;
}

DiscreteMeasure::DiscreteMeasure(std::size_t dimension) : dimension_(dimension) {
  if (dimension == 0) throw Error(ErrorCode::parameter, "measure dimension must be positive");
}

DiscreteMeasure::DiscreteMeasure(std::size_t dimension, std::vector<double> coords,
                                 std::vector<double> weights, std::vector<bool> atomic,
                                 std::optional<double> cell_size)
    : dimension_(dimension),
      coords_(std::move(coords)),
      weights_(std::move(weights)),
      atomic_(std::move(atomic)),
      cell_size_(cell_size) {
  if (dimension_ == 0) throw Error(ErrorCode::parameter, "measure dimension must be positive");
  if (coords_.size() != weights_.size() * dimension_ || atomic_.size() != weights_.size()) {
    throw Error(ErrorCode::input, "measure arrays have inconsistent lengths");
  }
  for (double c : coords_) {
    if (!std::isfinite(c)) throw Error(ErrorCode::input, "measure coordinates must be finite");
  }
  for (double w : weights_) {
    if (!(w > 0.0) || !std::isfinite(w)) {
      throw Error(ErrorCode::input, "measure weights must be finite and strictly positive");
    }
  }
  if (cell_size_ && !(*cell_size_ > 0.0 && std::isfinite(*cell_size_))) {
    throw Error(ErrorCode::input, "cell_size must be positive");
  }

  const auto order = lex_order(coords_, dimension_);
  for (std::size_t k = 1; k < order.size(); ++k) {
    if (std::equal(coords_.begin() + order[k - 1] * dimension_,
                   coords_.begin() + (order[k - 1] + 1) * dimension_,
                   coords_.begin() + order[k] * dimension_)) {
      throw Error(ErrorCode::input,
                  "measure support points must be pairwise distinct; duplicate at " +
                      format_point(point(order[k])));
    }
  }

  if (cell_size_) {
    const double h = *cell_size_;
    std::optional<std::size_t> ref;
    for (std::size_t i = 0; i < size(); ++i) {
      if (atomic_[i]) continue;
      if (!ref) {
        ref = i;
        continue;
      }
      for (std::size_t k = 0; k < dimension_; ++k) {
        const double steps = (coords_[i * dimension_ + k] - coords_[*ref * dimension_ + k]) / h;
        if (std::abs(steps - std::round(steps)) > 1e-6) {
          throw Error(ErrorCode::input,
                      "non-atomic point " + format_point(point(i)) + " is off the lattice of spacing h");
        }
      }
    }
  }
}

DiscreteMeasure DiscreteMeasure::from_points(std::size_t dimension, const std::vector<Point>& points,
                                             std::vector<double> weights, std::vector<bool> atomic,
                                             std::optional<double> cell_size) {
  std::vector<double> coords;
  coords.reserve(points.size() * dimension);
  for (const auto& p : points) {
    if (p.size() != dimension) throw Error(ErrorCode::input, "point has wrong dimension");
    coords.insert(coords.end(), p.begin(), p.end());
  }
  return DiscreteMeasure(dimension, std::move(coords), std::move(weights), std::move(atomic), cell_size);
}

Point DiscreteMeasure::point_copy(std::size_t i) const {
  auto p = point(i);
  return Point(p.begin(), p.end());
}

double DiscreteMeasure::total_mass() const {
  return std::accumulate(weights_.begin(), weights_.end(), 0.0);
}

bool DiscreteMeasure::has_atoms() const {
  return std::find(atomic_.begin(), atomic_.end(), true) != atomic_.end();
}

DiscreteMeasure DiscreteMeasure::scaled(double c) const {
  if (!(c > 0.0)) throw Error(ErrorCode::parameter, "measure scale factor must be positive");
  auto w = weights_;
  for (double& x : w) x *= c;
  return DiscreteMeasure(dimension_, coords_, std::move(w), atomic_, cell_size_);
}

DiscreteMeasure DiscreteMeasure::subset(std::span<const std::size_t> indices) const {
  std::vector<double> coords;
  std::vector<double> w;
  std::vector<bool> a;
  coords.reserve(indices.size() * dimension_);
  for (std::size_t i : indices) {
    auto p = point(i);
    coords.insert(coords.end(), p.begin(), p.end());
    w.push_back(weights_[i]);
    a.push_back(atomic_[i]);
  }
  return DiscreteMeasure(dimension_, std::move(coords), std::move(w), std::move(a), cell_size_);
}

AtomDecomposition decompose(const DiscreteMeasure& mu) {
  std::vector<std::size_t> cont;
  std::vector<std::size_t> atoms;
  for (std::size_t i = 0; i < mu.size(); ++i) (mu.is_atomic(i) ? atoms : cont).push_back(i);
  auto atomic_part = mu.subset(atoms);
  // The atomic part carries no lattice.
  atomic_part = DiscreteMeasure(mu.dimension(), atomic_part.coords(), atomic_part.weights(),
                                atomic_part.atomic_flags());
  return {mu.subset(cont), std::move(atomic_part)};
}

namespace {

template <class Keep>
std::vector<Point> intersect_supports(const DiscreteMeasure& mu, const DiscreteMeasure& nu, Keep keep) {
  if (mu.dimension() != nu.dimension()) throw Error(ErrorCode::input, "measure dimensions differ");
  std::vector<Point> a;
  std::vector<Point> b;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (keep(mu, i)) a.push_back(mu.point_copy(i));
  }
  for (std::size_t i = 0; i < nu.size(); ++i) {
    if (keep(nu, i)) b.push_back(nu.point_copy(i));
  }
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::vector<Point> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

}  // namespace

std::vector<Point> common_atoms(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  return intersect_supports(mu, nu, [](const DiscreteMeasure& m, std::size_t i) { return m.is_atomic(i); });
}

std::vector<Point> common_support(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  return intersect_supports(mu, nu, [](const DiscreteMeasure&, std::size_t) { return true; });
}

std::vector<double> project_function(std::span<const double> f, const DiscreteMeasure& mu, Part part) {
  if (f.size() != mu.size()) throw Error(ErrorCode::input, "function must be defined on every support point");
  std::vector<double> out(f.begin(), f.end());
  const bool want_atomic = part == Part::atomic;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (mu.is_atomic(i) != want_atomic) out[i] = 0.0;
  }
  return out;
}

DiscreteMeasure restrict_to_cube(const DiscreteMeasure& mu, const Cube& cube) {
  if (!(cube.side > 0.0)) throw Error(ErrorCode::parameter, "cube side must be positive");
  if (cube.corner.size() != mu.dimension()) throw Error(ErrorCode::input, "cube has wrong dimension");
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (cube.contains(mu.point(i))) keep.push_back(i);
  }
  return mu.subset(keep);
}

DiscreteMeasure sum(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  if (mu.dimension() != nu.dimension()) throw Error(ErrorCode::input, "measure dimensions differ");
  std::map<Point, std::pair<double, bool>> merged;
  for (const auto* m : {&mu, &nu}) {
    for (std::size_t i = 0; i < m->size(); ++i) {
      auto& slot = merged[m->point_copy(i)];
      slot.first += m->weight(i);
      slot.second = slot.second || m->is_atomic(i);
    }
  }
  std::vector<double> coords;
  std::vector<double> w;
  std::vector<bool> a;
  for (const auto& [p, v] : merged) {
    coords.insert(coords.end(), p.begin(), p.end());
    w.push_back(v.first);
    a.push_back(v.second);
  }
  if (mu.cell_size() && nu.cell_size() && *mu.cell_size() == *nu.cell_size()) {
    // Offset lattices (interleaved grids) do not share one translate of h Z^N;
    // the sum then carries no cell size.
    try {
      return DiscreteMeasure(mu.dimension(), coords, w, a, mu.cell_size());
    } catch (const Error&) {
    }
  }
  return DiscreteMeasure(mu.dimension(), std::move(coords), std::move(w), std::move(a));
}

double mass_in_cube(const DiscreteMeasure& mu, const Cube& cube) {
  double m = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (cube.contains(mu.point(i))) m += mu.weight(i);
  }
  return m;
}

double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(s);
}

double mass_in_ball(const DiscreteMeasure& mu, std::span<const double> center, double radius) {
  double m = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (distance(mu.point(i), center) < radius) m += mu.weight(i);
  }
  return m;
}

bool lex_less(std::span<const double> a, std::span<const double> b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

}  // namespace sio
