#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace sio {

using Point = std::vector<double>;

/// Half-open axis-parallel cube [corner, corner + side)^N.
struct Cube {
  Point corner;
  double side = 0.0;

  bool contains(std::span<const double> x) const;
};

/// Finite weighted point set standing in for a Radon measure on R^N.
///
/// Each support point is either a genuine atom or a cell of a density
/// discretization (weight w(x) h^N at the cell center). Values are immutable
/// once constructed; every operation below returns a new measure.
class DiscreteMeasure {
 public:
  /// Empty measure on R^dimension.
  explicit DiscreteMeasure(std::size_t dimension = 1);

  /// Validates: finite coordinates, strictly positive weights, pairwise
  /// distinct support and, when `cell_size` is set, that every non-atomic
  /// point lies on one translate of the lattice h Z^N.
  DiscreteMeasure(std::size_t dimension, std::vector<double> coords,
                  std::vector<double> weights, std::vector<bool> atomic,
                  std::optional<double> cell_size = std::nullopt);

  static DiscreteMeasure from_points(std::size_t dimension,
                                     const std::vector<Point>& points,
                                     std::vector<double> weights,
                                     std::vector<bool> atomic,
                                     std::optional<double> cell_size = std::nullopt);

  std::size_t dimension() const noexcept { return dimension_; }
  std::size_t size() const noexcept { return weights_.size(); }
  bool empty() const noexcept { return weights_.empty(); }

  std::span<const double> point(std::size_t i) const {
    return {coords_.data() + i * dimension_, dimension_};
  }
  Point point_copy(std::size_t i) const;
  double weight(std::size_t i) const { return weights_[i]; }
  bool is_atomic(std::size_t i) const { return atomic_[i]; }

  const std::vector<double>& coords() const noexcept { return coords_; }
  const std::vector<double>& weights() const noexcept { return weights_; }
  const std::vector<bool>& atomic_flags() const noexcept { return atomic_; }
  std::optional<double> cell_size() const noexcept { return cell_size_; }

  double total_mass() const;
  bool has_atoms() const;

  /// c * mu for c > 0.
  DiscreteMeasure scaled(double c) const;

  /// Sub-measure on the listed support indices (in the given order).
  DiscreteMeasure subset(std::span<const std::size_t> indices) const;

 private:
  std::size_t dimension_;
  std::vector<double> coords_;
  std::vector<double> weights_;
  std::vector<bool> atomic_;
  std::optional<double> cell_size_;
};

struct AtomDecomposition {
  DiscreteMeasure continuous_part;
  DiscreteMeasure atomic_part;
};

enum class Part { continuous, atomic };

/// Splits by the atomic tag; masses are carried over unchanged.
AtomDecomposition decompose(const DiscreteMeasure& mu);

/// Points tagged atomic in both measures with bit-identical coordinates,
/// sorted lexicographically.
std::vector<Point> common_atoms(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

/// Points present in both supports (atomic or not), sorted lexicographically.
std::vector<Point> common_support(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

/// f_{mu_c} or f_{mu_a}: keeps f on the requested part and zeroes it elsewhere.
std::vector<double> project_function(std::span<const double> f, const DiscreteMeasure& mu,
                                     Part part);

DiscreteMeasure restrict_to_cube(const DiscreteMeasure& mu, const Cube& cube);

/// mu + nu. Coincident points merge their weights; the merged point is atomic
/// if it is atomic in either summand.
DiscreteMeasure sum(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

double mass_in_cube(const DiscreteMeasure& mu, const Cube& cube);

/// Mass of the open ball {x : |x - center| < radius}.
double mass_in_ball(const DiscreteMeasure& mu, std::span<const double> center, double radius);

double distance(std::span<const double> a, std::span<const double> b);

/// Exact lexicographic comparison of coordinates.
bool lex_less(std::span<const double> a, std::span<const double> b);

}  // namespace sio
