#include "sio/generators.hpp"

#include <cmath>

#include "sio/error.hpp"

namespace sio {

namespace {

std::size_t cells_per_axis(double lo, double hi, double h) {
  if (!(h > 0.0) || !(hi > lo)) throw Error(ErrorCode::parameter, "grid needs h > 0 and hi > lo");
  const double n = (hi - lo) / h;
  const auto rounded = static_cast<std::size_t>(std::llround(n));
  if (std::abs(n - static_cast<double>(rounded)) > 1e-9 * n) {
    throw Error(ErrorCode::parameter, "grid spacing must divide the interval length");
  }
  return rounded;
}

// Visits every multi-index in [0, n)^N in lexicographic order.
template <class F>
void for_each_index(std::size_t dimension, std::size_t n, F&& f) {
  std::vector<std::size_t> idx(dimension, 0);
  if (n == 0) return;
  while (true) {
    f(idx);
    std::size_t k = dimension;
    while (k > 0) {
      --k;
      if (++idx[k] < n) break;
      idx[k] = 0;
      if (k == 0) return;
    }
  }
}

}  // namespace

DiscreteMeasure density_grid(std::size_t dimension, double lo, double hi, double h,
                             const std::function<double(std::span<const double>)>& density) {
  const std::size_t n = cells_per_axis(lo, hi, h);
  const double cell_volume = std::pow(h, static_cast<double>(dimension));
  std::vector<double> coords;
  std::vector<double> weights;
  Point x(dimension);
  for_each_index(dimension, n, [&](const std::vector<std::size_t>& idx) {
    for (std::size_t k = 0; k < dimension; ++k) x[k] = lo + (static_cast<double>(idx[k]) + 0.5) * h;
    const double w = density(x);
    if (w > 0.0) {
      coords.insert(coords.end(), x.begin(), x.end());
      weights.push_back(w * cell_volume);
    }
  });
  std::vector<bool> atomic(weights.size(), false);
  return DiscreteMeasure(dimension, std::move(coords), std::move(weights), std::move(atomic), h);
}

DiscreteMeasure lebesgue_grid(std::size_t dimension, double lo, double hi, double h) {
  return density_grid(dimension, lo, hi, h, [](std::span<const double>) { return 1.0; });
}

DiscreteMeasure random_atoms(std::size_t n, std::size_t dimension, double lo, double hi,
                             std::mt19937_64& rng) {
  if (!(hi > lo)) throw Error(ErrorCode::parameter, "random_atoms needs hi > lo");
  std::uniform_real_distribution<double> coord(lo, hi);
  std::uniform_real_distribution<double> weight(0.5, 1.5);
  std::vector<double> coords(n * dimension);
  std::vector<double> weights(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < dimension; ++k) coords[i * dimension + k] = coord(rng);
    weights[i] = weight(rng);
  }
  return DiscreteMeasure(dimension, std::move(coords), std::move(weights), std::vector<bool>(n, true));
}

std::pair<DiscreteMeasure, DiscreteMeasure> interleaved_grids(std::size_t dimension, double lo,
                                                              double hi, double h) {
  const std::size_t n = cells_per_axis(lo, hi, h);
  const double cell_volume = std::pow(h, static_cast<double>(dimension));
  std::vector<double> centers;
  std::vector<double> corners;
  for_each_index(dimension, n, [&](const std::vector<std::size_t>& idx) {
    for (std::size_t k = 0; k < dimension; ++k) {
      centers.push_back(lo + (static_cast<double>(idx[k]) + 0.5) * h);
      corners.push_back(lo + static_cast<double>(idx[k]) * h);
    }
  });
  const std::size_t count = centers.size() / dimension;
  return {DiscreteMeasure(dimension, std::move(centers), std::vector<double>(count, cell_volume),
                          std::vector<bool>(count, false), h),
          DiscreteMeasure(dimension, std::move(corners), std::vector<double>(count, cell_volume),
                          std::vector<bool>(count, false), h)};
}

DiscreteMeasure ball_uniform(std::span<const double> center, double radius, double h, double mass,
                             double offset) {
  if (!(radius > 0.0) || !(h > 0.0) || !(mass > 0.0)) {
    throw Error(ErrorCode::parameter, "ball_uniform needs positive radius, h and mass");
  }
  const std::size_t dimension = center.size();
  const auto reach = static_cast<long long>(std::ceil(radius / h)) + 1;
  const auto n = static_cast<std::size_t>(2 * reach + 1);
  std::vector<double> coords;
  Point x(dimension);
  for_each_index(dimension, n, [&](const std::vector<std::size_t>& idx) {
    for (std::size_t k = 0; k < dimension; ++k) {
      x[k] = center[k] + (static_cast<double>(static_cast<long long>(idx[k]) - reach) + offset) * h;
    }
    if (distance(x, center) < radius) coords.insert(coords.end(), x.begin(), x.end());
  });
  const std::size_t count = coords.size() / dimension;
  if (count == 0) throw Error(ErrorCode::parameter, "ball_uniform: no lattice point inside the ball");
  return DiscreteMeasure(dimension, std::move(coords),
                         std::vector<double>(count, mass / static_cast<double>(count)),
                         std::vector<bool>(count, false), h);
}

}  // namespace sio
