#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <utility>

#include "sio/measure.hpp"

namespace sio {

/// Density w(x) dx on [lo, hi)^N discretized at spacing h: weight w(c) h^N at
/// every cell center c with w(c) > 0.
DiscreteMeasure density_grid(std::size_t dimension, double lo, double hi, double h,
                             const std::function<double(std::span<const double>)>& density);

/// Lebesgue measure on [lo, hi)^N at spacing h.
DiscreteMeasure lebesgue_grid(std::size_t dimension, double lo, double hi, double h);

/// n atoms uniform in [lo, hi)^N with weights uniform in [0.5, 1.5).
DiscreteMeasure random_atoms(std::size_t n, std::size_t dimension, double lo, double hi,
                             std::mt19937_64& rng);

/// Two Lebesgue discretizations of [lo, hi)^N: cell centers and cell corners.
/// The supports never share a point.
std::pair<DiscreteMeasure, DiscreteMeasure> interleaved_grids(std::size_t dimension, double lo,
                                                              double hi, double h);

/// Uniform measure of the given total mass on the open ball B(center, radius),
/// sampled on the lattice offset + h Z^N.
DiscreteMeasure ball_uniform(std::span<const double> center, double radius, double h, double mass,
                             double offset = 0.5);

}  // namespace sio
