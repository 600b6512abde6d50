#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "sio/measure.hpp"

namespace sio {

constexpr double kDefaultTau = 1.0 - 1.0 / 256.0;

/// One dyadic cube Q of side 2^-n inside Q^n with its split masses.
struct BalanceEntry {
  Point corner;
  double mass = 0.0;   ///< sigma(Q)
  double mass1 = 0.0;  ///< sigma(E1 cap Q)
  double mass2 = 0.0;  ///< sigma(E2 cap Q)
  /// max_k |sigma(E^k cap Q) - sigma(Q)/2| / sigma(Q)
  double deviation = 0.0;
};

struct RemovedBall {
  Point center;
  double radius = 0.0;
  int removed_from = 1;  ///< the set the open ball is carved out of
  double mass = 0.0;     ///< sigma-mass of the ball
};

/// E1, E2 as unions of corner-shrunk fine cubes tau R, plus adjoined atoms and
/// removed balls for the atom-aware variant.
struct SeparatedPartition {
  int level = 0;
  std::size_t dimension = 1;
  double fine_side = 0.0;  ///< delta = 2^-m
  double tau = kDefaultTau;
  double alpha = 0.0;       ///< min nonzero sigma(Q) over cubes of side 2^-n
  double separation = 0.0;  ///< lower bound on dist(E1, E2)
  int retries = 0;
  std::vector<Point> e1;  ///< corners of the original fine cubes
  std::vector<Point> e2;
  std::vector<BalanceEntry> balance;
  std::vector<Point> atoms1;
  std::vector<Point> atoms2;
  std::vector<RemovedBall> removed;

  /// 1 or 2 for points of E1 or E2, 0 otherwise.
  int side(std::span<const double> x) const;
  double max_deviation() const;

  /// Rebuilds the lookup table after e1/e2 changed.
  void index();

 private:
  std::map<std::vector<std::int64_t>, int> cells_;
};

/// Greedy split of sigma inside Q^n = [-2^n, 2^n)^N. Retries tau <- (1 + tau)/2
/// up to 20 times when shrinking breaks the balance bound.
SeparatedPartition build_partition(const DiscreteMeasure& sigma, int level, double tau = kDefaultTau);

/// Base split of mu_c + nu_c, the `level` largest atoms of mu adjoined to E1 and
/// of nu to E2, and small balls around the opposite atoms removed.
SeparatedPartition atom_aware_partition(const DiscreteMeasure& mu, const DiscreteMeasure& nu, int level,
                                        double tau = kDefaultTau);

/// Recomputes the per-cube balance of `partition` against sigma.
std::vector<BalanceEntry> balance_report(const DiscreteMeasure& sigma, const SeparatedPartition& partition,
                                         int cube_level);

struct CascadeLevel {
  int cube_level = 0;  ///< cubes of side 2^-cube_level
  double max_deviation = 0.0;
};

/// Balance at every dyadic size from 2^-n up to 2^n inside Q^n.
std::vector<CascadeLevel> balance_cascade(const DiscreteMeasure& sigma, const SeparatedPartition& partition);

/// Minimum distance between E1 and E2 over all pairs of pieces, capped at the
/// fine side (cubes that are not lattice neighbours are at least that far apart).
double exhaustive_separation(const SeparatedPartition& partition);

struct ShrinkReport {
  std::vector<double> taus;
  std::vector<double> masses;  ///< sigma(tau R)
  double full_mass = 0.0;      ///< sigma(R)
  bool monotone = true;
};

ShrinkReport shrink_stability(const DiscreteMeasure& sigma, const Cube& cube, std::span<const double> taus);

}  // namespace sio
