#include "sio/splitter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "sio/error.hpp"

namespace sio {

namespace {

using Index = std::vector<std::int64_t>;

Index cell_of(std::span<const double> x, double side) {
  Index k(x.size());
  for (std::size_t a = 0; a < x.size(); ++a) k[a] = static_cast<std::int64_t>(std::floor(x[a] / side));
  return k;
}

Point corner_of(const Index& k, double side) {
  Point c(k.size());
  for (std::size_t a = 0; a < k.size(); ++a) c[a] = static_cast<double>(k[a]) * side;
  return c;
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

Index parent(const Index& k, std::int64_t ratio) {
  Index p(k.size());
  for (std::size_t a = 0; a < k.size(); ++a) p[a] = floor_div(k[a], ratio);
  return p;
}

bool in_big_cube(std::span<const double> x, double half) {
  for (double v : x) {
    if (!(v >= -half && v < half)) return false;
  }
  return true;
}

bool in_shrunk(std::span<const double> x, const Point& corner, double side, double tau) {
  for (std::size_t a = 0; a < x.size(); ++a) {
    if (!(x[a] - corner[a] < tau * side)) return false;
  }
  return true;
}

/// Discretization resolution: the cell size, else the smallest coordinate gap.
double resolution(const DiscreteMeasure& sigma) {
  if (sigma.cell_size()) return *sigma.cell_size();
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < sigma.dimension(); ++a) {
    std::vector<double> v;
    v.reserve(sigma.size());
    for (std::size_t i = 0; i < sigma.size(); ++i) v.push_back(sigma.point(i)[a]);
    std::sort(v.begin(), v.end());
    for (std::size_t i = 1; i < v.size(); ++i) {
      if (v[i] > v[i - 1]) gap = std::min(gap, v[i] - v[i - 1]);
    }
  }
  return std::isfinite(gap) ? gap : 0.0;
}

double box_distance(const Point& c1, const Point& c2, double len) {
  double s = 0.0;
  for (std::size_t a = 0; a < c1.size(); ++a) {
    const double gap = std::max({0.0, c1[a] - (c2[a] + len), c2[a] - (c1[a] + len)});
    s += gap * gap;
  }
  return std::sqrt(s);
}

double point_box_distance(std::span<const double> x, const Point& c, double len) {
  double s = 0.0;
  for (std::size_t a = 0; a < x.size(); ++a) {
    const double gap = std::max({0.0, c[a] - x[a], x[a] - (c[a] + len)});
    s += gap * gap;
  }
  return std::sqrt(s);
}

std::string format_point(const Point& p) {
  std::ostringstream os;
  os.precision(17);
  os << '(';
  for (std::size_t a = 0; a < p.size(); ++a) os << (a ? ", " : "") << p[a];
  os << ')';
  return os.str();
}

}  // namespace

void SeparatedPartition::index() {
  cells_.clear();
  for (const auto& c : e1) cells_[cell_of(c, fine_side)] = 1;
  for (const auto& c : e2) cells_[cell_of(c, fine_side)] = 2;
}

int SeparatedPartition::side(std::span<const double> x) const {
  for (const auto& a : atoms1) {
    if (std::equal(a.begin(), a.end(), x.begin(), x.end())) return 1;
  }
  for (const auto& a : atoms2) {
    if (std::equal(a.begin(), a.end(), x.begin(), x.end())) return 2;
  }
  if (!(fine_side > 0.0)) return 0;
  const Index k = cell_of(x, fine_side);
  auto it = cells_.find(k);
  if (it == cells_.end()) return 0;
  if (!in_shrunk(x, corner_of(k, fine_side), fine_side, tau)) return 0;
  for (const auto& b : removed) {
    if (b.removed_from == it->second && distance(x, b.center) < b.radius) return 0;
  }
  return it->second;
}

double SeparatedPartition::max_deviation() const {
  double m = 0.0;
  for (const auto& b : balance) m = std::max(m, b.deviation);
  return m;
}

std::vector<BalanceEntry> balance_report(const DiscreteMeasure& sigma, const SeparatedPartition& partition,
                                         int cube_level) {
  const double side = std::ldexp(1.0, -cube_level);
  const double half = std::ldexp(1.0, partition.level);
  std::map<Index, BalanceEntry> cubes;
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    const auto x = sigma.point(i);
    if (!in_big_cube(x, half)) continue;
    auto& e = cubes[cell_of(x, side)];
    const double w = sigma.weight(i);
    e.mass += w;
    const int s = partition.side(x);
    if (s == 1) e.mass1 += w;
    if (s == 2) e.mass2 += w;
  }
  std::vector<BalanceEntry> out;
  for (auto& [k, e] : cubes) {
    if (!(e.mass > 0.0)) continue;
    e.corner = corner_of(k, side);
    e.deviation = std::max(std::abs(e.mass1 - e.mass / 2.0), std::abs(e.mass2 - e.mass / 2.0)) / e.mass;
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<CascadeLevel> balance_cascade(const DiscreteMeasure& sigma, const SeparatedPartition& partition) {
  std::vector<CascadeLevel> out;
  for (int j = partition.level; j >= -partition.level; --j) {
    CascadeLevel c;
    c.cube_level = j;
    for (const auto& e : balance_report(sigma, partition, j)) c.max_deviation = std::max(c.max_deviation, e.deviation);
    out.push_back(c);
  }
  return out;
}

SeparatedPartition build_partition(const DiscreteMeasure& sigma, int level, double tau) {
  if (level < 0 || level > 30) throw Error(ErrorCode::parameter, "level must lie in [0, 30]", {{"level", level}});
  if (!(tau > 0.0 && tau < 1.0)) throw Error(ErrorCode::parameter, "tau must lie in (0, 1)", {{"tau", tau}});
  if (sigma.has_atoms()) throw Error(ErrorCode::precondition, "build_partition needs a measure without atoms");

  SeparatedPartition part;
  part.level = level;
  part.dimension = sigma.dimension();
  part.tau = tau;
  const double half = std::ldexp(1.0, level);
  const double q_side = std::ldexp(1.0, -level);
  const double bound = std::ldexp(1.0, -level);

  std::vector<std::size_t> inside;
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    if (in_big_cube(sigma.point(i), half)) inside.push_back(i);
  }

  std::map<Index, double> q_mass;
  for (std::size_t i : inside) q_mass[cell_of(sigma.point(i), q_side)] += sigma.weight(i);
  if (q_mass.empty()) {
    part.fine_side = q_side;
    part.separation = (1.0 - tau) * q_side;
    part.index();
    return part;
  }
  double alpha = std::numeric_limits<double>::infinity();
  for (const auto& [k, m] : q_mass) alpha = std::min(alpha, m);
  part.alpha = alpha;

  const double h = resolution(sigma);
  int m = level;
  std::map<Index, double> fine;
  for (;; ++m) {
    const double delta = std::ldexp(1.0, -m);
    if (delta < h || m > level + 60) {
      throw Error(ErrorCode::resolution,
                  "no admissible fine size above the discretization resolution; refine sigma",
                  {{"level", level}, {"alpha", alpha}, {"resolution", h}, {"smallest_delta_tried", 2.0 * delta}});
    }
    fine.clear();
    for (std::size_t i : inside) fine[cell_of(sigma.point(i), delta)] += sigma.weight(i);
    double heaviest = 0.0;
    for (const auto& [k, w] : fine) heaviest = std::max(heaviest, w);
    if (heaviest < bound * alpha) break;
  }
  const double delta = std::ldexp(1.0, -m);
  part.fine_side = delta;

  // greedy within each Q, lexicographic cube order, ties to E1
  std::map<Index, std::vector<std::pair<Index, double>>> by_q;
  const std::int64_t ratio = std::int64_t{1} << (m - level);
  for (const auto& [k, w] : fine) by_q[parent(k, ratio)].emplace_back(k, w);
  std::map<Index, int> assignment;
  for (const auto& [q, list] : by_q) {
    double m1 = 0.0;
    double m2 = 0.0;
    for (const auto& [k, w] : list) {
      if (m2 < m1) {
        assignment[k] = 2;
        m2 += w;
      } else {
        assignment[k] = 1;
        m1 += w;
      }
    }
  }
  for (const auto& [k, s] : assignment) (s == 1 ? part.e1 : part.e2).push_back(corner_of(k, delta));

  for (int retry = 0; retry <= 20; ++retry) {
    part.tau = tau;
    part.retries = retry;
    part.index();
    part.balance = balance_report(sigma, part, level);
    const auto worst = std::max_element(part.balance.begin(), part.balance.end(),
                                        [](const BalanceEntry& a, const BalanceEntry& b) {
                                          return a.deviation < b.deviation;
                                        });
    if (worst == part.balance.end() || worst->deviation < bound) {
      part.separation = (1.0 - tau) * delta;
      return part;
    }
    if (retry == 20) {
      std::map<std::string, double> data{{"deviation", worst->deviation}, {"tau", tau}};
      for (std::size_t a = 0; a < worst->corner.size(); ++a) data["corner" + std::to_string(a)] = worst->corner[a];
      throw Error(ErrorCode::shrink, "shrinking breaks the balance bound at cube " + format_point(worst->corner),
                  std::move(data));
    }
    tau = (1.0 + tau) / 2.0;
  }
  return part;
}

SeparatedPartition atom_aware_partition(const DiscreteMeasure& mu, const DiscreteMeasure& nu, int level, double tau) {
  if (mu.dimension() != nu.dimension()) throw Error(ErrorCode::input, "measure dimensions differ");
  const auto shared = common_atoms(mu, nu);
  if (!shared.empty()) {
    throw Error(ErrorCode::precondition, "measures share atoms, first at " + format_point(shared.front()),
                {{"common_atoms", static_cast<double>(shared.size())}});
  }
  const auto dm = decompose(mu);
  const auto dn = decompose(nu);
  const DiscreteMeasure sigma = sum(dm.continuous_part, dn.continuous_part);
  SeparatedPartition part = build_partition(sigma, level, tau);

  auto largest = [level](const DiscreteMeasure& a) {
    std::vector<std::size_t> order(a.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
      if (a.weight(x) != a.weight(y)) return a.weight(x) > a.weight(y);
      return lex_less(a.point(x), a.point(y));
    });
    std::vector<Point> out;
    for (std::size_t q = 0; q < order.size() && q < static_cast<std::size_t>(level); ++q) out.push_back(a.point_copy(order[q]));
    return out;
  };
  part.atoms1 = largest(dm.atomic_part);
  part.atoms2 = largest(dn.atomic_part);

  const double budget = std::ldexp(1.0, -level);
  double separation = part.separation;
  auto carve = [&](const std::vector<Point>& centers, const std::vector<Point>& keep, int from) {
    for (std::size_t j = 0; j < centers.size(); ++j) {
      const double limit = budget / std::ldexp(1.0, static_cast<int>(j) + 2);
      double r = std::ldexp(1.0, -level);
      for (;; r /= 2.0) {
        if (r < std::ldexp(1.0, -1000)) {
          throw Error(ErrorCode::resolution, "no ball around atom " + format_point(centers[j]) + " fits the mass budget");
        }
        bool clear = true;
        for (const auto& k : keep) {
          if (distance(k, centers[j]) < r) clear = false;
        }
        if (!clear) continue;
        const double mass = mass_in_ball(sigma, centers[j], r);
        if (mass < limit) {
          part.removed.push_back({centers[j], r, from, mass});
          separation = std::min(separation, r);
          break;
        }
      }
    }
  };
  // j-th ball (1-based) gets 2^-n / 2^{j+1}
  carve(part.atoms2, part.atoms1, 1);
  carve(part.atoms1, part.atoms2, 2);
  part.separation = separation;
  return part;
}

double exhaustive_separation(const SeparatedPartition& partition) {
  const double delta = partition.fine_side;
  const double len = partition.tau * delta;
  double best = std::numeric_limits<double>::infinity();

  // cube pairs more than one cell apart in some axis are at least delta apart
  std::map<Index, std::size_t> e2_cells;
  for (std::size_t q = 0; q < partition.e2.size(); ++q) {
    Point mid = partition.e2[q];
    for (double& v : mid) v += 0.5 * delta;
    e2_cells[cell_of(mid, delta)] = q;
  }
  const std::size_t n = partition.dimension;
  std::size_t neighbours = 1;
  for (std::size_t a = 0; a < n; ++a) neighbours *= 3;
  bool any_far = false;
  for (const auto& c1 : partition.e1) {
    Point mid = c1;
    for (double& v : mid) v += 0.5 * delta;
    const Index k = cell_of(mid, delta);
    std::size_t found = 0;
    for (std::size_t code = 0; code < neighbours; ++code) {
      Index nb = k;
      std::size_t rest = code;
      for (std::size_t a = 0; a < n; ++a) {
        nb[a] += static_cast<std::int64_t>(rest % 3) - 1;
        rest /= 3;
      }
      auto it = e2_cells.find(nb);
      if (it == e2_cells.end()) continue;
      ++found;
      best = std::min(best, box_distance(c1, partition.e2[it->second], len));
    }
    if (found < partition.e2.size()) any_far = true;
  }
  if (any_far) best = std::min(best, delta);

  auto radius_around = [&](const Point& a, int removed_from) {
    double r = 0.0;
    for (const auto& b : partition.removed) {
      if (b.removed_from == removed_from && b.center == a) r = std::max(r, b.radius);
    }
    return r;
  };
  for (const auto& a : partition.atoms1) {
    const double r = radius_around(a, 2);
    for (const auto& c : partition.e2) best = std::min(best, std::max(point_box_distance(a, c, len), r));
    for (const auto& b : partition.atoms2) best = std::min(best, distance(a, b));
  }
  for (const auto& b : partition.atoms2) {
    const double r = radius_around(b, 1);
    for (const auto& c : partition.e1) best = std::min(best, std::max(point_box_distance(b, c, len), r));
  }
  return best;
}

ShrinkReport shrink_stability(const DiscreteMeasure& sigma, const Cube& cube, std::span<const double> taus) {
  ShrinkReport r;
  r.taus.assign(taus.begin(), taus.end());
  r.full_mass = mass_in_cube(sigma, cube);
  for (double t : taus) {
    if (!(t > 0.0 && t <= 1.0)) throw Error(ErrorCode::parameter, "tau must lie in (0, 1]", {{"tau", t}});
    r.masses.push_back(mass_in_cube(sigma, Cube{cube.corner, t * cube.side}));
  }
  std::vector<std::size_t> order(taus.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return taus[a] < taus[b]; });
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (r.masses[order[i]] < r.masses[order[i - 1]]) r.monotone = false;
  }
  return r;
}

}  // namespace sio
