#include "safemap/safety.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "safemap/errors.hpp"
#include "safemap/spatial_hash.hpp"

namespace safemap {

TestGrid::TestGrid(Bounds bounds, std::array<int, 3> shape) : bounds_(bounds), shape_(shape) {
  bounds_.validate();
  for (int a = 0; a < 3; ++a) {
    if (a >= bounds_.dimension) shape_[a] = 1;
    if (shape_[a] < 1) throw ArgumentError("grid resolution must be >= 1 on every axis");
    spacing_[a] = shape_[a] > 1 ? bounds_.extent(a) / (shape_[a] - 1) : 0.0;
  }
  points_.reserve(static_cast<std::size_t>(shape_[0]) * shape_[1] * shape_[2]);
  for (int iz = 0; iz < shape_[2]; ++iz) {
    for (int iy = 0; iy < shape_[1]; ++iy) {
      for (int ix = 0; ix < shape_[0]; ++ix) {
        Point p = Point::Zero();
        const std::array<int, 3> idx{ix, iy, iz};
        for (int a = 0; a < bounds_.dimension; ++a) {
          p[a] = shape_[a] > 1 ? bounds_.min[a] + idx[a] * spacing_[a]
                               : 0.5 * (bounds_.min[a] + bounds_.max[a]);
        }
        points_.push_back(p);
      }
    }
  }
  // A single node on an axis leaves half the extent uncovered on that axis.
  double h2 = 0.0;
  separation_radius_ = std::numeric_limits<double>::infinity();
  for (int a = 0; a < bounds_.dimension; ++a) {
    const double half = shape_[a] > 1 ? 0.5 * spacing_[a] : 0.5 * bounds_.extent(a);
    h2 += half * half;
    if (shape_[a] > 1) separation_radius_ = std::min(separation_radius_, spacing_[a]);
  }
  fill_distance_ = std::sqrt(h2);
}

std::size_t TestGrid::index(int ix, int iy, int iz) const {
  return static_cast<std::size_t>(ix) +
         static_cast<std::size_t>(shape_[0]) *
             (static_cast<std::size_t>(iy) + static_cast<std::size_t>(shape_[1]) * iz);
}

std::array<int, 3> TestGrid::cell(std::size_t index) const {
  const auto nx = static_cast<std::size_t>(shape_[0]);
  const auto ny = static_cast<std::size_t>(shape_[1]);
  return {static_cast<int>(index % nx), static_cast<int>((index / nx) % ny),
          static_cast<int>(index / (nx * ny))};
}

std::size_t TestGrid::nearest(const Point& x) const {
  std::array<int, 3> idx{0, 0, 0};
  for (int a = 0; a < bounds_.dimension; ++a) {
    if (shape_[a] == 1) continue;
    const double u = (x[a] - bounds_.min[a]) / spacing_[a];
    // Round half toward the lower index.
    const double r = std::ceil(u - 0.5);
    idx[a] = std::clamp(static_cast<int>(r), 0, shape_[a] - 1);
  }
  return index(idx[0], idx[1], idx[2]);
}

GridGeometry grid_geometry(std::span<const Point> points, const Bounds& bounds,
                           int probes_per_axis) {
  if (points.empty()) throw ArgumentError("grid_geometry needs at least one point");
  if (probes_per_axis < 2) throw ArgumentError("probes_per_axis must be >= 2");
  GridGeometry g;

  // Bucket size targets a handful of points per cell.
  double volume = 1.0;
  for (int a = 0; a < bounds.dimension; ++a) volume *= bounds.extent(a);
  const double cell = std::pow(volume / static_cast<double>(points.size()),
                               1.0 / bounds.dimension);
  SpatialHash hash(bounds, std::max(cell, 1e-12 * bounds.diagonal()));
  for (std::size_t i = 0; i < points.size(); ++i) hash.insert(i, points[i]);

  g.separation_radius = std::numeric_limits<double>::infinity();
  if (points.size() > 1) {
    double radius = cell;
    for (std::size_t i = 0; i < points.size(); ++i) {
      // Grow the search radius until another point shows up.
      double r = radius;
      for (;;) {
        const auto near = hash.within(points[i], r);
        double best = std::numeric_limits<double>::infinity();
        for (auto j : near) {
          if (j != i) best = std::min(best, distance(points[i], points[j]));
        }
        if (best <= r) {
          g.separation_radius = std::min(g.separation_radius, best);
          break;
        }
        r *= 2.0;
      }
    }
  }

  const std::array<int, 3> n{probes_per_axis, bounds.dimension >= 2 ? probes_per_axis : 1,
                             bounds.dimension == 3 ? probes_per_axis : 1};
  double h = 0.0;
  Point q = Point::Zero();
  for (int k = 0; k < n[2]; ++k) {
    if (bounds.dimension == 3) q[2] = bounds.min[2] + bounds.extent(2) * k / (n[2] - 1);
    for (int j = 0; j < n[1]; ++j) {
      q[1] = bounds.min[1] + bounds.extent(1) * j / (n[1] - 1);
      for (int i = 0; i < n[0]; ++i) {
        q[0] = bounds.min[0] + bounds.extent(0) * i / (n[0] - 1);
        h = std::max(h, distance(q, points[hash.nearest(q)]));
      }
    }
  }
  g.fill_distance = h;
  return g;
}

void ConfidenceSchedule::validate() const {
  if (!(delta > 0.0 && delta < 1.0)) throw ArgumentError("delta must lie in (0, 1)");
  if (!(lipschitz > 0.0)) throw ArgumentError("Lipschitz constant must be > 0");
}

double ConfidenceSchedule::pi(int t) const {
  const double tt = static_cast<double>(t);
  return std::numbers::pi * std::numbers::pi * tt * tt / 6.0;
}

double beta(const ConfidenceSchedule& schedule, std::size_t grid_size, int t) {
  if (t < 1) throw ArgumentError("beta_t is defined for t >= 1");
  return 2.0 * std::log(static_cast<double>(grid_size) * schedule.pi(t) / schedule.delta);
}

std::size_t BinarySafetyMap::unsafe_count() const {
  return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

BinarySafetyMap binary_map(const Posterior& posterior, const ConfidenceSchedule& schedule,
                           const TestGrid& grid, int t, double f_bar) {
  if (posterior.size() != grid.size() ||
      posterior.variance.size() != posterior.mean.size()) {
    throw ArgumentError("posterior length does not match the grid");
  }
  BinarySafetyMap map;
  map.shape = grid.shape();
  map.step = t;
  map.beta = beta(schedule, grid.size(), t);
  map.f_bar = f_bar;
  map.lipschitz_margin = schedule.lipschitz * grid.fill_distance();
  const double root_beta = std::sqrt(map.beta);
  map.bits.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double ucb = posterior.mean[i] + root_beta * std::sqrt(posterior.variance[i]) +
                       map.lipschitz_margin;
    map.bits[i] = ucb <= f_bar ? 0 : 1;
  }
  return map;
}

std::vector<std::size_t> safe_subset(std::span<const Point> points, const Posterior& posterior,
                                     const ConfidenceSchedule& schedule, const TestGrid& grid,
                                     int t, double f_bar) {
  if (posterior.size() != grid.size()) {
    throw ArgumentError("posterior length does not match the grid");
  }
  const double root_beta = std::sqrt(beta(schedule, grid.size(), t));
  const double margin = schedule.lipschitz * grid.fill_distance();
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto g = grid.nearest(points[i]);
    if (posterior.mean[g] + root_beta * std::sqrt(posterior.variance[g]) + margin <= f_bar) {
      out.push_back(i);
    }
  }
  return out;
}

Point project(const TestGrid& grid, const Point& x) { return grid[grid.nearest(x)]; }

}  // namespace safemap
