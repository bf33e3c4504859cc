#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "safemap/gp.hpp"
#include "safemap/types.hpp"

namespace safemap {

/// Uniform test grid X*. Linear index = ix + nx * (iy + ny * iz), x fastest,
/// starting at the bounds' minimum corner.
class TestGrid {
 public:
  TestGrid(Bounds bounds, std::array<int, 3> shape);

  const Bounds& bounds() const { return bounds_; }
  int dimension() const { return bounds_.dimension; }
  const std::array<int, 3>& shape() const { return shape_; }
  const PointList& points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  const Point& operator[](std::size_t i) const { return points_[i]; }

  /// Axis spacing (0 on axes with a single node).
  double spacing(int axis) const { return spacing_[axis]; }
  /// Closed-form fill distance: half the cell diagonal.
  double fill_distance() const { return fill_distance_; }
  /// Closed-form separation radius: the smallest axis spacing (+inf for M = 1).
  double separation_radius() const { return separation_radius_; }

  std::size_t index(int ix, int iy, int iz = 0) const;
  std::array<int, 3> cell(std::size_t index) const;

  /// Nearest grid node, lowest index on ties.
  std::size_t nearest(const Point& x) const;

 private:
  Bounds bounds_;
  std::array<int, 3> shape_;
  std::array<double, 3> spacing_{};
  PointList points_;
  double fill_distance_ = 0.0;
  double separation_radius_ = 0.0;
};

struct GridGeometry {
  double fill_distance = 0.0;      // h
  double separation_radius = 0.0;  // q, +inf for a single point
};

/// q by exact minimum pairwise distance; h as the largest nearest-node distance
/// over a regular probe lattice with `probes_per_axis` samples per axis.
GridGeometry grid_geometry(std::span<const Point> points, const Bounds& bounds,
                           int probes_per_axis);

enum class PiRule {
  kBasel,  // pi_t = pi^2 t^2 / 6
};

struct ConfidenceSchedule {
  double delta = 0.05;
  PiRule pi_rule = PiRule::kBasel;
  double lipschitz = 1.0;  // L_f

  void validate() const;
  double pi(int t) const;
  friend bool operator==(const ConfidenceSchedule&, const ConfidenceSchedule&) = default;
};

/// beta_t = 2 ln(M pi_t / delta); t >= 1.
double beta(const ConfidenceSchedule& schedule, std::size_t grid_size, int t);

/// One bit per grid node: 0 iff mu + sqrt(beta_t) sigma + L_f h <= f_bar.
struct BinarySafetyMap {
  std::array<int, 3> shape{};
  std::vector<std::uint8_t> bits;
  int step = 0;
  double beta = 0.0;
  double f_bar = 0.0;
  double lipschitz_margin = 0.0;  // L_f * h

  std::size_t unsafe_count() const;
};

BinarySafetyMap binary_map(const Posterior& posterior, const ConfidenceSchedule& schedule,
                           const TestGrid& grid, int t, double f_bar);

/// Indices into `points` whose nearest grid node satisfies
/// mu_t + sqrt(beta_t) sigma_t + L_f h <= f_bar.
std::vector<std::size_t> safe_subset(std::span<const Point> points, const Posterior& posterior,
                                     const ConfidenceSchedule& schedule, const TestGrid& grid,
                                     int t, double f_bar);

/// Nearest grid point, ties by lowest index.
Point project(const TestGrid& grid, const Point& x);

}  // namespace safemap
