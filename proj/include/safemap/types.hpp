#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include <Eigen/Core>

namespace safemap {

// Coordinates are always stored as 3-vectors; 2D problems keep z = 0.
using Point = Eigen::Vector3d;
using PointList = std::vector<Point>;

struct Bounds {
  int dimension = 2;
  Point min = Point::Zero();
  Point max = Point::Ones();

  bool contains(const Point& x, double tol = 1e-12) const;
  double extent(int axis) const { return max[axis] - min[axis]; }
  double diagonal() const;
  void validate() const;

  friend bool operator==(const Bounds& a, const Bounds& b) {
    return a.dimension == b.dimension && a.min == b.min && a.max == b.max;
  }
};

inline double distance(const Point& a, const Point& b) { return (a - b).norm(); }

}  // namespace safemap
