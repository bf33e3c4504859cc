#pragma once

// Independent reference computations used only by the tests. Each one takes
// a different numerical route from the library code it checks.

#include <span>
#include <vector>

#include <Eigen/Core>

#include "safemap/detector.hpp"
#include "safemap/gp.hpp"
#include "safemap/safety.hpp"

namespace oracle {

using safemap::Point;
using safemap::PointList;

// Posterior mean/variance by an explicit LU inverse of (K + s^2 I).
safemap::Posterior dense_posterior(const safemap::KernelParams& p, const PointList& x,
                                   const std::vector<double>& y, const PointList& queries);

// Full posterior covariance by LU solve.
Eigen::MatrixXd dense_covariance(const safemap::KernelParams& p, const PointList& x,
                                 const PointList& queries);

// 0.5 ln det(I + K / s^2) by LU determinant.
double lu_information(const safemap::KernelParams& p, const PointList& x);

// Best information over all subsets of size t.
double exhaustive_best_information(const safemap::KernelParams& p, const PointList& pool, int t);

// Index of the nearest point by linear scan, lowest index on ties.
std::size_t scan_nearest(std::span<const Point> points, const Point& q);

// Unsafe bits for a union of disks/balls rasterized on the grid (|x - c| <= r).
safemap::BinarySafetyMap rasterize(const safemap::TestGrid& grid,
                                   const std::vector<std::pair<Point, double>>& balls);

struct Circle {
  double cx, cy, r;
};
// Algebraic circle fit via normal equations.
Circle normal_equation_circle(const std::vector<std::pair<double, double>>& pts);

// Boundary cells of the unsafe region (unsafe cell with a safe 4-neighbor),
// in domain coordinates.
std::vector<std::pair<double, double>> boundary_points(const safemap::BinarySafetyMap& map,
                                                       const safemap::TestGrid& grid);

// Number of samples, taken every `resolution` along each segment, that fall
// inside some closed ball.
std::size_t sampled_collisions(std::span<const Point> waypoints,
                               const safemap::DetectedRegionSet& obstacles, double resolution);

}  // namespace oracle
