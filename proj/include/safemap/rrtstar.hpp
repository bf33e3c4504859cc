#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "safemap/detector.hpp"
#include "safemap/types.hpp"

namespace safemap {

struct PlannerParams {
  double step_size = 0.05;
  double rewire_gamma = 1.5;  // shrinking-ball constant, domain units
  int max_iterations = 5000;
  double goal_bias = 0.05;
  double goal_tolerance = 0.0;        // 0 selects step_size
  double collision_resolution = 0.0;  // 0 selects step_size / 5
  std::uint64_t seed = 0;

  double tolerance() const { return goal_tolerance > 0.0 ? goal_tolerance : step_size; }
  double resolution() const {
    return collision_resolution > 0.0 ? collision_resolution : step_size / 5.0;
  }
  void validate() const;
  friend bool operator==(const PlannerParams&, const PlannerParams&) = default;
};

struct Path {
  PointList waypoints;
  double length = 0.0;
};

struct PlanResult {
  Path path;
  double start_snap = 0.0;       // distance the start was moved out of an obstacle
  std::size_t tree_size = 0;
  PointList tree_nodes;                  // final tree; node 0 is the start
  std::vector<std::size_t> tree_parent;  // SIZE_MAX for the root
  std::vector<double> best_cost;  // best goal-reaching cost after each iteration (inf before)
};

/// Sum of segment lengths. Throws ArgumentError for an empty path.
double path_length(std::span<const Point> waypoints);

/// True iff the closed segment [a, b] stays strictly outside every ball.
bool segment_free(const Point& a, const Point& b, const DetectedRegionSet& obstacles);

/// RRT* from start to goal around the closed balls of `obstacles`.
///
/// Edges are checked exactly against each ball. A start inside a ball is first
/// moved to the nearest free point (reported in start_snap) and the path
/// begins there. The returned path is the cheapest tree branch ending within
/// tolerance of the goal, closed with the goal itself; segments longer than step_size are subdivided. Draws come
/// from the counter stream (params.seed, stream).
PlanResult plan_path(const Point& start, const Point& goal, const DetectedRegionSet& obstacles,
                     const PlannerParams& params, const Bounds& bounds,
                     std::uint64_t stream = 0);

}  // namespace safemap
