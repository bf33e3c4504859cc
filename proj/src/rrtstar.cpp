#include "safemap/rrtstar.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "safemap/errors.hpp"
#include "safemap/rng.hpp"
#include "safemap/spatial_hash.hpp"

namespace safemap {

void PlannerParams::validate() const {
  if (!(step_size > 0.0)) throw ArgumentError("RRT* step_size must be > 0");
  if (!(rewire_gamma > 0.0)) throw ArgumentError("RRT* rewire_gamma must be > 0");
  if (max_iterations < 1) throw ArgumentError("RRT* max_iterations must be >= 1");
  if (!(goal_bias >= 0.0 && goal_bias < 1.0)) throw ArgumentError("RRT* goal_bias must lie in [0, 1)");
  if (goal_tolerance < 0.0) throw ArgumentError("RRT* goal_tolerance must be >= 0");
  if (collision_resolution < 0.0 || resolution() > step_size) {
    throw ArgumentError("RRT* collision_resolution must not exceed step_size");
  }
}

double path_length(std::span<const Point> waypoints) {
  if (waypoints.empty()) throw ArgumentError("path has no waypoints");
  double total = 0.0;
  for (std::size_t i = 1; i < waypoints.size(); ++i) total += distance(waypoints[i - 1], waypoints[i]);
  return total;
}

namespace {

double segment_point_distance(const Point& a, const Point& b, const Point& c) {
  const Point ab = b - a;
  const double len2 = ab.squaredNorm();
  const double s = len2 > 0.0 ? std::clamp((c - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  return distance(a + s * ab, c);
}

bool point_free(const Point& p, const DetectedRegionSet& obstacles) {
  return !classify_unsafe(obstacles, p);
}

Point sample_uniform(CounterRng& rng, const Bounds& bounds) {
  Point p = Point::Zero();
  for (int axis = 0; axis < bounds.dimension; ++axis) {
    p[axis] = rng.uniform(bounds.min[axis], bounds.max[axis]);
  }
  return p;
}

// Nearest free point: radial exits from the containing balls first, then a
// deterministic ring search.
Point snap_free(const Point& start, const DetectedRegionSet& obstacles, const Bounds& bounds,
                double step) {
  const double eps = 1e-9 * bounds.diagonal();
  double best = std::numeric_limits<double>::infinity();
  Point out = start;
  for (const auto& r : obstacles.regions) {
    if (distance(start, r.center) > r.radius) continue;
    Point dir = start - r.center;
    if (dir.norm() == 0.0) dir = Point::UnitX();
    const Point candidate = r.center + dir.normalized() * (r.radius + eps);
    if (bounds.contains(candidate) && point_free(candidate, obstacles) &&
        distance(candidate, start) < best) {
      best = distance(candidate, start);
      out = candidate;
    }
  }
  if (std::isfinite(best)) return out;
  const int directions = bounds.dimension == 2 ? 64 : 16;
  for (double radius = step / 4.0; radius <= bounds.diagonal(); radius += step / 4.0) {
    for (int i = 0; i < directions; ++i) {
      const double theta = 2.0 * std::numbers::pi * i / directions;
      const int layers = bounds.dimension == 2 ? 1 : 9;
      for (int j = 0; j < layers; ++j) {
        const double phi = bounds.dimension == 2 ? 0.5 * std::numbers::pi
                                                 : std::numbers::pi * (j + 0.5) / layers;
        const Point d(std::cos(theta) * std::sin(phi), std::sin(theta) * std::sin(phi),
                      bounds.dimension == 2 ? 0.0 : std::cos(phi));
        const Point candidate = start + radius * d;
        if (bounds.contains(candidate) && point_free(candidate, obstacles)) return candidate;
      }
    }
  }
  throw ArgumentError("no free point around the start");
}

void densify(PointList& waypoints, double step) {
  PointList out;
  out.reserve(waypoints.size());
  for (std::size_t i = 0; i < waypoints.size(); ++i) {
    if (i > 0) {
      const Point& a = waypoints[i - 1];
      const Point& b = waypoints[i];
      const int pieces = static_cast<int>(std::ceil(distance(a, b) / step - 1e-9));
      for (int k = 1; k < pieces; ++k) out.push_back(a + (b - a) * (static_cast<double>(k) / pieces));
    }
    out.push_back(waypoints[i]);
  }
  waypoints = std::move(out);
}

struct Node {
  Point point;
  std::size_t parent;
  double cost;
};

constexpr std::size_t kRoot = std::numeric_limits<std::size_t>::max();

}  // namespace

bool segment_free(const Point& a, const Point& b, const DetectedRegionSet& obstacles) {
  return std::none_of(obstacles.regions.begin(), obstacles.regions.end(), [&](const Region& r) {
    return segment_point_distance(a, b, r.center) <= r.radius;
  });
}

PlanResult plan_path(const Point& start_in, const Point& goal, const DetectedRegionSet& obstacles,
                     const PlannerParams& params, const Bounds& bounds, std::uint64_t stream) {
  params.validate();
  if (!bounds.contains(start_in) || !bounds.contains(goal)) {
    throw ArgumentError("RRT* start and goal must lie inside the bounds");
  }
  if (!point_free(goal, obstacles)) throw ArgumentError("RRT* goal lies inside an obstacle");

  PlanResult result;
  Point start = start_in;
  if (!point_free(start, obstacles)) {
    start = snap_free(start_in, obstacles, bounds, params.step_size);
    result.start_snap = distance(start, start_in);
  }
  const double step = params.step_size;
  const double tol = params.tolerance();

  auto finish = [&](PointList waypoints) {
    densify(waypoints, step);
    result.path.length = path_length(waypoints);
    result.path.waypoints = std::move(waypoints);
    return result;
  };
  if (distance(start, goal) <= tol && segment_free(start, goal, obstacles)) {
    result.tree_size = 1;
    result.tree_nodes = {start};
    result.tree_parent = {kRoot};
    result.best_cost.assign(1, distance(start, goal));
    return finish({start, goal});
  }

  const int dim = bounds.dimension;
  CounterRng rng(params.seed, stream);
  SpatialHash hash(bounds, step);
  std::vector<Node> nodes{{start, kRoot, 0.0}};
  std::vector<std::vector<std::size_t>> children(1);
  hash.insert(0, start);
  std::vector<std::size_t> goal_nodes;
  double closest = distance(start, goal);
  const double inf = std::numeric_limits<double>::infinity();
  result.best_cost.reserve(params.max_iterations);

  auto best_goal = [&]() {
    std::size_t best = kRoot;
    double cost = inf;
    for (auto id : goal_nodes) {
      const double c = nodes[id].cost + distance(nodes[id].point, goal);
      if (c < cost) {
        cost = c;
        best = id;
      }
    }
    return std::pair{best, cost};
  };

  for (int it = 0; it < params.max_iterations; ++it) {
    const bool to_goal = rng.uniform() < params.goal_bias;
    const Point target = to_goal ? goal : sample_uniform(rng, bounds);
    const std::size_t near_id = hash.nearest(target);
    const Point& from = nodes[near_id].point;
    const double gap = distance(from, target);
    if (gap > 0.0) {
      const Point fresh = gap <= step ? target : Point(from + (target - from) * (step / gap));
      if (segment_free(from, fresh, obstacles)) {
        const double n = static_cast<double>(nodes.size() + 1);
        const double radius = std::min(params.rewire_gamma * std::pow(std::log(n) / n, 1.0 / dim), step);
        const auto near = hash.within(fresh, radius);

        std::size_t parent = near_id;
        double cost = nodes[near_id].cost + distance(from, fresh);
        for (auto id : near) {
          const double c = nodes[id].cost + distance(nodes[id].point, fresh);
          if (c < cost && segment_free(nodes[id].point, fresh, obstacles)) {
            cost = c;
            parent = id;
          }
        }
        const std::size_t self = nodes.size();
        nodes.push_back({fresh, parent, cost});
        children.emplace_back();
        children[parent].push_back(self);
        hash.insert(self, fresh);

        for (auto id : near) {
          if (id == parent) continue;
          const double c = cost + distance(fresh, nodes[id].point);
          if (c >= nodes[id].cost || !segment_free(fresh, nodes[id].point, obstacles)) continue;
          auto& siblings = children[nodes[id].parent];
          siblings.erase(std::find(siblings.begin(), siblings.end(), id));
          const double delta = nodes[id].cost - c;
          nodes[id].parent = self;
          children[self].push_back(id);
          std::vector<std::size_t> stack{id};
          while (!stack.empty()) {
            const auto v = stack.back();
            stack.pop_back();
            nodes[v].cost -= delta;
            for (auto w : children[v]) stack.push_back(w);
          }
        }

        const double to_goal_dist = distance(fresh, goal);
        closest = std::min(closest, to_goal_dist);
        if (to_goal_dist <= tol && segment_free(fresh, goal, obstacles)) goal_nodes.push_back(self);
      }
    }
    result.best_cost.push_back(best_goal().second);
  }

  result.tree_size = nodes.size();
  for (const auto& n : nodes) {
    result.tree_nodes.push_back(n.point);
    result.tree_parent.push_back(n.parent);
  }
  const auto [best, cost] = best_goal();
  if (best == kRoot) {
    throw PlannerTimeout("RRT* found no path within max_iterations", nodes.size(), closest);
  }
  PointList waypoints{goal};
  for (std::size_t v = best; v != kRoot; v = nodes[v].parent) waypoints.push_back(nodes[v].point);
  std::reverse(waypoints.begin(), waypoints.end());
  if (distance(waypoints[waypoints.size() - 2], goal) == 0.0) waypoints.pop_back();
  return finish(std::move(waypoints));
}

}  // namespace safemap
