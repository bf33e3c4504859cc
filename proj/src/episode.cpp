#include "safemap/episode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "safemap/errors.hpp"

namespace safemap {

KernelParams EpisodeConfig::kernel() const {
  return {alpha, length_scale, noise_var ? *noise_var : noise_std * noise_std};
}

void EpisodeConfig::validate() const {
  field.validate();
  if (noise_std < 0.0) throw ConfigError("measurement.noise_std", "must be >= 0");
  if (!noise_var && noise_std == 0.0) {
    throw ConfigError("kernel.noise_var", "required when measurement.noise_std is 0");
  }
  try {
    kernel().validate();
  } catch (const ArgumentError& e) {
    throw ConfigError("kernel", e.what());
  }
  ConfidenceSchedule schedule{delta, pi_rule, lipschitz.value_or(1.0)};
  try {
    schedule.validate();
  } catch (const ArgumentError& e) {
    throw ConfigError("schedule", e.what());
  }
  for (int a = 0; a < field.dimension; ++a) {
    if (grid_shape[a] < 2) throw ConfigError("grid.shape", "needs at least 2 nodes per axis");
  }
  if (budget < 0) throw ConfigError("budget", "must be >= 0");
  if (snapshot_every < 0) throw ConfigError("snapshot_every", "must be >= 0");
  if (!field.bounds.contains(start)) throw ConfigError("start", "outside the field bounds");
  if (!start_safe) throw ConfigError("start_safe", "the start point must be asserted safe");
  try {
    if (field.dimension == 2) hough.validate();
    else components.validate();
  } catch (const ArgumentError& e) {
    throw ConfigError(field.dimension == 2 ? "hough" : "components", e.what());
  }
  try {
    rrt.validate();
  } catch (const ArgumentError& e) {
    throw ConfigError("rrt", e.what());
  }
}

std::size_t EpisodeResult::relocation_count() const {
  std::size_t n = 0;
  for (const auto& log : logs) n += log.relocations.size();
  return n;
}

TestGrid make_grid(const EpisodeConfig& config) {
  return TestGrid(config.field.bounds, config.grid_shape);
}

std::size_t relocation_target(const Point& original, const DetectedRegionSet& regions,
                              const TestGrid& grid, std::span<const Point> occupied, int step) {
  std::size_t best = grid.size();
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double d = distance(grid[i], original);
    if (d >= best_d) continue;
    if (classify_unsafe(regions, grid[i])) continue;
    const bool taken = std::any_of(occupied.begin(), occupied.end(),
                                   [&](const Point& p) { return p == grid[i]; });
    if (taken) continue;
    best = i;
    best_d = d;
  }
  if (best == grid.size()) throw EpisodeAbort("entire grid estimated unsafe", step);
  return best;
}

std::vector<Relocation> relocate_unsafe(MeasurementPlan& plan, const DetectedRegionSet& regions,
                                        const TestGrid& grid, int step) {
  std::vector<Relocation> moves;
  for (std::size_t i = plan.visited(); i < plan.size(); ++i) {
    if (!classify_unsafe(regions, plan[i].point)) continue;
    const Point original = plan[i].original ? *plan[i].original : plan[i].point;
    const PointList occupied = plan.points();
    const auto target = relocation_target(original, regions, grid, occupied, step);
    plan.relocate(i, grid[target]);
    moves.push_back({i, original, grid[target]});
  }
  return moves;
}

std::vector<std::size_t> reinstate(MeasurementPlan& plan, const DetectedRegionSet& regions) {
  std::vector<std::size_t> restored;
  for (std::size_t i = plan.visited(); i < plan.size(); ++i) {
    const auto& original = plan[i].original;
    if (!original || classify_unsafe(regions, *original)) continue;
    const PointList occupied = plan.points();
    const bool taken = std::any_of(occupied.begin(), occupied.end(),
                                   [&](const Point& p) { return p == *original; });
    if (taken) continue;
    plan.reinstate(i);
    restored.push_back(i);
  }
  return restored;
}

namespace {

DetectedRegionSet detect(const BinarySafetyMap& map, const TestGrid& grid,
                         const EpisodeConfig& config) {
  return grid.dimension() == 2 ? detect_2d(map, grid, config.hough)
                               : detect_3d(map, grid, config.components);
}

// Highest-variance grid node outside the detected balls; lowest index on ties.
std::size_t mvs_on_safe(const Eigen::VectorXd& variance, const TestGrid& grid,
                        const DetectedRegionSet& regions, int step) {
  std::size_t best = grid.size();
  double best_v = -1.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (variance[static_cast<Eigen::Index>(i)] <= best_v) continue;
    if (classify_unsafe(regions, grid[i])) continue;
    best = i;
    best_v = variance[static_cast<Eigen::Index>(i)];
  }
  if (best == grid.size()) throw EpisodeAbort("entire grid estimated unsafe", step);
  return best;
}

void run_loop(const EpisodeConfig& config, EpisodeResult& out) {
  const TestGrid& grid = out.grid;
  const KernelParams params = config.kernel();
  validate_threshold(config.field, config.f_bar, grid.points());
  out.lipschitz = config.lipschitz ? *config.lipschitz
                                   : estimate_lipschitz(config.field, grid.points());
  const ConfidenceSchedule schedule{config.delta, config.pi_rule, out.lipschitz};
  const auto budget = static_cast<std::size_t>(config.budget);
  const bool budgeted = config.mode == EpisodeMode::kBudgeted;
  // Stream 0 belongs to the sensor; leg t draws from stream t.
  PlannerParams rrt = config.rrt;
  rrt.seed = config.seed;

  if (budgeted) {
    out.selection = mvs_select(params, grid.points(), budget);
    out.initial_plan = make_plan(grid.points(), out.selection, config.start);
    out.final_plan = out.initial_plan;
  }

  Sensor sensor(config.field, {config.noise_std, config.seed});
  GridPosterior gp(params, grid.points());
  DetectedRegionSet regions;
  Point position = config.start;
  auto snapshot = [&](int step) {
    if (config.snapshot_every > 0 && step % config.snapshot_every == 0) {
      out.snapshots.push_back({step, gp.snapshot()});
    }
  };
  snapshot(0);

  for (int t = 1; t <= config.budget; ++t) {
    StepLog log;
    log.t = t;
    Point target;
    if (budgeted) {
      target = out.final_plan[out.final_plan.visited()].point;
    } else {
      target = grid[mvs_on_safe(gp.variance(), grid, regions, t)];
    }

    if (config.plan_paths) {
      try {
        const auto leg = plan_path(position, target, regions, rrt, grid.bounds(),
                                   static_cast<std::uint64_t>(t));
        log.path_length = leg.path.length;
        log.start_snap = leg.start_snap;
        out.trajectory.push_back(leg.path);
      } catch (const PlannerTimeout& e) {
        throw EpisodeAbort(std::string("leg planning failed: ") + e.what(), t);
      } catch (const ArgumentError& e) {
        throw EpisodeAbort(std::string("leg planning failed: ") + e.what(), t);
      }
    }
    position = target;
    if (budgeted) out.final_plan.visit_next();

    log.x = target;
    log.y = sensor.measure(target);
    log.unsafe_visit = true_safety(config.field, config.f_bar, target) == Safety::kUnsafe;
    out.data.add(target, log.y);
    gp.add(target, log.y);
    snapshot(t);

    // The map after t measurements is G_{t+1}.
    auto map = binary_map(gp.snapshot(), schedule, grid, t + 1, config.f_bar);
    log.beta = map.beta;
    regions = detect(map, grid, config);
    regions.step = t;
    out.maps.push_back(std::move(map));

    if (budgeted) {
      log.relocations = relocate_unsafe(out.final_plan, regions, grid, t);
      log.reinstated = reinstate(out.final_plan, regions);
      const auto& plan = out.final_plan;
      PointList future;
      for (std::size_t i = plan.visited(); i < plan.size(); ++i) {
        future.push_back(plan[i].point);
        if (classify_unsafe(regions, plan[i].point)) ++log.future_in_unsafe;
      }
      log.certified_future =
          safe_subset(future, gp.snapshot(), schedule, grid, t, config.f_bar).size();
    }
    log.regions = regions;
    out.logs.push_back(std::move(log));
  }
  out.final_regions = regions;
  out.final_posterior = gp.snapshot();
}

}  // namespace

namespace {

EpisodeResult prepare(const EpisodeConfig& config) {
  config.validate();
  EpisodeResult out(make_grid(config));
  if (config.mode == EpisodeMode::kBudgeted &&
      static_cast<std::size_t>(config.budget) > out.grid.size()) {
    throw ConfigError("budget", "exceeds the number of grid points");
  }
  return out;
}

}  // namespace

EpisodeResult run_episode(const EpisodeConfig& config) {
  EpisodeResult out = prepare(config);
  run_loop(config, out);
  return out;
}

EpisodeResult run_episode_recorded(const EpisodeConfig& config) {
  EpisodeResult out = prepare(config);
  try {
    run_loop(config, out);
  } catch (const EpisodeAbort& e) {
    out.abort_message = e.what();
    out.abort_step = e.step();
  }
  return out;
}

}  // namespace safemap
