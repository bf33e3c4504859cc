#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "safemap/detector.hpp"
#include "safemap/field.hpp"
#include "safemap/gp.hpp"
#include "safemap/planner.hpp"
#include "safemap/rrtstar.hpp"
#include "safemap/safety.hpp"

namespace safemap {

enum class EpisodeMode {
  kBudgeted,   // offline MVS plan of T points, relocated and reinstated online
  kMvsOnSafe,  // each step samples the highest-variance estimated-safe grid point
};

struct EpisodeConfig {
  FieldSpec field;
  double noise_std = 0.01;
  std::optional<double> noise_var;  // regressor nugget; defaults to noise_std^2
  double alpha = 1.0;
  double length_scale = 0.15;
  double delta = 0.05;
  PiRule pi_rule = PiRule::kBasel;
  std::optional<double> lipschitz;  // estimated from the field when absent
  std::array<int, 3> grid_shape{100, 100, 1};
  double f_bar = 0.7;
  int budget = 100;
  Point start = Point::Zero();
  bool start_safe = false;  // user assertion that the start point is safe
  HoughParams hough;
  ComponentParams components;
  PlannerParams rrt;  // rrt.seed is ignored; legs draw from (seed, leg index)
  bool plan_paths = true;
  EpisodeMode mode = EpisodeMode::kBudgeted;
  int snapshot_every = 0;  // 0 disables posterior snapshots
  std::uint64_t seed = 0;

  KernelParams kernel() const;
  void validate() const;
  friend bool operator==(const EpisodeConfig&, const EpisodeConfig&) = default;
};

struct Relocation {
  std::size_t plan_index = 0;
  Point from = Point::Zero();  // original coordinate
  Point to = Point::Zero();
};

struct StepLog {
  int t = 0;
  Point x = Point::Zero();
  double y = 0.0;
  double beta = 0.0;  // beta of the map built after this measurement
  DetectedRegionSet regions;
  std::vector<Relocation> relocations;
  std::vector<std::size_t> reinstated;  // plan indices
  double path_length = 0.0;
  double start_snap = 0.0;
  bool unsafe_visit = false;        // oracle f(x_t) > f_bar
  std::size_t certified_future = 0;  // future plan points passing the step-t safe subset
  std::size_t future_in_unsafe = 0;  // future plan points inside the detected balls after replan
};

/// Posterior over the grid after `step` measurements.
struct Snapshot {
  int step = 0;
  Posterior posterior;
};

struct EpisodeResult {
  TestGrid grid;
  double lipschitz = 0.0;
  std::vector<std::size_t> selection;  // offline MVS grid indices (budgeted mode)
  MeasurementPlan initial_plan;
  MeasurementPlan final_plan;
  Dataset data;
  Posterior final_posterior;
  std::vector<Path> trajectory;  // one leg per measurement
  std::vector<BinarySafetyMap> maps;
  DetectedRegionSet final_regions;
  std::vector<StepLog> logs;
  std::vector<Snapshot> snapshots;
  std::optional<std::string> abort_message;
  int abort_step = 0;

  explicit EpisodeResult(TestGrid g) : grid(std::move(g)) {}
  std::size_t relocation_count() const;
};

TestGrid make_grid(const EpisodeConfig& config);

/// Nearest grid node outside every detected ball and not in `occupied`, by
/// distance to `original`; ties by lowest index. Throws EpisodeAbort when no
/// grid node qualifies.
std::size_t relocation_target(const Point& original, const DetectedRegionSet& regions,
                              const TestGrid& grid, std::span<const Point> occupied, int step);

/// Moves every unvisited entry inside the detected balls to its relocation
/// target, measured from the entry's original coordinate.
std::vector<Relocation> relocate_unsafe(MeasurementPlan& plan, const DetectedRegionSet& regions,
                                        const TestGrid& grid, int step);

/// Restores every unvisited relocated entry whose original is outside the
/// detected balls and not taken by another entry. The substitute is dropped.
std::vector<std::size_t> reinstate(MeasurementPlan& plan, const DetectedRegionSet& regions);

/// Runs the safety loop. Throws EpisodeAbort on relocation or planning failure.
EpisodeResult run_episode(const EpisodeConfig& config);

/// As run_episode, but an abort is recorded in the result instead of thrown.
EpisodeResult run_episode_recorded(const EpisodeConfig& config);

}  // namespace safemap
