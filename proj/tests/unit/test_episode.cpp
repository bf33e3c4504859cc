#include <doctest.h>

#include <cmath>

#include "safemap/errors.hpp"
#include "safemap/episode.hpp"

using namespace safemap;

namespace {

DetectedRegionSet balls(std::vector<std::pair<Point, double>> list) {
  DetectedRegionSet out;
  for (auto& [c, r] : list) out.regions.push_back({c, r, 0});
  return out;
}

TestGrid unit_grid(int n = 100) { return TestGrid(Bounds{}, {n, n, 1}); }

// Small 2D episode that runs in well under a second.
EpisodeConfig quick_config(std::uint64_t seed = 1) {
  EpisodeConfig c;
  c.field = sim2d_field();
  c.grid_shape = {50, 50, 1};
  c.budget = 40;
  c.start_safe = true;
  c.seed = seed;
  c.rrt.max_iterations = 1500;
  c.snapshot_every = 5;
  return c;
}

MeasurementPlan line_plan(const TestGrid& grid, std::vector<std::size_t> idx) {
  std::vector<PlanEntry> entries;
  for (std::size_t k = 0; k < idx.size(); ++k) entries.push_back({grid[idx[k]], PointStatus::kPlanned, k, {}});
  return MeasurementPlan(entries, entries.size());
}

}  // namespace

TEST_CASE("relocation moves a point radially just outside the ball") {
  const auto grid = unit_grid();
  const auto regions = balls({{Point(0.25, 0.75, 0), 0.12}});
  const Point original(0.30, 0.75, 0);
  const auto i = relocation_target(original, regions, grid, {}, 3);
  const Point to = grid[i];
  CHECK_FALSE(classify_unsafe(regions, to));
  CHECK(distance(to, Point(0.25, 0.75, 0)) > 0.12);
  CHECK(distance(to, Point(0.25, 0.75, 0)) <= 0.12 + 1.0 / 99.0);
  CHECK(std::abs(to[1] - 0.75) <= 1.0 / 99.0);
  CHECK(to[0] > 0.3);
}

TEST_CASE("relocation is minimal by exhaustive scan") {
  const auto grid = unit_grid(60);
  const auto regions = balls({{Point(0.4, 0.4, 0), 0.15}, {Point(0.6, 0.55, 0), 0.1}});
  const PointList occupied{grid[grid.index(33, 24)], grid[grid.index(20, 33)]};
  for (std::size_t k = 0; k < grid.size(); k += 7) {
    if (!classify_unsafe(regions, grid[k])) continue;
    const auto i = relocation_target(grid[k], regions, grid, occupied, 1);
    const double d = distance(grid[i], grid[k]);
    for (std::size_t j = 0; j < grid.size(); ++j) {
      if (classify_unsafe(regions, grid[j])) continue;
      if (grid[j] == occupied[0] || grid[j] == occupied[1]) continue;
      CHECK(distance(grid[j], grid[k]) >= d);
      if (distance(grid[j], grid[k]) == d) CHECK(j >= i);
    }
    CHECK(grid[i] != occupied[0]);
    CHECK(grid[i] != occupied[1]);
  }
}

TEST_CASE("relocation aborts when nothing is safe") {
  const auto grid = unit_grid(10);
  const auto regions = balls({{Point(0.5, 0.5, 0), 2.0}});
  try {
    relocation_target(Point(0.5, 0.5, 0), regions, grid, {}, 7);
    FAIL("expected an abort");
  } catch (const EpisodeAbort& e) {
    CHECK(e.step() == 7);
  }
}

TEST_CASE("relocate_unsafe only touches unsafe future entries") {
  const auto grid = unit_grid(20);
  auto plan = line_plan(grid, {grid.index(10, 10), grid.index(2, 2), grid.index(10, 11), grid.index(18, 18)});
  plan.visit_next();
  const auto regions = balls({{grid[grid.index(10, 10)], 0.08}});
  const auto moves = relocate_unsafe(plan, regions, grid, 1);
  REQUIRE(moves.size() == 1);
  CHECK(moves[0].plan_index == 2);
  CHECK(plan[0].point == grid[grid.index(10, 10)]);
  CHECK(plan[2].status == PointStatus::kRelocated);
  CHECK_FALSE(classify_unsafe(regions, plan[2].point));
  for (std::size_t i = plan.visited(); i < plan.size(); ++i) CHECK_FALSE(classify_unsafe(regions, plan[i].point));
}

TEST_CASE("a transient false positive is undone by reinstatement") {
  const auto grid = unit_grid(20);
  auto plan = line_plan(grid, {grid.index(1, 1), grid.index(10, 10), grid.index(15, 4)});
  plan.visit_next();
  const auto ghost = balls({{grid[grid.index(10, 10)], 0.1}});
  CHECK(relocate_unsafe(plan, ghost, grid, 1).size() == 1);
  const Point substitute = plan[1].point;
  CHECK(substitute != grid[grid.index(10, 10)]);

  // still inside the ball: stays blocked
  CHECK(reinstate(plan, ghost).empty());
  CHECK(plan[1].point == substitute);

  // the detection shrank away
  const auto shrunk = balls({{grid[grid.index(3, 16)], 0.05}});
  const auto back = reinstate(plan, shrunk);
  CHECK(back == std::vector<std::size_t>{1});
  CHECK(plan[1].point == grid[grid.index(10, 10)]);
  CHECK(plan[1].status == PointStatus::kReinstated);
  CHECK(plan.size() == 3);

  auto untouched = line_plan(grid, {grid.index(1, 1), grid.index(5, 5)});
  CHECK(reinstate(untouched, DetectedRegionSet{}).empty());
}

TEST_CASE("episode keeps the budget and the replan invariant") {
  const auto r = run_episode(quick_config());
  CHECK(r.relocation_count() >= 1);
  CHECK(r.data.size() == 40);
  CHECK(r.logs.size() == 40);
  CHECK(r.final_plan.size() == 40);
  CHECK(r.final_plan.visited() == 40);
  CHECK(r.trajectory.size() == 40);
  CHECK_FALSE(r.abort_message.has_value());
  for (const auto& log : r.logs) {
    CHECK(log.future_in_unsafe == 0);
    CHECK(log.regions.step == log.t);
  }
  for (std::size_t t = 0; t < r.logs.size(); ++t) {
    CHECK(r.data.locations[t] == r.final_plan[t].point);
    CHECK(r.trajectory[t].waypoints.back() == r.data.locations[t]);
  }
  // relocation targets land on the grid
  for (const auto& log : r.logs) {
    for (const auto& m : log.relocations) CHECK(r.grid[r.grid.nearest(m.to)] == m.to);
  }
}

TEST_CASE("episodes are deterministic") {
  const auto a = run_episode(quick_config(1));
  const auto b = run_episode(quick_config(1));
  CHECK(a.data.values == b.data.values);
  CHECK(a.data.locations == b.data.locations);
  REQUIRE(a.trajectory.size() == b.trajectory.size());
  for (std::size_t i = 0; i < a.trajectory.size(); ++i) CHECK(a.trajectory[i].waypoints == b.trajectory[i].waypoints);
  const auto c = run_episode(quick_config(2));
  CHECK(c.data.values != a.data.values);
}

TEST_CASE("snapshots follow the configured cadence") {
  const auto r = run_episode(quick_config());
  REQUIRE_FALSE(r.snapshots.empty());
  for (const auto& s : r.snapshots) CHECK(s.step % 5 == 0);
  CHECK(r.snapshots.back().step == 40);
  CHECK((r.snapshots.back().posterior.mean - r.final_posterior.mean).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("mvs on the safe set samples outside the detected balls") {
  auto c = quick_config();
  c.mode = EpisodeMode::kMvsOnSafe;
  c.plan_paths = false;
  c.budget = 60;
  const auto r = run_episode(c);
  CHECK(r.data.size() == 60);
  for (std::size_t t = 1; t < r.logs.size(); ++t) {
    CHECK_FALSE(classify_unsafe(r.logs[t - 1].regions, r.data.locations[t]));
  }
}

TEST_CASE("invalid episode configs are rejected") {
  auto c = quick_config();
  c.start_safe = false;
  CHECK_THROWS_AS(run_episode(c), ConfigError);
  c = quick_config();
  c.budget = 5000;
  CHECK_THROWS_AS(run_episode(c), ConfigError);
  c = quick_config();
  c.noise_std = 0.0;
  CHECK_THROWS_AS(run_episode(c), ConfigError);
  c.noise_var = 1e-6;
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("recorded aborts keep the partial run") {
  auto c = quick_config();
  c.rrt.max_iterations = 1;
  c.rrt.goal_bias = 0.0;
  const auto r = run_episode_recorded(c);
  REQUIRE(r.abort_message.has_value());
  CHECK(r.abort_step >= 1);
  CHECK(r.data.size() < 40);
  CHECK_THROWS_AS(run_episode(c), EpisodeAbort);
}
