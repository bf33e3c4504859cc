#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "oracles.hpp"
#include "safemap/errors.hpp"
#include "safemap/planner.hpp"
#include "safemap/safety.hpp"

using namespace safemap;

namespace {

TestGrid unit_grid(int n) { return TestGrid(Bounds{}, {n, n, 1}); }

}  // namespace

TEST_CASE("first MVS pick is the lowest index under a flat prior") {
  const auto grid = unit_grid(10);
  const auto pick = mvs_select(KernelParams{}, grid.points(), 1);
  REQUIRE(pick.size() == 1);
  CHECK(pick[0] == 0);
}

TEST_CASE("after the center of a 5x5 grid the next pick is the lowest corner") {
  const auto grid = unit_grid(5);
  const Point center = grid[grid.index(2, 2)];
  KernelParams p{1.0, 0.15, 1e-4};
  const PointList cond{center};
  // brute force: every corner ties at the maximum posterior variance
  const auto post = oracle::dense_posterior(p, cond, {0.0}, grid.points());
  const double top = post.variance.maxCoeff();
  std::vector<std::size_t> argmax;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (post.variance[i] >= top - 1e-12) argmax.push_back(i);
  }
  const std::vector<std::size_t> corners{grid.index(0, 0), grid.index(4, 0), grid.index(0, 4),
                                         grid.index(4, 4)};
  for (auto c : corners) CHECK(std::find(argmax.begin(), argmax.end(), c) != argmax.end());
  const auto pick = mvs_select(p, grid.points(), 1, cond);
  CHECK(pick[0] == grid.index(0, 0));
}

TEST_CASE("every MVS pick attains the maximum posterior variance") {
  const auto grid = unit_grid(20);
  KernelParams p{1.0, 0.15, 1e-4};
  const auto picks = mvs_select(p, grid.points(), 10);
  PointList chosen;
  std::vector<double> zeros;
  std::set<std::size_t> taken;
  for (auto i : picks) {
    const auto post = oracle::dense_posterior(p, chosen, zeros, grid.points());
    double best = -1.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      if (!taken.count(k)) best = std::max(best, post.variance[k]);
    }
    CHECK_FALSE(taken.count(i));
    CHECK(post.variance[i] >= best - 1e-10);
    chosen.push_back(grid[i]);
    zeros.push_back(0.0);
    taken.insert(i);
  }
  std::set<std::size_t> unique(picks.begin(), picks.end());
  CHECK(unique.size() == picks.size());
}

TEST_CASE("greedy information gain selects the MVS set") {
  const auto grid = unit_grid(10);
  KernelParams p{1.0, 0.15, 1e-4};
  const auto mvs = mvs_select(p, grid.points(), 15);
  const auto greedy = greedy_info_gain(p, grid.points(), 15);
  CHECK(std::set<std::size_t>(mvs.begin(), mvs.end()) ==
        std::set<std::size_t>(greedy.indices.begin(), greedy.indices.end()));
  PointList pts;
  for (auto i : greedy.indices) pts.push_back(grid[i]);
  CHECK(greedy.gamma == doctest::Approx(oracle::lu_information(p, pts)).epsilon(1e-9));
  CHECK(greedy_info_gain(p, grid.points(), 0).gamma == 0.0);
}

TEST_CASE("greedy gain is monotone and near optimal on a small pool") {
  TestGrid grid(Bounds{}, {4, 2, 1});
  KernelParams p{1.0, 0.4, 0.01};
  double prev = 0.0;
  for (int t = 1; t <= 4; ++t) {
    const auto g = greedy_info_gain(p, grid.points(), t);
    const double opt = oracle::exhaustive_best_information(p, grid.points(), t);
    CHECK(g.gamma >= (1.0 - 1.0 / std::exp(1.0)) * opt);
    CHECK(g.gamma <= opt + 1e-12);
    CHECK(g.gamma >= prev);
    prev = g.gamma;
  }
}

TEST_CASE("budget larger than the grid is rejected") {
  const auto grid = unit_grid(3);
  CHECK_THROWS_AS(mvs_select(KernelParams{}, grid.points(), 10), ArgumentError);
  CHECK_THROWS_AS(greedy_info_gain(KernelParams{}, grid.points(), 10), ArgumentError);
}

TEST_CASE("nearest neighbor order") {
  const PointList pts{Point(0, 0, 0), Point(1, 0, 0), Point(0.4, 0, 0)};
  const auto order = nn_order(pts, Point(0, 0, 0));
  CHECK(order == std::vector<std::size_t>{0, 2, 1});
  CHECK(nn_order(PointList{Point(0.3, 0.3, 0)}, Point(0, 0, 0)) == std::vector<std::size_t>{0});
  CHECK(tour_length(PointList{Point(0, 0, 0), Point(0.4, 0, 0), Point(1, 0, 0)}, Point(0, 0, 0)) ==
        doctest::Approx(1.0));
}

TEST_CASE("nearest neighbor order is a permutation and preserves the posterior") {
  const auto grid = unit_grid(12);
  KernelParams p{1.0, 0.15, 1e-4};
  const auto picks = mvs_select(p, grid.points(), 30);
  PointList pts;
  for (auto i : picks) pts.push_back(grid[i]);
  const auto order = nn_order(pts, Point(0.5, 0.5, 0));
  std::vector<std::size_t> sorted = order;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) CHECK(sorted[i] == i);

  Dataset a, b;
  for (std::size_t i = 0; i < pts.size(); ++i) a.add(pts[i], std::cos(3.0 * i));
  for (auto i : order) b.add(pts[i], std::cos(3.0 * i));
  const PointList probes(grid.points().begin(), grid.points().begin() + 40);
  CHECK((posterior_covariance_matrix(p, a, probes) - posterior_covariance_matrix(p, b, probes))
            .cwiseAbs()
            .maxCoeff() <= 1e-9);
}

TEST_CASE("make_plan orders the selection and records origins") {
  const auto grid = unit_grid(10);
  const auto picks = mvs_select(KernelParams{}, grid.points(), 12);
  const auto plan = make_plan(grid.points(), picks, Point(0, 0, 0));
  CHECK(plan.size() == 12);
  CHECK(plan.budget() == 12);
  std::set<std::size_t> origins;
  for (const auto& e : plan.entries()) {
    origins.insert(e.origin);
    CHECK(e.point == grid[picks[e.origin]]);
    CHECK(e.status == PointStatus::kPlanned);
  }
  CHECK(origins.size() == 12);
}

TEST_CASE("plan entries follow the status rules") {
  std::vector<PlanEntry> entries{{Point(0, 0, 0)}, {Point(0.5, 0, 0)}, {Point(1, 0, 0)}};
  MeasurementPlan plan(entries, 3);
  CHECK(plan.visit_next() == Point(0, 0, 0));
  CHECK(plan[0].status == PointStatus::kVisited);
  CHECK_THROWS_AS(plan.relocate(0, Point(0.1, 0, 0)), ArgumentError);
  CHECK_THROWS_AS(plan.reinstate(1), ArgumentError);
  plan.relocate(1, Point(0.5, 0.2, 0));
  plan.relocate(1, Point(0.5, 0.3, 0));
  CHECK(plan[1].status == PointStatus::kRelocated);
  CHECK(*plan[1].original == Point(0.5, 0, 0));
  plan.reinstate(1);
  CHECK(plan[1].point == Point(0.5, 0, 0));
  CHECK(plan[1].status == PointStatus::kReinstated);
  CHECK_FALSE(plan[1].original.has_value());
  CHECK(to_string(PointStatus::kBlocked) == "blocked");
  CHECK(parse_point_status("reinstated") == PointStatus::kReinstated);
  CHECK_FALSE(parse_point_status("lost").has_value());
  CHECK_THROWS_AS(MeasurementPlan(entries, 2), ArgumentError);
}
