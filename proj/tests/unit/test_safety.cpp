#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "safemap/errors.hpp"
#include "safemap/field.hpp"
#include "safemap/planner.hpp"
#include "safemap/rng.hpp"
#include "safemap/safety.hpp"
#include "safemap/spatial_hash.hpp"

using namespace safemap;

TEST_CASE("grid indexing round trips") {
  TestGrid grid(Bounds{3, Point(0, 0, 0), Point(2, 3, 4)}, {5, 4, 3});
  CHECK(grid.size() == 60);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto c = grid.cell(i);
    CHECK(grid.index(c[0], c[1], c[2]) == i);
  }
  CHECK(grid[grid.index(4, 3, 2)] == Point(2, 3, 4));
  CHECK(grid[1] == Point(0.5, 0, 0));
  CHECK_THROWS_AS(TestGrid(Bounds{}, {0, 3, 1}), ArgumentError);
}

TEST_CASE("fill distance and separation radius of a uniform grid") {
  TestGrid grid(Bounds{}, {11, 11, 1});
  const double s = 0.1;
  CHECK(grid.separation_radius() == doctest::Approx(s).epsilon(1e-12));
  CHECK(grid.fill_distance() == doctest::Approx(s / std::sqrt(2.0)).epsilon(1e-12));
  const auto g = grid_geometry(grid.points(), grid.bounds(), 1001);
  CHECK(g.separation_radius == doctest::Approx(s).epsilon(1e-12));
  // probe spacing 1e-3 bounds the sampled sup from below
  CHECK(g.fill_distance <= grid.fill_distance() + 1e-12);
  CHECK(g.fill_distance >= grid.fill_distance() - 1e-3);
}

TEST_CASE("single point geometry") {
  const PointList one{Point(0.2, 0.3, 0)};
  const auto g = grid_geometry(one, Bounds{}, 101);
  CHECK(std::isinf(g.separation_radius));
  CHECK(g.fill_distance == doctest::Approx(std::hypot(0.8, 0.7)).epsilon(1e-12));
}

TEST_CASE("doubling the resolution halves the fill distance") {
  TestGrid coarse(Bounds{}, {11, 11, 1}), fine(Bounds{}, {21, 21, 1});
  const auto a = grid_geometry(coarse.points(), coarse.bounds(), 401);
  const auto b = grid_geometry(fine.points(), fine.bounds(), 401);
  CHECK(std::abs(b.fill_distance / a.fill_distance - 0.5) <= 0.025);
}

TEST_CASE("beta values") {
  ConfidenceSchedule s{0.05, PiRule::kBasel, 1.0};
  const double b1 = beta(s, 10000, 1);
  CHECK(b1 == doctest::Approx(2.0 * std::log(10000.0 * std::numbers::pi * std::numbers::pi / 6.0 / 0.05)).epsilon(1e-14));
  CHECK(b1 == doctest::Approx(25.41).epsilon(1e-3));
  double prev = b1;
  for (int t = 2; t < 200; ++t) {
    const double b = beta(s, 10000, t);
    CHECK(b >= prev);
    prev = b;
  }
  ConfidenceSchedule tight{0.025, PiRule::kBasel, 1.0};
  CHECK(beta(tight, 10000, 7) > beta(s, 10000, 7));
  CHECK_THROWS(beta(s, 10000, 0));
  CHECK_THROWS((ConfidenceSchedule{1.5, PiRule::kBasel, 1.0}.validate()));
}

namespace {

// Single-node posterior that yields mu + sqrt(beta) sigma = mu + width.
struct MapCase {
  TestGrid grid{Bounds{}, {11, 11, 1}};
  ConfidenceSchedule schedule;
  int t = 5;

  explicit MapCase(double margin) {
    schedule.lipschitz = margin / grid.fill_distance();
  }
  std::uint8_t bit(double mu, double width) const {
    Posterior p;
    p.mean = Eigen::VectorXd::Constant(grid.size(), mu);
    const double sigma = width / std::sqrt(beta(schedule, grid.size(), t));
    p.variance = Eigen::VectorXd::Constant(grid.size(), sigma * sigma);
    return binary_map(p, schedule, grid, t, 0.7).bits[17];
  }
};

}  // namespace

TEST_CASE("binary map bits") {
  MapCase c(0.05);
  CHECK(c.bit(0.2, 0.1) == 0);
  CHECK(c.bit(0.65, 0.08) == 1);
  // sum landing exactly on the threshold is safe
  TestGrid grid(Bounds{}, {11, 11, 1});
  ConfidenceSchedule s{0.05, PiRule::kBasel, 2.0};
  Posterior p{Eigen::VectorXd::Constant(grid.size(), 0.5), Eigen::VectorXd::Zero(grid.size())};
  const double f_bar = 0.5 + s.lipschitz * grid.fill_distance();
  const auto map = binary_map(p, s, grid, 1, f_bar);
  CHECK(map.bits[0] == 0);
  CHECK(binary_map(p, s, grid, 1, std::nextafter(f_bar, 0.0)).bits[0] == 1);
  CHECK(map.step == 1);
  CHECK(map.unsafe_count() == 0);
}

TEST_CASE("binary map is a pure function of its inputs") {
  TestGrid grid(Bounds{}, {20, 20, 1});
  CounterRng rng(4, 0);
  Posterior p;
  p.mean.resize(grid.size());
  p.variance.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    p.mean[i] = rng.uniform();
    p.variance[i] = 0.01 * rng.uniform();
  }
  ConfidenceSchedule s{0.05, PiRule::kBasel, 3.0};
  const auto a = binary_map(p, s, grid, 9, 0.7);
  const auto b = binary_map(p, s, grid, 9, 0.7);
  CHECK(a.bits == b.bits);
  const double rb = std::sqrt(beta(s, grid.size(), 9));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const bool unsafe = p.mean[i] + rb * std::sqrt(p.variance[i]) + 3.0 * grid.fill_distance() > 0.7;
    CHECK(static_cast<bool>(a.bits[i]) == unsafe);
  }
}

TEST_CASE("safe subset") {
  TestGrid grid(Bounds{}, {11, 11, 1});
  ConfidenceSchedule s{0.05, PiRule::kBasel, 0.1};
  Posterior quiet{Eigen::VectorXd::Zero(grid.size()), Eigen::VectorXd::Constant(grid.size(), 1e-6)};
  const PointList pts{grid[3], grid[50], grid[120]};
  CHECK(safe_subset(pts, quiet, s, grid, 4, 0.7) == std::vector<std::size_t>{0, 1, 2});
  CHECK(safe_subset(PointList{}, quiet, s, grid, 4, 0.7).empty());
}

TEST_CASE("a source center is excluded after fifty measurements") {
  const auto f = sim2d_field();
  TestGrid grid(f.bounds, {100, 100, 1});
  KernelParams k{1.0, 0.15, 1e-4};
  const auto picks = mvs_select(k, grid.points(), 50);
  Sensor sensor(f, {0.01, 1});
  GridPosterior gp(k, grid.points());
  for (auto i : picks) gp.add(grid[i], sensor.measure(grid[i]));
  ConfidenceSchedule s{0.05, PiRule::kBasel, estimate_lipschitz(f, grid.points())};
  const PointList centers{Point(0.25, 0.75, 0), Point(0.75, 0.25, 0)};
  CHECK(safe_subset(centers, gp.snapshot(), s, grid, 50, 0.7).empty());
  CHECK(gp.mean()[grid.nearest(centers[0])] > 0.7);
}

TEST_CASE("project onto the grid") {
  TestGrid grid(Bounds{}, {11, 11, 1});
  CHECK(project(grid, grid[37]) == grid[37]);
  // cell center: four equidistant nodes, lowest index wins
  const Point mid(0.25, 0.35, 0);
  CHECK(project(grid, mid) == grid[grid.index(2, 3)]);
  CHECK(oracle::scan_nearest(grid.points(), mid) == grid.index(2, 3));
  CounterRng rng(9, 0);
  for (int i = 0; i < 100000; ++i) {
    const Point x(rng.uniform(), rng.uniform(), 0);
    const auto p = project(grid, x);
    CHECK(distance(p, x) <= grid.fill_distance() + 1e-12);
    if (i % 100 == 0) CHECK(p == grid[oracle::scan_nearest(grid.points(), x)]);
  }
}

TEST_CASE("spatial hash queries are exact") {
  Bounds b{3, Point(0, 0, 0), Point(1, 1, 1)};
  SpatialHash hash(b, 0.07);
  CounterRng rng(12, 0);
  PointList pts;
  for (int i = 0; i < 500; ++i) {
    pts.emplace_back(rng.uniform(), rng.uniform(), rng.uniform());
    hash.insert(i, pts.back());
  }
  for (int k = 0; k < 200; ++k) {
    const Point q(rng.uniform(), rng.uniform(), rng.uniform());
    CHECK(hash.nearest(q) == oracle::scan_nearest(pts, q));
    const double r = 0.15 * rng.uniform();
    std::vector<std::size_t> expect;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (distance(pts[i], q) <= r) expect.push_back(i);
    }
    CHECK(hash.within(q, r) == expect);
  }
}
