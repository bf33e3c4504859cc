#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "safemap/errors.hpp"
#include "safemap/field.hpp"
#include "safemap/rng.hpp"
#include "safemap/safety.hpp"

using namespace safemap;

TEST_CASE("sim2d values at a source center and the midpoint") {
  const auto f = sim2d_field();
  CHECK(eval_field(f, Point(0.25, 0.75, 0)) == doctest::Approx(1.0 + std::exp(-6.25)).epsilon(1e-14));
  CHECK(eval_field(f, Point(0.25, 0.75, 0)) == doctest::Approx(1.00193).epsilon(1e-5));
  CHECK(eval_field(f, Point(0.5, 0.5, 0)) == doctest::Approx(2.0 * std::exp(-1.5625)).epsilon(1e-14));
  CHECK(eval_field(f, Point(0.5, 0.5, 0)) == doctest::Approx(0.4191).epsilon(1e-4));
}

TEST_CASE("sim3d value at the strongest source") {
  const auto f = sim3d_field();
  // cross terms: two sources at 6, one at 6*sqrt(2)
  const double expect = 40.0 + 2 * 20.0 * std::exp(-1.7 * 6.0) + 40.0 * std::exp(-1.7 * 6.0 * std::sqrt(2.0));
  CHECK(eval_field(f, Point(2, 2, 0)) == doctest::Approx(expect).epsilon(1e-14));
  CHECK(eval_field(f, Point(2, 2, 0)) == doctest::Approx(40.0015).epsilon(1e-6));
}

TEST_CASE("field evaluation outside the domain is rejected") {
  CHECK_THROWS_AS(eval_field(sim2d_field(), Point(1.2, 0.5, 0)), DomainError);
  CHECK_THROWS_AS(eval_field(sim3d_field(), Point(5, 5, -1)), DomainError);
}

TEST_CASE("field is invariant under source order and symmetric under the xy swap") {
  auto f = sim2d_field();
  auto g = f;
  std::reverse(g.sources.begin(), g.sources.end());
  CounterRng rng(7, 1);
  for (int i = 0; i < 200; ++i) {
    const double a = rng.uniform(), b = rng.uniform();
    CHECK(eval_field(f, Point(a, b, 0)) == doctest::Approx(eval_field(g, Point(a, b, 0))).epsilon(1e-15));
    CHECK(eval_field(f, Point(a, b, 0)) == doctest::Approx(eval_field(f, Point(b, a, 0))).epsilon(1e-15));
  }
}

TEST_CASE("noise-free sensor returns the field exactly") {
  Sensor s(sim2d_field(), {0.0, 3});
  const Point x(0.3, 0.6, 0);
  CHECK(s.measure(x) == eval_field(sim2d_field(), x));
}

TEST_CASE("sensor replays are bitwise identical") {
  Sensor a(sim2d_field(), {0.01, 11});
  Sensor b(sim2d_field(), {0.01, 11});
  for (int i = 0; i < 100; ++i) {
    const Point x(0.01 * i, 0.5, 0);
    CHECK(a.measure(x) == b.measure(x));
  }
  Sensor c(sim2d_field(), {0.01, 12});
  CHECK(c.measure(Point(0.1, 0.1, 0)) != Sensor(sim2d_field(), {0.01, 11}).measure(Point(0.1, 0.1, 0)));
}

TEST_CASE("sensor noise has the declared standard deviation") {
  const double sd = 0.01;
  Sensor s(sim2d_field(), {sd, 5});
  const Point x(0.4, 0.2, 0);
  const double f = eval_field(sim2d_field(), x);
  std::vector<double> e(10000);
  for (auto& v : e) v = s.measure(x) - f;
  const double mean = std::accumulate(e.begin(), e.end(), 0.0) / e.size();
  double ss = 0.0;
  for (double v : e) ss += (v - mean) * (v - mean);
  const double sample_sd = std::sqrt(ss / (e.size() - 1));
  CHECK(std::abs(sample_sd - sd) <= 0.05 * sd);
  CHECK(std::abs(mean) < 4 * sd / 100.0);
}

TEST_CASE("true safety uses f <= f_bar as safe") {
  const auto f = sim2d_field();
  CHECK(true_safety(f, 0.7, Point(0.25, 0.75, 0)) == Safety::kUnsafe);
  CHECK(true_safety(f, 0.7, Point(0.5, 0.5, 0)) == Safety::kSafe);
  const Point x(0.4, 0.7, 0);
  CHECK(true_safety(f, eval_field(f, x), x) == Safety::kSafe);
  CHECK(true_safety(f, std::nextafter(eval_field(f, x), 0.0), x) == Safety::kUnsafe);
}

TEST_CASE("true safety partitions a grid") {
  const auto f = sim2d_field();
  TestGrid grid(f.bounds, {30, 30, 1});
  std::size_t safe = 0, unsafe = 0;
  for (const auto& p : grid.points()) (true_safety(f, 0.7, p) == Safety::kSafe ? safe : unsafe)++;
  CHECK(safe + unsafe == grid.size());
  CHECK(safe > 0);
  CHECK(unsafe > 0);
}

TEST_CASE("lipschitz estimate for the 2D preset") {
  const auto f = sim2d_field();
  TestGrid grid(f.bounds, {100, 100, 1});
  // analytic max slope of one bump: sqrt(2 / spread) * exp(-1/2)
  const double single = std::sqrt(2.0 / 0.08) * std::exp(-0.5);
  const double L = estimate_lipschitz(f, grid.points());
  CHECK(L == doctest::Approx(3.03).epsilon(0.01));
  CHECK(L <= single * 1.01);
}

TEST_CASE("threshold must lie strictly inside the field range") {
  const auto f = sim2d_field();
  TestGrid grid(f.bounds, {20, 20, 1});
  CHECK_NOTHROW(validate_threshold(f, 0.7, grid.points()));
  CHECK_THROWS_AS(validate_threshold(f, 5.0, grid.points()), ArgumentError);
  CHECK_THROWS_AS(validate_threshold(f, -1.0, grid.points()), ArgumentError);
}

TEST_CASE("counter rng is a pure function of seed, stream and counter") {
  CounterRng a(42, 3), b(42, 3), c(42, 4);
  for (int i = 0; i < 10; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    CHECK(x != c.next_u64());
  }
  CounterRng u(1, 0);
  for (int i = 0; i < 1000; ++i) {
    const double v = u.uniform();
    CHECK(v >= 0.0);
    CHECK(v < 1.0);
  }
}
