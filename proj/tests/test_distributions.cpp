#include <cmath>
#include <numbers>
#include <numeric>

#include "doctest.h"
#include "rcgan/distributions.hpp"
#include "rcgan/errors.hpp"

using namespace rcgan;

TEST_CASE("gaussian sample mean converges at n = 1e5") {
  Rng rng(11);
  auto x = sample(DistSpec::standard_normal(2), 100000, rng);
  for (std::size_t d = 0; d < 2; ++d) {
    double mean = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) mean += x(i, d);
    mean /= static_cast<double>(x.rows());
    CHECK(std::abs(mean) < 0.02);
  }
}

TEST_CASE("uniform samples stay inside the box") {
  Rng rng(12);
  auto spec = DistSpec::box(3, -1.0, 1.0);
  auto x = sample(spec, 5000, rng);
  for (double v : x.values()) {
    CHECK(v >= -1.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("four-dot samples split evenly across the four centers") {
  Rng rng(13);
  const std::size_t n = 4000;
  auto x = sample(DistSpec::four_dot(), n, rng);
  std::size_t counts[4] = {0, 0, 0, 0};
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t quadrant = (x(i, 0) > 0 ? 0 : 1) + (x(i, 1) > 0 ? 0 : 2);
    ++counts[quadrant];
    // every sample within 5 sd of (+-1, +-1)
    CHECK(std::hypot(std::abs(x(i, 0)) - 1.0, std::abs(x(i, 1)) - 1.0) < 5 * 0.15 * std::sqrt(2.0));
  }
  for (auto c : counts) {
    CHECK(c >= n / 5);
    CHECK(c <= 3 * n / 10);
  }
}

TEST_CASE("loop and arc samples lie near the unit circle") {
  Rng rng(14);
  auto loop = sample(DistSpec::loop(), 2000, rng);
  auto arc = sample(DistSpec::arc(), 2000, rng);
  for (std::size_t i = 0; i < 2000; ++i) {
    CHECK(std::abs(std::hypot(loop(i, 0), loop(i, 1)) - 1.0) < 0.6);
    const double angle = std::atan2(arc(i, 1), arc(i, 0));
    // the open 120 degree sector is centred on -90 degrees
    CHECK_FALSE((angle < -M_PI / 6.0 && angle > -5.0 * M_PI / 6.0));
  }
}

TEST_CASE("sampling is deterministic per seed") {
  Rng a(99), b(99);
  CHECK(sample(DistSpec::loop(), 100, a) == sample(DistSpec::loop(), 100, b));
}

TEST_CASE("invalid specs are rejected") {
  Rng rng(1);
  CHECK_THROWS_AS(sample(DistSpec::loop(), 0, rng), InvalidArgument);
  CHECK_THROWS_AS(DistSpec::gaussian({0.0}, {0.0}), InvalidArgument);
  CHECK_THROWS_AS(DistSpec::uniform({1.0}, {1.0}), InvalidArgument);
  DistSpec bad = DistSpec::loop();
  bad.dim = 3;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  CHECK_THROWS_AS(density_on_grid(DistSpec::standard_normal(3), Grid2D{}), InvalidArgument);
  CHECK_THROWS_AS(parse_dist_spec("spiral"), InvalidArgument);
}

TEST_CASE("spec text form round-trips") {
  for (const char* text : {"loop:0.1", "arc:0.2", "four-dot:0.15", "gaussian:0,1:2,0.5",
                           "uniform:-1,-2:1,2"}) {
    auto spec = parse_dist_spec(text);
    CHECK(to_string(spec) == text);
    CHECK(parse_dist_spec(to_string(spec)) == spec);
  }
  CHECK(parse_dist_spec("normal:3:2") == DistSpec::standard_normal(3, 2.0));
  CHECK(parse_dist_spec("box:2:-1:1") == DistSpec::box(2, -1.0, 1.0));
  CHECK(parse_dist_spec("loop") == DistSpec::loop());
}

TEST_CASE("grid parsing and validation") {
  auto g = parse_grid("-3,3,64");
  CHECK(g.nx == 64);
  CHECK(g.y_hi == 3.0);
  CHECK(parse_grid(to_string(g)) == g);
  CHECK_THROWS_AS(parse_grid("-3,3,1"), InvalidArgument);
  CHECK_THROWS_AS(parse_grid("3,3,10"), InvalidArgument);
}

TEST_CASE("uniform box covering the grid gives equal cells") {
  Grid2D grid{-1.0, 1.0, -1.0, 1.0, 10, 10};
  auto d = density_on_grid(DistSpec::box(2, -1.0, 1.0), grid);
  for (double v : d) CHECK(v == doctest::Approx(0.01).epsilon(1e-12));
}

TEST_CASE("density grid invariants: nonnegative, unit mass, exact reflection symmetry") {
  Grid2D grid{-3.0, 3.0, -3.0, 3.0, 37, 40};
  for (const auto& spec : {DistSpec::standard_normal(2), DistSpec::loop(), DistSpec::four_dot()}) {
    auto d = density_on_grid(spec, grid);
    double total = 0.0;
    for (double v : d) {
      CHECK(v >= 0.0);
      total += v;
    }
    CHECK(std::abs(total - 1.0) < 1e-12);
    for (std::size_t j = 0; j < grid.ny; ++j) {
      for (std::size_t i = 0; i < grid.nx; ++i) {
        CHECK(d[j * grid.nx + i] == d[j * grid.nx + (grid.nx - 1 - i)]);
      }
    }
  }
}

TEST_CASE("narrow gaussian concentrates within five cells of the center row/column") {
  Grid2D grid{-1.0, 1.0, -1.0, 1.0, 50, 50};
  auto d = density_on_grid(DistSpec::gaussian({0.0, 0.0}, {0.01, 0.01}), grid);
  // Direct summation over cells whose row or column index lies within five
  // cells of the centre line (indices 20..29).
  auto near = [](std::size_t k) { return k >= 20 && k < 30; };
  double band = 0.0;
  for (std::size_t j = 0; j < 50; ++j) {
    for (std::size_t i = 0; i < 50; ++i) {
      if (near(i) || near(j)) band += d[j * 50 + i];
    }
  }
  CHECK(band > 0.99);
}

TEST_CASE("distance to the noiseless shapes") {
  const auto loop = DistSpec::loop();
  CHECK(manifold_distance(loop, 0.0, 0.0) == 1.0);
  CHECK(manifold_distance(loop, 3.0, 4.0) == doctest::Approx(4.0));
  CHECK(manifold_distance(loop, 0.0, -0.5) == doctest::Approx(0.5));

  const auto arc = DistSpec::arc();
  CHECK(manifold_distance(arc, 0.0, 2.0) == doctest::Approx(1.0));  // top, on the arc
  // straight below the gap: nearest points are the two endpoints at -30 and 210 degrees
  const double ex = std::cos(-std::numbers::pi / 6.0);
  const double ey = std::sin(-std::numbers::pi / 6.0);
  CHECK(manifold_distance(arc, 0.0, -1.0) == doctest::Approx(std::hypot(ex, -1.0 - ey)));
  CHECK(manifold_distance(arc, 0.0, 0.0) == doctest::Approx(1.0));

  const auto dots = DistSpec::four_dot();
  CHECK(manifold_distance(dots, 1.0, -1.0) == 0.0);
  CHECK(manifold_distance(dots, 0.0, 0.0) == doctest::Approx(std::sqrt(2.0)));
  CHECK(manifold_distance(dots, 1.0, 0.0) == doctest::Approx(1.0));

  CHECK_THROWS_AS(manifold_distance(DistSpec::standard_normal(2), 0.0, 0.0), InvalidArgument);
}

TEST_CASE("outliers keep their distance from the shape") {
  Rng rng = make_rng(4, Stream::anomalies);
  const auto loop = DistSpec::loop();
  const Tensor out = sample_outliers(loop, DistSpec::box(2, -3.0, 3.0), 500, 0.5, rng);
  REQUIRE(out.rows() == 500);
  for (std::size_t r = 0; r < out.rows(); ++r) {
    CHECK(manifold_distance(loop, out(r, 0), out(r, 1)) > 0.5);
    CHECK(std::abs(out(r, 0)) <= 3.0);
  }
  // a box inside the band can never qualify
  CHECK_THROWS_AS(sample_outliers(loop, DistSpec::box(2, 0.95, 1.0), 2, 0.5, rng), NumericError);
  CHECK_THROWS_AS(sample_outliers(DistSpec::box(2, 0, 1), DistSpec::box(2, 0, 1), 2, 0.5, rng),
                  InvalidArgument);
}
