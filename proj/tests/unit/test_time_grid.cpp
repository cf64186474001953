#include <doctest.h>

#include <numeric>
#include <stdexcept>

#include "gmflow/time_grid.h"

using gmflow::TimeGrid;

TEST_CASE("uniform grid weights sum to the span") {
  const auto g = TimeGrid::uniform(2.0, 8);
  CHECK(g.size() == 9);
  CHECK(g[0] == 0.0);
  CHECK(g.t_max() == 2.0);
  const double total = std::accumulate(g.weights().begin(), g.weights().end(), 0.0);
  CHECK(total == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(g.is_uniform());
  CHECK(g.min_spacing() == doctest::Approx(0.25));
}

TEST_CASE("explicit grid trapezoid weights") {
  const TimeGrid g({0.0, 1.0, 3.0});
  REQUIRE(g.weights().size() == 3);
  CHECK(g.weights()[0] == 0.5);
  CHECK(g.weights()[1] == 1.5);
  CHECK(g.weights()[2] == 1.0);
  CHECK_FALSE(g.is_uniform());
}

TEST_CASE("grid validation") {
  CHECK_THROWS_AS(TimeGrid({0.1, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(TimeGrid({0.0, 1.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(TimeGrid({0.0, 2.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(TimeGrid(std::vector<double>{}), std::invalid_argument);
}

TEST_CASE("index_of finds grid times only") {
  const auto g = TimeGrid::uniform(1.0, 10);
  CHECK(g.index_of(0.3) == 3);
  CHECK(g.index_of(1.0) == 10);
  CHECK(g.index_of(0.35) == g.size());
}
