#include <doctest.h>

#include <cmath>
#include <sstream>

#include "simplexlab/grid_function.hpp"
#include "simplexlab/rng.hpp"

using namespace simplexlab;

TEST_CASE("grid function construction and node geometry") {
  GridFunction g(Box::cube(2, -4.0, 4.0), {16, 32});
  CHECK(g.dim() == 2);
  CHECK(g.sample_count() == 16 * 32);
  CHECK(g.spacing(0) == doctest::Approx(0.5));
  CHECK(g.spacing(1) == doctest::Approx(0.25));
  CHECK(g.node(0, 0) == doctest::Approx(-3.75));
  CHECK(g.node(1, 31) == doctest::Approx(4.0 - 0.125));

  CHECK_THROWS_AS(GridFunction(Box::cube(2, -1.0, 1.0), {4}), std::invalid_argument);
  CHECK_THROWS_AS(GridFunction(Box::cube(1, -1.0, 1.0), {1}), std::invalid_argument);
  CHECK_THROWS_AS(GridFunction(Box::cube(1, 1.0, 1.0), {4}), std::invalid_argument);
}

TEST_CASE("interpolation hits samples exactly and vanishes outside") {
  auto g = GridFunction::from_generator(Box::cube(2, -4.0, 4.0), {64, 64},
                                        generators::gaussian(1.0, {0.25, -0.5}));
  for (int i : {0, 7, 31, 63}) {
    for (int j : {0, 15, 48}) {
      double pt[2] = {g.node(0, i), g.node(1, j)};
      int idx[2] = {i, j};
      CHECK(g(pt) == g.sample_at(idx));
    }
  }
  double outside[2] = {4.5, 0.0};
  CHECK(g(outside) == 0.0);
  double outside2[2] = {0.0, -4.0001};
  CHECK(g(outside2) == 0.0);

  // Multilinearity between nodes: the midpoint of two adjacent nodes along
  // one axis averages their samples.
  double a[2] = {g.node(0, 10), g.node(1, 20)};
  double b[2] = {g.node(0, 11), g.node(1, 20)};
  double mid[2] = {0.5 * (a[0] + b[0]), a[1]};
  CHECK(g(mid) == doctest::Approx(0.5 * (g(a) + g(b))).epsilon(1e-14));
}

TEST_CASE("norms with midpoint cell measure") {
  // Indicator of [0, 2) inside [-4, 4): 2/8 of the mass.
  Box support;
  support.axes = {Interval{0.0, 2.0}};
  auto ind = GridFunction::from_generator(Box::cube(1, -4.0, 4.0), {64},
                                          generators::box_indicator(support));
  CHECK(ind.norm_p(1.0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(ind.norm_p(2.0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK(ind.norm_inf() == 1.0);

  auto zero = GridFunction(Box::cube(1, -1.0, 1.0), {8});
  CHECK(zero.norm_p(3.0) == 0.0);
  CHECK_THROWS_AS(ind.norm_p(0.0), std::invalid_argument);
}

TEST_CASE("csv round trip is bit exact") {
  SplitMix64 rng(411);
  GridFunction g(Box::cube(2, -2.0, 2.0), {5, 7});
  for (double& s : g.mutable_samples()) s = rng.uniform(-1.0, 1.0);

  std::stringstream buf;
  g.write_csv(buf);
  GridFunction back = GridFunction::read_csv(buf);
  REQUIRE(back.dim() == 2);
  REQUIRE(back.resolution() == g.resolution());
  CHECK(back.box().axes == g.box().axes);
  for (std::int64_t i = 0; i < g.sample_count(); ++i) {
    CHECK(back.samples()[static_cast<std::size_t>(i)] ==
          g.samples()[static_cast<std::size_t>(i)]);
  }
}

TEST_CASE("csv rejects malformed input") {
  std::stringstream buf("# wrong header\n");
  CHECK_THROWS_AS(GridFunction::read_csv(buf), std::runtime_error);
}

TEST_CASE("generators") {
  auto bump = generators::smooth_bump(1.0, {0.0});
  double at0[1] = {0.0};
  double at05[1] = {0.5};
  double at25[1] = {2.5};
  CHECK(bump(at0) == 1.0);
  CHECK(bump(at05) == 1.0);
  CHECK(bump(at25) == 0.0);

  auto gauss = generators::gaussian(2.0, {1.0});
  double at1[1] = {1.0};
  CHECK(gauss(at1) == 1.0);
  double at2[1] = {2.0};
  CHECK(gauss(at2) == doctest::Approx(std::exp(-2.0)));
}
