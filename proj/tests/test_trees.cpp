#include <doctest.h>

#include <cmath>
#include <sstream>

#include "simplexlab/rng.hpp"
#include "simplexlab/trees.hpp"
#include "test_helpers.hpp"

using namespace simplexlab;

namespace {

const KernelSpec kHilbert = KernelSpec::hilbert();
const CutoffFunction kPhi = make_cutoff();

// Oracle: maximal function on a 1-D grid by scanning every complete dyadic
// index block outright.
double brute_force_maximal_1d(const GridFunction& F, int m, int cell) {
  int res = F.resolution()[0];
  double best = 0.0;
  for (int size = 1; size <= res; size *= 2) {
    int block = cell / size;
    int lo = block * size, hi = (block + 1) * size;
    if (hi > res) continue;
    double sum = 0.0;
    for (int i = lo; i < hi; ++i) {
      sum += std::pow(std::abs(F.samples()[static_cast<std::size_t>(i)]), m);
    }
    best = std::max(best, sum / size);
  }
  return std::pow(best, 1.0 / m);
}

}  // namespace

TEST_CASE("maximal function basics") {
  SUBCASE("constants are fixed points") {
    auto c = GridFunction::from_generator(Box::cube(2, 0.0, 4.0), {16, 16},
                                          [](std::span<const double>) { return 0.7; });
    GridFunction M = maximal_function(c, 2);
    for (double v : M.samples()) CHECK(v == doctest::Approx(0.7).epsilon(1e-13));
  }

  SUBCASE("indicator averages stay within [0, 1] and hit 1 on the set") {
    Box support;
    support.axes = {Interval{0.0, 1.0}};
    auto f = GridFunction::from_generator(Box::cube(1, 0.0, 4.0), {8},
                                          generators::box_indicator(support));
    GridFunction M = maximal_function(f, 1);
    for (int i = 0; i < 8; ++i) {
      double v = M.samples()[static_cast<std::size_t>(i)];
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
    CHECK(M.samples()[0] == 1.0);
    CHECK(M.samples()[1] == 1.0);
  }

  SUBCASE("eight-cell example against the brute-force oracle") {
    Box support;
    support.axes = {Interval{0.0, 1.0}};
    auto f = GridFunction::from_generator(Box::cube(1, 0.0, 4.0), {8},
                                          generators::box_indicator(support));
    GridFunction M = maximal_function(f, 1);
    // Hand values: cells 0,1 see average 1; cells 2,3 see 1/2 via [0,4);
    // cells 4..7 only see 1/4 via the full grid.
    std::vector<double> expected = {1.0, 1.0, 0.5, 0.5, 0.25, 0.25, 0.25, 0.25};
    for (int i = 0; i < 8; ++i) {
      CHECK(M.samples()[static_cast<std::size_t>(i)] ==
            doctest::Approx(expected[static_cast<std::size_t>(i)]).epsilon(1e-13));
      CHECK(M.samples()[static_cast<std::size_t>(i)] ==
            doctest::Approx(brute_force_maximal_1d(f, 1, i)).epsilon(1e-13));
    }
  }

  SUBCASE("random fields match the oracle, dominate cell values, scale and order") {
    SplitMix64 rng(2024);
    for (int trial = 0; trial < 6; ++trial) {
      GridFunction f(Box::cube(1, -2.0, 2.0), {16});
      for (double& s : f.mutable_samples()) s = rng.uniform(-2.0, 2.0);
      GridFunction M = maximal_function(f, 1);
      GridFunction M3 = maximal_function(f, 3);
      for (int i = 0; i < 16; ++i) {
        auto idx = static_cast<std::size_t>(i);
        CHECK(M.samples()[idx] == doctest::Approx(brute_force_maximal_1d(f, 1, i)));
        CHECK(M3.samples()[idx] == doctest::Approx(brute_force_maximal_1d(f, 3, i)));
        CHECK(M.samples()[idx] >= std::abs(f.samples()[idx]) - 1e-12);
      }
      GridFunction g = f;
      for (double& s : g.mutable_samples()) s *= 2.5;
      GridFunction Mg = maximal_function(g, 1);
      for (int i = 0; i < 16; ++i) {
        CHECK(Mg.samples()[static_cast<std::size_t>(i)] ==
              doctest::Approx(2.5 * M.samples()[static_cast<std::size_t>(i)]).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("projection containment arithmetic") {
  using V = std::vector<std::int64_t>;
  V a{2, -1};
  V top{0, -1};
  CHECK(projection_contained(0, a, 1, V{1, -1}));
  CHECK_FALSE(projection_contained(0, a, 1, top));
  CHECK(projection_contained(0, V{-3, 5}, 2, V{-1, 1}));
  CHECK(projection_contained(3, V{-1, 0}, 3, V{-1, 0}));
  CHECK_FALSE(projection_contained(3, V{-1, 0}, 3, V{-1, 1}));
  // Bigger cube cannot sit inside a smaller one.
  CHECK_FALSE(projection_contained(2, V{0, 0}, 1, V{0, 0}));
}

TEST_CASE("tile field construction, lookup and csv") {
  TileField field = TileField::random(2, ScaleWindow(-1, 1), 4, 60, 99);
  CHECK(field.size() == 60);
  CHECK(field.proj_dim() == 2);
  // Canonical order is strictly increasing.
  for (std::size_t i = 1; i < field.size(); ++i) {
    const auto& a = field.entries()[i - 1];
    const auto& b = field.entries()[i];
    CHECK((a.scale < b.scale || (a.scale == b.scale && a.offsets < b.offsets)));
  }
  const auto& e = field.entries()[7];
  auto found = field.find(e.scale, e.offsets);
  REQUIRE(found.has_value());
  CHECK(*found == 7);
  CHECK(field.tile_of(7).value == e.lambda);

  TileField again = TileField::random(2, ScaleWindow(-1, 1), 4, 60, 99);
  CHECK(again.entries()[11].lambda == field.entries()[11].lambda);

  std::stringstream csv;
  field.write_csv(csv);
  CHECK(csv.str().find("# simplexlab-tilefield v1") == 0);
  CHECK(csv.str().find("k,m0,m1,lambda,a") != std::string::npos);
}

TEST_CASE("tile field from the gaussian trio matches the sweep totals") {
  auto fs = testing::gaussian_trio_2d(3);
  QuadratureGrid grid = form_domain_grid(fs, 3);
  ScaleWindow w(-1, 1);
  TileField field = TileField::from_functions(fs, kHilbert, kPhi, w, grid);
  CHECK(field.size() > 0);
  // Coefficients follow the 2^{-km} normalization.
  for (const auto& e : field.entries()) {
    CHECK(e.coefficient == doctest::Approx(std::ldexp(e.lambda, -2 * e.scale)));
  }
}

TEST_CASE("small tiles sums") {
  SUBCASE("empty field") {
    TileField field(2, ScaleWindow(0, 0));
    auto r = small_tiles_sum(field, 0.5, 0.9);
    CHECK(r.linear_sum == 0.0);
    CHECK(r.alpha_moment == 0.0);
    CHECK(r.inequality_ok);
  }

  SUBCASE("single tile below threshold at alpha = 1 is tight") {
    TileField field(2, ScaleWindow(0, 0));
    const double delta = 0.4;
    field.add(0, {1, -1}, delta / 2.0);  // k = 0 so a = lambda
    field.finalize();
    auto r = small_tiles_sum(field, delta, 1.0);
    CHECK(r.linear_sum == doctest::Approx(delta / 2.0));
    CHECK(r.alpha_moment == doctest::Approx(delta / 2.0));
    CHECK(r.bound == doctest::Approx(delta / 2.0));
    CHECK(r.inequality_ok);
  }

  SUBCASE("random fields at the three exponents") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      TileField field = TileField::random(2, ScaleWindow(-2, 2), 5, 100, seed);
      for (double alpha : {0.8, 0.9, 1.0}) {
        auto r = small_tiles_sum(field, 0.3, alpha);
        CHECK(r.inequality_ok);
      }
    }
  }

  CHECK_THROWS_AS(small_tiles_sum(TileField(1, ScaleWindow(0, 0)), 0.1, 1.5),
                  std::invalid_argument);
}

TEST_CASE("corollary budget formula") {
  CHECK(corollary_budget(5, 0.1, 10) == doctest::Approx(5.0));
  CHECK(corollary_budget(10, 0.1, 10) == doctest::Approx(10.0));
  CHECK(corollary_budget(20, 0.1, 10) == doctest::Approx(11.0));
  CHECK(corollary_budget(0, 0.7, 3) == 0.0);

  SplitMix64 rng(512);
  for (int trial = 0; trial < 200; ++trial) {
    int len = static_cast<int>(rng.below(40));
    int cap = static_cast<int>(rng.below(20));
    double delta = rng.uniform(0.0, 1.0);
    double here = corollary_budget(len, delta, cap);
    CHECK(corollary_budget(len + 1, delta, cap) >= here - 1e-12);
    if (len <= cap) CHECK(here == doctest::Approx(static_cast<double>(len)));
  }

  CHECK_THROWS_AS(corollary_budget(-1, 0.1, 2), std::invalid_argument);
}

TEST_CASE("tree selection") {
  SUBCASE("everything below the threshold is residual") {
    TileField field = TileField::random(2, ScaleWindow(-1, 1), 3, 40, 5);
    double max_a = 0.0;
    for (const auto& e : field.entries()) max_a = std::max(max_a, std::abs(e.coefficient));
    SelectionResult sel = select_trees(field, max_a + 1.0);
    CHECK(sel.tops.empty());
    CHECK(sel.residual.size() == field.size());
    auto check = verify_selection_partition(field, sel, max_a + 1.0);
    CHECK(check.ok);
  }

  SUBCASE("one dominant coarse tile collects everything under it") {
    TileField field(1, ScaleWindow(0, 2));
    field.add(2, {0}, std::ldexp(5.0, 2));      // a = 5, projection [0, 4)
    field.add(0, {1}, std::ldexp(0.1, 0));      // inside
    field.add(0, {3}, std::ldexp(0.2, 0));      // inside
    field.add(1, {1}, std::ldexp(-0.3, 1));     // inside
    field.add(0, {-1}, std::ldexp(0.4, 0));     // outside
    field.finalize();
    SelectionResult sel = select_trees(field, 1.0);
    REQUIRE(sel.tops.size() == 1);
    CHECK(field.entries()[sel.tops[0]].scale == 2);
    CHECK(sel.trees[0].size() == 4);
    CHECK(sel.residual.size() == 1);
    CHECK(verify_selection_partition(field, sel, 1.0).ok);
    CHECK(sel.residual_linear_total == doctest::Approx(0.4));
  }

  SUBCASE("nested above-threshold tiles keep only the maximal cube") {
    TileField field(2, ScaleWindow(0, 1));
    field.add(1, {0, 0}, std::ldexp(2.0, 2));   // top candidate, scale 1
    field.add(0, {1, 1}, std::ldexp(3.0, 0));   // above delta but nested
    field.finalize();
    SelectionResult sel = select_trees(field, 1.0);
    REQUIRE(sel.tops.size() == 1);
    CHECK(field.entries()[sel.tops[0]].scale == 1);
    CHECK(verify_selection_partition(field, sel, 1.0).ok);
  }

  SUBCASE("property: random fields partition exactly") {
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
      TileField field = TileField::random(2, ScaleWindow(-2, 2), 4, 120, seed);
      SelectionResult sel = select_trees(field, 0.4);
      auto check = verify_selection_partition(field, sel, 0.4);
      CHECK_MESSAGE(check.ok, check.failure, " at seed ", seed);
    }
  }

  SUBCASE("selection csv labels every tile") {
    TileField field = TileField::random(2, ScaleWindow(-1, 1), 3, 30, 77);
    SelectionResult sel = select_trees(field, 0.4);
    std::stringstream csv;
    write_selection_csv(field, sel, csv);
    CHECK(csv.str().find("class") != std::string::npos);
  }
}

TEST_CASE("tree sums: closed form equals the tile-by-tile path") {
  auto fs = testing::gaussian_trio_2d(3);
  QuadratureGrid grid = form_domain_grid(fs, 3);
  Tile top = Tile::from_projection(0, std::vector<std::int64_t>{0, -1});
  ScaleWindow w(-2, 0);

  double closed = tree_sum(fs, kHilbert, kPhi, top, w, grid);
  double explicit_sum = tree_sum_tiles(fs, kHilbert, kPhi, top, w, grid);
  CHECK(closed == doctest::Approx(explicit_sum).epsilon(1e-8));
  CHECK(closed != 0.0);

  SUBCASE("full-cover top reduces to the single-scale form") {
    Tile cover = Tile::from_projection(3, std::vector<std::int64_t>{-1, -1});
    ScaleWindow single(3, 3);
    double v1 = tree_sum(fs, kHilbert, kPhi, cover, single, grid);
    double v2 = evaluate_form(fs, kHilbert, kPhi, single, grid);
    CHECK(v1 == doctest::Approx(v2).epsilon(1e-12));
  }

  SUBCASE("disjoint top vanishes") {
    Tile far = Tile::from_projection(0, std::vector<std::int64_t>{50, 50});
    CHECK(tree_sum(fs, kHilbert, kPhi, far, ScaleWindow(-1, 0), grid) == 0.0);
  }

  SUBCASE("window must end at the top scale") {
    CHECK_THROWS_AS(tree_sum(fs, kHilbert, kPhi, top, ScaleWindow(-1, 1), grid),
                    std::invalid_argument);
  }
}

TEST_CASE("single tree search") {
  SUBCASE("zero functions meet immediately") {
    Box box = Box::cube(2, -2.0, 2.0);
    std::vector<GridFunction> z = {GridFunction(box, {32, 32}), GridFunction(box, {32, 32}),
                                   GridFunction(box, {32, 32})};
    QuadratureGrid grid = form_domain_grid(z, 3);
    Tile top = Tile::from_projection(0, std::vector<std::int64_t>{0, 0});
    SingleTreeResult r = single_tree_search(z, kHilbert, kPhi, top, 0.1, 4, grid);
    CHECK(r.met);
    CHECK(r.window.length() == 1);
    CHECK(r.ratio == 0.0);
  }

  SUBCASE("odd-symmetric configuration vanishes at the first window") {
    Box support;
    support.axes = {Interval{-1.0, 1.0}};
    Box box = Box::cube(1, -4.0, 4.0);
    auto ind = GridFunction::from_generator(box, {128}, generators::box_indicator(support));
    std::vector<GridFunction> fs = {ind, ind};
    QuadratureGrid grid = form_domain_grid(fs, 4);
    // Top projection [-4, 4) covers the box, so the tree is the whole form.
    Tile top = Tile::from_projection(3, std::vector<std::int64_t>{-1});
    SingleTreeResult r = single_tree_search(fs, kHilbert, kPhi, top, 1e-10, 3, grid);
    CHECK(r.met);
    CHECK(r.window.length() == 1);
  }

  SUBCASE("gaussian probe records a qualifying window") {
    auto fs = testing::gaussian_trio_2d(3);
    QuadratureGrid grid = form_domain_grid(fs, 3);
    Tile top = Tile::from_projection(1, std::vector<std::int64_t>{0, -1});
    SingleTreeResult r = single_tree_search(fs, kHilbert, kPhi, top, 0.05, 5, grid);
    CHECK(r.per_length_ratio.size() >= 1);
    CHECK(r.ratio >= 0.0);
    if (r.met) {
      CHECK(std::abs(r.tree_value) <=
            0.05 * std::ldexp(1.0, 2 * top.scale) * r.window.length() + 1e-12);
    }
  }
}

TEST_CASE("loomis-whitney diagnostic") {
  SUBCASE("zero functions produce no violations") {
    Box box = Box::cube(2, -2.0, 2.0);
    std::vector<GridFunction> z = {GridFunction(box, {16, 16}), GridFunction(box, {16, 16}),
                                   GridFunction(box, {16, 16})};
    TileField field(2, ScaleWindow(0, 0));
    field.add(0, {0, 0}, 0.0);
    field.finalize();
    auto rep = loomis_whitney_diagnostic(field, z, 2);
    CHECK(rep.violations == 0);
    CHECK(rep.max_ratio == 0.0);
  }

  SUBCASE("constant functions make the ratio equal |a_I|") {
    Box box = Box::cube(2, -2.0, 2.0);
    auto ones = GridFunction::from_generator(box, {16, 16},
                                             [](std::span<const double>) { return 1.0; });
    std::vector<GridFunction> fs = {ones, ones, ones};
    TileField field(2, ScaleWindow(0, 0));
    field.add(0, {0, 0}, 0.6);
    field.add(0, {-1, 0}, -0.2);
    field.finalize();
    auto rep = loomis_whitney_diagnostic(field, fs, 2);
    REQUIRE(rep.rows.size() == 2);
    for (const auto& row : rep.rows) {
      CHECK(row.ratio ==
            doctest::Approx(std::abs(field.entries()[row.entry].coefficient)).epsilon(1e-12));
    }
    CHECK(rep.violations == 0);
  }

  SUBCASE("gaussian trio yields a finite empirical constant") {
    auto fs = testing::gaussian_trio_2d(3);
    QuadratureGrid grid = form_domain_grid(fs, 3);
    TileField field =
        TileField::from_functions(fs, kHilbert, kPhi, ScaleWindow(-1, 1), grid, 0, 1e-14);
    auto rep = loomis_whitney_diagnostic(field, fs, 2);
    CHECK(rep.violations == 0);
    CHECK(rep.max_ratio > 0.0);
    CHECK(std::isfinite(rep.max_ratio));
  }
}
