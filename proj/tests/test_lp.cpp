#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "simplexlab/lp.hpp"
#include "simplexlab/rng.hpp"

using namespace simplexlab;

TEST_CASE("standard form simplex on hand-checkable programs") {
  SUBCASE("min x+y with x+2y=4") {
    Eigen::MatrixXd A(1, 2);
    A << 1.0, 2.0;
    Eigen::VectorXd b(1);
    b << 4.0;
    Eigen::VectorXd c(2);
    c << 1.0, 1.0;
    auto sol = lp::solve_standard_form(A, b, c);
    REQUIRE(sol.status == lp::Status::optimal);
    CHECK(sol.objective == doctest::Approx(2.0));
    CHECK(sol.x(1) == doctest::Approx(2.0));
    // Dual: y = 1/2 (binding constraint), b.y = objective.
    CHECK(sol.dual(0) == doctest::Approx(0.5));
  }

  SUBCASE("negative right-hand side is normalized") {
    Eigen::MatrixXd A(1, 2);
    A << -1.0, -2.0;
    Eigen::VectorXd b(1);
    b << -4.0;
    Eigen::VectorXd c(2);
    c << 1.0, 1.0;
    auto sol = lp::solve_standard_form(A, b, c);
    REQUIRE(sol.status == lp::Status::optimal);
    CHECK(sol.objective == doctest::Approx(2.0));
    CHECK(b.dot(sol.dual) == doctest::Approx(2.0));
  }

  SUBCASE("unbounded program detected") {
    Eigen::MatrixXd A(1, 2);
    A << 1.0, -1.0;
    Eigen::VectorXd b(1);
    b << 1.0;
    Eigen::VectorXd c(2);
    c << -1.0, 0.0;
    auto sol = lp::solve_standard_form(A, b, c);
    CHECK(sol.status == lp::Status::unbounded);
  }

  SUBCASE("infeasible program detected") {
    Eigen::MatrixXd A(2, 1);
    A << 1.0, 1.0;
    Eigen::VectorXd b(2);
    b << 1.0, 2.0;
    Eigen::VectorXd c(1);
    c << 1.0;
    auto sol = lp::solve_standard_form(A, b, c);
    CHECK(sol.status == lp::Status::infeasible);
  }
}

TEST_CASE("atomic norm lp: special cases and duality self-check") {
  // Dictionary: the four rank-one sign patterns on a 2x2 grid.
  Eigen::MatrixXd atoms(4, 4);
  atoms.col(0) << 1, 1, 1, 1;
  atoms.col(1) << 1, -1, 1, -1;
  atoms.col(2) << 1, 1, -1, -1;
  atoms.col(3) << 1, -1, -1, 1;

  SUBCASE("an atom has norm one") {
    auto sol = lp::atomic_norm_lp(atoms, atoms.col(3));
    REQUIRE(sol.feasible);
    CHECK(sol.value == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(sol.witness.size() == 1);
  }

  SUBCASE("strong duality holds on random targets") {
    SplitMix64 rng(7);
    for (int trial = 0; trial < 25; ++trial) {
      Eigen::VectorXd f(4);
      for (int i = 0; i < 4; ++i) f(i) = rng.uniform(-2.0, 2.0);
      auto sol = lp::atomic_norm_lp(atoms, f);
      REQUIRE(sol.feasible);
      // Witness reproduces the target with matching cost.
      Eigen::VectorXd rebuilt = Eigen::VectorXd::Zero(4);
      double cost = 0.0;
      for (const auto& wt : sol.witness) {
        rebuilt += wt.weight * atoms.col(wt.atom);
        cost += std::abs(wt.weight);
      }
      CHECK((rebuilt - f).lpNorm<Eigen::Infinity>() < 1e-9);
      CHECK(cost == doctest::Approx(sol.value).epsilon(1e-9));
      // Dual vector is feasible and tight.
      for (int j = 0; j < atoms.cols(); ++j) {
        CHECK(std::abs(atoms.col(j).dot(sol.dual)) <= 1.0 + 1e-8);
      }
      CHECK(f.dot(sol.dual) == doctest::Approx(sol.value).epsilon(1e-8));
    }
  }

  SUBCASE("target outside the span is infeasible") {
    Eigen::MatrixXd plane(3, 2);
    plane.col(0) << 1, 0, 0;
    plane.col(1) << 0, 1, 0;
    Eigen::VectorXd off(3);
    off << 0, 0, 1;
    auto sol = lp::atomic_norm_lp(plane, off);
    CHECK_FALSE(sol.feasible);
    CHECK(std::isinf(sol.value));
  }
}

TEST_CASE("inequality maximization") {
  Eigen::MatrixXd A(4, 2);
  A << 1, 0, 0, 1, -1, 0, 0, -1;
  Eigen::VectorXd b(4);
  b << 1, 2, 0, 0;
  Eigen::VectorXd c(2);
  c << 1, 1;
  auto sol = lp::maximize_with_inequalities(A, b, c);
  REQUIRE(sol.status == lp::Status::optimal);
  CHECK(sol.objective == doctest::Approx(3.0));
  CHECK(sol.x(0) == doctest::Approx(1.0));
  CHECK(sol.x(1) == doctest::Approx(2.0));
}

TEST_CASE("simplex is deterministic") {
  Eigen::MatrixXd atoms(4, 4);
  atoms.col(0) << 1, 1, 1, 1;
  atoms.col(1) << 1, -1, 1, -1;
  atoms.col(2) << 1, 1, -1, -1;
  atoms.col(3) << 1, -1, -1, 1;
  Eigen::VectorXd f(4);
  f << 0.3, -1.2, 0.7, 0.1;
  auto a = lp::atomic_norm_lp(atoms, f);
  auto b = lp::atomic_norm_lp(atoms, f);
  REQUIRE(a.feasible);
  REQUIRE(a.witness.size() == b.witness.size());
  for (std::size_t i = 0; i < a.witness.size(); ++i) {
    CHECK(a.witness[i].atom == b.witness[i].atom);
    CHECK(a.witness[i].weight == b.witness[i].weight);
  }
}
