#pragma once

#include <vector>

#include "simplexlab/grid_function.hpp"

namespace simplexlab::testing {

// The standard two-dimensional Gaussian trio used across the suites:
// off-center so the odd kernel produces a solidly nonzero form value.
inline std::vector<GridFunction> gaussian_trio_2d(int log2_ppu) {
  int res = static_cast<int>(8 * (1 << log2_ppu));
  Box box = Box::cube(2, -4.0, 4.0);
  std::vector<int> r = {res, res};
  return {
      GridFunction::from_generator(box, r, generators::gaussian(1.0, {0.3, -0.2})),
      GridFunction::from_generator(box, r, generators::gaussian(1.3, {-0.4, 0.1})),
      GridFunction::from_generator(box, r, generators::gaussian(0.8, {0.2, 0.5})),
  };
}

// One-dimensional smooth bump pair with offset centers.
inline std::vector<GridFunction> bump_pair_1d(int log2_ppu) {
  int res = static_cast<int>(8 * (1 << log2_ppu));
  Box box = Box::cube(1, -4.0, 4.0);
  std::vector<int> r = {res};
  return {
      GridFunction::from_generator(box, r, generators::smooth_bump(0.6, {-0.6})),
      GridFunction::from_generator(box, r, generators::smooth_bump(0.5, {0.25})),
  };
}

}  // namespace simplexlab::testing
