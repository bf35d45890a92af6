#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "simplexlab/grid_function.hpp"
#include "simplexlab/kernels.hpp"
#include "simplexlab/quadrature.hpp"

namespace simplexlab {

// An anchored dyadic cube I = 2^k (m_0, ..., m_m) + [0, 2^k]^(m+1) with
// offsets summing to zero, together with its form value Lambda_I and the
// normalized coefficient a_I = 2^(-k m) Lambda_I. For fixed k the tile is
// determined by the first m offsets.
struct Tile {
  int scale = 0;
  std::vector<std::int64_t> offsets;  // m+1 entries, sum == 0
  double value = 0.0;                 // Lambda_I
  double coefficient = 0.0;           // a_I

  Tile() = default;
  Tile(int k, std::vector<std::int64_t> all_offsets);
  static Tile from_projection(int k, std::span<const std::int64_t> first_m);

  int dim() const { return static_cast<int>(offsets.size()) - 1; }
  Interval interval(int axis) const {
    double side = std::ldexp(1.0, scale);
    return Interval{offsets[axis] * side, (offsets[axis] + 1) * side};
  }
  void set_value(double lambda) {
    value = lambda;
    coefficient = std::ldexp(lambda, -scale * dim());
  }
};

// True when x lies in the half-open dyadic interval [2^k q, 2^k (q+1)).
inline bool in_dyadic_cell(double x, int k, std::int64_t q) {
  return std::floor(std::ldexp(x, -k)) == static_cast<double>(q);
}

// Builds the integration domain for the (m+1)-linear form: coordinate j is
// the intersection over i != j of the j-th axis of F_i's box, snapped
// outward to the dyadic lattice of spacing 2^-log2_ppu, with 2^log2_ppu
// sample points per unit length.
QuadratureGrid form_domain_grid(std::span<const GridFunction> functions,
                                int log2_points_per_unit,
                                std::int64_t point_budget = kDefaultPointBudget);

// Restricts the first axes of the grid to the half-open dyadic cells
// 2^scale [offsets[a], offsets[a] + 1). Returns nothing when some axis has
// no quadrature node inside its cell.
std::optional<QuadratureGrid> restrict_grid_to_projection(
    const QuadratureGrid& grid, int scale, std::span<const std::int64_t> offsets);

// Midpoint-rule value of the truncated simplex form
//   Lambda_S(F_0..F_m) = integral prod_i F_i(x_(i)) psi_S(sum x) dx
// over the grid. All F_i must have dimension m = grid.dim() - 1, m in
// {1, 2, 3}. Deterministic for fixed inputs regardless of thread count.
double evaluate_form(std::span<const GridFunction> functions, const KernelSpec& kernel,
                     const CutoffFunction& cutoff, const ScaleWindow& window,
                     const QuadratureGrid& grid, int threads = 0);

// Single-tile value: same integrand with psi_k and the indicator of the
// tile's first m coordinate intervals.
double evaluate_tile(std::span<const GridFunction> functions, const KernelSpec& kernel,
                     const CutoffFunction& cutoff, const Tile& tile,
                     const QuadratureGrid& grid, int threads = 0);

// All tile values at one scale, computed in a single sweep of the grid:
// each quadrature point contributes to exactly one tile (half-open cells),
// so the lattice totals reproduce the single-scale form value exactly up to
// summation order.
struct ScaleTileLattice {
  int scale = 0;
  int proj_dim = 0;                     // m
  std::vector<std::int64_t> base;      // per-axis minimal offset
  std::vector<int> extent;             // per-axis offset count
  std::vector<double> lambda;          // row-major, last axis fastest
  double max_support_inflation = 0.0;  // observed c with supp(integrand) in cI

  std::int64_t tile_count() const;
  std::int64_t rank(std::span<const std::int64_t> proj_offsets) const;
  std::vector<std::int64_t> offsets_of(std::int64_t rank) const;
  double total() const;  // pairwise sum over the lattice
};

ScaleTileLattice tile_scale_sweep(std::span<const GridFunction> functions,
                                  const KernelSpec& kernel, const CutoffFunction& cutoff,
                                  int k, const QuadratureGrid& grid, int threads = 0);

struct TileDecompositionScale {
  int scale = 0;
  double direct_value = 0.0;  // single-scale Lambda on the same grid
  double tile_total = 0.0;    // sum over the tile lattice
  std::int64_t tiles = 0;
};

struct TileDecompositionReport {
  double direct_value = 0.0;  // Lambda_S
  double tile_sum = 0.0;      // sum_I Lambda_I over all scales
  double difference = 0.0;
  double relative_difference = 0.0;
  double max_scale_identity_error = 0.0;
  double max_support_inflation = 0.0;
  std::vector<TileDecompositionScale> scales;
};

// Checks the exact splitting Lambda_S = sum_I Lambda_I by enumerating every
// tile whose cube meets the grid box at each scale of the window.
TileDecompositionReport tile_decomposition_check(std::span<const GridFunction> functions,
                                                 const KernelSpec& kernel,
                                                 const CutoffFunction& cutoff,
                                                 const ScaleWindow& window,
                                                 const QuadratureGrid& grid, int threads = 0);

// |Lambda_S| / (|S| prod_i ||F_i||_{p_i}). Exponents must form a Hoelder
// tuple (sum of reciprocals 1, each p in (1, inf]); infinity is allowed.
// Throws on a zero denominator.
double holder_ratio(std::span<const GridFunction> functions, const KernelSpec& kernel,
                    const CutoffFunction& cutoff, const ScaleWindow& window,
                    std::span<const double> exponents, const QuadratureGrid& grid,
                    int threads = 0);

}  // namespace simplexlab
