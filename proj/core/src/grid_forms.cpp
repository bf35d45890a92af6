#include "simplexlab/grid_forms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace simplexlab {

namespace {

void check_form_inputs(std::span<const GridFunction> functions, const QuadratureGrid& grid) {
  const int m = grid.dim() - 1;
  if (m < 1 || m > 3) throw std::invalid_argument("form evaluation: need m in {1,2,3}");
  if (static_cast<int>(functions.size()) != m + 1) {
    throw std::invalid_argument("form evaluation: need m+1 functions");
  }
  for (const auto& f : functions) {
    if (f.dim() != m) throw std::invalid_argument("form evaluation: function dimension mismatch");
  }
}

// Product over i of F_i(x with coordinate i omitted).
inline double function_product(std::span<const GridFunction> functions,
                               std::span<const double> x) {
  const int m = static_cast<int>(functions.size()) - 1;
  double prod = 1.0;
  double proj[8];
  for (int i = 0; i <= m; ++i) {
    int a = 0;
    for (int j = 0; j <= m; ++j) {
      if (j != i) proj[a++] = x[j];
    }
    prod *= functions[i](std::span<const double>(proj, m));
    if (prod == 0.0) return 0.0;
  }
  return prod;
}

}  // namespace

Tile::Tile(int k, std::vector<std::int64_t> all_offsets)
    : scale(k), offsets(std::move(all_offsets)) {
  std::int64_t sum = std::accumulate(offsets.begin(), offsets.end(), std::int64_t(0));
  if (offsets.size() < 2 || sum != 0) {
    throw std::invalid_argument("Tile: offsets must have >= 2 entries summing to zero");
  }
}

Tile Tile::from_projection(int k, std::span<const std::int64_t> first_m) {
  std::vector<std::int64_t> all(first_m.begin(), first_m.end());
  std::int64_t sum = std::accumulate(all.begin(), all.end(), std::int64_t(0));
  all.push_back(-sum);
  return Tile(k, std::move(all));
}

QuadratureGrid form_domain_grid(std::span<const GridFunction> functions,
                                int log2_points_per_unit, std::int64_t point_budget) {
  const int m = static_cast<int>(functions.size()) - 1;
  for (const auto& f : functions) {
    if (f.dim() != m) throw std::invalid_argument("form_domain_grid: dimension mismatch");
  }
  Box box;
  box.axes.resize(m + 1);
  for (int j = 0; j <= m; ++j) {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= m; ++i) {
      if (i == j) continue;
      int local = j < i ? j : j - 1;
      lo = std::max(lo, functions[i].box().axes[local].lo);
      hi = std::min(hi, functions[i].box().axes[local].hi);
    }
    if (!(lo < hi)) throw std::invalid_argument("form_domain_grid: empty common domain");
    double step = std::ldexp(1.0, -log2_points_per_unit);
    box.axes[j].lo = std::floor(lo / step) * step;
    box.axes[j].hi = std::ceil(hi / step) * step;
  }
  std::vector<int> res(m + 1);
  for (int j = 0; j <= m; ++j) {
    res[j] = static_cast<int>(std::llround(box.axes[j].width() *
                                           std::ldexp(1.0, log2_points_per_unit)));
  }
  return QuadratureGrid(box, res, point_budget);
}

double evaluate_form(std::span<const GridFunction> functions, const KernelSpec& kernel,
                     const CutoffFunction& cutoff, const ScaleWindow& window,
                     const QuadratureGrid& grid, int threads) {
  check_form_inputs(functions, grid);
  const int n = grid.dim();
  return integrate_pointwise(
      grid,
      [&](std::span<const double> x) {
        double sum = 0.0;
        for (int a = 0; a < n; ++a) sum += x[a];
        double k = psi_window(kernel, cutoff, window, sum);
        if (k == 0.0) return 0.0;
        double p = function_product(functions, x);
        return p == 0.0 ? 0.0 : p * k;
      },
      threads);
}

std::optional<QuadratureGrid> restrict_grid_to_projection(
    const QuadratureGrid& grid, int scale, std::span<const std::int64_t> offsets) {
  QuadratureGrid sub = grid;
  double side = std::ldexp(1.0, scale);
  for (int a = 0; a < static_cast<int>(offsets.size()); ++a) {
    double h = grid.spacing(a);
    double cell_lo = offsets[a] * side;
    // Membership is the exact half-open floor test; scan outward from the
    // arithmetic guess.
    int guess_lo = static_cast<int>(std::floor((cell_lo - grid.box().axes[a].lo) / h)) - 2;
    int lo = -1, hi = -1;
    int res = sub.resolution()[a];
    for (int j = std::max(0, guess_lo); j < res; ++j) {
      bool inside = in_dyadic_cell(sub.node(a, j), scale, offsets[a]);
      if (inside && lo < 0) lo = j;
      if (!inside && lo >= 0) {
        hi = j;
        break;
      }
    }
    if (lo < 0) return std::nullopt;
    if (hi < 0) hi = res;
    sub = sub.restrict_axis(a, lo, hi);
  }
  return sub;
}

double evaluate_tile(std::span<const GridFunction> functions, const KernelSpec& kernel,
                     const CutoffFunction& cutoff, const Tile& tile,
                     const QuadratureGrid& grid, int threads) {
  check_form_inputs(functions, grid);
  const int m = grid.dim() - 1;
  if (tile.dim() != m) throw std::invalid_argument("evaluate_tile: tile dimension mismatch");

  auto sub = restrict_grid_to_projection(
      grid, tile.scale, std::span<const std::int64_t>(tile.offsets.data(), m));
  if (!sub) return 0.0;

  const int n = grid.dim();
  return integrate_pointwise(
      *sub,
      [&](std::span<const double> x) {
        double sum = 0.0;
        for (int a = 0; a < n; ++a) sum += x[a];
        double k = psi(kernel, cutoff, tile.scale, sum);
        if (k == 0.0) return 0.0;
        double p = function_product(functions, x);
        return p == 0.0 ? 0.0 : p * k;
      },
      threads);
}

std::int64_t ScaleTileLattice::tile_count() const {
  std::int64_t n = 1;
  for (int e : extent) n *= e;
  return n;
}

std::int64_t ScaleTileLattice::rank(std::span<const std::int64_t> proj_offsets) const {
  std::int64_t r = 0;
  for (int a = 0; a < proj_dim; ++a) {
    std::int64_t rel = proj_offsets[a] - base[a];
    if (rel < 0 || rel >= extent[a]) return -1;
    r = r * extent[a] + rel;
  }
  return r;
}

std::vector<std::int64_t> ScaleTileLattice::offsets_of(std::int64_t rank_index) const {
  std::vector<std::int64_t> off(proj_dim);
  for (int a = proj_dim - 1; a >= 0; --a) {
    off[a] = base[a] + rank_index % extent[a];
    rank_index /= extent[a];
  }
  return off;
}

double ScaleTileLattice::total() const {
  PairwiseAccumulator acc;
  for (double v : lambda) acc.push(v);
  return acc.total();
}

ScaleTileLattice tile_scale_sweep(std::span<const GridFunction> functions,
                                  const KernelSpec& kernel, const CutoffFunction& cutoff,
                                  int k, const QuadratureGrid& grid, int threads) {
  check_form_inputs(functions, grid);
  const int m = grid.dim() - 1;
  const int n = grid.dim();

  ScaleTileLattice lattice;
  lattice.scale = k;
  lattice.proj_dim = m;
  lattice.base.resize(m);
  lattice.extent.resize(m);
  for (int a = 0; a < m; ++a) {
    // Offsets of the cells met by [lo, hi): floor over the half-open nodes.
    std::int64_t first = static_cast<std::int64_t>(
        std::floor(std::ldexp(grid.node(a, 0), -k)));
    std::int64_t last = static_cast<std::int64_t>(
        std::floor(std::ldexp(grid.node(a, grid.resolution()[a] - 1), -k)));
    lattice.base[a] = first;
    lattice.extent[a] = static_cast<int>(last - first + 1);
  }
  std::int64_t ntiles = lattice.tile_count();
  if (ntiles > (std::int64_t(1) << 24)) {
    throw std::runtime_error("tile_scale_sweep: tile lattice too large");
  }
  lattice.lambda.assign(static_cast<std::size_t>(ntiles), 0.0);

  const std::int64_t total = grid.total_points();
  std::int64_t nchunks = (total + detail::kChunkPoints - 1) / detail::kChunkPoints;
  std::vector<std::vector<double>> chunk_lattices(static_cast<std::size_t>(nchunks));
  std::vector<double> chunk_inflation(static_cast<std::size_t>(nchunks), 0.0);

  double side = std::ldexp(1.0, k);
  detail::for_each_chunk(total, threads, [&](std::int64_t c, std::int64_t b, std::int64_t e) {
    std::vector<double>& local = chunk_lattices[static_cast<std::size_t>(c)];
    local.assign(static_cast<std::size_t>(ntiles), 0.0);
    double inflation = 0.0;
    int idx[8];
    double pt[8];
    detail::unflatten(grid, b, std::span<int>(idx, n));
    for (int a = 0; a < n; ++a) pt[a] = grid.node(a, idx[a]);
    for (std::int64_t i = b; i < e; ++i) {
      double sum = 0.0;
      for (int a = 0; a < n; ++a) sum += pt[a];
      double kv = psi(kernel, cutoff, k, sum);
      if (kv != 0.0) {
        double p = function_product(functions, std::span<const double>(pt, n));
        if (p != 0.0) {
          std::int64_t r = 0;
          std::int64_t proj_sum = 0;
          for (int a = 0; a < m; ++a) {
            std::int64_t off =
                static_cast<std::int64_t>(std::floor(std::ldexp(pt[a], -k)));
            proj_sum += off;
            r = r * lattice.extent[a] + (off - lattice.base[a]);
          }
          local[static_cast<std::size_t>(r)] += p * kv;
          // Observed support inflation: distance of this point from the
          // tile center, in units of the tile half-side, over all m+1
          // coordinates (the last offset is minus the projection sum).
          std::int64_t rank_left = r;
          double worst = 0.0;
          for (int a = m - 1; a >= 0; --a) {
            std::int64_t off = lattice.base[a] + rank_left % lattice.extent[a];
            rank_left /= lattice.extent[a];
            double center = (off + 0.5) * side;
            worst = std::max(worst, std::abs(pt[a] - center) / (0.5 * side));
          }
          double center_last = (-proj_sum + 0.5) * side;
          worst = std::max(worst, std::abs(pt[m] - center_last) / (0.5 * side));
          inflation = std::max(inflation, worst);
        }
      }
      for (int a = n - 1; a >= 0; --a) {
        if (++idx[a] < grid.resolution()[a]) {
          pt[a] = grid.node(a, idx[a]);
          break;
        }
        idx[a] = 0;
        pt[a] = grid.node(a, 0);
      }
    }
    chunk_inflation[static_cast<std::size_t>(c)] = inflation;
  });

  double cellvol = grid.cell_volume();
  for (std::int64_t c = 0; c < nchunks; ++c) {
    const auto& local = chunk_lattices[static_cast<std::size_t>(c)];
    for (std::int64_t t = 0; t < ntiles; ++t) {
      lattice.lambda[static_cast<std::size_t>(t)] += local[static_cast<std::size_t>(t)];
    }
    lattice.max_support_inflation =
        std::max(lattice.max_support_inflation, chunk_inflation[static_cast<std::size_t>(c)]);
  }
  for (double& v : lattice.lambda) v *= cellvol;
  return lattice;
}

TileDecompositionReport tile_decomposition_check(std::span<const GridFunction> functions,
                                                 const KernelSpec& kernel,
                                                 const CutoffFunction& cutoff,
                                                 const ScaleWindow& window,
                                                 const QuadratureGrid& grid, int threads) {
  TileDecompositionReport report;
  PairwiseAccumulator tile_sum;
  for (int k = window.lo; k <= window.hi; ++k) {
    ScaleTileLattice lattice = tile_scale_sweep(functions, kernel, cutoff, k, grid, threads);
    TileDecompositionScale row;
    row.scale = k;
    row.tile_total = lattice.total();
    row.direct_value =
        evaluate_form(functions, kernel, cutoff, ScaleWindow(k, k), grid, threads);
    row.tiles = lattice.tile_count();
    report.max_scale_identity_error = std::max(
        report.max_scale_identity_error, std::abs(row.tile_total - row.direct_value));
    report.max_support_inflation =
        std::max(report.max_support_inflation, lattice.max_support_inflation);
    tile_sum.push(row.tile_total);
    report.scales.push_back(row);
  }
  report.tile_sum = tile_sum.total();
  report.direct_value = evaluate_form(functions, kernel, cutoff, window, grid, threads);
  report.difference = report.tile_sum - report.direct_value;
  report.relative_difference =
      report.direct_value == 0.0
          ? (report.tile_sum == 0.0 ? 0.0 : std::numeric_limits<double>::infinity())
          : std::abs(report.difference) / std::abs(report.direct_value);
  return report;
}

double holder_ratio(std::span<const GridFunction> functions, const KernelSpec& kernel,
                    const CutoffFunction& cutoff, const ScaleWindow& window,
                    std::span<const double> exponents, const QuadratureGrid& grid,
                    int threads) {
  if (exponents.size() != functions.size()) {
    throw std::invalid_argument("holder_ratio: exponent count mismatch");
  }
  double recip = 0.0;
  for (double p : exponents) {
    if (p == std::numeric_limits<double>::infinity()) continue;
    if (p <= 1.0) throw std::invalid_argument("holder_ratio: exponents must lie in (1, inf]");
    recip += 1.0 / p;
  }
  if (std::abs(recip - 1.0) > 1e-9) {
    throw std::invalid_argument("holder_ratio: exponents must form a Hoelder tuple");
  }
  double denom = static_cast<double>(window.length());
  for (std::size_t i = 0; i < functions.size(); ++i) {
    denom *= functions[i].norm_p(exponents[i]);
  }
  if (denom == 0.0) throw std::runtime_error("holder_ratio: zero denominator");
  double value = evaluate_form(functions, kernel, cutoff, window, grid, threads);
  return std::abs(value) / denom;
}

}  // namespace simplexlab
