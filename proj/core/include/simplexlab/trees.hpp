#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "simplexlab/grid_forms.hpp"
#include "simplexlab/grid_function.hpp"
#include "simplexlab/kernels.hpp"

namespace simplexlab {

// A finitely supported field of normalized tile coefficients a_I = 2^-km
// Lambda_I, keyed by scale and the first m offsets (the last offset is
// determined by the zero-sum constraint). Entries are kept sorted by scale,
// then offsets, so every consumer iterates in one canonical order.
class TileField {
 public:
  struct Entry {
    int scale = 0;
    std::vector<std::int64_t> offsets;  // first m
    double lambda = 0.0;
    double coefficient = 0.0;  // a_I
  };

  TileField(int proj_dim, ScaleWindow window);

  int proj_dim() const { return proj_dim_; }
  const ScaleWindow& window() const { return window_; }
  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  void add(int scale, std::vector<std::int64_t> offsets, double lambda);
  void finalize();  // sorts entries; called by the builders
  std::optional<std::size_t> find(int scale, std::span<const std::int64_t> offsets) const;

  Tile tile_of(std::size_t index) const;

  // Evaluates every tile meeting the grid at every scale of the window via
  // the single-sweep lattice. Tiles with |Lambda_I| below drop_below are
  // omitted (0 keeps exact zeros out but nothing else).
  static TileField from_functions(std::span<const GridFunction> functions,
                                  const KernelSpec& kernel, const CutoffFunction& cutoff,
                                  const ScaleWindow& window, const QuadratureGrid& grid,
                                  int threads = 0, double drop_below = 0.0);

  // Seeded random field for property tests and adversarial probes.
  static TileField random(int proj_dim, ScaleWindow window, std::int64_t offset_range,
                          int count, std::uint64_t seed);

  // CSV with columns k, m_0..m_{m-1}, lambda, a.
  void write_csv(std::ostream& out) const;

 private:
  int proj_dim_;
  ScaleWindow window_;
  std::vector<Entry> entries_;
};

// Discrete dyadic maximal function: at each grid cell, the maximum over all
// complete dyadic index blocks containing that cell (side 1, 2, 4, ... cells,
// anchored at index 0) of the block average of |F|^m, to the power 1/m.
GridFunction maximal_function(const GridFunction& F, int m);

struct LoomisWhitneyRow {
  std::size_t entry = 0;
  double coefficient = 0.0;
  double product_of_mins = 0.0;
  double ratio = 0.0;
  bool violation = false;  // nonzero coefficient over a vanishing product
  bool clamped = false;    // some diagonal sample left the function box
};

struct LoomisWhitneyReport {
  std::vector<LoomisWhitneyRow> rows;
  double max_ratio = 0.0;        // the empirical constant
  std::size_t argmax_entry = 0;
  int violations = 0;
  int clamped_rows = 0;
};

// Ratio |a_I| / prod_i min over the sampled diagonal of M_m F_i, for every
// tile in the field. All functions must share one box and resolution; the
// diagonal of a tile is sampled at the grid points of I' with the last
// coordinate set to minus their sum. Out-of-box maximal-function queries are
// clamped to the nearest cell and flagged.
LoomisWhitneyReport loomis_whitney_diagnostic(const TileField& tiles,
                                              std::span<const GridFunction> functions,
                                              int m_exponent);

// Tree sum over the top J via the closed form: the indicator of J' replaces
// the sum over member tiles. Requires window.hi == top.scale.
double tree_sum(std::span<const GridFunction> functions, const KernelSpec& kernel,
                const CutoffFunction& cutoff, const Tile& top, const ScaleWindow& window,
                const QuadratureGrid& grid, int threads = 0);

// The same sum evaluated tile by tile (every I with I' inside J' at every
// scale of the window); the independent cross-check of tree_sum.
double tree_sum_tiles(std::span<const GridFunction> functions, const KernelSpec& kernel,
                      const CutoffFunction& cutoff, const Tile& top, const ScaleWindow& window,
                      const QuadratureGrid& grid, int threads = 0);

struct SingleTreeResult {
  ScaleWindow window{0, 0};  // the qualifying (or best) final window
  double tree_value = 0.0;
  double ratio = 0.0;  // |tree sum| / (2^{m s(J)} |S'|)
  bool met = false;    // ratio <= delta found within the cap
  std::vector<double> per_length_ratio;  // ratios for |S'| = 1..cap
};

// Scans final windows S' with max S' = s(J) and |S'| = 1..cap for the first
// one with |tree sum| <= delta 2^{m s(J)} |S'|. An experimental probe: the
// bound S_{delta,m} exists but has no constructive value.
SingleTreeResult single_tree_search(std::span<const GridFunction> functions,
                                    const KernelSpec& kernel, const CutoffFunction& cutoff,
                                    const Tile& top, double delta, int cap,
                                    const QuadratureGrid& grid, int threads = 0);

// min(window_len, s_delta) + delta * max(window_len - s_delta, 0).
double corollary_budget(int window_len, double delta, int s_delta);

struct SmallTilesResult {
  double linear_sum = 0.0;   // sum over |a_I| < delta of |a_I| 2^{mk}
  double alpha_moment = 0.0;  // sum over all tiles of |a_I|^alpha 2^{mk}
  double bound = 0.0;         // delta^{1-alpha} * alpha_moment
  bool inequality_ok = false;
};

SmallTilesResult small_tiles_sum(const TileField& tiles, double delta, double alpha);

struct SelectionResult {
  std::vector<std::size_t> tops;                // entry indices, selection order
  std::vector<std::vector<std::size_t>> trees;  // per top: member entry indices
  std::vector<std::size_t> residual;            // entry indices
  double residual_linear_total = 0.0;           // sum over residual |a| 2^{mk}
  std::vector<int> tree_sizes;
};

// Maximal cubes with |a_J| > delta under the order I' inside J'; every tile
// under some selected top joins that top's tree (tie-break: largest top
// scale, then lexicographically smallest top offsets), the rest form the
// residual.
SelectionResult select_trees(const TileField& tiles, double delta);

struct PartitionCheck {
  bool ok = false;
  std::string failure;  // empty when ok
};

// Brute-force validation of the selection invariants: exact partition, no
// above-threshold tile in the residual, tops pairwise incomparable, every
// above-threshold tile under some top.
PartitionCheck verify_selection_partition(const TileField& tiles, const SelectionResult& sel,
                                          double delta);

// True when the projection of (scale, offsets) is contained in the top's.
bool projection_contained(int scale, std::span<const std::int64_t> offsets, int top_scale,
                          std::span<const std::int64_t> top_offsets);

void write_selection_csv(const TileField& tiles, const SelectionResult& sel, std::ostream& out);

}  // namespace simplexlab
