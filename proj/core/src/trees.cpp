#include "simplexlab/trees.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <set>
#include <stdexcept>

#include "simplexlab/quadrature.hpp"
#include "simplexlab/rng.hpp"

namespace simplexlab {

namespace {

std::int64_t floor_div_pow2(std::int64_t v, int shift) {
  if (shift <= 0) return v;
  if (shift >= 63) return v < 0 ? -1 : 0;
  return v >> shift;  // arithmetic shift: floor division by 2^shift
}

bool entry_order(const TileField::Entry& a, const TileField::Entry& b) {
  if (a.scale != b.scale) return a.scale < b.scale;
  return a.offsets < b.offsets;
}

}  // namespace

bool projection_contained(int scale, std::span<const std::int64_t> offsets, int top_scale,
                          std::span<const std::int64_t> top_offsets) {
  if (scale > top_scale) return false;
  int shift = top_scale - scale;
  for (std::size_t a = 0; a < offsets.size(); ++a) {
    if (floor_div_pow2(offsets[a], shift) != top_offsets[a]) return false;
  }
  return true;
}

TileField::TileField(int proj_dim, ScaleWindow window)
    : proj_dim_(proj_dim), window_(window) {
  if (proj_dim < 1) throw std::invalid_argument("TileField: proj_dim must be >= 1");
}

void TileField::add(int scale, std::vector<std::int64_t> offsets, double lambda) {
  if (static_cast<int>(offsets.size()) != proj_dim_) {
    throw std::invalid_argument("TileField: offset arity mismatch");
  }
  if (scale < window_.lo || scale > window_.hi) {
    throw std::invalid_argument("TileField: scale outside the window");
  }
  Entry e;
  e.scale = scale;
  e.offsets = std::move(offsets);
  e.lambda = lambda;
  e.coefficient = std::ldexp(lambda, -scale * proj_dim_);
  entries_.push_back(std::move(e));
}

void TileField::finalize() {
  std::sort(entries_.begin(), entries_.end(), entry_order);
  for (std::size_t i = 1; i < entries_.size(); ++i) {
    if (entries_[i - 1].scale == entries_[i].scale &&
        entries_[i - 1].offsets == entries_[i].offsets) {
      throw std::invalid_argument("TileField: duplicate tile");
    }
  }
}

std::optional<std::size_t> TileField::find(int scale,
                                           std::span<const std::int64_t> offsets) const {
  Entry probe;
  probe.scale = scale;
  probe.offsets.assign(offsets.begin(), offsets.end());
  auto it = std::lower_bound(entries_.begin(), entries_.end(), probe, entry_order);
  if (it == entries_.end() || it->scale != scale ||
      !std::equal(it->offsets.begin(), it->offsets.end(), offsets.begin())) {
    return std::nullopt;
  }
  return static_cast<std::size_t>(it - entries_.begin());
}

Tile TileField::tile_of(std::size_t index) const {
  const Entry& e = entries_.at(index);
  Tile t = Tile::from_projection(
      e.scale, std::span<const std::int64_t>(e.offsets.data(), e.offsets.size()));
  t.set_value(e.lambda);
  return t;
}

TileField TileField::from_functions(std::span<const GridFunction> functions,
                                    const KernelSpec& kernel, const CutoffFunction& cutoff,
                                    const ScaleWindow& window, const QuadratureGrid& grid,
                                    int threads, double drop_below) {
  const int m = grid.dim() - 1;
  TileField field(m, window);
  for (int k = window.lo; k <= window.hi; ++k) {
    ScaleTileLattice lattice = tile_scale_sweep(functions, kernel, cutoff, k, grid, threads);
    for (std::int64_t r = 0; r < lattice.tile_count(); ++r) {
      double lambda = lattice.lambda[static_cast<std::size_t>(r)];
      if (std::abs(lambda) <= drop_below) continue;
      field.add(k, lattice.offsets_of(r), lambda);
    }
  }
  field.finalize();
  return field;
}

TileField TileField::random(int proj_dim, ScaleWindow window, std::int64_t offset_range,
                            int count, std::uint64_t seed) {
  TileField field(proj_dim, window);
  SplitMix64 rng(seed);
  std::set<std::pair<int, std::vector<std::int64_t>>> used;
  int attempts = 0;
  while (static_cast<int>(field.entries_.size()) < count && attempts < 64 * count) {
    ++attempts;
    int k = window.lo + static_cast<int>(rng.below(
                             static_cast<std::uint64_t>(window.length())));
    std::vector<std::int64_t> off(static_cast<std::size_t>(proj_dim));
    for (auto& o : off) {
      o = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(2 * offset_range + 1))) -
          offset_range;
    }
    if (!used.insert({k, off}).second) continue;
    // Mixed magnitudes so thresholds split the field nontrivially.
    double a = rng.uniform(-1.0, 1.0);
    if (rng.below(4) == 0) a *= 10.0;
    double lambda = std::ldexp(a, k * proj_dim);
    field.add(k, std::move(off), lambda);
  }
  field.finalize();
  return field;
}

void TileField::write_csv(std::ostream& out) const {
  out << "# simplexlab-tilefield v1\n";
  out << "# dim " << proj_dim_ << "\n";
  out << "k";
  for (int a = 0; a < proj_dim_; ++a) out << ",m" << a;
  out << ",lambda,a\n";
  out << std::setprecision(17);
  for (const Entry& e : entries_) {
    out << e.scale;
    for (auto o : e.offsets) out << ',' << o;
    out << ',' << e.lambda << ',' << e.coefficient << "\n";
  }
}

GridFunction maximal_function(const GridFunction& F, int m) {
  if (m < 1) throw std::invalid_argument("maximal_function: exponent must be >= 1");
  const int d = F.dim();
  const auto& res = F.resolution();

  // Prefix sums of |F|^m over the cell lattice (inclusive, flat layout).
  std::vector<double> prefix(F.samples().begin(), F.samples().end());
  for (auto& v : prefix) v = std::pow(std::abs(v), m);
  std::vector<std::int64_t> stride(static_cast<std::size_t>(d), 1);
  for (int a = d - 2; a >= 0; --a) {
    stride[static_cast<std::size_t>(a)] =
        stride[static_cast<std::size_t>(a + 1)] * res[a + 1];
  }
  std::int64_t total = F.sample_count();
  for (int a = 0; a < d; ++a) {
    for (std::int64_t i = 0; i < total; ++i) {
      std::int64_t idx_a = (i / stride[static_cast<std::size_t>(a)]) % res[a];
      if (idx_a > 0) {
        prefix[static_cast<std::size_t>(i)] +=
            prefix[static_cast<std::size_t>(i - stride[static_cast<std::size_t>(a)])];
      }
    }
  }
  // Block sum over [lo_a, hi_a) per axis via inclusion-exclusion.
  auto block_sum = [&](std::span<const int> lo, std::span<const int> hi) {
    double s = 0.0;
    for (int corner = 0; corner < (1 << d); ++corner) {
      std::int64_t flat = 0;
      int sign = 1;
      bool skip = false;
      for (int a = 0; a < d; ++a) {
        int edge;
        if ((corner >> a) & 1) {
          edge = lo[a] - 1;
          sign = -sign;
        } else {
          edge = hi[a] - 1;
        }
        if (edge < 0) {
          skip = true;
          break;
        }
        flat += stride[static_cast<std::size_t>(a)] * edge;
      }
      if (!skip) s += sign * prefix[static_cast<std::size_t>(flat)];
    }
    return s;
  };

  int min_res = res[0];
  for (int a = 1; a < d; ++a) min_res = std::min(min_res, res[a]);
  int max_scale = 0;
  while ((2 << max_scale) <= min_res) ++max_scale;

  GridFunction out(F.box(), res);
  std::vector<int> idx(static_cast<std::size_t>(d), 0);
  std::vector<int> lo(static_cast<std::size_t>(d)), hi(static_cast<std::size_t>(d));
  for (std::int64_t i = 0; i < total; ++i) {
    double best = 0.0;
    for (int j = 0; j <= max_scale; ++j) {
      bool complete = true;
      std::int64_t count = 1;
      for (int a = 0; a < d; ++a) {
        int b = idx[static_cast<std::size_t>(a)] >> j;
        lo[static_cast<std::size_t>(a)] = b << j;
        hi[static_cast<std::size_t>(a)] = (b + 1) << j;
        if (hi[static_cast<std::size_t>(a)] > res[a]) {
          complete = false;
          break;
        }
        count <<= j;
      }
      if (!complete) break;
      best = std::max(best, block_sum(lo, hi) / static_cast<double>(count));
    }
    out.mutable_samples()[static_cast<std::size_t>(i)] =
        std::pow(best, 1.0 / static_cast<double>(m));
    for (int a = d - 1; a >= 0; --a) {
      if (++idx[static_cast<std::size_t>(a)] < res[a]) break;
      idx[static_cast<std::size_t>(a)] = 0;
    }
  }
  return out;
}

LoomisWhitneyReport loomis_whitney_diagnostic(const TileField& tiles,
                                              std::span<const GridFunction> functions,
                                              int m_exponent) {
  const int m = tiles.proj_dim();
  if (static_cast<int>(functions.size()) != m + 1) {
    throw std::invalid_argument("loomis_whitney_diagnostic: need m+1 functions");
  }
  for (const auto& f : functions) {
    if (f.dim() != m || f.box().axes != functions[0].box().axes ||
        f.resolution() != functions[0].resolution()) {
      throw std::invalid_argument(
          "loomis_whitney_diagnostic: functions must share one grid");
    }
  }
  const GridFunction& ref = functions[0];

  std::vector<GridFunction> maximal;
  maximal.reserve(functions.size());
  for (const auto& f : functions) maximal.push_back(maximal_function(f, m_exponent));

  // Clamped sample of M at a point possibly outside the box.
  auto sample_clamped = [&](const GridFunction& M, std::span<const double> pt, bool& clamped) {
    double q[8];
    for (int a = 0; a < M.dim(); ++a) {
      const Interval& ax = M.box().axes[a];
      double h = M.spacing(a);
      double x = pt[a];
      if (x < ax.lo + 0.5 * h) {
        if (x < ax.lo) clamped = true;
        x = ax.lo + 0.5 * h;
      } else if (x > ax.hi - 0.5 * h) {
        if (x > ax.hi) clamped = true;
        x = ax.hi - 0.5 * h;
      }
      q[a] = x;
    }
    return M(std::span<const double>(q, static_cast<std::size_t>(M.dim())));
  };

  LoomisWhitneyReport report;
  const auto& entries = tiles.entries();
  for (std::size_t e = 0; e < entries.size(); ++e) {
    const auto& entry = entries[e];
    double side = std::ldexp(1.0, entry.scale);

    // Diagonal samples: grid midpoints of I' (at least the cell nearest the
    // tile center when the tile is below grid scale).
    std::vector<std::vector<double>> axis_nodes(static_cast<std::size_t>(m));
    for (int a = 0; a < m; ++a) {
      double cell_lo = entry.offsets[static_cast<std::size_t>(a)] * side;
      double cell_hi = cell_lo + side;
      const Interval& ax = ref.box().axes[a];
      double h = ref.spacing(a);
      for (int j = 0; j < ref.resolution()[a]; ++j) {
        double x = ax.lo + (j + 0.5) * h;
        if (x >= cell_lo && x < cell_hi) axis_nodes[static_cast<std::size_t>(a)].push_back(x);
      }
      if (axis_nodes[static_cast<std::size_t>(a)].empty()) {
        double center = cell_lo + 0.5 * side;
        double clamped_center = std::clamp(center, ax.lo + 0.5 * h, ax.hi - 0.5 * h);
        double j = std::round((clamped_center - ax.lo) / h - 0.5);
        axis_nodes[static_cast<std::size_t>(a)].push_back(ax.lo + (j + 0.5) * h);
      }
    }

    LoomisWhitneyRow row;
    row.entry = e;
    row.coefficient = entry.coefficient;
    row.product_of_mins = 1.0;
    bool clamped = false;

    for (int i = 0; i <= m; ++i) {
      double min_val = std::numeric_limits<double>::infinity();
      std::vector<std::size_t> pick(static_cast<std::size_t>(m), 0);
      for (;;) {
        double x[8];
        double sum = 0.0;
        for (int a = 0; a < m; ++a) {
          x[a] = axis_nodes[static_cast<std::size_t>(a)][pick[static_cast<std::size_t>(a)]];
          sum += x[a];
        }
        double diag_pt[8];
        for (int a = 0; a <= m; ++a) diag_pt[a] = a < m ? x[a] : -sum;
        double arg[8];
        int w = 0;
        for (int a = 0; a <= m; ++a) {
          if (a != i) arg[w++] = diag_pt[a];
        }
        min_val = std::min(min_val,
                           sample_clamped(maximal[static_cast<std::size_t>(i)],
                                          std::span<const double>(arg, static_cast<std::size_t>(m)),
                                          clamped));
        int a = m - 1;
        for (; a >= 0; --a) {
          if (++pick[static_cast<std::size_t>(a)] <
              axis_nodes[static_cast<std::size_t>(a)].size()) {
            break;
          }
          pick[static_cast<std::size_t>(a)] = 0;
        }
        if (a < 0) break;
      }
      row.product_of_mins *= min_val;
    }

    row.clamped = clamped;
    if (row.product_of_mins == 0.0) {
      if (entry.coefficient != 0.0) {
        row.violation = true;
        ++report.violations;
      }
      row.ratio = 0.0;
    } else {
      row.ratio = std::abs(entry.coefficient) / row.product_of_mins;
    }
    if (clamped) ++report.clamped_rows;
    if (row.ratio > report.max_ratio) {
      report.max_ratio = row.ratio;
      report.argmax_entry = e;
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

double tree_sum(std::span<const GridFunction> functions, const KernelSpec& kernel,
                const CutoffFunction& cutoff, const Tile& top, const ScaleWindow& window,
                const QuadratureGrid& grid, int threads) {
  if (window.hi != top.scale) {
    throw std::invalid_argument("tree_sum: window must end at the top scale");
  }
  const int m = grid.dim() - 1;
  auto sub = restrict_grid_to_projection(
      grid, top.scale, std::span<const std::int64_t>(top.offsets.data(), m));
  if (!sub) return 0.0;
  return evaluate_form(functions, kernel, cutoff, window, *sub, threads);
}

double tree_sum_tiles(std::span<const GridFunction> functions, const KernelSpec& kernel,
                      const CutoffFunction& cutoff, const Tile& top, const ScaleWindow& window,
                      const QuadratureGrid& grid, int threads) {
  if (window.hi != top.scale) {
    throw std::invalid_argument("tree_sum_tiles: window must end at the top scale");
  }
  const int m = grid.dim() - 1;
  PairwiseAccumulator acc;
  for (int k = window.lo; k <= window.hi; ++k) {
    int shift = top.scale - k;
    if (shift > 20) throw std::runtime_error("tree_sum_tiles: member enumeration too large");
    std::int64_t per_axis = std::int64_t(1) << shift;
    std::vector<std::int64_t> off(static_cast<std::size_t>(m));
    std::vector<std::int64_t> idx(static_cast<std::size_t>(m), 0);
    for (;;) {
      for (int a = 0; a < m; ++a) {
        off[static_cast<std::size_t>(a)] =
            top.offsets[static_cast<std::size_t>(a)] * per_axis + idx[static_cast<std::size_t>(a)];
      }
      Tile member = Tile::from_projection(k, off);
      acc.push(evaluate_tile(functions, kernel, cutoff, member, grid, threads));
      int a = m - 1;
      for (; a >= 0; --a) {
        if (++idx[static_cast<std::size_t>(a)] < per_axis) break;
        idx[static_cast<std::size_t>(a)] = 0;
      }
      if (a < 0) break;
    }
  }
  return acc.total();
}

SingleTreeResult single_tree_search(std::span<const GridFunction> functions,
                                    const KernelSpec& kernel, const CutoffFunction& cutoff,
                                    const Tile& top, double delta, int cap,
                                    const QuadratureGrid& grid, int threads) {
  if (cap < 1) throw std::invalid_argument("single_tree_search: cap must be >= 1");
  const int m = grid.dim() - 1;
  const int s = top.scale;
  double top_volume = std::ldexp(1.0, m * s);

  // Per-scale closed-form tree values, computed once.
  std::vector<double> scale_value(static_cast<std::size_t>(cap), 0.0);
  auto sub = restrict_grid_to_projection(
      grid, s, std::span<const std::int64_t>(top.offsets.data(), m));
  if (sub) {
    for (int len = 1; len <= cap; ++len) {
      int k = s - len + 1;
      scale_value[static_cast<std::size_t>(len - 1)] =
          evaluate_form(functions, kernel, cutoff, ScaleWindow(k, k), *sub, threads);
    }
  }

  SingleTreeResult best;
  best.ratio = std::numeric_limits<double>::infinity();
  double partial = 0.0;
  for (int len = 1; len <= cap; ++len) {
    partial += scale_value[static_cast<std::size_t>(len - 1)];
    double ratio = std::abs(partial) / (top_volume * len);
    best.per_length_ratio.push_back(ratio);
    if (ratio <= delta) {
      best.window = ScaleWindow(s - len + 1, s);
      best.tree_value = partial;
      best.ratio = ratio;
      best.met = true;
      return best;
    }
    if (ratio < best.ratio) {
      best.window = ScaleWindow(s - len + 1, s);
      best.tree_value = partial;
      best.ratio = ratio;
    }
  }
  best.met = false;
  return best;
}

double corollary_budget(int window_len, double delta, int s_delta) {
  if (window_len < 0 || s_delta < 0 || delta < 0.0) {
    throw std::invalid_argument("corollary_budget: arguments must be nonnegative");
  }
  double len = static_cast<double>(window_len);
  double cap = static_cast<double>(s_delta);
  return std::min(len, cap) + delta * std::max(len - cap, 0.0);
}

SmallTilesResult small_tiles_sum(const TileField& tiles, double delta, double alpha) {
  if (alpha < 0.0 || alpha > 1.0) {
    throw std::invalid_argument("small_tiles_sum: alpha must lie in [0, 1]");
  }
  SmallTilesResult out;
  const int m = tiles.proj_dim();
  PairwiseAccumulator linear, moment;
  for (const auto& e : tiles.entries()) {
    double weight = std::ldexp(1.0, m * e.scale);
    double mag = std::abs(e.coefficient);
    if (mag < delta) linear.push(mag * weight);
    moment.push(std::pow(mag, alpha) * weight);
  }
  out.linear_sum = linear.total();
  out.alpha_moment = moment.total();
  out.bound = std::pow(delta, 1.0 - alpha) * out.alpha_moment;
  out.inequality_ok = out.linear_sum <= out.bound * (1.0 + 1e-12) + 1e-300;
  return out;
}

SelectionResult select_trees(const TileField& tiles, double delta) {
  if (delta <= 0.0) throw std::invalid_argument("select_trees: delta must be positive");
  const auto& entries = tiles.entries();

  // Candidates above threshold, scanned from the coarsest scale down so a
  // candidate is maximal exactly when no accepted top contains it.
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (std::abs(entries[i].coefficient) > delta) candidates.push_back(i);
  }
  std::sort(candidates.begin(), candidates.end(), [&](std::size_t a, std::size_t b) {
    if (entries[a].scale != entries[b].scale) return entries[a].scale > entries[b].scale;
    return entries[a].offsets < entries[b].offsets;
  });

  SelectionResult sel;
  for (std::size_t c : candidates) {
    bool under = false;
    for (std::size_t t : sel.tops) {
      if (projection_contained(entries[c].scale, entries[c].offsets, entries[t].scale,
                               entries[t].offsets)) {
        under = true;
        break;
      }
    }
    if (!under) sel.tops.push_back(c);
  }

  sel.trees.assign(sel.tops.size(), {});
  PairwiseAccumulator residual_total;
  const int m = tiles.proj_dim();
  for (std::size_t i = 0; i < entries.size(); ++i) {
    int chosen = -1;
    for (std::size_t t = 0; t < sel.tops.size(); ++t) {
      const auto& top = entries[sel.tops[t]];
      if (!projection_contained(entries[i].scale, entries[i].offsets, top.scale, top.offsets)) {
        continue;
      }
      if (chosen < 0) {
        chosen = static_cast<int>(t);
        continue;
      }
      const auto& cur = entries[sel.tops[static_cast<std::size_t>(chosen)]];
      if (top.scale > cur.scale || (top.scale == cur.scale && top.offsets < cur.offsets)) {
        chosen = static_cast<int>(t);
      }
    }
    if (chosen >= 0) {
      sel.trees[static_cast<std::size_t>(chosen)].push_back(i);
    } else {
      sel.residual.push_back(i);
      residual_total.push(std::abs(entries[i].coefficient) * std::ldexp(1.0, m * entries[i].scale));
    }
  }
  sel.residual_linear_total = residual_total.total();
  for (const auto& tree : sel.trees) sel.tree_sizes.push_back(static_cast<int>(tree.size()));
  return sel;
}

PartitionCheck verify_selection_partition(const TileField& tiles, const SelectionResult& sel,
                                          double delta) {
  const auto& entries = tiles.entries();
  std::vector<int> hits(entries.size(), 0);
  for (const auto& tree : sel.trees) {
    for (std::size_t i : tree) ++hits[i];
  }
  for (std::size_t i : sel.residual) ++hits[i];
  for (std::size_t i = 0; i < hits.size(); ++i) {
    if (hits[i] != 1) return {false, "tile not covered exactly once"};
  }
  for (std::size_t i : sel.residual) {
    if (std::abs(entries[i].coefficient) > delta) {
      return {false, "above-threshold tile in the residual"};
    }
  }
  for (std::size_t a = 0; a < sel.tops.size(); ++a) {
    for (std::size_t b = 0; b < sel.tops.size(); ++b) {
      if (a == b) continue;
      const auto& ta = entries[sel.tops[a]];
      const auto& tb = entries[sel.tops[b]];
      if (projection_contained(ta.scale, ta.offsets, tb.scale, tb.offsets)) {
        return {false, "selected tops are comparable"};
      }
    }
  }
  // Every above-threshold tile must sit under some selected top.
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (std::abs(entries[i].coefficient) <= delta) continue;
    bool under = false;
    for (std::size_t t : sel.tops) {
      if (projection_contained(entries[i].scale, entries[i].offsets, entries[t].scale,
                               entries[t].offsets)) {
        under = true;
        break;
      }
    }
    if (!under) return {false, "above-threshold tile outside every tree"};
  }
  // Tree membership must match containment in the assigned top.
  for (std::size_t t = 0; t < sel.tops.size(); ++t) {
    const auto& top = entries[sel.tops[t]];
    for (std::size_t i : sel.trees[t]) {
      if (!projection_contained(entries[i].scale, entries[i].offsets, top.scale, top.offsets)) {
        return {false, "tree member outside its top"};
      }
    }
  }
  return {true, ""};
}

void write_selection_csv(const TileField& tiles, const SelectionResult& sel, std::ostream& out) {
  out << "# simplexlab-selection v1\n";
  out << "# dim " << tiles.proj_dim() << "\n";
  const auto& entries = tiles.entries();
  for (std::size_t t = 0; t < sel.tops.size(); ++t) {
    const auto& top = entries[sel.tops[t]];
    out << "# top " << t << " k " << top.scale << " offsets";
    for (auto o : top.offsets) out << ' ' << o;
    out << "\n";
  }
  out << "k";
  for (int a = 0; a < tiles.proj_dim(); ++a) out << ",m" << a;
  out << ",lambda,a,class\n";
  out << std::setprecision(17);
  std::vector<std::string> label(entries.size(), "residual");
  for (std::size_t t = 0; t < sel.trees.size(); ++t) {
    for (std::size_t i : sel.trees[t]) label[i] = std::to_string(t);
  }
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    out << e.scale;
    for (auto o : e.offsets) out << ',' << o;
    out << ',' << e.lambda << ',' << e.coefficient << ',' << label[i] << "\n";
  }
}

}  // namespace simplexlab
