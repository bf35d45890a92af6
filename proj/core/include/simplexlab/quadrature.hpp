#pragma once

#include <atomic>
#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <thread>
#include <vector>

#include "simplexlab/grid_function.hpp"

namespace simplexlab {

inline constexpr std::int64_t kDefaultPointBudget = std::int64_t(1) << 26;

// Midpoint lattice over a box in R^n with a point-count budget. Evaluation
// grids for the multilinear forms are built from this; resolutions are
// normally chosen as a power of two per unit length so dyadic tile
// boundaries align with cell boundaries.
class QuadratureGrid {
 public:
  QuadratureGrid(Box box, std::vector<int> resolution,
                 std::int64_t point_budget = kDefaultPointBudget)
      : box_(std::move(box)), res_(std::move(resolution)), budget_(point_budget) {
    if (box_.dim() == 0 || box_.dim() != static_cast<int>(res_.size())) {
      throw std::invalid_argument("QuadratureGrid: box/resolution mismatch");
    }
    total_ = 1;
    for (int a = 0; a < box_.dim(); ++a) {
      if (res_[a] < 1) throw std::invalid_argument("QuadratureGrid: resolution < 1");
      total_ *= res_[a];
      if (total_ > budget_) {
        throw std::runtime_error("QuadratureGrid: point budget exceeded");
      }
    }
  }

  int dim() const { return box_.dim(); }
  const Box& box() const { return box_; }
  const std::vector<int>& resolution() const { return res_; }
  std::int64_t total_points() const { return total_; }
  std::int64_t point_budget() const { return budget_; }
  double spacing(int axis) const { return box_.axes[axis].width() / res_[axis]; }
  double node(int axis, int i) const {
    return box_.axes[axis].lo + (i + 0.5) * spacing(axis);
  }
  double cell_volume() const {
    double v = 1.0;
    for (int a = 0; a < dim(); ++a) v *= spacing(a);
    return v;
  }

  // Restrict one axis to the index range [i_lo, i_hi); other axes unchanged.
  QuadratureGrid restrict_axis(int axis, int i_lo, int i_hi) const {
    if (i_lo < 0 || i_hi > res_[axis] || i_lo >= i_hi) {
      throw std::invalid_argument("QuadratureGrid: bad axis restriction");
    }
    Box b = box_;
    double h = spacing(axis);
    b.axes[axis].lo = box_.axes[axis].lo + i_lo * h;
    b.axes[axis].hi = box_.axes[axis].lo + i_hi * h;
    std::vector<int> r = res_;
    r[axis] = i_hi - i_lo;
    return QuadratureGrid(b, r, budget_);
  }

 private:
  Box box_;
  std::vector<int> res_;
  std::int64_t budget_ = kDefaultPointBudget;
  std::int64_t total_ = 0;
};

// Pairwise (binary-counter) accumulator. The summation tree depends only on
// the sequence of pushed values, never on timing.
class PairwiseAccumulator {
 public:
  void push(double v) {
    std::uint64_t c = ++count_;
    while ((c & 1) == 0) {
      v += stack_.back();
      stack_.pop_back();
      c >>= 1;
    }
    stack_.push_back(v);
  }
  double total() const {
    double t = 0.0;
    for (auto it = stack_.rbegin(); it != stack_.rend(); ++it) t += *it;
    return t;
  }

 private:
  std::vector<double> stack_;
  std::uint64_t count_ = 0;
};

namespace detail {

inline void unflatten(const QuadratureGrid& grid, std::int64_t flat, std::span<int> idx) {
  for (int a = grid.dim() - 1; a >= 0; --a) {
    int r = grid.resolution()[a];
    idx[a] = static_cast<int>(flat % r);
    flat /= r;
  }
}

inline int resolve_threads(int threads) {
  if (threads > 0) return threads;
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

inline constexpr std::int64_t kChunkPoints = 1 << 13;

// Runs fn(chunk_id, flat_begin, flat_end) over fixed-size chunks of the flat
// index range, possibly on several threads. Chunk boundaries are fixed, so a
// deterministic per-chunk result plus an in-order merge gives output that is
// independent of the worker count.
template <class ChunkFn>
void for_each_chunk(std::int64_t total, int threads, ChunkFn&& fn) {
  std::int64_t nchunks = (total + kChunkPoints - 1) / kChunkPoints;
  int nthreads = resolve_threads(threads);
  if (nthreads <= 1 || nchunks <= 1) {
    for (std::int64_t c = 0; c < nchunks; ++c) {
      fn(c, c * kChunkPoints, std::min(total, (c + 1) * kChunkPoints));
    }
    return;
  }
  std::atomic<std::int64_t> next{0};
  auto worker = [&] {
    for (;;) {
      std::int64_t c = next.fetch_add(1);
      if (c >= nchunks) return;
      fn(c, c * kChunkPoints, std::min(total, (c + 1) * kChunkPoints));
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(nthreads);
  for (int i = 0; i < nthreads; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
}

}  // namespace detail

// Midpoint-rule integral of fn over the grid box. fn receives the point
// coordinates. Summation is pairwise within fixed lexicographic chunks and
// chunk partials are combined in chunk order, so the result is bit-identical
// for every thread count.
template <class PointFn>
double integrate_pointwise(const QuadratureGrid& grid, PointFn&& fn, int threads = 0) {
  const int n = grid.dim();
  const std::int64_t total = grid.total_points();
  std::int64_t nchunks = (total + detail::kChunkPoints - 1) / detail::kChunkPoints;
  std::vector<double> partial(static_cast<std::size_t>(nchunks), 0.0);

  detail::for_each_chunk(total, threads, [&](std::int64_t c, std::int64_t b, std::int64_t e) {
    int idx[8];
    double pt[8];
    detail::unflatten(grid, b, std::span<int>(idx, n));
    for (int a = 0; a < n; ++a) pt[a] = grid.node(a, idx[a]);
    PairwiseAccumulator acc;
    for (std::int64_t i = b; i < e; ++i) {
      acc.push(fn(std::span<const double>(pt, n)));
      // advance the multi-index (last axis fastest)
      for (int a = n - 1; a >= 0; --a) {
        if (++idx[a] < grid.resolution()[a]) {
          pt[a] = grid.node(a, idx[a]);
          break;
        }
        idx[a] = 0;
        pt[a] = grid.node(a, 0);
      }
    }
    partial[static_cast<std::size_t>(c)] = acc.total();
  });

  PairwiseAccumulator out;
  for (double p : partial) out.push(p);
  return out.total() * grid.cell_volume();
}

template <class PointFn>
std::complex<double> integrate_pointwise_complex(const QuadratureGrid& grid, PointFn&& fn,
                                                 int threads = 0) {
  const int n = grid.dim();
  const std::int64_t total = grid.total_points();
  std::int64_t nchunks = (total + detail::kChunkPoints - 1) / detail::kChunkPoints;
  std::vector<std::complex<double>> partial(static_cast<std::size_t>(nchunks), 0.0);

  detail::for_each_chunk(total, threads, [&](std::int64_t c, std::int64_t b, std::int64_t e) {
    int idx[8];
    double pt[8];
    detail::unflatten(grid, b, std::span<int>(idx, n));
    for (int a = 0; a < n; ++a) pt[a] = grid.node(a, idx[a]);
    PairwiseAccumulator re, im;
    for (std::int64_t i = b; i < e; ++i) {
      std::complex<double> v = fn(std::span<const double>(pt, n));
      re.push(v.real());
      im.push(v.imag());
      for (int a = n - 1; a >= 0; --a) {
        if (++idx[a] < grid.resolution()[a]) {
          pt[a] = grid.node(a, idx[a]);
          break;
        }
        idx[a] = 0;
        pt[a] = grid.node(a, 0);
      }
    }
    partial[static_cast<std::size_t>(c)] = {re.total(), im.total()};
  });

  PairwiseAccumulator re, im;
  for (auto p : partial) {
    re.push(p.real());
    im.push(p.imag());
  }
  return std::complex<double>(re.total(), im.total()) * grid.cell_volume();
}

}  // namespace simplexlab
