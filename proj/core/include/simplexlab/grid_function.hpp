#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace simplexlab {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double width() const { return hi - lo; }
  bool operator==(const Interval&) const = default;
};

struct Box {
  std::vector<Interval> axes;
  int dim() const { return static_cast<int>(axes.size()); }
  double volume() const;
  static Box cube(int dim, double lo, double hi);
};

// A real-valued function sampled at the midpoints of a uniform tensor grid
// over an axis-aligned box. Samples are stored lexicographically with the
// last axis fastest. Evaluation between nodes is multilinear; queries whose
// nearest-node stencil leaves the grid see zero neighbors, so the function
// is treated as compactly supported within its box.
class GridFunction {
 public:
  GridFunction() = default;
  GridFunction(Box box, std::vector<int> resolution);

  static GridFunction from_generator(
      Box box, std::vector<int> resolution,
      const std::function<double(std::span<const double>)>& fn);

  int dim() const { return box_.dim(); }
  const Box& box() const { return box_; }
  const std::vector<int>& resolution() const { return res_; }
  std::int64_t sample_count() const { return static_cast<std::int64_t>(samples_.size()); }
  double spacing(int axis) const { return box_.axes[axis].width() / res_[axis]; }
  double cell_volume() const;
  // Midpoint coordinate of cell i along an axis.
  double node(int axis, int i) const {
    return box_.axes[axis].lo + (i + 0.5) * spacing(axis);
  }

  std::span<const double> samples() const { return samples_; }
  std::span<double> mutable_samples() { return samples_; }
  double sample_at(std::span<const int> index) const { return samples_[flat_index(index)]; }
  std::int64_t flat_index(std::span<const int> index) const;

  // Multilinear interpolation; zero outside the box.
  double operator()(std::span<const double> point) const;

  // Midpoint-rule p-norm over the box; p = infinity gives max |sample|.
  double norm_p(double p) const;
  double norm_inf() const;

  GridFunction& scale(double factor);

  // Text serialization: "# simplexlab-gridfunction v1" header with dim,
  // per-axis resolution and box bounds, then samples one per line.
  void write_csv(std::ostream& out) const;
  static GridFunction read_csv(std::istream& in);
  void save_csv(const std::string& path) const;
  static GridFunction load_csv(const std::string& path);

 private:
  Box box_;
  std::vector<int> res_;
  std::vector<double> samples_;
};

// Named generators used by experiment configs and tests.
namespace generators {

// exp(-a |x - c|^2)
std::function<double(std::span<const double>)> gaussian(double a, std::vector<double> center);
// Smooth plateau bump: product over axes of plateau_bump((x_a - c_a)/w).
// Equal to 1 within |x_a - c_a| <= w, zero outside |x_a - c_a| >= 2w.
std::function<double(std::span<const double>)> smooth_bump(double w, std::vector<double> center);
// Indicator of the half-open box [lo_a, hi_a).
std::function<double(std::span<const double>)> box_indicator(Box support);

}  // namespace generators

}  // namespace simplexlab
