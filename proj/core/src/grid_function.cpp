#include "simplexlab/grid_function.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "simplexlab/kernels.hpp"

namespace simplexlab {

double Box::volume() const {
  double v = 1.0;
  for (const auto& a : axes) v *= a.width();
  return v;
}

Box Box::cube(int dim, double lo, double hi) {
  Box b;
  b.axes.assign(dim, Interval{lo, hi});
  return b;
}

GridFunction::GridFunction(Box box, std::vector<int> resolution)
    : box_(std::move(box)), res_(std::move(resolution)) {
  if (box_.dim() == 0 || box_.dim() != static_cast<int>(res_.size())) {
    throw std::invalid_argument("GridFunction: box/resolution dimension mismatch");
  }
  std::int64_t total = 1;
  for (int a = 0; a < box_.dim(); ++a) {
    if (res_[a] < 2) throw std::invalid_argument("GridFunction: resolution must be >= 2 per axis");
    if (box_.axes[a].width() <= 0.0) throw std::invalid_argument("GridFunction: empty box axis");
    total *= res_[a];
  }
  samples_.assign(static_cast<std::size_t>(total), 0.0);
}

GridFunction GridFunction::from_generator(
    Box box, std::vector<int> resolution,
    const std::function<double(std::span<const double>)>& fn) {
  GridFunction g(std::move(box), std::move(resolution));
  const int m = g.dim();
  std::vector<int> idx(m, 0);
  std::vector<double> pt(m);
  for (std::int64_t flat = 0; flat < g.sample_count(); ++flat) {
    for (int a = 0; a < m; ++a) pt[a] = g.node(a, idx[a]);
    g.samples_[static_cast<std::size_t>(flat)] = fn(pt);
    for (int a = m - 1; a >= 0; --a) {
      if (++idx[a] < g.res_[a]) break;
      idx[a] = 0;
    }
  }
  return g;
}

double GridFunction::cell_volume() const {
  double v = 1.0;
  for (int a = 0; a < dim(); ++a) v *= spacing(a);
  return v;
}

std::int64_t GridFunction::flat_index(std::span<const int> index) const {
  std::int64_t flat = 0;
  for (int a = 0; a < dim(); ++a) {
    flat = flat * res_[a] + index[a];
  }
  return flat;
}

double GridFunction::operator()(std::span<const double> point) const {
  const int m = dim();
  int base[8];
  double frac[8];
  for (int a = 0; a < m; ++a) {
    const Interval& ax = box_.axes[a];
    double x = point[a];
    if (x < ax.lo || x > ax.hi) return 0.0;
    double u = (x - ax.lo) / spacing(a) - 0.5;
    double fl = std::floor(u);
    base[a] = static_cast<int>(fl);
    frac[a] = u - fl;
  }
  double value = 0.0;
  const int corners = 1 << m;
  for (int c = 0; c < corners; ++c) {
    double w = 1.0;
    std::int64_t flat = 0;
    bool inside = true;
    for (int a = 0; a < m; ++a) {
      int bit = (c >> a) & 1;
      int i = base[a] + bit;
      w *= bit ? frac[a] : (1.0 - frac[a]);
      if (i < 0 || i >= res_[a]) {
        inside = false;
        break;
      }
      flat = flat * res_[a] + i;
    }
    if (inside && w != 0.0) value += w * samples_[static_cast<std::size_t>(flat)];
  }
  return value;
}

double GridFunction::norm_p(double p) const {
  if (p == std::numeric_limits<double>::infinity()) return norm_inf();
  if (p <= 0.0) throw std::invalid_argument("norm_p: p must be positive");
  double acc = 0.0;
  for (double s : samples_) acc += std::pow(std::abs(s), p);
  return std::pow(acc * cell_volume(), 1.0 / p);
}

double GridFunction::norm_inf() const {
  double m = 0.0;
  for (double s : samples_) m = std::max(m, std::abs(s));
  return m;
}

GridFunction& GridFunction::scale(double factor) {
  for (double& s : samples_) s *= factor;
  return *this;
}

void GridFunction::write_csv(std::ostream& out) const {
  out << "# simplexlab-gridfunction v1\n";
  out << "# dim " << dim() << "\n";
  out << "# res";
  for (int r : res_) out << ' ' << r;
  out << "\n# box";
  out << std::setprecision(17);
  for (const auto& a : box_.axes) out << ' ' << a.lo << ' ' << a.hi;
  out << "\n";
  for (double s : samples_) out << s << "\n";
}

GridFunction GridFunction::read_csv(std::istream& in) {
  std::string line;
  auto expect_header = [&](const std::string& tag) -> std::istringstream {
    if (!std::getline(in, line)) throw std::runtime_error("gridfunction csv: truncated header");
    if (line.rfind(tag, 0) != 0) {
      throw std::runtime_error("gridfunction csv: expected '" + tag + "'");
    }
    return std::istringstream(line.substr(tag.size()));
  };
  expect_header("# simplexlab-gridfunction v1");
  int m = 0;
  expect_header("# dim") >> m;
  if (m < 1 || m > 8) throw std::runtime_error("gridfunction csv: bad dim");
  std::vector<int> res(m);
  {
    auto s = expect_header("# res");
    for (int& r : res) s >> r;
    if (!s) throw std::runtime_error("gridfunction csv: bad res");
  }
  Box box;
  {
    auto s = expect_header("# box");
    box.axes.resize(m);
    for (auto& a : box.axes) s >> a.lo >> a.hi;
    if (!s) throw std::runtime_error("gridfunction csv: bad box");
  }
  GridFunction g(box, res);
  for (std::int64_t i = 0; i < g.sample_count(); ++i) {
    if (!(in >> g.samples_[static_cast<std::size_t>(i)])) {
      throw std::runtime_error("gridfunction csv: truncated samples");
    }
  }
  return g;
}

void GridFunction::save_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  write_csv(out);
}

GridFunction GridFunction::load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  return read_csv(in);
}

namespace generators {

std::function<double(std::span<const double>)> gaussian(double a, std::vector<double> center) {
  return [a, center](std::span<const double> x) {
    double q = 0.0;
    for (std::size_t i = 0; i < center.size(); ++i) {
      double d = x[i] - center[i];
      q += d * d;
    }
    return std::exp(-a * q);
  };
}

std::function<double(std::span<const double>)> smooth_bump(double w, std::vector<double> center) {
  return [w, center](std::span<const double> x) {
    double v = 1.0;
    for (std::size_t i = 0; i < center.size(); ++i) {
      v *= plateau_bump((x[i] - center[i]) / w);
      if (v == 0.0) break;
    }
    return v;
  };
}

std::function<double(std::span<const double>)> box_indicator(Box support) {
  return [support](std::span<const double> x) {
    for (int a = 0; a < support.dim(); ++a) {
      if (x[a] < support.axes[a].lo || x[a] >= support.axes[a].hi) return 0.0;
    }
    return 1.0;
  };
}

}  // namespace generators

}  // namespace simplexlab
