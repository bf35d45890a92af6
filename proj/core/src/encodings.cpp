#include "simplexlab/encodings.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

namespace simplexlab {

namespace {

void check_beta_inputs(std::size_t function_count, const BetaConfiguration& betas) {
  if (static_cast<int>(function_count) != betas.dim() + 1) {
    throw std::invalid_argument("beta form: need m+1 functions");
  }
}

double snap_down(double x, double step) { return std::floor(x / step) * step; }
double snap_up(double x, double step) { return std::ceil(x / step) * step; }

}  // namespace

BetaConfiguration::BetaConfiguration(std::vector<Eigen::VectorXd> beta_vectors)
    : betas(std::move(beta_vectors)) {
  const int m = static_cast<int>(betas.size()) - 1;
  if (m < 1) throw std::invalid_argument("BetaConfiguration: need at least two directions");
  for (const auto& b : betas) {
    if (b.size() != m) throw std::invalid_argument("BetaConfiguration: directions must lie in R^m");
  }
  B.resize(m + 1, m + 1);
  for (int i = 0; i <= m; ++i) {
    B(0, i) = 1.0;
    for (int a = 0; a < m; ++a) B(a + 1, i) = betas[static_cast<std::size_t>(i)](a);
  }
  det_b = B.determinant();
  double scale = B.cwiseAbs().maxCoeff();
  double floor_scale = std::pow(std::max(scale, 1.0), m + 1);
  if (std::abs(det_b) <= 1e-12 * floor_scale) {
    throw std::invalid_argument("BetaConfiguration: directions are not in general position");
  }
}

double evaluate_beta_form(std::span<const GridFunction> functions, const KernelSpec& kernel,
                          const CutoffFunction& cutoff, const ScaleWindow& window,
                          const BetaConfiguration& betas, const QuadratureGrid& grid,
                          int threads) {
  check_beta_inputs(functions.size(), betas);
  const int m = betas.dim();
  if (grid.dim() != m + 1) throw std::invalid_argument("beta form: grid must be (m+1)-dimensional");
  for (const auto& f : functions) {
    if (f.dim() != m) throw std::invalid_argument("beta form: function dimension mismatch");
  }
  return integrate_pointwise(
      grid,
      [&](std::span<const double> pt) {
        double t = pt[m];
        double k = psi_window(kernel, cutoff, window, t);
        if (k == 0.0) return 0.0;
        double prod = 1.0;
        double arg[8];
        for (std::size_t i = 0; i < functions.size(); ++i) {
          const Eigen::VectorXd& b = betas.betas[i];
          for (int a = 0; a < m; ++a) arg[a] = pt[a] - b(a) * t;
          prod *= functions[i](std::span<const double>(arg, static_cast<std::size_t>(m)));
          if (prod == 0.0) return 0.0;
        }
        return prod * k;
      },
      threads);
}

std::complex<double> evaluate_beta_form_complex(std::span<const ComplexGridFunction> functions,
                                                const KernelSpec& kernel,
                                                const CutoffFunction& cutoff,
                                                const ScaleWindow& window,
                                                const BetaConfiguration& betas,
                                                const QuadratureGrid& grid, int threads) {
  check_beta_inputs(functions.size(), betas);
  const int m = betas.dim();
  if (grid.dim() != m + 1) throw std::invalid_argument("beta form: grid must be (m+1)-dimensional");
  return integrate_pointwise_complex(
      grid,
      [&](std::span<const double> pt) -> std::complex<double> {
        double t = pt[m];
        double k = psi_window(kernel, cutoff, window, t);
        if (k == 0.0) return {0.0, 0.0};
        std::complex<double> prod(1.0, 0.0);
        double arg[8];
        for (std::size_t i = 0; i < functions.size(); ++i) {
          const Eigen::VectorXd& b = betas.betas[i];
          for (int a = 0; a < m; ++a) arg[a] = pt[a] - b(a) * t;
          prod *= functions[i](std::span<const double>(arg, static_cast<std::size_t>(m)));
          if (prod == std::complex<double>(0.0, 0.0)) return prod;
        }
        return prod * k;
      },
      threads);
}

QuadratureGrid beta_domain_grid(std::span<const Box> function_boxes,
                                const BetaConfiguration& betas, const ScaleWindow& window,
                                int log2_ppu_x, int log2_ppu_t, std::int64_t point_budget) {
  const int m = betas.dim();
  if (static_cast<int>(function_boxes.size()) != m + 1) {
    throw std::invalid_argument("beta_domain_grid: need m+1 boxes");
  }
  double t_max = std::ldexp(1.0, window.hi + 2);
  Box box;
  box.axes.resize(m + 1);
  double step_x = std::ldexp(1.0, -log2_ppu_x);
  for (int a = 0; a < m; ++a) {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= m; ++i) {
      double speed = std::abs(betas.betas[static_cast<std::size_t>(i)](a));
      lo = std::max(lo, function_boxes[static_cast<std::size_t>(i)].axes[a].lo - speed * t_max);
      hi = std::min(hi, function_boxes[static_cast<std::size_t>(i)].axes[a].hi + speed * t_max);
    }
    if (!(lo < hi)) throw std::invalid_argument("beta_domain_grid: empty domain");
    box.axes[a] = {snap_down(lo, step_x), snap_up(hi, step_x)};
  }
  double step_t = std::ldexp(1.0, -log2_ppu_t);
  box.axes[m] = {snap_down(-t_max, step_t), snap_up(t_max, step_t)};

  std::vector<int> res(m + 1);
  for (int a = 0; a < m; ++a) {
    res[a] = static_cast<int>(std::llround(box.axes[a].width() / step_x));
  }
  res[m] = static_cast<int>(std::llround(box.axes[m].width() / step_t));
  return QuadratureGrid(box, res, point_budget);
}

TildeTransformResult tilde_transform(std::span<const GridFunction> functions,
                                     const BetaConfiguration& betas) {
  check_beta_inputs(functions.size(), betas);
  const int m = betas.dim();
  Eigen::MatrixXd inv = betas.B.inverse();

  TildeTransformResult out;
  out.det_b = betas.det_b;
  for (int i = 0; i <= m; ++i) {
    // Map u -> pi_i B^-1 (0, u): columns 1..m of B^-1 with row i removed.
    Eigen::MatrixXd map(m, m);
    int r = 0;
    for (int row = 0; row <= m; ++row) {
      if (row == i) continue;
      for (int col = 1; col <= m; ++col) map(r, col - 1) = inv(row, col);
      ++r;
    }
    out.submatrix_dets.push_back(map.determinant());
    Eigen::MatrixXd map_inv = map.inverse();

    const GridFunction& src = functions[static_cast<std::size_t>(i)];
    // Preimage box: bounding box of map^-1 (corners of the source box),
    // snapped outward to the finest source spacing.
    double h = src.spacing(0);
    for (int a = 1; a < m; ++a) h = std::min(h, src.spacing(a));
    Box target;
    target.axes.assign(static_cast<std::size_t>(m), Interval{0.0, 0.0});
    Eigen::VectorXd corner(m), pre(m);
    for (int a = 0; a < m; ++a) {
      target.axes[static_cast<std::size_t>(a)].lo = std::numeric_limits<double>::infinity();
      target.axes[static_cast<std::size_t>(a)].hi = -std::numeric_limits<double>::infinity();
    }
    for (int mask = 0; mask < (1 << m); ++mask) {
      for (int a = 0; a < m; ++a) {
        const Interval& ax = src.box().axes[a];
        corner(a) = (mask >> a) & 1 ? ax.hi : ax.lo;
      }
      pre = map_inv * corner;
      for (int a = 0; a < m; ++a) {
        auto& ax = target.axes[static_cast<std::size_t>(a)];
        ax.lo = std::min(ax.lo, pre(a));
        ax.hi = std::max(ax.hi, pre(a));
      }
    }
    std::vector<int> res(m);
    for (int a = 0; a < m; ++a) {
      auto& ax = target.axes[static_cast<std::size_t>(a)];
      ax.lo = snap_down(ax.lo, h);
      ax.hi = snap_up(ax.hi, h);
      res[a] = std::max(2, static_cast<int>(std::llround(ax.width() / h)));
    }
    Eigen::VectorXd u(m), x(m);
    out.functions.push_back(GridFunction::from_generator(
        target, res, [&](std::span<const double> upt) {
          for (int a = 0; a < m; ++a) u(a) = upt[a];
          x = map * u;
          double arg[8];
          for (int a = 0; a < m; ++a) arg[a] = x(a);
          return src(std::span<const double>(arg, static_cast<std::size_t>(m)));
        }));
  }
  return out;
}

ChangeOfVariablesReport verify_change_of_variables(std::span<const GridFunction> functions,
                                                   const KernelSpec& kernel,
                                                   const CutoffFunction& cutoff,
                                                   const ScaleWindow& window,
                                                   const BetaConfiguration& betas,
                                                   int log2_points_per_unit,
                                                   std::int64_t point_budget, int threads) {
  ChangeOfVariablesReport report;
  QuadratureGrid direct_grid = form_domain_grid(functions, log2_points_per_unit, point_budget);
  report.direct_value =
      evaluate_form(functions, kernel, cutoff, window, direct_grid, threads);

  TildeTransformResult tilde = tilde_transform(functions, betas);
  std::vector<Box> boxes;
  for (const auto& f : tilde.functions) boxes.push_back(f.box());
  QuadratureGrid beta_grid = beta_domain_grid(boxes, betas, window, log2_points_per_unit,
                                              log2_points_per_unit, point_budget);
  report.beta_value = evaluate_beta_form(tilde.functions, kernel, cutoff, window, betas,
                                         beta_grid, threads);
  report.transported_value = report.beta_value / std::abs(betas.det_b);
  report.abs_difference = std::abs(report.direct_value - report.transported_value);
  report.relative_difference =
      report.direct_value == 0.0
          ? (report.abs_difference == 0.0 ? 0.0 : std::numeric_limits<double>::infinity())
          : report.abs_difference / std::abs(report.direct_value);
  return report;
}

boost::multiprecision::cpp_int binomial_identity(int k, int m) {
  using boost::multiprecision::cpp_int;
  if (k < 0 || m < 0 || m > k || k > 64) {
    throw std::invalid_argument("binomial_identity: need 0 <= m <= k <= 64");
  }
  cpp_int total = 0;
  cpp_int binom = 1;  // C(k, j), updated incrementally
  for (int j = 0; j <= k; ++j) {
    cpp_int power = 1;
    for (int p = 0; p < m; ++p) power *= j;
    cpp_int term = binom * power;
    total += ((k - j) % 2 == 0) ? term : -term;
    binom = binom * (k - j) / (j + 1);
  }
  return total;
}

ModulationSetup::ModulationSetup(int d, std::vector<GridFunction> n_functions,
                                 std::vector<double> b_speeds, double eps)
    : degree(d), linearizers(std::move(n_functions)), speeds(std::move(b_speeds)), epsilon(eps) {
  if (degree < 0) throw std::invalid_argument("ModulationSetup: degree must be >= 0");
  if (static_cast<int>(linearizers.size()) != degree) {
    throw std::invalid_argument("ModulationSetup: need one linearizer per degree");
  }
  for (const auto& n : linearizers) {
    if (n.dim() != 1) throw std::invalid_argument("ModulationSetup: linearizers are 1-D");
  }
  if (speeds.empty()) throw std::invalid_argument("ModulationSetup: need at least one speed");
  if (epsilon <= 0.0) throw std::invalid_argument("ModulationSetup: epsilon must be positive");
  std::set<double> distinct(speeds.begin(), speeds.end());
  if (distinct.size() != speeds.size() || distinct.count(0.0) > 0) {
    throw std::invalid_argument("ModulationSetup: speeds must be distinct and nonzero");
  }
}

double encoding_phase(const ModulationSetup& setup, int j, std::span<const double> x) {
  if (j < 0 || j > setup.degree) return 0.0;
  const int d = setup.degree;
  double physical = x[static_cast<std::size_t>(d)];  // paper's x_{d+1}
  double total = 0.0;
  double sign = (j % 2 == 0) ? 1.0 : -1.0;
  for (int k = std::max(j, 1); k <= d; ++k) {
    double weighted = 0.0;
    for (int l = 1; l <= k; ++l) weighted += l * x[static_cast<std::size_t>(l - 1)];
    double factorial = 1.0, binom = 1.0;
    for (int p = 2; p <= k; ++p) factorial *= p;
    for (int p = 0; p < j; ++p) binom = binom * (k - p) / (p + 1);
    double n_value = setup.linearizers[static_cast<std::size_t>(k - 1)](
        std::span<const double>(&physical, 1));
    total += sign * (binom / factorial) * n_value * std::pow(weighted, k);
  }
  return total;
}

std::complex<double> evaluate_modulated_operator(const ModulationSetup& setup,
                                                 std::span<const GridFunction> g_functions,
                                                 std::span<const GridFunction> f_functions,
                                                 const KernelSpec& kernel,
                                                 const CutoffFunction& cutoff,
                                                 const ScaleWindow& window,
                                                 const QuadratureGrid& grid, int threads) {
  const int d = setup.degree;
  if (static_cast<int>(g_functions.size()) != d + 1) {
    throw std::invalid_argument("evaluate_modulated_operator: need d+1 outer functions");
  }
  if (g_functions.size() + f_functions.size() != static_cast<std::size_t>(setup.order()) + 1) {
    throw std::invalid_argument("evaluate_modulated_operator: function count mismatch");
  }
  if (grid.dim() != 2) {
    throw std::invalid_argument("evaluate_modulated_operator: grid must cover (x, t)");
  }
  for (const auto& g : g_functions) {
    if (g.dim() != 1) throw std::invalid_argument("evaluate_modulated_operator: 1-D inputs only");
  }
  for (const auto& f : f_functions) {
    if (f.dim() != 1) throw std::invalid_argument("evaluate_modulated_operator: 1-D inputs only");
  }

  return integrate_pointwise_complex(
      grid,
      [&](std::span<const double> pt) -> std::complex<double> {
        double x = pt[0];
        double t = pt[1];
        double k = psi_window(kernel, cutoff, window, t);
        if (k == 0.0) return {0.0, 0.0};
        double outer = 1.0;
        for (const auto& g : g_functions) {
          outer *= g(std::span<const double>(&x, 1));
          if (outer == 0.0) return {0.0, 0.0};
        }
        double inner = 1.0;
        for (std::size_t j = 0; j < f_functions.size(); ++j) {
          double shifted = x - setup.speeds[j] * t;
          inner *= f_functions[j](std::span<const double>(&shifted, 1));
          if (inner == 0.0) return {0.0, 0.0};
        }
        double phase = 0.0;
        double tpow = 1.0;
        for (int q = 1; q <= d; ++q) {
          tpow *= t;
          phase += setup.linearizers[static_cast<std::size_t>(q - 1)](
                       std::span<const double>(&x, 1)) *
                   tpow;
        }
        return std::complex<double>(std::cos(phase), std::sin(phase)) * (outer * inner * k);
      },
      threads);
}

ModulatedEncoding build_modulated_encoding(const ModulationSetup& setup,
                                           std::span<const GridFunction> g_functions,
                                           std::span<const GridFunction> f_functions) {
  const int d = setup.degree;
  const int m = setup.order();
  if (static_cast<int>(g_functions.size()) != d + 1 ||
      static_cast<int>(f_functions.size()) != m - d) {
    throw std::invalid_argument("build_modulated_encoding: function count mismatch");
  }

  ModulatedEncoding out;
  // beta_0 = 0; beta_j = e_j (j <= d); beta_{d+1} = b e_{d+1};
  // beta_j = b_j e_{d+1} + epsilon e_j beyond. Axis d carries the paper's
  // coordinate x_{d+1}.
  for (int j = 0; j <= m; ++j) {
    Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
    if (j >= 1 && j <= d) {
      b(j - 1) = 1.0;
    } else if (j == d + 1) {
      b(d) = setup.speeds[0];
    } else if (j >= d + 2) {
      b(d) = setup.speeds[static_cast<std::size_t>(j - d - 1)];
      b(j - 1) = setup.epsilon;
    }
    out.beta_vectors.push_back(std::move(b));
  }

  // Common physical box: the tightest box containing every g and f support.
  double phys_lo = std::numeric_limits<double>::infinity();
  double phys_hi = -std::numeric_limits<double>::infinity();
  auto widen = [&](const GridFunction& f) {
    phys_lo = std::min(phys_lo, f.box().axes[0].lo);
    phys_hi = std::max(phys_hi, f.box().axes[0].hi);
  };
  for (const auto& g : g_functions) widen(g);
  for (const auto& f : f_functions) widen(f);

  double step_phys = std::ldexp(1.0, -setup.log2_ppu_physical);
  double step_aux = std::ldexp(1.0, -setup.log2_ppu_auxiliary);
  double aux_half = 2.0 / setup.epsilon;  // support radius of bump(eps x)

  Box box;
  box.axes.assign(static_cast<std::size_t>(m), Interval{0.0, 0.0});
  std::vector<int> res(static_cast<std::size_t>(m));
  for (int a = 0; a < m; ++a) {
    if (a == d) {
      box.axes[static_cast<std::size_t>(a)] = {snap_down(phys_lo, step_phys),
                                               snap_up(phys_hi, step_phys)};
      res[static_cast<std::size_t>(a)] = static_cast<int>(
          std::llround(box.axes[static_cast<std::size_t>(a)].width() / step_phys));
    } else {
      box.axes[static_cast<std::size_t>(a)] = {snap_down(-aux_half, step_aux),
                                               snap_up(aux_half, step_aux)};
      res[static_cast<std::size_t>(a)] = static_cast<int>(
          std::llround(box.axes[static_cast<std::size_t>(a)].width() / step_aux));
    }
  }

  auto aux_cutoff = [&](std::span<const double> x) {
    double v = 1.0;
    for (int a = 0; a < m; ++a) {
      if (a == d) continue;
      v *= plateau_bump(setup.epsilon * x[static_cast<std::size_t>(a)]);
      if (v == 0.0) return 0.0;
    }
    return v;
  };

  for (int j = 0; j <= m; ++j) {
    const GridFunction* core = nullptr;
    if (j <= d) {
      core = &g_functions[static_cast<std::size_t>(j)];
    } else {
      core = &f_functions[static_cast<std::size_t>(j - d - 1)];
    }
    bool has_phase = j <= d && d >= 1;
    GridFunction re = GridFunction::from_generator(box, res, [&](std::span<const double> x) {
      double cut = aux_cutoff(x);
      if (cut == 0.0) return 0.0;
      double phys = x[static_cast<std::size_t>(d)];
      double base = (*core)(std::span<const double>(&phys, 1)) * cut;
      if (base == 0.0) return 0.0;
      return has_phase ? base * std::cos(encoding_phase(setup, j, x)) : base;
    });
    GridFunction im = GridFunction::from_generator(box, res, [&](std::span<const double> x) {
      if (!has_phase) return 0.0;
      double cut = aux_cutoff(x);
      if (cut == 0.0) return 0.0;
      double phys = x[static_cast<std::size_t>(d)];
      double base = (*core)(std::span<const double>(&phys, 1)) * cut;
      if (base == 0.0) return 0.0;
      return base * std::sin(encoding_phase(setup, j, x));
    });
    out.functions.push_back({std::move(re), std::move(im)});
  }

  // Aux-coordinate overlap: c0 = integral bump(y)^{m+1} dy, so the aux
  // integrals contribute (c0 / epsilon)^{m-1} at epsilon -> 0.
  {
    const int n = 1 << 12;
    double h = 4.0 / n;
    PairwiseAccumulator acc;
    for (int i = 0; i < n; ++i) {
      double y = -2.0 + (i + 0.5) * h;
      acc.push(std::pow(plateau_bump(y), m + 1));
    }
    out.aux_overlap = acc.total() * h;
  }
  out.normalization = std::pow(setup.epsilon / out.aux_overlap, m - 1);
  return out;
}

}  // namespace simplexlab
