#include "simplexlab/kernels.hpp"

#include <complex>
#include <map>
#include <mutex>
#include <stdexcept>

namespace simplexlab {

namespace {

double bump_piece(double s) { return s > 0.0 ? std::exp(-1.0 / s) : 0.0; }

// 16-point Gauss-Legendre nodes/weights on [-1, 1].
constexpr int kGlPoints = 16;
constexpr double kGlNode[kGlPoints] = {
    -0.9894009349916499, -0.9445750230732326, -0.8656312023878318,
    -0.7554044083550030, -0.6178762444026438, -0.4580167776572274,
    -0.2816035507792589, -0.0950125098376374, 0.0950125098376374,
    0.2816035507792589,  0.4580167776572274,  0.6178762444026438,
    0.7554044083550030,  0.8656312023878318,  0.9445750230732326,
    0.9894009349916499};
constexpr double kGlWeight[kGlPoints] = {
    0.0271524594117541, 0.0622535239386479, 0.0951585116824928,
    0.1246289712555339, 0.1495959888165767, 0.1691565193950025,
    0.1826034150449236, 0.1894506104550685, 0.1894506104550685,
    0.1826034150449236, 0.1691565193950025, 0.1495959888165767,
    0.1246289712555339, 0.0951585116824928, 0.0622535239386479,
    0.0271524594117541};

std::mutex& registry_mutex() {
  static std::mutex m;
  return m;
}

std::map<std::string, KernelSpec>& registry() {
  static std::map<std::string, KernelSpec> r = [] {
    std::map<std::string, KernelSpec> m;
    for (const auto& k : {KernelSpec::hilbert(), KernelSpec::even_homogeneous(),
                          KernelSpec::damped_sine()}) {
      m.emplace(k.name, k);
    }
    return m;
  }();
  return r;
}

}  // namespace

double smooth_step(double s) {
  if (s <= 1.0) return 0.0;
  if (s >= 2.0) return 1.0;
  double a = bump_piece(s - 1.0);
  double b = bump_piece(2.0 - s);
  return a / (a + b);
}

double plateau_bump(double t) { return 1.0 - smooth_step(std::abs(t)); }

CutoffFunction make_cutoff() { return CutoffFunction{}; }

KernelSpec KernelSpec::hilbert() {
  return KernelSpec{
      "hilbert",
      [](double t) { return 1.0 / t; },
      [](double t) { return -1.0 / (t * t); },
  };
}

KernelSpec KernelSpec::even_homogeneous() {
  return KernelSpec{
      "even",
      [](double t) { return 1.0 / std::abs(t); },
      [](double t) { return t > 0 ? -1.0 / (t * t) : 1.0 / (t * t); },
  };
}

KernelSpec KernelSpec::damped_sine() {
  return KernelSpec{
      "damped-sine",
      [](double t) { return std::sin(t) / (t * t); },
      [](double t) {
        return std::cos(t) / (t * t) - 2.0 * std::sin(t) / (t * t * t);
      },
  };
}

KernelSpec KernelSpec::scaled(double factor, const KernelSpec& base) {
  auto f = base.eval;
  auto fp = base.eval_deriv;
  return KernelSpec{
      base.name + "-x" + std::to_string(factor),
      [factor, f](double t) { return factor * f(t); },
      [factor, fp](double t) { return factor * fp(t); },
  };
}

KernelSpec KernelSpec::by_name(const std::string& name) {
  std::lock_guard<std::mutex> lock(registry_mutex());
  auto it = registry().find(name);
  if (it == registry().end()) {
    throw std::invalid_argument("unknown kernel: " + name);
  }
  return it->second;
}

void KernelSpec::register_kernel(const KernelSpec& spec) {
  std::lock_guard<std::mutex> lock(registry_mutex());
  registry()[spec.name] = spec;
}

std::vector<std::string> KernelSpec::registered_names() {
  std::lock_guard<std::mutex> lock(registry_mutex());
  std::vector<std::string> names;
  for (const auto& [name, spec] : registry()) names.push_back(name);
  return names;
}

ScaleWindow::ScaleWindow(int lo_, int hi_) : lo(lo_), hi(hi_) {
  if (lo > hi) throw std::invalid_argument("ScaleWindow: lo > hi");
}

double psi(const KernelSpec& kernel, const CutoffFunction& cutoff, int k, double t) {
  double c = cutoff(std::ldexp(t, -k));
  if (c == 0.0) return 0.0;
  return c * kernel.eval(t);
}

double psi_window(const KernelSpec& kernel, const CutoffFunction& cutoff,
                  const ScaleWindow& window, double t) {
  if (t == 0.0) return 0.0;
  // phi(2^-k t) != 0 requires 2^k <= |t| <= 2^(k+2).
  int e = std::ilogb(std::abs(t));
  int klo = std::max(window.lo, e - 2);
  int khi = std::min(window.hi, e + 1);
  double total = 0.0;
  for (int k = klo; k <= khi; ++k) {
    total += psi(kernel, cutoff, k, t);
  }
  return total;
}

double psi_l1_norm(const KernelSpec& kernel, const CutoffFunction& cutoff, int k) {
  // Integrate |phi(s) K(2^k s)| 2^k ds over s in [1, 4] and s in [-4, -1],
  // with fixed panels in s so the node set scales exactly with 2^k.
  constexpr int kPanels = 64;
  double total = 0.0;
  for (int sign = 0; sign < 2; ++sign) {
    double a = sign == 0 ? 1.0 : -4.0;
    double b = sign == 0 ? 4.0 : -1.0;
    double panel_width = (b - a) / kPanels;
    for (int p = 0; p < kPanels; ++p) {
      double mid = a + (p + 0.5) * panel_width;
      double half = 0.5 * panel_width;
      for (int q = 0; q < kGlPoints; ++q) {
        double s = mid + half * kGlNode[q];
        double c = cutoff(s);
        if (c == 0.0) continue;
        double t = std::ldexp(s, k);
        total += kGlWeight[q] * half * std::abs(c * kernel.eval(t)) *
                 std::ldexp(1.0, k);
      }
    }
  }
  return total;
}

CzReport verify_cz(const KernelSpec& kernel, const CutoffFunction& cutoff,
                   const ScaleWindow& window, int sample_count) {
  if (sample_count < 1) throw std::invalid_argument("verify_cz: sample_count < 1");
  CzReport report;

  double tmin = std::ldexp(1.0, window.lo);
  double tmax = std::ldexp(1.0, window.hi + 2);
  double log_lo = std::log(tmin);
  double log_hi = std::log(tmax);
  const double slack = 1.0 + 1e-12;
  for (int i = 0; i < sample_count; ++i) {
    double f = sample_count == 1 ? 0.5 : double(i) / (sample_count - 1);
    double t = std::exp(log_lo + f * (log_hi - log_lo));
    for (double sign : {1.0, -1.0}) {
      double ts = sign * t;
      double kr = std::abs(ts) * std::abs(kernel.eval(ts));
      double dr = ts * ts * std::abs(kernel.eval_deriv(ts));
      if (kr > report.max_kernel_ratio) {
        report.max_kernel_ratio = kr;
        report.argmax_kernel_t = ts;
      }
      if (dr > report.max_deriv_ratio) {
        report.max_deriv_ratio = dr;
        report.argmax_deriv_t = ts;
      }
      if (kr > slack) report.kernel_violations.push_back({ts, kr});
      if (dr > slack) report.deriv_violations.push_back({ts, dr});
    }
  }

  // Approximate sup of |psi_S^| by a discrete transform on a fine grid over
  // the support of psi_S. Convention: psi^(xi) = integral psi(t) e^{-i xi t} dt.
  {
    const int n = 1 << 14;
    double h = 2.0 * tmax / n;
    std::vector<double> ts, vs;
    ts.reserve(n);
    vs.reserve(n);
    for (int i = 0; i < n; ++i) {
      double t = -tmax + (i + 0.5) * h;
      double v = psi_window(kernel, cutoff, window, t);
      if (v != 0.0) {
        ts.push_back(t);
        vs.push_back(v);
      }
    }
    const int nfreq = 512;
    // Past the active band of every resolved scale, capped below Nyquist.
    double ximax = std::min(8.0 / tmin, 0.5 * 3.14159265358979323846 / h);
    for (int j = 0; j <= nfreq; ++j) {
      double xi = ximax * double(j) / nfreq;
      std::complex<double> acc(0.0, 0.0);
      for (std::size_t i = 0; i < ts.size(); ++i) {
        acc += vs[i] * std::exp(std::complex<double>(0.0, -xi * ts[i]));
      }
      double mag = std::abs(acc) * h;
      if (mag > report.fourier_sup) {
        report.fourier_sup = mag;
        report.fourier_arg_xi = xi;
      }
    }
    report.fourier_flagged = report.fourier_sup > report.fourier_tolerance;
  }
  return report;
}

}  // namespace simplexlab
