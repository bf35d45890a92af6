#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

namespace simplexlab {

// One-dimensional Calderon-Zygmund kernel given by pointwise evaluators for
// K and K'. Evaluators are only called at t != 0. The size bounds
// |K(t)| <= |t|^-1 and |K'(t)| <= |t|^-2 are checked by verify_cz, not
// enforced at construction.
struct KernelSpec {
  std::string name;
  std::function<double(double)> eval;        // K(t), t != 0
  std::function<double(double)> eval_deriv;  // K'(t), t != 0

  // K(t) = 1/t.
  static KernelSpec hilbert();
  // K(t) = 1/|t| (even variant).
  static KernelSpec even_homogeneous();
  // K(t) = sin(t)/t^2. Satisfies the size bound but not the derivative
  // bound near |t| ~ 1; useful as a verify_cz probe.
  static KernelSpec damped_sine();
  // c * base, for constructing deliberate bound violations in tests.
  static KernelSpec scaled(double factor, const KernelSpec& base);

  static KernelSpec by_name(const std::string& name);
  static void register_kernel(const KernelSpec& spec);
  static std::vector<std::string> registered_names();
};

// Smooth transition: 0 for s <= 1, 1 for s >= 2, strictly increasing on
// (1, 2), built from b(s) = exp(-1/s).
double smooth_step(double s);

// Smooth even bump equal to 1 on [-1, 1], supported on [-2, 2].
double plateau_bump(double t);

// The dyadic cutoff phi(t) = smooth_step(|t|) - smooth_step(|t|/2): even,
// smooth away from 0, supported on +-[1, 4], and sum_k phi(2^-k t) = 1 for
// every t != 0 (the sum telescopes; at most two terms are nonzero).
class CutoffFunction {
 public:
  double operator()(double t) const {
    double a = std::abs(t);
    return smooth_step(a) - smooth_step(0.5 * a);
  }
  double inner_radius() const { return 1.0; }
  double outer_radius() const { return 4.0; }
};

CutoffFunction make_cutoff();

// An integer interval of dyadic scales retained in a truncation.
struct ScaleWindow {
  int lo;
  int hi;  // inclusive

  ScaleWindow(int lo_, int hi_);
  int length() const { return hi - lo + 1; }
};

// psi_k(t) = phi(2^-k t) K(t); vanishes unless 2^k <= |t| <= 2^(k+2).
// Returns 0 whenever the cutoff vanishes, without evaluating K (so t = 0 is
// safe).
double psi(const KernelSpec& kernel, const CutoffFunction& cutoff, int k, double t);

// psi_S(t) = sum_{k in S} psi_k(t); at most two scales contribute for any t.
double psi_window(const KernelSpec& kernel, const CutoffFunction& cutoff,
                  const ScaleWindow& window, double t);

// Quadrature of integral |psi_k| over both support intervals. The rule uses
// fixed Gauss-Legendre nodes in the rescaled variable s = 2^-k t, so for
// K(t) = 1/t the result is bitwise independent of k.
double psi_l1_norm(const KernelSpec& kernel, const CutoffFunction& cutoff, int k);

struct CzViolation {
  double t;
  double ratio;
};

// Report of the kernel size-bound checks and the (approximate) Fourier-side
// diagnostic for psi_S.
struct CzReport {
  double max_kernel_ratio = 0.0;       // sup sampled |t| |K(t)|
  double argmax_kernel_t = 0.0;
  double max_deriv_ratio = 0.0;        // sup sampled |t|^2 |K'(t)|
  double argmax_deriv_t = 0.0;
  std::vector<CzViolation> kernel_violations;  // ratio > 1 beyond roundoff
  std::vector<CzViolation> deriv_violations;
  double fourier_sup = 0.0;            // approximate sup_xi |psi_S^(xi)|
  double fourier_arg_xi = 0.0;
  double fourier_tolerance = 1.05;     // warning band; the bound itself is 1
  bool fourier_flagged = false;
  bool fourier_is_approximate = true;  // windowed discrete transform only
  bool pointwise_ok() const {
    return kernel_violations.empty() && deriv_violations.empty();
  }
};

// Samples |t||K| and |t|^2|K'| at sample_count log-spaced points per sign
// over the support range of psi_S, and estimates sup |psi_S^| by a discrete
// transform on a fine grid. Never throws on violations; it reports them.
CzReport verify_cz(const KernelSpec& kernel, const CutoffFunction& cutoff,
                   const ScaleWindow& window, int sample_count);

}  // namespace simplexlab
