#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace simplexlab {

using HilbertPoint = Eigen::VectorXd;

// Coordinates indexed by the tensor grid of a box X; the inner product is
// Euclidean weighted by the cell measure.
struct HilbertSpace {
  std::vector<int> dims;
  double cell_measure = 1.0;

  int coordinate_count() const {
    int n = 1;
    for (int d : dims) n *= d;
    return n;
  }
  double inner(const HilbertPoint& a, const HilbertPoint& b) const {
    return cell_measure * a.dot(b);
  }
  double norm(const HilbertPoint& a) const { return std::sqrt(inner(a, a)); }
};

// Dual-function dictionary: products prod_{A proper subset of {0..m-1}}
// f_A(x|_A) with every factor +-1 valued on its coordinate subgrid. Atoms
// are stored sign-canonically (first nonzero coordinate positive); the
// represented set is closed under negation, and every consumer treats it
// that way. When the raw pattern count exceeds the enumeration cap the
// dictionary stays implicit: dual_norm then uses alternating maximization
// and reports a lower bound, and atomic_norm is unavailable.
class AtomDictionary {
 public:
  static AtomDictionary dual_products(HilbertSpace space,
                                      std::uint64_t max_patterns = std::uint64_t(1) << 20);

  const HilbertSpace& space() const { return space_; }
  const std::string& descriptor() const { return descriptor_; }
  bool is_explicit() const { return explicit_; }
  int count() const { return static_cast<int>(atoms_.cols()); }
  const Eigen::MatrixXd& atoms() const { return atoms_; }
  Eigen::VectorXd atom(int i) const { return atoms_.col(i); }
  // Grid rank of the atom span; dual-ball machinery needs a spanning set.
  int span_rank() const { return span_rank_; }

  // Factor structure (proper subsets as coordinate index lists).
  const std::vector<std::vector<int>>& factor_subsets() const { return subsets_; }

 private:
  HilbertSpace space_;
  std::string descriptor_;
  bool explicit_ = false;
  Eigen::MatrixXd atoms_;
  int span_rank_ = 0;
  std::vector<std::vector<int>> subsets_;
};

struct AtomicNormResult {
  double value = 0.0;  // +inf when f is outside the span
  bool finite = false;
  std::map<int, double> witness;  // atom index -> signed coefficient
};

// Extended atomic seminorm: min sum |lambda_t| over representations
// f = sum lambda_t sigma_t, solved as a linear program. Infeasible -> +inf.
AtomicNormResult atomic_norm(const HilbertPoint& f, const AtomDictionary& atoms);

struct DualNormResult {
  double value = 0.0;
  int maximizer = -1;         // atom index when explicit
  bool is_lower_bound = false;  // true when found by alternating maximization
};

// sup over atoms of |<f, sigma>|; exhaustive on explicit dictionaries,
// alternating +-1 maximization with seeded restarts otherwise.
DualNormResult dual_norm(const HilbertPoint& f, const AtomDictionary& atoms,
                         std::uint64_t seed = 1, int restarts = 8);

struct DualityReport {
  double pairing_lhs = 0.0;   // max over sampled pairs of |<f,g>| - ||f||* ||g||
  bool pairing_ok = true;
  double bidual_value = 0.0;  // sup { <f,g> : ||g||* <= 1 } via LP
  double primal_value = 0.0;  // ||f||_Sigma via LP
  double bidual_error = 0.0;  // |bidual - primal|
  int pairs_checked = 0;
};

// Checks |<f,g>| <= ||f||*_Sigma ||g||_Sigma on seeded random g and the
// bidual identity ||f||** = ||f|| (both sides by LP).
DualityReport duality_check(const HilbertPoint& f, const AtomDictionary& atoms,
                            std::uint64_t seed = 1, int pairs = 16);

struct BallSpec {
  enum class Kind { atomic, dual, hilbert };
  Kind kind = Kind::hilbert;
  double scale = 1.0;  // the c_i in c_1 V_1 + ... + c_k V_k
};

struct BallCertificate {
  BallSpec ball;
  double support_value = 0.0;  // max over the ball of <v, phi>
  double threshold = 0.0;      // (1 + eps) / c_i
  bool ok = false;
};

struct SeparationResult {
  bool membership = false;  // f inside (1+eps)^-1 closure(V): no separator
  HilbertPoint phi;
  HilbertPoint nearest;  // g
  double distance = 0.0;  // ||f - g||_H
  double pairing = 0.0;   // <f, phi>
  std::vector<BallCertificate> certificates;
  int iterations = 0;
  double gap = 0.0;
};

// Constructive separation with an epsilon loss: projects f onto
// (1+eps)^-1 closure(sum c_i V_i) and returns phi = (f-g)/<f-g, f>. The
// certificates report the exact support value of every ball against phi
// (atom scan for the Sigma-ball, atomic-norm LP for the Sigma*-ball,
// radial value for the H-ball).
SeparationResult separate(const HilbertPoint& f, const AtomDictionary& atoms,
                          const std::vector<BallSpec>& balls, double eps,
                          int max_iterations = 100000, double gap_tol = 1e-8);

struct ConstantSchedule {
  int rounds = 0;                // r
  std::vector<double> values;    // C_r ... C_0, stored as values[i] = C_{r-i}
  double at(int i) const {       // C_i for i in [0, r]
    return values[static_cast<std::size_t>(rounds - i)];
  }
};

// C_r = 1, C_{i-1} = max(C_i, 2 / eta(C_i)).
ConstantSchedule constant_schedule(int rounds, const std::function<double(double)>& eta);

struct RegularityDecomposition {
  HilbertPoint sigma;
  HilbertPoint uniform;
  HilbertPoint small;
  double constant = 0.0;  // the C at which the split certified
  int steps_tried = 0;    // schedule entries consumed (starting from C_r)
  std::map<int, double> sigma_witness;   // atoms certificate, sum |coef| < C
  double sigma_witness_norm = 0.0;       // sum |coef|
  double uniform_dual_norm = 0.0;        // exact max over atoms
  double small_norm = 0.0;               // ||v||_H
};

// Decomposes f = sigma + u + v with ||sigma||_Sigma < C, ||u||*_Sigma <
// eta(C), ||v||_H < delta, walking the constant schedule from C_r = 1 and
// certifying the first feasible split. Requires ||f||_H <= 1.
RegularityDecomposition regularity_decompose(const HilbertPoint& f, const AtomDictionary& atoms,
                                             double delta,
                                             const std::function<double(double)>& eta,
                                             int max_iterations = 100000,
                                             double gap_tol = 1e-8);

struct PhiPairRow {
  int i = 0;
  int j = 0;
  double inner = 0.0;
};

struct PhiFamilyReport {
  std::vector<PhiPairRow> pairs;
  double max_abs_pair = 0.0;
  double pair_bound = 0.5;       // (1+eps)^2 / 2
  bool pairs_ok = true;
  double sum_norm_sq = 0.0;      // ||phi_1 + ... + phi_r||^2
  double sum_bound = 0.0;        // r (1+eps)^2 delta^-2 + (r^2 - r)(1+eps)^2/2
  bool sum_ok = true;
};

// Diagnostics for a family of separators phi_i produced along a failing run
// of the decomposition loop.
PhiFamilyReport phi_family_diagnostics(const std::vector<HilbertPoint>& phis,
                                       const HilbertSpace& space, const ConstantSchedule& schedule,
                                       double delta, double eps = 0.0);

// Seeded random point with ||f||_H = 1 (sign field scaled to unit norm).
HilbertPoint random_unit_sign_field(const HilbertSpace& space, std::uint64_t seed);

}  // namespace simplexlab
