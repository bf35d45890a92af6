#pragma once

#include <Eigen/Dense>
#include <boost/multiprecision/cpp_int.hpp>
#include <complex>
#include <span>
#include <vector>

#include "simplexlab/grid_forms.hpp"
#include "simplexlab/grid_function.hpp"
#include "simplexlab/kernels.hpp"
#include "simplexlab/quadrature.hpp"

namespace simplexlab {

// Translation directions beta_0..beta_m in R^m together with the matrix
// B = [[1 ... 1], [beta_0 ... beta_m]] used by the change of variables.
struct BetaConfiguration {
  std::vector<Eigen::VectorXd> betas;
  Eigen::MatrixXd B;
  double det_b = 0.0;

  explicit BetaConfiguration(std::vector<Eigen::VectorXd> beta_vectors);
  int dim() const { return static_cast<int>(betas.size()) - 1; }
};

// Lambda_beta(F) = integral over x in R^m, t in R of prod_i F_i(x - beta_i t)
// psi_S(t). Grid axes 0..m-1 carry x, the last axis carries t.
double evaluate_beta_form(std::span<const GridFunction> functions, const KernelSpec& kernel,
                          const CutoffFunction& cutoff, const ScaleWindow& window,
                          const BetaConfiguration& betas, const QuadratureGrid& grid,
                          int threads = 0);

struct ComplexGridFunction {
  GridFunction re;
  GridFunction im;
  std::complex<double> operator()(std::span<const double> x) const {
    return {re(x), im(x)};
  }
};

std::complex<double> evaluate_beta_form_complex(std::span<const ComplexGridFunction> functions,
                                                const KernelSpec& kernel,
                                                const CutoffFunction& cutoff,
                                                const ScaleWindow& window,
                                                const BetaConfiguration& betas,
                                                const QuadratureGrid& grid, int threads = 0);

// Integration domain for the beta form: per x axis the intersection over i
// of F_i's box inflated by |beta_i| times the t range; the last axis covers
// the support of psi_S.
QuadratureGrid beta_domain_grid(std::span<const Box> function_boxes,
                                const BetaConfiguration& betas, const ScaleWindow& window,
                                int log2_ppu_x, int log2_ppu_t,
                                std::int64_t point_budget = kDefaultPointBudget);

struct TildeTransformResult {
  std::vector<GridFunction> functions;   // F~_i resampled on preimage boxes
  std::vector<double> submatrix_dets;    // det of each change-of-variables map
  double det_b = 0.0;
};

// F~_i(u) = F_i(pi_i B^-1 (0, u)) by multilinear interpolation on the
// source grid; the i-th map is the inverse-matrix submatrix whose
// determinant is +-(det B)^-1.
TildeTransformResult tilde_transform(std::span<const GridFunction> functions,
                                     const BetaConfiguration& betas);

struct ChangeOfVariablesReport {
  double direct_value = 0.0;      // Lambda_{psi_S}(F)
  double beta_value = 0.0;        // Lambda_beta(F~)
  double transported_value = 0.0; // |det B|^-1 Lambda_beta(F~)
  double abs_difference = 0.0;
  double relative_difference = 0.0;
};

ChangeOfVariablesReport verify_change_of_variables(std::span<const GridFunction> functions,
                                                   const KernelSpec& kernel,
                                                   const CutoffFunction& cutoff,
                                                   const ScaleWindow& window,
                                                   const BetaConfiguration& betas,
                                                   int log2_points_per_unit,
                                                   std::int64_t point_budget = kDefaultPointBudget,
                                                   int threads = 0);

// sum_{j=0}^{k} (-1)^{k-j} C(k,j) j^m in exact integer arithmetic;
// 0 for m < k and k! for m = k. Requires 0 <= m <= k <= 64.
boost::multiprecision::cpp_int binomial_identity(int k, int m);

// Inputs of the maximally modulated, linearized, truncated operator: the
// polynomial degree d, sampled linearizing functions N_1..N_d, the distinct
// nonzero speeds b_{d+1}..b_m, and the encoding parameter epsilon. The
// auxiliary cutoff is the plateau bump at scale 1/epsilon. Resolution knobs
// control the grids that build_modulated_encoding produces.
struct ModulationSetup {
  int degree = 0;                          // d
  std::vector<GridFunction> linearizers;   // N_1..N_d, one-dimensional
  std::vector<double> speeds;              // b_{d+1}..b_m
  double epsilon = 0.0;
  int log2_ppu_physical = 5;
  int log2_ppu_auxiliary = 4;

  ModulationSetup(int d, std::vector<GridFunction> n_functions, std::vector<double> b_speeds,
                  double eps);
  int order() const { return degree + static_cast<int>(speeds.size()); }  // m
};

// Total phase of the encoded function F_j at the point x (0-based axes;
// the physical coordinate of the paper x_{d+1} is axis degree).
double encoding_phase(const ModulationSetup& setup, int j, std::span<const double> x);

// C_{N_1..N_d}(f_{d+1},..,f_m) paired against g_0 ... g_d: quadrature of
//   int int prod g_j(x) e^{i sum_k N_k(x) t^k} prod f_j(x - b_j t)
//     psi_S(t) dt dx
// on a 2-D (x, t) grid. Complex valued; the imaginary part is genuinely
// informative here, unlike everywhere else in the library.
std::complex<double> evaluate_modulated_operator(const ModulationSetup& setup,
                                                 std::span<const GridFunction> g_functions,
                                                 std::span<const GridFunction> f_functions,
                                                 const KernelSpec& kernel,
                                                 const CutoffFunction& cutoff,
                                                 const ScaleWindow& window,
                                                 const QuadratureGrid& grid, int threads = 0);

struct ModulatedEncoding {
  std::vector<ComplexGridFunction> functions;  // F_0..F_m
  std::vector<Eigen::VectorXd> beta_vectors;
  double aux_overlap = 0.0;    // c0 = integral of the aux cutoff to the m+1
  double normalization = 0.0;  // (epsilon / c0)^(m-1)
  BetaConfiguration betas() const { return BetaConfiguration(beta_vectors); }
};

// Builds the encoded tuple F_0..F_m and the beta directions: beta_0 = 0,
// beta_j = e_j for j <= d, beta_{d+1} = b_{d+1} e_{d+1}, and
// beta_j = b_j e_{d+1} + epsilon e_j beyond. Every F_j carries the phase
// products with coefficients (-1)^j C(k,j)/k! N_k(x_{d+1}) (sum l x_l)^k and
// the auxiliary cutoff prod_{j' != d+1} bump(epsilon x_{j'}). The
// normalization factor makes Lambda_beta comparable to the direct pairing.
ModulatedEncoding build_modulated_encoding(const ModulationSetup& setup,
                                           std::span<const GridFunction> g_functions,
                                           std::span<const GridFunction> f_functions);

}  // namespace simplexlab
