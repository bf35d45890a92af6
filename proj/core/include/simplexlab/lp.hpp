#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

namespace simplexlab::lp {

enum class Status { optimal, infeasible, unbounded, iteration_limit };

struct Solution {
  Status status = Status::infeasible;
  double objective = 0.0;
  Eigen::VectorXd x;     // primal solution (standard-form variables)
  Eigen::VectorXd dual;  // y with B^T y = c_B at the final basis
  int pivots = 0;
};

// Dense two-phase simplex for min c^T x s.t. A x = b, x >= 0.
// Bland's rule (smallest index) everywhere, so the solve is deterministic
// and cannot cycle. Intended for the small dense programs of the atomic
// norm machinery, not for large-scale work.
Solution solve_standard_form(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                             const Eigen::VectorXd& c, int max_pivots = 200000,
                             double eps = 1e-9);

struct AtomicWitness {
  int atom = 0;        // column index into the dictionary
  double weight = 0.0;  // signed coefficient
};

struct AtomicNormSolution {
  bool feasible = false;      // false means the target is outside the span
  double value = 0.0;         // min sum |lambda|, +inf when infeasible
  std::vector<AtomicWitness> witness;
  Eigen::VectorXd dual;       // y with |atom_t . y| <= 1 and target . y = value
  int pivots = 0;
};

// min sum_t |lambda_t| subject to sum_t lambda_t atom_t = target.
// The dual vector is an optimizer of max target.y over {|atom_t . y| <= 1},
// extracted from the final simplex basis.
AtomicNormSolution atomic_norm_lp(const Eigen::MatrixXd& atoms, const Eigen::VectorXd& target,
                                  int max_pivots = 200000, double eps = 1e-9);

struct IneqSolution {
  Status status = Status::infeasible;
  double objective = 0.0;
  Eigen::VectorXd x;
};

// max c^T x subject to A x <= b with x free (b >= 0 is not required).
IneqSolution maximize_with_inequalities(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                                        const Eigen::VectorXd& c, int max_pivots = 200000,
                                        double eps = 1e-9);

}  // namespace simplexlab::lp
