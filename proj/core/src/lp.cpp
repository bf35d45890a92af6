#include "simplexlab/lp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace simplexlab::lp {

namespace {

struct Tableau {
  // T is (m+1) x (n+1): constraint rows [A | b] kept in basis-reduced form,
  // last row holds reduced costs and (negated) objective value.
  Eigen::MatrixXd T;
  std::vector<int> basis;
  int m = 0;
  int n = 0;

  void pivot(int row, int col) {
    T.row(row) /= T(row, col);
    for (int r = 0; r <= m; ++r) {
      if (r == row) continue;
      double f = T(r, col);
      if (f != 0.0) T.row(r) -= f * T.row(row);
    }
    basis[row] = col;
  }

  // Bland: entering = smallest column with negative reduced cost; leaving =
  // ratio test with smallest basis index on ties.
  Status iterate(int allowed_cols, int max_pivots, double eps, int& pivots) {
    for (;;) {
      int enter = -1;
      for (int j = 0; j < allowed_cols; ++j) {
        if (T(m, j) < -eps) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return Status::optimal;
      int leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (int r = 0; r < m; ++r) {
        if (T(r, enter) > eps) {
          double ratio = T(r, n) / T(r, enter);
          if (ratio < best - eps ||
              (ratio < best + eps && (leave < 0 || basis[r] < basis[leave]))) {
            best = ratio;
            leave = r;
          }
        }
      }
      if (leave < 0) return Status::unbounded;
      pivot(leave, enter);
      if (++pivots >= max_pivots) return Status::iteration_limit;
    }
  }
};

}  // namespace

Solution solve_standard_form(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                             const Eigen::VectorXd& c, int max_pivots, double eps) {
  const int m = static_cast<int>(A.rows());
  const int n = static_cast<int>(A.cols());
  if (b.size() != m || c.size() != n) {
    throw std::invalid_argument("solve_standard_form: dimension mismatch");
  }

  Solution sol;
  // Phase 1 tableau with artificial variables.
  Tableau tab;
  tab.m = m;
  tab.n = n + m;
  tab.T.setZero(m + 1, tab.n + 1);
  tab.T.block(0, 0, m, n) = A;
  tab.T.block(0, n, m, m).setIdentity();
  tab.T.col(tab.n).head(m) = b;
  for (int r = 0; r < m; ++r) {
    if (tab.T(r, tab.n) < 0.0) tab.T.row(r) = -tab.T.row(r);
  }
  tab.basis.resize(m);
  for (int r = 0; r < m; ++r) tab.basis[r] = n + r;
  // Phase-1 reduced costs: minimize the sum of artificials.
  for (int j = 0; j <= tab.n; ++j) {
    double s = 0.0;
    for (int r = 0; r < m; ++r) s += tab.T(r, j);
    tab.T(m, j) = (j >= n && j < tab.n ? 1.0 : 0.0) - s;
  }

  Status st = tab.iterate(tab.n, max_pivots, eps, sol.pivots);
  if (st == Status::iteration_limit) {
    sol.status = st;
    return sol;
  }
  double phase1 = -tab.T(m, tab.n);
  if (phase1 > 1e-7) {
    sol.status = Status::infeasible;
    return sol;
  }
  // Drive remaining artificials out of the basis where possible.
  for (int r = 0; r < m; ++r) {
    if (tab.basis[r] >= n) {
      int col = -1;
      for (int j = 0; j < n; ++j) {
        if (std::abs(tab.T(r, j)) > eps) {
          col = j;
          break;
        }
      }
      if (col >= 0) {
        tab.pivot(r, col);
        ++sol.pivots;
      }
      // If no pivot column exists the row is redundant; the artificial stays
      // basic at value ~0 and never re-enters (phase 2 scans originals only).
    }
  }

  // Phase 2: rebuild the cost row from the original objective.
  for (int j = 0; j <= tab.n; ++j) {
    double cj = j < n ? c(j) : 0.0;
    double s = 0.0;
    for (int r = 0; r < m; ++r) {
      int bc = tab.basis[r];
      double cb = bc < n ? c(bc) : 0.0;
      s += cb * tab.T(r, j);
    }
    tab.T(m, j) = cj - s;
  }
  tab.T(m, tab.n) = 0.0;
  {
    double obj = 0.0;
    for (int r = 0; r < m; ++r) {
      int bc = tab.basis[r];
      if (bc < n) obj += c(bc) * tab.T(r, tab.n);
    }
    tab.T(m, tab.n) = -obj;
  }

  st = tab.iterate(n, max_pivots, eps, sol.pivots);
  sol.status = st;
  if (st != Status::optimal) return sol;

  sol.x.setZero(n);
  for (int r = 0; r < m; ++r) {
    if (tab.basis[r] < n) sol.x(tab.basis[r]) = tab.T(r, tab.n);
  }
  sol.objective = c.dot(sol.x);

  // Dual from the final basis: solve B^T y = c_B against the *original*
  // (sign-normalized) system. Row sign flips must be undone on y.
  Eigen::VectorXd row_sign(m);
  for (int r = 0; r < m; ++r) {
    row_sign(r) = 1.0;
  }
  // Recover the sign normalization applied to b at setup.
  for (int r = 0; r < m; ++r) {
    if (b(r) < 0.0) row_sign(r) = -1.0;
  }
  Eigen::MatrixXd B(m, m);
  Eigen::VectorXd cb(m);
  for (int r = 0; r < m; ++r) {
    int j = tab.basis[r];
    if (j < n) {
      for (int i = 0; i < m; ++i) B(i, r) = row_sign(i) * A(i, j);
      cb(r) = c(j);
    } else {
      // artificial for (sign-normalized) row j-n
      B.col(r).setZero();
      B(j - n, r) = 1.0;
      cb(r) = 0.0;
    }
  }
  Eigen::VectorXd y = B.transpose().fullPivLu().solve(cb);
  for (int r = 0; r < m; ++r) y(r) *= row_sign(r);
  sol.dual = y;
  return sol;
}

AtomicNormSolution atomic_norm_lp(const Eigen::MatrixXd& atoms, const Eigen::VectorXd& target,
                                  int max_pivots, double eps) {
  const int n = static_cast<int>(atoms.rows());
  const int t = static_cast<int>(atoms.cols());
  if (target.size() != n) throw std::invalid_argument("atomic_norm_lp: dimension mismatch");
  if (t == 0) throw std::invalid_argument("atomic_norm_lp: empty dictionary");

  Eigen::MatrixXd A(n, 2 * t);
  A.leftCols(t) = atoms;
  A.rightCols(t) = -atoms;
  Eigen::VectorXd c = Eigen::VectorXd::Ones(2 * t);

  Solution sol = solve_standard_form(A, target, c, max_pivots, eps);
  AtomicNormSolution out;
  out.pivots = sol.pivots;
  if (sol.status == Status::infeasible) {
    out.feasible = false;
    out.value = std::numeric_limits<double>::infinity();
    return out;
  }
  if (sol.status != Status::optimal) {
    throw std::runtime_error("atomic_norm_lp: simplex did not converge");
  }
  out.feasible = true;
  out.value = sol.objective;
  for (int j = 0; j < t; ++j) {
    double w = sol.x(j) - sol.x(t + j);
    if (w != 0.0) out.witness.push_back({j, w});
  }
  out.dual = sol.dual;
  return out;
}

IneqSolution maximize_with_inequalities(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                                        const Eigen::VectorXd& c, int max_pivots, double eps) {
  const int m = static_cast<int>(A.rows());
  const int n = static_cast<int>(A.cols());
  if (b.size() != m || c.size() != n) {
    throw std::invalid_argument("maximize_with_inequalities: dimension mismatch");
  }
  // x = u - v with u, v >= 0; slack s >= 0: [A, -A, I][u;v;s] = b.
  Eigen::MatrixXd As(m, 2 * n + m);
  As.leftCols(n) = A;
  As.middleCols(n, n) = -A;
  As.rightCols(m).setIdentity();
  Eigen::VectorXd cs = Eigen::VectorXd::Zero(2 * n + m);
  cs.head(n) = -c;
  cs.segment(n, n) = c;

  Solution sol = solve_standard_form(As, b, cs, max_pivots, eps);
  IneqSolution out;
  out.status = sol.status;
  if (sol.status != Status::optimal) return out;
  out.x = sol.x.head(n) - sol.x.segment(n, n);
  out.objective = c.dot(out.x);
  return out;
}

}  // namespace simplexlab::lp
