#pragma once

#include <string_view>

#include <Eigen/Core>

namespace cnf {

/// min c^T d  s.t.  A_ub d <= b_ub,  A_eq d = b_eq,  d free.
struct LpProblem {
  Eigen::VectorXd c;
  Eigen::MatrixXd A_ub;
  Eigen::VectorXd b_ub;
  Eigen::MatrixXd A_eq;
  Eigen::VectorXd b_eq;

  /// Builds an LP with `vars` variables and no rows yet.
  static LpProblem with_vars(int vars);
  int num_vars() const { return static_cast<int>(c.size()); }
  /// Throws std::invalid_argument on inconsistent shapes or non-finite data.
  void validate() const;
};

enum class LpStatus { optimal, unbounded, infeasible };
std::string_view to_string(LpStatus s);

/// Duals follow c + A_ub^T lambda + A_eq^T mu = 0 with lambda >= 0, so that
/// the dual objective is -b_ub^T lambda - b_eq^T mu.
struct LpSolution {
  LpStatus status = LpStatus::infeasible;
  Eigen::VectorXd d;
  double objective = 0.0;
  Eigen::VectorXd dual_ub;
  Eigen::VectorXd dual_eq;
  /// Unbounded: a direction r with A_ub r <= 0, A_eq r = 0, c^T r < 0.
  Eigen::VectorXd ray;
  /// Infeasible: optimal phase-1 value (sum of artificials), positive.
  double phase1_value = 0.0;
  int iterations = 0;

  double dual_objective(const LpProblem& lp) const;
};

/// Dense two-phase primal simplex with Bland's rule. Throws std::logic_error
/// if the iteration guard is exceeded.
LpSolution solve_lp(const LpProblem& lp);

}  // namespace cnf
