#pragma once

#include <string_view>

#include <Eigen/Core>

#include "cnf/inner_solver.hpp"
#include "cnf/model.hpp"

namespace cnf {

/// v_free for L and A; v_nonneg for the restricted L+ and A+.
enum class SignMode { v_free, v_nonneg };

struct Multipliers {
  Eigen::VectorXd u;
  Eigen::VectorXd v;
  SignMode sign_mode = SignMode::v_free;

  static Multipliers zero(const CnfProblem& prob, SignMode mode = SignMode::v_free);
  /// Throws on wrong lengths, negative u, or negative v under v_nonneg.
  void validate(const CnfProblem& prob) const;
};

struct PenaltyParams {
  double rho = 1.0;
};

double lagrangian(const CnfProblem& prob, const Point& p, const Multipliers& mult);
Eigen::VectorXd lagrangian_gradient(const CnfProblem& prob, const Point& p, const Multipliers& mult);
double augmented(const CnfProblem& prob, const Point& p, const Multipliers& mult, PenaltyParams pen);
Eigen::VectorXd augmented_gradient(const CnfProblem& prob, const Point& p, const Multipliers& mult,
                                   PenaltyParams pen);
/// Pure penalty: the augmented function with zero multipliers.
double penalty(const CnfProblem& prob, const Point& p, PenaltyParams pen);

/// Unchecked evaluator on the stacked vector used by the solvers:
/// g + u^T g_ineq + v^T h + rho*sum (g_i^+)^2 + rho*sum h_j^2, with rho >= 0.
/// Writes the gradient when `grad` is non-null.
double augmented_eval(const CnfProblem& prob, const Eigen::VectorXd& z, const Eigen::VectorXd& u,
                      const Eigen::VectorXd& v, double rho, Eigen::VectorXd* grad);

/// Objective adaptor for the inner solver.
Objective augmented_objective(const CnfProblem& prob, Eigen::VectorXd u, Eigen::VectorXd v, double rho);

enum class DualStatus { value, unbounded_below, failure };
std::string_view to_string(DualStatus s);

struct DualResult {
  DualStatus status = DualStatus::failure;
  double value = 0.0;
  /// Minimizer found by the local inner solve; theta is only an upper bound
  /// on the infimum when L is nonconvex.
  Point argmin;
  bool local = true;
  InnerStatus inner_status = InnerStatus::max_iters;
};

/// theta(u, v) = min L(.; u, v), approximated by an inner solve from `start`.
DualResult dual_value(const CnfProblem& prob, const Multipliers& mult, const InnerConfig& cfg,
                      const Point& start);

}  // namespace cnf
