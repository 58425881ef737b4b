#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "cnf/expr.hpp"

namespace cnf {

/// Per-coordinate sampling box [lo, hi].
struct Box {
  double lo = -5.0;
  double hi = 5.0;
};

/// Maps x to a lifted y with (x, y) feasible for the form.
using LiftMap = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// Plain description of a convertible form; CnfProblem validates and freezes it.
struct CnfSpec {
  std::string name;
  int n = 0;
  int m = 0;
  Expr objective;
  std::vector<Expr> ineqs;  // g_i(x, y) <= 0
  std::vector<Expr> eqs;    // h_j(x, y) = 0
  std::optional<Expr> reference;
  bool exact = false;
  LiftMap lift;
  std::optional<Box> box;
};

/// A convertible nonconvex form f = [g : g_1..g_s ; h_1..h_r] over (x, y) in
/// R^n x R^m, optionally paired with the original objective f(x) and a lift
/// map. Immutable; copies share state.
class CnfProblem {
 public:
  explicit CnfProblem(CnfSpec spec);

  const std::string& name() const;
  int n() const;
  int m() const;
  int dim() const { return n() + m(); }
  int s() const;
  int r() const;

  const Expr& objective() const;
  std::span<const Expr> ineqs() const;
  std::span<const Expr> eqs() const;
  const std::optional<Expr>& reference() const;
  bool exact() const;
  bool has_lift() const;
  /// Declared sampling box, or the default [-5, 5].
  Box box() const;
  bool has_declared_box() const;

  Point lift(const Eigen::VectorXd& x) const;

  const Tape& objective_tape() const;
  std::span<const Tape> ineq_tapes() const;
  std::span<const Tape> eq_tapes() const;

  // Evaluation on the stacked vector z = (x, y).
  double objective_value(const Eigen::VectorXd& z) const;
  Eigen::VectorXd objective_gradient(const Eigen::VectorXd& z) const;
  Eigen::VectorXd ineq_values(const Eigen::VectorXd& z) const;
  Eigen::VectorXd eq_values(const Eigen::VectorXd& z) const;
  /// Row i is the gradient of g_i (resp. h_j).
  Eigen::MatrixXd ineq_jacobian(const Eigen::VectorXd& z) const;
  Eigen::MatrixXd eq_jacobian(const Eigen::VectorXd& z) const;
  double reference_value(const Eigen::VectorXd& x) const;

  /// Throws DimensionError unless p matches (n, m).
  void check_point(const Point& p) const;
  void check_stacked(const Eigen::VectorXd& z) const;

 private:
  struct Data;
  std::shared_ptr<const Data> data_;
};

struct FeasibilityReport {
  double max_ineq_violation = 0.0;
  double max_eq_residual = 0.0;
  bool in_xf = true;
  std::optional<double> exactness_gap;
};

/// max_i g_i^+(p) and max_j |h_j(p)| against `tol`, plus |g(p) - f(x)| when
/// the problem carries a reference objective.
FeasibilityReport check_feasible(const CnfProblem& prob, const Point& p, double tol);

/// Largest |g(x, lift(x)) - f(x)| over `samples` uniform draws of x in the
/// problem box. Requires a lift map and a reference objective.
double validate_exactness(const CnfProblem& prob, int samples, std::uint64_t seed);

/// Counts random pairs (p, q) in box^dim for which fn((p+q)/2) exceeds
/// (fn(p)+fn(q))/2 by more than the midpoint tolerance.
int count_midpoint_violations(const std::function<double(const Eigen::VectorXd&)>& fn, int dim,
                              const Box& box, int samples, std::uint64_t seed);

/// Midpoint-convexity sampling of every component g, g_i, h_j; returns the
/// number of violating pairs.
int sample_convexity(const CnfProblem& prob, int samples, std::uint64_t seed,
                     std::optional<Box> box = std::nullopt);

// Problem text format.
CnfProblem read_problem(std::istream& in);
CnfProblem read_problem_file(const std::string& path);
std::string write_problem(const CnfProblem& prob);

}  // namespace cnf
