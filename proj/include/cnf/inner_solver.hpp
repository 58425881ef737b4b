#pragma once

#include <functional>
#include <string_view>

#include <Eigen/Core>

namespace cnf {

enum class InnerMethod { gradient_descent, newton_fd };

/// converged: gradient test passed. stalled: the line search could not make
/// progress before the gradient test passed (rounding floor).
enum class InnerStatus { converged, max_iters, diverged, stalled };

std::string_view to_string(InnerMethod m);
std::string_view to_string(InnerStatus s);

/// One accepted step, reported to InnerConfig::on_step.
struct StepInfo {
  int iteration;
  double value_before;
  double value_after;
  double step;                   // accepted t
  double directional_derivative; // grad^T d at the old point
  bool fallback;                 // newton_fd used steepest descent
};

struct InnerConfig {
  InnerMethod method = InnerMethod::gradient_descent;
  double grad_tol = 1e-8;
  int max_iters = 10000;
  double armijo_c = 1e-4;
  double backtrack = 0.5;
  double initial_step = 1.0;
  double value_floor = -1e12;
  double point_norm_cap = 1e8;
  double fd_step = 1e-5;
  std::function<void(const StepInfo&)> on_step;

  void validate() const;
};

/// Smooth objective over a stacked vector. `value_grad` writes the gradient
/// and returns the value.
struct Objective {
  std::function<double(const Eigen::VectorXd&)> value;
  std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)> value_grad;
};

struct InnerResult {
  Eigen::VectorXd z;
  double value = 0.0;
  double grad_norm = 0.0;
  InnerStatus status = InnerStatus::max_iters;
  int iterations = 0;
  /// grad_tol after scaling by max(1, |value at start|).
  double tolerance = 0.0;
};

InnerResult minimize(const Objective& objective, const Eigen::VectorXd& start, const InnerConfig& cfg);

}  // namespace cnf
