#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

#include "cnf/inner_solver.hpp"
#include "cnf/lagrangian.hpp"
#include "cnf/model.hpp"

namespace cnf {

struct AlpfConfig {
  double eps = 1e-6;
  double rho0 = 10.0;
  double growth = 100.0;  // N
  int max_outer = 50;
  InnerConfig inner;
  /// Defaults to the zero point.
  std::optional<Point> start;
  bool warm_start_inner = true;
  /// Midpoint pairs for the convexity heuristic on L at the KKT stop.
  int convexity_samples = 200;
  std::uint64_t seed = 0;
  /// Optional extra column reported per iterate (e.g. a relaxed 0-norm).
  std::function<double(const Point&)> surrogate;

  void validate() const;
};

enum class StopReason { kkt_stop, approx_stop, max_outer, inner_failure };
std::string_view to_string(StopReason r);
StopReason stop_reason_from_string(std::string_view s);
InnerStatus inner_status_from_string(std::string_view s);

struct IterationRecord {
  int k = 0;
  double rho = 0.0;
  Eigen::VectorXd x, y;
  /// Multipliers used in this iteration's inner solve.
  Eigen::VectorXd u, v;
  double A = 0.0;    // augmented value at the iterate
  double g = 0.0;    // lifted objective
  double e = 0.0;    // ||g+|| + ||h||
  double gap = 0.0;  // |A - g|
  InnerStatus inner_status = InnerStatus::converged;
  int inner_iterations = 0;
  std::optional<double> f;  // reference objective, when available
  int norm0 = 0;            // |x_i| > 1e-6 count
  std::optional<double> surrogate;

  Point point() const { return Point{x, y}; }
};

struct AlpfDiagnostics {
  /// ||eta grad g + sum alpha_i grad g_i + sum beta_j grad h_j|| with the
  /// normalized multipliers built from (u + 2 rho g+, v + 2 rho h).
  double normalized_kkt_residual = 0.0;
  /// Inequalities strictly inactive at the end (g_i < -1e-3) whose
  /// multiplier in the final solve exceeded 1e-6.
  std::vector<int> inactive_with_multiplier;
  /// Iterations k where e rose by more than 1e-6 over the previous one.
  std::vector<int> infeasibility_increases;
  bool heuristic_convex = false;
};

struct AlpfTrace {
  std::string solver;  // "alpf", "penalty" or "decomposed"
  std::vector<IterationRecord> records;
  StopReason status = StopReason::max_outer;
  /// Multipliers after the last update rule, (u + 2 rho g+, v + 2 rho h).
  Eigen::VectorXd u_bar, v_next;
  AlpfDiagnostics diagnostics;

  const IterationRecord& last() const;
};

/// Exact (bitwise-value) equality, used to check serialization round trips.
bool operator==(const IterationRecord& a, const IterationRecord& b);
bool operator==(const AlpfDiagnostics& a, const AlpfDiagnostics& b);
bool operator==(const AlpfTrace& a, const AlpfTrace& b);

/// Multiplier update: u_i + 2 rho g_i+ where g_i >= 0, else 0.
Eigen::VectorXd update_u(const Eigen::VectorXd& u, const Eigen::VectorXd& g, double rho);
/// v + 2 rho h.
Eigen::VectorXd update_v(const Eigen::VectorXd& v, const Eigen::VectorXd& h, double rho);
/// ||g+||_2 + ||h||_2.
double infeasibility(const Eigen::VectorXd& g, const Eigen::VectorXd& h);

AlpfTrace solve_alpf(const CnfProblem& prob, const AlpfConfig& cfg);
/// Pure penalty loop: multipliers stay zero, stop when e < eps.
AlpfTrace solve_penalty(const CnfProblem& prob, const AlpfConfig& cfg);

struct PartBlock {
  std::vector<int> x;  // 0-based indices into the x block
  std::vector<int> y;
};

/// Disjoint blocks covering all variables; every constraint references the
/// variables of exactly one block.
struct BlockPartition {
  std::vector<PartBlock> blocks;
  std::vector<int> ineq_block;  // owning block per g_i, -1 if constant
  std::vector<int> eq_block;

  /// Splits x into p contiguous chunks and attaches each y variable to the
  /// block whose x variables it shares a constraint with.
  static BlockPartition by_x_chunks(const CnfProblem& prob, int p);
  /// Throws std::invalid_argument on overlap, missing coverage or a
  /// constraint spanning blocks; fills ineq_block / eq_block.
  void assign_constraints(const CnfProblem& prob);
};

/// Gauss-Seidel sweeps over the blocks with penalty weight sigma/2 and
/// blockwise multiplier updates u += sigma g+, v += sigma h. Records report
/// rho = sigma/2. Uses cfg.rho0 as sigma_1 and cfg.growth as N; stops when
/// e < eps.
AlpfTrace solve_decomposed(const CnfProblem& prob, const BlockPartition& partition, const AlpfConfig& cfg);

// Serialization.
nlohmann::json to_json(const IterationRecord& r);
IterationRecord record_from_json(const nlohmann::json& j);
nlohmann::json to_json(const AlpfTrace& t);
AlpfTrace trace_from_json(const nlohmann::json& j);
/// One record per line followed by a summary line {"summary": ...}; keys of
/// `extra` are merged into the summary object.
std::string to_jsonl(const AlpfTrace& t, const nlohmann::json* extra = nullptr);
AlpfTrace trace_from_jsonl(std::string_view text);
/// Fixed-width table: k, rho_k, x^k, f(x^k), ||x^k||_0, e^k.
std::string to_table(const AlpfTrace& t);

}  // namespace cnf
