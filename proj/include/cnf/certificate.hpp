#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

#include "cnf/lagrangian.hpp"
#include "cnf/lp.hpp"
#include "cnf/model.hpp"

namespace cnf {

/// cnp_ineq linearizes equalities one-sidedly (grad h^T d <= 0) and yields
/// v >= 0; cnp0_eq keeps them as equalities and yields free v.
enum class LpVariant { cnp_ineq, cnp0_eq };
enum class Verdict { certified_global, kkt_point, inconclusive };

std::string_view to_string(LpVariant v);
std::string_view to_string(Verdict v);

struct LpTest {
  LpVariant variant = LpVariant::cnp_ineq;
  LpStatus status = LpStatus::infeasible;
  double objective = 0.0;
  /// Optimal: the LP duals read as KKT multipliers.
  Eigen::VectorXd u;
  Eigen::VectorXd v;
  /// Optimal: the LP minimizer. Unbounded: a first-order descent ray.
  Eigen::VectorXd direction;
  /// Optimal with objective >= -1e-8.
  bool passed = false;
};

struct KktReport {
  Eigen::VectorXd u;
  Eigen::VectorXd v;
  double stationarity = 0.0;   // ||grad g + J_g^T u + J_h^T v||
  double complementarity = 0.0;  // max_i |u_i g_i|
  double sign_violation = 0.0;   // most negative u_i (and v_j for cnp_ineq), as a magnitude
  double max_residual() const;
};

struct Certificate {
  Point point;
  FeasibilityReport feasibility;
  double grad_norm_of_g = 0.0;
  std::optional<LpTest> lp_test;
  std::optional<KktReport> kkt;
  Verdict verdict = Verdict::inconclusive;
};

struct CertifyOptions {
  double feas_tol = 1e-6;
  double grad_tol = 1e-8;
  double lp_tol = 1e-8;
  double kkt_tol = 1e-6;
};

/// Builds the linearized direction LP at p:
///   min grad g^T d  s.t.  g_i + grad g_i^T d <= 0,  grad h_j^T d <= 0 (or = 0).
LpProblem certificate_lp(const CnfProblem& prob, const Point& p, LpVariant variant);

/// Runs the certificate LP. Throws std::invalid_argument when p is not
/// feasible within `feas_tol`, std::logic_error if the LP is infeasible.
LpTest lp_test_ineq(const CnfProblem& prob, const Point& p, double feas_tol = 1e-6);
LpTest lp_test_eq(const CnfProblem& prob, const Point& p, double feas_tol = 1e-6);

KktReport kkt_residual(const CnfProblem& prob, const Point& p, const Eigen::VectorXd& u,
                       const Eigen::VectorXd& v, LpVariant variant);

/// True iff ||grad g(p)|| <= tol. Throws when p is not feasible within 1e-6.
bool grad_zero_test(const CnfProblem& prob, const Point& p, double tol = 1e-8);

struct SaddleReport {
  int violations = 0;
  int samples = 0;
};

/// Samples (x, y) in the problem box and valid multipliers in [0, 5]
/// (or [-5, 5] for free v) and counts violations of
/// L(p; u, v) <= L(p; mult) <= L(q; mult) beyond 1e-8.
SaddleReport saddle_check(const CnfProblem& prob, const Point& p, const Multipliers& mult, int samples,
                          std::uint64_t seed);

/// Full verdict: gradient-zero test, then the cnp_ineq LP, then the cnp0_eq
/// LP, then the supplied multipliers (if any) against the KKT residual.
Certificate certify(const CnfProblem& prob, const Point& p, const CertifyOptions& opts = {},
                    const std::optional<Multipliers>& hint = std::nullopt);

nlohmann::json to_json(const Certificate& cert);

}  // namespace cnf
