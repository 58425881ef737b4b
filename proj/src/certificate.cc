#include <cmath>
#include <random>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "cnf/certificate.hpp"

namespace cnf {

std::string_view to_string(LpVariant v) { return v == LpVariant::cnp_ineq ? "cnp_ineq" : "cnp0_eq"; }

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::certified_global:
      return "certified_global";
    case Verdict::kkt_point:
      return "kkt_point";
    case Verdict::inconclusive:
      return "inconclusive";
  }
  return "?";
}

double KktReport::max_residual() const { return std::max({stationarity, complementarity, sign_violation}); }

LpProblem certificate_lp(const CnfProblem& prob, const Point& p, LpVariant variant) {
  prob.check_point(p);
  Eigen::VectorXd z = p.stacked();
  LpProblem lp = LpProblem::with_vars(prob.dim());
  lp.c = prob.objective_gradient(z);
  Eigen::MatrixXd jg = prob.ineq_jacobian(z);
  Eigen::MatrixXd jh = prob.eq_jacobian(z);
  Eigen::VectorXd g = prob.ineq_values(z);
  if (variant == LpVariant::cnp_ineq) {
    lp.A_ub.resize(prob.s() + prob.r(), prob.dim());
    lp.A_ub << jg, jh;
    lp.b_ub.resize(prob.s() + prob.r());
    lp.b_ub << -g, Eigen::VectorXd::Zero(prob.r());
  } else {
    lp.A_ub = jg;
    lp.b_ub = -g;
    lp.A_eq = jh;
    lp.b_eq = Eigen::VectorXd::Zero(prob.r());
  }
  return lp;
}

namespace {

constexpr double kPassTol = 1e-8;

void require_feasible(const CnfProblem& prob, const Point& p, double tol) {
  FeasibilityReport rep = check_feasible(prob, p, tol);
  if (!rep.in_xf) {
    throw std::invalid_argument(fmt::format("point is not feasible within {} (ineq {:.3g}, eq {:.3g})", tol,
                                            rep.max_ineq_violation, rep.max_eq_residual));
  }
}

LpTest run_lp_test(const CnfProblem& prob, const Point& p, LpVariant variant, double feas_tol) {
  require_feasible(prob, p, feas_tol);
  LpProblem lp = certificate_lp(prob, p, variant);
  LpSolution sol = solve_lp(lp);
  LpTest test;
  test.variant = variant;
  test.status = sol.status;
  switch (sol.status) {
    case LpStatus::infeasible:
      throw std::logic_error("certificate LP infeasible at a feasible point");
    case LpStatus::unbounded:
      test.objective = -INFINITY;
      test.direction = sol.ray;
      return test;
    case LpStatus::optimal:
      break;
  }
  test.objective = sol.objective;
  test.direction = sol.d;
  test.u = sol.dual_ub.head(prob.s());
  test.v = variant == LpVariant::cnp_ineq ? Eigen::VectorXd(sol.dual_ub.tail(prob.r())) : sol.dual_eq;
  // Adding zero turns -0.0 into 0.0.
  test.u.array() += 0.0;
  test.v.array() += 0.0;
  test.passed = sol.objective >= -kPassTol;
  return test;
}

}  // namespace

LpTest lp_test_ineq(const CnfProblem& prob, const Point& p, double feas_tol) {
  return run_lp_test(prob, p, LpVariant::cnp_ineq, feas_tol);
}

LpTest lp_test_eq(const CnfProblem& prob, const Point& p, double feas_tol) {
  return run_lp_test(prob, p, LpVariant::cnp0_eq, feas_tol);
}

KktReport kkt_residual(const CnfProblem& prob, const Point& p, const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                       LpVariant variant) {
  prob.check_point(p);
  if (u.size() != prob.s() || v.size() != prob.r()) throw DimensionError("multiplier lengths do not match problem");
  Eigen::VectorXd z = p.stacked();
  KktReport rep{u, v};
  Eigen::VectorXd station = prob.objective_gradient(z);
  if (prob.s() > 0) station += prob.ineq_jacobian(z).transpose() * u;
  if (prob.r() > 0) station += prob.eq_jacobian(z).transpose() * v;
  rep.stationarity = station.norm();
  if (prob.s() > 0) {
    rep.complementarity = u.cwiseProduct(prob.ineq_values(z)).cwiseAbs().maxCoeff();
    rep.sign_violation = std::max(0.0, -u.minCoeff());
  }
  if (variant == LpVariant::cnp_ineq && prob.r() > 0) {
    rep.sign_violation = std::max(rep.sign_violation, -v.minCoeff());
  }
  return rep;
}

bool grad_zero_test(const CnfProblem& prob, const Point& p, double tol) {
  require_feasible(prob, p, 1e-6);
  return prob.objective_gradient(p.stacked()).norm() <= tol;
}

SaddleReport saddle_check(const CnfProblem& prob, const Point& p, const Multipliers& mult, int samples,
                          std::uint64_t seed) {
  if (samples <= 0) throw std::invalid_argument("sample count must be positive");
  prob.check_point(p);
  mult.validate(prob);
  constexpr double kTol = 1e-8;
  std::mt19937_64 rng(seed);
  Box box = prob.box();
  std::uniform_real_distribution<double> coord(box.lo, box.hi);
  std::uniform_real_distribution<double> nonneg(0.0, 5.0);
  std::uniform_real_distribution<double> free(-5.0, 5.0);

  Eigen::VectorXd zp = p.stacked();
  double center = augmented_eval(prob, zp, mult.u, mult.v, 0.0, nullptr);
  SaddleReport rep{0, samples};
  Eigen::VectorXd q(prob.dim()), u(prob.s()), v(prob.r());
  for (int k = 0; k < samples; ++k) {
    for (Eigen::Index i = 0; i < q.size(); ++i) q[i] = coord(rng);
    for (Eigen::Index i = 0; i < u.size(); ++i) u[i] = nonneg(rng);
    for (Eigen::Index j = 0; j < v.size(); ++j) v[j] = mult.sign_mode == SignMode::v_nonneg ? nonneg(rng) : free(rng);
    double left = augmented_eval(prob, zp, u, v, 0.0, nullptr);
    double right = augmented_eval(prob, q, mult.u, mult.v, 0.0, nullptr);
    if (left > center + kTol || center > right + kTol) ++rep.violations;
  }
  return rep;
}

Certificate certify(const CnfProblem& prob, const Point& p, const CertifyOptions& opts,
                    const std::optional<Multipliers>& hint) {
  prob.check_point(p);
  Certificate cert;
  cert.point = p;
  cert.feasibility = check_feasible(prob, p, opts.feas_tol);
  cert.grad_norm_of_g = prob.objective_gradient(p.stacked()).norm();
  if (!cert.feasibility.in_xf) return cert;
  if (prob.exact() && cert.feasibility.exactness_gap &&
      *cert.feasibility.exactness_gap > opts.feas_tol * std::max(1.0, std::abs(prob.reference_value(p.x)))) {
    return cert;
  }

  if (cert.grad_norm_of_g <= opts.grad_tol) {
    cert.verdict = Verdict::certified_global;
    cert.kkt = kkt_residual(prob, p, Eigen::VectorXd::Zero(prob.s()), Eigen::VectorXd::Zero(prob.r()),
                            LpVariant::cnp_ineq);
    return cert;
  }

  for (LpVariant variant : {LpVariant::cnp_ineq, LpVariant::cnp0_eq}) {
    LpTest test;
    try {
      test = run_lp_test(prob, p, variant, opts.feas_tol);
    } catch (const std::logic_error&) {
      continue;
    }
    if (!cert.lp_test || test.passed) cert.lp_test = test;
    if (test.passed) {
      cert.kkt = kkt_residual(prob, p, test.u, test.v, variant);
      cert.verdict = variant == LpVariant::cnp_ineq ? Verdict::certified_global : Verdict::kkt_point;
      return cert;
    }
  }

  if (hint) {
    hint->validate(prob);
    KktReport rep = kkt_residual(prob, p, hint->u, hint->v, LpVariant::cnp0_eq);
    cert.kkt = rep;
    if (rep.max_residual() <= opts.kkt_tol) cert.verdict = Verdict::kkt_point;
  }
  return cert;
}

namespace {

nlohmann::json vec(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

// JSON has no infinity; unbounded objectives are written as null.
nlohmann::json number(double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); }

}  // namespace

nlohmann::json to_json(const Certificate& cert) {
  nlohmann::json j;
  j["point"] = {{"x", vec(cert.point.x)}, {"y", vec(cert.point.y)}};
  nlohmann::json feas = {{"max_ineq_violation", cert.feasibility.max_ineq_violation},
                         {"max_eq_residual", cert.feasibility.max_eq_residual},
                         {"in_xf", cert.feasibility.in_xf}};
  feas["exactness_gap"] = cert.feasibility.exactness_gap ? number(*cert.feasibility.exactness_gap) : nlohmann::json(nullptr);
  j["feasibility"] = feas;
  j["grad_norm"] = cert.grad_norm_of_g;
  if (cert.lp_test) {
    const LpTest& t = *cert.lp_test;
    j["lp_test"] = {{"variant", to_string(t.variant)},
                    {"status", to_string(t.status)},
                    {"objective", number(t.objective)},
                    {"direction", vec(t.direction)}};
  } else {
    j["lp_test"] = nullptr;
  }
  if (cert.kkt) {
    const KktReport& k = *cert.kkt;
    j["kkt"] = {{"u", vec(k.u)},
                {"v", vec(k.v)},
                {"stationarity", k.stationarity},
                {"complementarity", k.complementarity},
                {"sign_violation", k.sign_violation}};
  } else {
    j["kkt"] = nullptr;
  }
  j["verdict"] = to_string(cert.verdict);
  return j;
}

}  // namespace cnf
