#include <cmath>

#include <fmt/format.h>

#include "common.hpp"

namespace cnf {

void AlpfConfig::validate() const {
  if (!(eps >= 0)) throw std::invalid_argument("eps must be non-negative");
  if (!(rho0 > 0)) throw std::invalid_argument("rho0 must be positive");
  if (!(growth > 1)) throw std::invalid_argument("growth factor N must exceed 1");
  if (max_outer < 1) throw std::invalid_argument("max_outer must be at least 1");
  if (convexity_samples < 1) throw std::invalid_argument("convexity_samples must be positive");
  inner.validate();
}

std::string_view to_string(StopReason r) {
  switch (r) {
    case StopReason::kkt_stop:
      return "kkt_stop";
    case StopReason::approx_stop:
      return "approx_stop";
    case StopReason::max_outer:
      return "max_outer";
    case StopReason::inner_failure:
      return "inner_failure";
  }
  return "?";
}

StopReason stop_reason_from_string(std::string_view s) {
  for (StopReason r : {StopReason::kkt_stop, StopReason::approx_stop, StopReason::max_outer,
                       StopReason::inner_failure}) {
    if (to_string(r) == s) return r;
  }
  throw std::invalid_argument(fmt::format("unknown stop reason '{}'", s));
}

InnerStatus inner_status_from_string(std::string_view s) {
  for (InnerStatus r : {InnerStatus::converged, InnerStatus::max_iters, InnerStatus::diverged,
                        InnerStatus::stalled}) {
    if (to_string(r) == s) return r;
  }
  throw std::invalid_argument(fmt::format("unknown inner status '{}'", s));
}

const IterationRecord& AlpfTrace::last() const {
  if (records.empty()) throw std::logic_error("trace has no records");
  return records.back();
}

Eigen::VectorXd update_u(const Eigen::VectorXd& u, const Eigen::VectorXd& g, double rho) {
  Eigen::VectorXd next(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) next[i] = g[i] >= 0 ? u[i] + 2.0 * rho * g[i] : 0.0;
  return next;
}

Eigen::VectorXd update_v(const Eigen::VectorXd& v, const Eigen::VectorXd& h, double rho) {
  return v + 2.0 * rho * h;
}

double infeasibility(const Eigen::VectorXd& g, const Eigen::VectorXd& h) {
  return g.cwiseMax(0.0).norm() + h.norm();
}

namespace detail {

Residuals residuals(const CnfProblem& prob, const Eigen::VectorXd& z) {
  return Residuals{prob.ineq_values(z), prob.eq_values(z)};
}

IterationRecord make_record(const CnfProblem& prob, const AlpfConfig& cfg, int k, double rho,
                            const Eigen::VectorXd& z, const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                            const Residuals& res, const InnerResult& inner) {
  IterationRecord r;
  r.k = k;
  r.rho = rho;
  Point p = Point::split(z, prob.n());
  r.x = p.x;
  r.y = p.y;
  r.u = u;
  r.v = v;
  r.g = prob.objective_value(z);
  Eigen::VectorXd plus = res.g.cwiseMax(0.0);
  r.A = r.g + u.dot(res.g) + v.dot(res.h) + rho * plus.squaredNorm() + rho * res.h.squaredNorm();
  r.e = infeasibility(res.g, res.h);
  r.gap = std::abs(r.A - r.g);
  r.inner_status = inner.status;
  r.inner_iterations = inner.iterations;
  if (prob.reference()) r.f = prob.reference_value(p.x);
  r.norm0 = static_cast<int>((p.x.array().abs() > kNorm0Threshold).count());
  if (cfg.surrogate) r.surrogate = cfg.surrogate(p);
  return r;
}

void finish_trace(const CnfProblem& prob, AlpfTrace& trace) {
  const IterationRecord& last = trace.last();
  Eigen::VectorXd z = last.point().stacked();
  Residuals res = residuals(prob, z);
  trace.u_bar = last.u + 2.0 * last.rho * res.g.cwiseMax(0.0);
  trace.v_next = update_v(last.v, res.h, last.rho);

  // Normalized multipliers: eta = 1/gamma, alpha = u_bar/gamma, beta = v_next/gamma.
  double gamma = 1.0 + trace.u_bar.sum() + trace.v_next.cwiseAbs().sum();
  Eigen::VectorXd station = prob.objective_gradient(z);
  if (prob.s() > 0) station += prob.ineq_jacobian(z).transpose() * trace.u_bar;
  if (prob.r() > 0) station += prob.eq_jacobian(z).transpose() * trace.v_next;
  AlpfDiagnostics& d = trace.diagnostics;
  d.normalized_kkt_residual = station.norm() / gamma;

  d.inactive_with_multiplier.clear();
  for (Eigen::Index i = 0; i < res.g.size(); ++i) {
    if (res.g[i] < -1e-3 && last.u[i] > 1e-6) d.inactive_with_multiplier.push_back(static_cast<int>(i));
  }
  d.infeasibility_increases.clear();
  for (std::size_t k = 1; k < trace.records.size(); ++k) {
    const IterationRecord& prev = trace.records[k - 1];
    const IterationRecord& cur = trace.records[k];
    bool ok = cur.inner_status == InnerStatus::converged || cur.inner_status == InnerStatus::stalled;
    if (ok && cur.e > prev.e + 1e-6) d.infeasibility_increases.push_back(cur.k);
  }
}

Eigen::VectorXd start_point(const CnfProblem& prob, const AlpfConfig& cfg) {
  if (!cfg.start) return Eigen::VectorXd::Zero(prob.dim());
  prob.check_point(*cfg.start);
  return cfg.start->stacked();
}

}  // namespace detail

namespace {

enum class Mode { alpf, penalty };

bool inner_ok(InnerStatus s) { return s == InnerStatus::converged || s == InnerStatus::stalled; }

AlpfTrace run(const CnfProblem& prob, const AlpfConfig& cfg, Mode mode) {
  cfg.validate();
  AlpfTrace trace;
  trace.solver = mode == Mode::alpf ? "alpf" : "penalty";
  const Eigen::VectorXd z0 = detail::start_point(prob, cfg);
  Eigen::VectorXd z = z0;

  // Initial multipliers: u = g(z0)+ for ALPF, zero for the penalty loop.
  Eigen::VectorXd u = Eigen::VectorXd::Zero(prob.s());
  Eigen::VectorXd v = Eigen::VectorXd::Zero(prob.r());
  if (mode == Mode::alpf) u = prob.ineq_values(z0).cwiseMax(0.0);
  double rho = cfg.rho0;
  int failed_in_row = 0;

  for (int k = 1; k <= cfg.max_outer; ++k) {
    // Minimize the augmented Lagrangian at fixed (u, v, rho).
    InnerResult inner = minimize(augmented_objective(prob, u, v, rho), cfg.warm_start_inner ? z : z0, cfg.inner);
    z = inner.z;
    detail::Residuals res = detail::residuals(prob, z);
    trace.records.push_back(detail::make_record(prob, cfg, k, rho, z, u, v, res, inner));
    const IterationRecord& rec = trace.records.back();

    if (inner.status == InnerStatus::diverged) {
      trace.status = StopReason::inner_failure;
      break;
    }
    failed_in_row = inner_ok(inner.status) ? 0 : failed_in_row + 1;
    if (failed_in_row >= 2) {
      trace.status = StopReason::inner_failure;
      break;
    }

    if (mode == Mode::penalty) {
      if (rec.e < cfg.eps) {
        trace.status = StopReason::approx_stop;
        break;
      }
    } else {
      // KKT stop: complementarity at a feasible point, and L(.; u, v) passes
      // the sampled convexity check.
      bool feasible = (res.g.size() == 0 || res.g.maxCoeff() <= cfg.eps) &&
                      (res.h.size() == 0 || res.h.cwiseAbs().maxCoeff() <= cfg.eps);
      bool complementary = u.size() == 0 || u.cwiseProduct(res.g).cwiseAbs().maxCoeff() <= cfg.eps;
      if (feasible && complementary) {
        auto lagr = [&](const Eigen::VectorXd& q) { return augmented_eval(prob, q, u, v, 0.0, nullptr); };
        if (count_midpoint_violations(lagr, prob.dim(), prob.box(), cfg.convexity_samples, cfg.seed) == 0) {
          trace.status = StopReason::kkt_stop;
          trace.diagnostics.heuristic_convex = true;
          break;
        }
      }
      // Approximate stop, otherwise update (u, v, rho).
      if (rec.gap < cfg.eps && rec.e < cfg.eps) {
        trace.status = StopReason::approx_stop;
        break;
      }
      u = update_u(u, res.g, rho);
      v = update_v(v, res.h, rho);
    }
    rho *= cfg.growth;
    if (k == cfg.max_outer) trace.status = StopReason::max_outer;
  }
  detail::finish_trace(prob, trace);
  return trace;
}

}  // namespace

AlpfTrace solve_alpf(const CnfProblem& prob, const AlpfConfig& cfg) { return run(prob, cfg, Mode::alpf); }

AlpfTrace solve_penalty(const CnfProblem& prob, const AlpfConfig& cfg) { return run(prob, cfg, Mode::penalty); }

}  // namespace cnf
