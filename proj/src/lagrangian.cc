#include <cmath>
#include <memory>
#include <tuple>

#include <fmt/format.h>

#include "cnf/lagrangian.hpp"

namespace cnf {

Multipliers Multipliers::zero(const CnfProblem& prob, SignMode mode) {
  return Multipliers{Eigen::VectorXd::Zero(prob.s()), Eigen::VectorXd::Zero(prob.r()), mode};
}

void Multipliers::validate(const CnfProblem& prob) const {
  if (u.size() != prob.s() || v.size() != prob.r()) {
    throw DimensionError(fmt::format("multipliers have lengths ({}, {}), expected ({}, {})", u.size(),
                                     v.size(), prob.s(), prob.r()));
  }
  if (u.size() > 0 && u.minCoeff() < 0) throw std::invalid_argument("inequality multipliers must be non-negative");
  if (sign_mode == SignMode::v_nonneg && v.size() > 0 && v.minCoeff() < 0) {
    throw std::invalid_argument("equality multipliers must be non-negative under v_nonneg");
  }
}

namespace {

void accumulate(const Tape& tape, const Eigen::VectorXd& z, double weight, double* value_out,
                Eigen::VectorXd* grad) {
  thread_local Eigen::VectorXd local;
  if (!grad) {
    *value_out = tape.value(z);
    return;
  }
  *value_out = tape.value_and_gradient(z, local);
  if (weight == 0.0) return;
  auto vars = tape.vars();
  for (std::size_t k = 0; k < vars.size(); ++k) (*grad)[vars[k]] += weight * local[static_cast<Eigen::Index>(k)];
}

void check_rho(PenaltyParams pen) {
  if (!(pen.rho > 0)) throw std::invalid_argument("penalty parameter rho must be positive");
}

}  // namespace

double augmented_eval(const CnfProblem& prob, const Eigen::VectorXd& z, const Eigen::VectorXd& u,
                      const Eigen::VectorXd& v, double rho, Eigen::VectorXd* grad) {
  if (grad) grad->setZero(prob.dim());
  double total = 0.0;
  accumulate(prob.objective_tape(), z, 1.0, &total, grad);

  thread_local Eigen::VectorXd local;
  auto ineqs = prob.ineq_tapes();
  for (std::size_t i = 0; i < ineqs.size(); ++i) {
    const Tape& t = ineqs[i];
    double gi = grad ? t.value_and_gradient(z, local) : t.value(z);
    double plus = std::max(gi, 0.0);
    double ui = u[static_cast<Eigen::Index>(i)];
    total += ui * gi + rho * plus * plus;
    if (grad) {
      double w = ui + 2.0 * rho * plus;
      if (w != 0.0) {
        auto vars = t.vars();
        for (std::size_t k = 0; k < vars.size(); ++k) (*grad)[vars[k]] += w * local[static_cast<Eigen::Index>(k)];
      }
    }
  }
  auto eqs = prob.eq_tapes();
  for (std::size_t j = 0; j < eqs.size(); ++j) {
    const Tape& t = eqs[j];
    double hj = grad ? t.value_and_gradient(z, local) : t.value(z);
    double vj = v[static_cast<Eigen::Index>(j)];
    total += vj * hj + rho * hj * hj;
    if (grad) {
      double w = vj + 2.0 * rho * hj;
      if (w != 0.0) {
        auto vars = t.vars();
        for (std::size_t k = 0; k < vars.size(); ++k) (*grad)[vars[k]] += w * local[static_cast<Eigen::Index>(k)];
      }
    }
  }
  return total;
}

double lagrangian(const CnfProblem& prob, const Point& p, const Multipliers& mult) {
  prob.check_point(p);
  mult.validate(prob);
  return augmented_eval(prob, p.stacked(), mult.u, mult.v, 0.0, nullptr);
}

Eigen::VectorXd lagrangian_gradient(const CnfProblem& prob, const Point& p, const Multipliers& mult) {
  prob.check_point(p);
  mult.validate(prob);
  Eigen::VectorXd grad;
  augmented_eval(prob, p.stacked(), mult.u, mult.v, 0.0, &grad);
  return grad;
}

double augmented(const CnfProblem& prob, const Point& p, const Multipliers& mult, PenaltyParams pen) {
  check_rho(pen);
  prob.check_point(p);
  mult.validate(prob);
  return augmented_eval(prob, p.stacked(), mult.u, mult.v, pen.rho, nullptr);
}

Eigen::VectorXd augmented_gradient(const CnfProblem& prob, const Point& p, const Multipliers& mult,
                                   PenaltyParams pen) {
  check_rho(pen);
  prob.check_point(p);
  mult.validate(prob);
  Eigen::VectorXd grad;
  augmented_eval(prob, p.stacked(), mult.u, mult.v, pen.rho, &grad);
  return grad;
}

double penalty(const CnfProblem& prob, const Point& p, PenaltyParams pen) {
  return augmented(prob, p, Multipliers::zero(prob), pen);
}

Objective augmented_objective(const CnfProblem& prob, Eigen::VectorXd u, Eigen::VectorXd v, double rho) {
  auto state = std::make_shared<const std::tuple<CnfProblem, Eigen::VectorXd, Eigen::VectorXd, double>>(
      prob, std::move(u), std::move(v), rho);
  Objective obj;
  obj.value = [state](const Eigen::VectorXd& z) {
    const auto& [p, uu, vv, r] = *state;
    return augmented_eval(p, z, uu, vv, r, nullptr);
  };
  obj.value_grad = [state](const Eigen::VectorXd& z, Eigen::VectorXd& grad) {
    const auto& [p, uu, vv, r] = *state;
    return augmented_eval(p, z, uu, vv, r, &grad);
  };
  return obj;
}

std::string_view to_string(DualStatus s) {
  switch (s) {
    case DualStatus::value:
      return "value";
    case DualStatus::unbounded_below:
      return "unbounded_below";
    case DualStatus::failure:
      return "failure";
  }
  return "?";
}

DualResult dual_value(const CnfProblem& prob, const Multipliers& mult, const InnerConfig& cfg,
                      const Point& start) {
  mult.validate(prob);
  prob.check_point(start);
  InnerResult inner = minimize(augmented_objective(prob, mult.u, mult.v, 0.0), start.stacked(), cfg);
  DualResult result;
  result.inner_status = inner.status;
  result.argmin = Point::split(inner.z, prob.n());
  result.value = inner.value;
  switch (inner.status) {
    case InnerStatus::converged:
    case InnerStatus::stalled:
      result.status = DualStatus::value;
      break;
    case InnerStatus::diverged:
      result.status = DualStatus::unbounded_below;
      break;
    case InnerStatus::max_iters:
      result.status = DualStatus::failure;
      break;
  }
  return result;
}

}  // namespace cnf
