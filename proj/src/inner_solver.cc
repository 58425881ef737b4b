#include <cmath>
#include <stdexcept>

#include <Eigen/Cholesky>

#include "cnf/expr.hpp"
#include "cnf/inner_solver.hpp"

namespace cnf {

std::string_view to_string(InnerMethod m) {
  return m == InnerMethod::gradient_descent ? "gradient_descent" : "newton_fd";
}

std::string_view to_string(InnerStatus s) {
  switch (s) {
    case InnerStatus::converged:
      return "converged";
    case InnerStatus::max_iters:
      return "max_iters";
    case InnerStatus::diverged:
      return "diverged";
    case InnerStatus::stalled:
      return "stalled";
  }
  return "?";
}

void InnerConfig::validate() const {
  if (!(grad_tol > 0)) throw std::invalid_argument("grad_tol must be positive");
  if (max_iters < 1) throw std::invalid_argument("max_iters must be at least 1");
  if (!(armijo_c > 0 && armijo_c < 1)) throw std::invalid_argument("Armijo constant must lie in (0, 1)");
  if (!(backtrack > 0 && backtrack < 1)) throw std::invalid_argument("backtrack factor must lie in (0, 1)");
  if (!(initial_step > 0)) throw std::invalid_argument("initial step must be positive");
  if (!(fd_step > 0)) throw std::invalid_argument("finite-difference step must be positive");
}

namespace {

constexpr int kMaxExpansions = 80;
constexpr int kMaxShifts = 30;
constexpr int kMaxShrinks = 40;

class Minimizer {
 public:
  Minimizer(const Objective& obj, const InnerConfig& cfg) : obj_(obj), cfg_(cfg) {}

  InnerResult run(const Eigen::VectorXd& start) {
    InnerResult res;
    z_ = start;
    f_ = obj_.value_grad(z_, grad_);
    res.tolerance = cfg_.grad_tol * std::max(1.0, std::abs(f_));
    for (int it = 0;; ++it) {
      res.iterations = it;
      double gn = grad_.norm();
      if (!std::isfinite(f_) || !std::isfinite(gn) || tripped(f_, z_)) return finish(res, InnerStatus::diverged);
      if (gn <= res.tolerance) return finish(res, InnerStatus::converged);
      if (it >= cfg_.max_iters) return finish(res, InnerStatus::max_iters);

      bool fallback = false;
      Eigen::VectorXd d = direction(fallback);
      double slope = grad_.dot(d);
      auto [t, f_new] = line_search(d, slope);
      if (t == 0.0) return finish(res, InnerStatus::stalled);

      double f_old = f_;
      z_ += t * d;
      if (tripped(f_new, z_)) {
        f_ = f_new;
        report(it, f_old, t, slope, fallback);
        return finish(res, InnerStatus::diverged);
      }
      f_ = obj_.value_grad(z_, grad_);
      report(it, f_old, t, slope, fallback);
    }
  }

 private:
  bool tripped(double f, const Eigen::VectorXd& z) const {
    return f < cfg_.value_floor || z.norm() > cfg_.point_norm_cap;
  }

  void report(int it, double f_old, double t, double slope, bool fallback) const {
    if (cfg_.on_step) cfg_.on_step(StepInfo{it, f_old, f_, t, slope, fallback});
  }

  InnerResult finish(InnerResult& res, InnerStatus status) const {
    res.z = z_;
    res.value = f_;
    res.grad_norm = grad_.norm();
    res.status = status;
    return res;
  }

  // Value at a trial point; points outside the expression domain count as +inf.
  double trial(const Eigen::VectorXd& d, double t) const {
    try {
      return obj_.value(z_ + t * d);
    } catch (const DomainError&) {
      return INFINITY;
    }
  }

  bool armijo(double f_trial, double t, double slope) const {
    return std::isfinite(f_trial) && f_trial <= f_ + cfg_.armijo_c * t * slope;
  }

  std::pair<double, double> line_search(const Eigen::VectorXd& d, double slope) const {
    double scale = std::max(1.0, z_.norm());
    double dn = d.norm();
    double t = cfg_.initial_step;
    double f_t = trial(d, t);
    bool first_ok = armijo(f_t, t, slope);
    while (!armijo(f_t, t, slope)) {
      t *= cfg_.backtrack;
      if (t * dn <= 1e-16 * scale) return {0.0, f_};
      f_t = trial(d, t);
    }
    if (first_ok) {
      // Grow the step while the Armijo condition keeps holding, so that
      // directions of unbounded decrease reach the divergence guards.
      bool grew = false;
      for (int k = 0; k < kMaxExpansions; ++k) {
        double t2 = 2.0 * t;
        double f2 = trial(d, t2);
        if (!armijo(f2, t2, slope) || !(f2 < f_t)) break;
        t = t2;
        f_t = f2;
        grew = true;
        if (tripped(f_t, z_ + t * d)) break;
      }
      // Otherwise shrink while that lowers the value, so an accepted step
      // that overshoots a curved direction cannot cycle.
      for (int k = 0; !grew && k < kMaxShrinks; ++k) {
        double t2 = cfg_.backtrack * t;
        double f2 = trial(d, t2);
        if (!(f2 < f_t)) break;
        t = t2;
        f_t = f2;
      }
    }
    return {t, f_t};
  }

  Eigen::VectorXd direction(bool& fallback) const {
    if (cfg_.method == InnerMethod::gradient_descent) return -grad_;
    const Eigen::Index n = z_.size();
    Eigen::MatrixXd hess(n, n);
    Eigen::VectorXd zp, gp, gm;
    const double h = cfg_.fd_step;
    try {
      for (Eigen::Index i = 0; i < n; ++i) {
        zp = z_;
        zp[i] += h;
        obj_.value_grad(zp, gp);
        zp[i] = z_[i] - h;
        obj_.value_grad(zp, gm);
        hess.col(i) = (gp - gm) / (2 * h);
      }
    } catch (const DomainError&) {
      fallback = true;
      return -grad_;
    }
    Eigen::MatrixXd sym = 0.5 * (hess + hess.transpose());
    if (sym.allFinite()) {
      double tau = 1e-8;
      for (int k = 0; k < kMaxShifts; ++k, tau *= 10) {
        Eigen::LLT<Eigen::MatrixXd> llt(sym + tau * Eigen::MatrixXd::Identity(n, n));
        if (llt.info() != Eigen::Success) continue;
        Eigen::VectorXd d = -llt.solve(grad_);
        if (d.allFinite() && grad_.dot(d) < 0) return d;
      }
    }
    fallback = true;
    return -grad_;
  }

  const Objective& obj_;
  const InnerConfig& cfg_;
  Eigen::VectorXd z_;
  Eigen::VectorXd grad_;
  double f_ = 0.0;
};

}  // namespace

InnerResult minimize(const Objective& objective, const Eigen::VectorXd& start, const InnerConfig& cfg) {
  cfg.validate();
  if (!objective.value || !objective.value_grad) throw std::invalid_argument("objective is missing callbacks");
  return Minimizer(objective, cfg).run(start);
}

}  // namespace cnf
