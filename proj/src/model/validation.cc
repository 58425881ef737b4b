#include <cmath>
#include <random>

#include <fmt/format.h>

#include "cnf/model.hpp"

namespace cnf {

FeasibilityReport check_feasible(const CnfProblem& prob, const Point& p, double tol) {
  if (!(tol > 0)) throw std::invalid_argument("feasibility tolerance must be positive");
  prob.check_point(p);
  Eigen::VectorXd z = p.stacked();
  FeasibilityReport report;
  Eigen::VectorXd g = prob.ineq_values(z);
  Eigen::VectorXd h = prob.eq_values(z);
  if (g.size() > 0) report.max_ineq_violation = std::max(0.0, g.maxCoeff());
  if (h.size() > 0) report.max_eq_residual = h.cwiseAbs().maxCoeff();
  report.in_xf = report.max_ineq_violation <= tol && report.max_eq_residual <= tol;
  if (prob.reference()) {
    report.exactness_gap = std::abs(prob.objective_value(z) - prob.reference_value(p.x));
  }
  return report;
}

double validate_exactness(const CnfProblem& prob, int samples, std::uint64_t seed) {
  if (!prob.has_lift()) throw std::invalid_argument(fmt::format("problem '{}' has no lift map", prob.name()));
  if (!prob.reference()) {
    throw std::invalid_argument(fmt::format("problem '{}' has no reference objective", prob.name()));
  }
  if (samples <= 0) throw std::invalid_argument("sample count must be positive");
  std::mt19937_64 rng(seed);
  Box box = prob.box();
  std::uniform_real_distribution<double> coord(box.lo, box.hi);
  double worst = 0.0;
  Eigen::VectorXd x(prob.n());
  for (int k = 0; k < samples; ++k) {
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = coord(rng);
    Point p = prob.lift(x);
    double gap = std::abs(prob.objective_value(p.stacked()) - prob.reference_value(x));
    worst = std::max(worst, gap);
  }
  return worst;
}

namespace {

// Absolute slack plus a few ulps of the values involved, so that large but
// convex components are not flagged by rounding alone.
double midpoint_slack(double a, double b, double mid) {
  return 1e-10 + 1e-14 * (std::abs(a) + std::abs(b) + std::abs(mid));
}

}  // namespace

int count_midpoint_violations(const std::function<double(const Eigen::VectorXd&)>& fn, int dim,
                              const Box& box, int samples, std::uint64_t seed) {
  if (samples < 0) throw std::invalid_argument("sample count must be non-negative");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(box.lo, box.hi);
  Eigen::VectorXd p(dim), q(dim);
  int violations = 0;
  for (int k = 0; k < samples; ++k) {
    for (int i = 0; i < dim; ++i) p[i] = coord(rng);
    for (int i = 0; i < dim; ++i) q[i] = coord(rng);
    double fp = fn(p), fq = fn(q);
    double fm = fn(0.5 * (p + q));
    if (fm > 0.5 * (fp + fq) + midpoint_slack(fp, fq, fm)) ++violations;
  }
  return violations;
}

int sample_convexity(const CnfProblem& prob, int samples, std::uint64_t seed, std::optional<Box> box) {
  if (samples < 0) throw std::invalid_argument("sample count must be non-negative");
  Box b = box.value_or(prob.box());
  std::vector<const Tape*> parts{&prob.objective_tape()};
  for (const Tape& t : prob.ineq_tapes()) parts.push_back(&t);
  for (const Tape& t : prob.eq_tapes()) parts.push_back(&t);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(b.lo, b.hi);
  Eigen::VectorXd p(prob.dim()), q(prob.dim()), mid(prob.dim());
  int violations = 0;
  for (int k = 0; k < samples; ++k) {
    for (int i = 0; i < prob.dim(); ++i) p[i] = coord(rng);
    for (int i = 0; i < prob.dim(); ++i) q[i] = coord(rng);
    mid = 0.5 * (p + q);
    for (const Tape* t : parts) {
      double fp = t->value(p), fq = t->value(q), fm = t->value(mid);
      if (fm > 0.5 * (fp + fq) + midpoint_slack(fp, fq, fm)) {
        ++violations;
        break;
      }
    }
  }
  return violations;
}

}  // namespace cnf
