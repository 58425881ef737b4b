#pragma once

#include "cnf/alpf.hpp"

namespace cnf::detail {

/// Constraint values at a stacked point.
struct Residuals {
  Eigen::VectorXd g;
  Eigen::VectorXd h;
};

Residuals residuals(const CnfProblem& prob, const Eigen::VectorXd& z);

IterationRecord make_record(const CnfProblem& prob, const AlpfConfig& cfg, int k, double rho,
                            const Eigen::VectorXd& z, const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                            const Residuals& res, const InnerResult& inner);

/// Fills u_bar, v_next and the diagnostics from the final record.
void finish_trace(const CnfProblem& prob, AlpfTrace& trace);

Eigen::VectorXd start_point(const CnfProblem& prob, const AlpfConfig& cfg);

}  // namespace cnf::detail
