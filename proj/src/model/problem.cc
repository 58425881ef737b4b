#include <fmt/format.h>

#include "cnf/model.hpp"

namespace cnf {

struct CnfProblem::Data {
  CnfSpec spec;
  Tape objective;
  std::vector<Tape> ineqs;
  std::vector<Tape> eqs;
  std::optional<Tape> reference;
};

namespace {

void require_smooth(const Expr& e, const std::string& role) {
  if (!e.is_smooth()) {
    throw DialectError(fmt::format("{} must be smooth, got `{}`", role, e.to_string()));
  }
}

std::vector<Tape> compile_all(const std::vector<Expr>& exprs, int n, int m, const char* role) {
  std::vector<Tape> tapes;
  tapes.reserve(exprs.size());
  for (std::size_t i = 0; i < exprs.size(); ++i) {
    require_smooth(exprs[i], fmt::format("{} {}", role, i + 1));
    tapes.emplace_back(exprs[i], n, m);
  }
  return tapes;
}

}  // namespace

CnfProblem::CnfProblem(CnfSpec spec) {
  if (spec.n < 0 || spec.m < 0) throw DimensionError("negative problem dimension");
  if (spec.box && !(spec.box->lo < spec.box->hi)) throw std::invalid_argument("empty sampling box");
  require_smooth(spec.objective, "objective");
  Tape objective(spec.objective, spec.n, spec.m);
  auto ineqs = compile_all(spec.ineqs, spec.n, spec.m, "inequality");
  auto eqs = compile_all(spec.eqs, spec.n, spec.m, "equality");
  std::optional<Tape> reference;
  if (spec.reference) {
    if (spec.reference->references(Block::y)) {
      throw std::invalid_argument("reference objective may only use the x block");
    }
    reference.emplace(*spec.reference, spec.n, 0);
  }
  data_ = std::make_shared<const Data>(
      Data{std::move(spec), std::move(objective), std::move(ineqs), std::move(eqs), std::move(reference)});
}

const std::string& CnfProblem::name() const { return data_->spec.name; }
int CnfProblem::n() const { return data_->spec.n; }
int CnfProblem::m() const { return data_->spec.m; }
int CnfProblem::s() const { return static_cast<int>(data_->ineqs.size()); }
int CnfProblem::r() const { return static_cast<int>(data_->eqs.size()); }
const Expr& CnfProblem::objective() const { return data_->spec.objective; }
std::span<const Expr> CnfProblem::ineqs() const { return data_->spec.ineqs; }
std::span<const Expr> CnfProblem::eqs() const { return data_->spec.eqs; }
const std::optional<Expr>& CnfProblem::reference() const { return data_->spec.reference; }
bool CnfProblem::exact() const { return data_->spec.exact; }
bool CnfProblem::has_lift() const { return static_cast<bool>(data_->spec.lift); }
Box CnfProblem::box() const { return data_->spec.box.value_or(Box{}); }
bool CnfProblem::has_declared_box() const { return data_->spec.box.has_value(); }
const Tape& CnfProblem::objective_tape() const { return data_->objective; }
std::span<const Tape> CnfProblem::ineq_tapes() const { return data_->ineqs; }
std::span<const Tape> CnfProblem::eq_tapes() const { return data_->eqs; }

Point CnfProblem::lift(const Eigen::VectorXd& x) const {
  if (!has_lift()) throw std::invalid_argument(fmt::format("problem '{}' has no lift map", name()));
  if (x.size() != n()) throw DimensionError(fmt::format("lift expects x of length {}", n()));
  Point p{x, data_->spec.lift(x)};
  if (p.y.size() != m()) throw DimensionError("lift map returned y of the wrong length");
  return p;
}

void CnfProblem::check_point(const Point& p) const {
  if (p.x.size() != n() || p.y.size() != m()) {
    throw DimensionError(fmt::format("point has dimensions ({}, {}), problem '{}' expects ({}, {})",
                                     p.x.size(), p.y.size(), name(), n(), m()));
  }
}

void CnfProblem::check_stacked(const Eigen::VectorXd& z) const {
  if (z.size() != dim()) {
    throw DimensionError(fmt::format("stacked point has length {}, expected {}", z.size(), dim()));
  }
}

double CnfProblem::objective_value(const Eigen::VectorXd& z) const {
  check_stacked(z);
  return data_->objective.value(z);
}

namespace {

Eigen::VectorXd scatter(const Tape& tape, const Eigen::VectorXd& z, int dim) {
  Eigen::VectorXd local;
  tape.value_and_gradient(z, local);
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(dim);
  auto vars = tape.vars();
  for (std::size_t k = 0; k < vars.size(); ++k) grad[vars[k]] = local[static_cast<Eigen::Index>(k)];
  return grad;
}

Eigen::VectorXd values(std::span<const Tape> tapes, const Eigen::VectorXd& z) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(tapes.size()));
  for (std::size_t i = 0; i < tapes.size(); ++i) out[static_cast<Eigen::Index>(i)] = tapes[i].value(z);
  return out;
}

Eigen::MatrixXd jacobian(std::span<const Tape> tapes, const Eigen::VectorXd& z, int dim) {
  Eigen::MatrixXd jac(static_cast<Eigen::Index>(tapes.size()), dim);
  for (std::size_t i = 0; i < tapes.size(); ++i) {
    jac.row(static_cast<Eigen::Index>(i)) = scatter(tapes[i], z, dim).transpose();
  }
  return jac;
}

}  // namespace

Eigen::VectorXd CnfProblem::objective_gradient(const Eigen::VectorXd& z) const {
  check_stacked(z);
  return scatter(data_->objective, z, dim());
}

Eigen::VectorXd CnfProblem::ineq_values(const Eigen::VectorXd& z) const {
  check_stacked(z);
  return values(data_->ineqs, z);
}

Eigen::VectorXd CnfProblem::eq_values(const Eigen::VectorXd& z) const {
  check_stacked(z);
  return values(data_->eqs, z);
}

Eigen::MatrixXd CnfProblem::ineq_jacobian(const Eigen::VectorXd& z) const {
  check_stacked(z);
  return jacobian(data_->ineqs, z, dim());
}

Eigen::MatrixXd CnfProblem::eq_jacobian(const Eigen::VectorXd& z) const {
  check_stacked(z);
  return jacobian(data_->eqs, z, dim());
}

double CnfProblem::reference_value(const Eigen::VectorXd& x) const {
  if (!data_->reference) throw std::invalid_argument(fmt::format("problem '{}' has no reference objective", name()));
  if (x.size() != n()) throw DimensionError(fmt::format("reference expects x of length {}", n()));
  return data_->reference->value(x);
}

}  // namespace cnf
