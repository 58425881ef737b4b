#include <algorithm>
#include <unordered_map>

#include <fmt/format.h>

#include "common.hpp"

namespace cnf {

namespace {

// Stacked indices referenced by a compiled expression.
std::vector<int> stacked_vars(const Tape& t) { return {t.vars().begin(), t.vars().end()}; }

}  // namespace

BlockPartition BlockPartition::by_x_chunks(const CnfProblem& prob, int p) {
  if (p < 1 || p > std::max(prob.n(), 1)) {
    throw std::invalid_argument(fmt::format("block count {} must lie in 1..{}", p, std::max(prob.n(), 1)));
  }
  const int n = prob.n();
  std::vector<int> owner(static_cast<std::size_t>(prob.dim()), -1);
  BlockPartition part;
  part.blocks.resize(static_cast<std::size_t>(p));
  for (int b = 0, start = 0; b < p; ++b) {
    int size = n / p + (b < n % p ? 1 : 0);
    for (int i = start; i < start + size; ++i) owner[static_cast<std::size_t>(i)] = b;
    start += size;
  }

  std::vector<std::vector<int>> constraint_vars;
  for (const Tape& t : prob.ineq_tapes()) constraint_vars.push_back(stacked_vars(t));
  for (const Tape& t : prob.eq_tapes()) constraint_vars.push_back(stacked_vars(t));

  // Propagate ownership from x variables to the y variables they share a
  // constraint with, until nothing changes.
  for (bool changed = true; changed;) {
    changed = false;
    for (const auto& vars : constraint_vars) {
      int b = -1;
      for (int idx : vars) {
        if (owner[static_cast<std::size_t>(idx)] >= 0) {
          b = owner[static_cast<std::size_t>(idx)];
          break;
        }
      }
      if (b < 0) continue;
      for (int idx : vars) {
        if (owner[static_cast<std::size_t>(idx)] < 0) {
          owner[static_cast<std::size_t>(idx)] = b;
          changed = true;
        }
      }
    }
  }
  for (int idx = 0; idx < prob.dim(); ++idx) {
    int b = std::max(owner[static_cast<std::size_t>(idx)], 0);
    if (idx < n) {
      part.blocks[static_cast<std::size_t>(b)].x.push_back(idx);
    } else {
      part.blocks[static_cast<std::size_t>(b)].y.push_back(idx - n);
    }
  }
  part.assign_constraints(prob);
  return part;
}

void BlockPartition::assign_constraints(const CnfProblem& prob) {
  if (blocks.empty()) throw std::invalid_argument("partition has no blocks");
  std::vector<int> owner(static_cast<std::size_t>(prob.dim()), -1);
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    auto claim = [&](int idx, int limit, const char* name, int offset) {
      if (idx < 0 || idx >= limit) throw std::invalid_argument(fmt::format("{}[{}] out of range", name, idx + 1));
      int& o = owner[static_cast<std::size_t>(offset + idx)];
      if (o >= 0) throw std::invalid_argument(fmt::format("{}[{}] appears in two blocks", name, idx + 1));
      o = static_cast<int>(b);
    };
    for (int i : blocks[b].x) claim(i, prob.n(), "x", 0);
    for (int i : blocks[b].y) claim(i, prob.m(), "y", prob.n());
  }
  for (int idx = 0; idx < prob.dim(); ++idx) {
    if (owner[static_cast<std::size_t>(idx)] < 0) {
      throw std::invalid_argument(fmt::format("{}[{}] belongs to no block", idx < prob.n() ? 'x' : 'y',
                                              idx < prob.n() ? idx + 1 : idx - prob.n() + 1));
    }
  }
  auto assign = [&](std::span<const Tape> tapes, const char* kind) {
    std::vector<int> out;
    for (std::size_t c = 0; c < tapes.size(); ++c) {
      int b = -1;
      for (int idx : tapes[c].vars()) {
        int o = owner[static_cast<std::size_t>(idx)];
        if (b >= 0 && o != b) {
          throw std::invalid_argument(fmt::format("{} {} references variables of blocks {} and {}", kind, c + 1,
                                                  b + 1, o + 1));
        }
        b = o;
      }
      out.push_back(b);
    }
    return out;
  };
  ineq_block = assign(prob.ineq_tapes(), "inequality");
  eq_block = assign(prob.eq_tapes(), "equality");
}

namespace {

// A restricted to one block's coordinates: the global objective plus the
// block's own constraint terms. Other blocks' terms are constant here.
class BlockObjective {
 public:
  BlockObjective(const CnfProblem& prob, std::vector<int> vars, std::vector<int> ineqs, std::vector<int> eqs,
                 const Eigen::VectorXd& u, const Eigen::VectorXd& v, double rho, Eigen::VectorXd base)
      : prob_(prob),
        vars_(std::move(vars)),
        ineqs_(std::move(ineqs)),
        eqs_(std::move(eqs)),
        u_(u),
        v_(v),
        rho_(rho),
        full_(std::move(base)) {
    for (std::size_t k = 0; k < vars_.size(); ++k) local_[vars_[k]] = static_cast<int>(k);
  }

  Eigen::VectorXd restrict(const Eigen::VectorXd& z) const {
    Eigen::VectorXd w(static_cast<Eigen::Index>(vars_.size()));
    for (std::size_t k = 0; k < vars_.size(); ++k) w[static_cast<Eigen::Index>(k)] = z[vars_[k]];
    return w;
  }

  void scatter(const Eigen::VectorXd& w, Eigen::VectorXd& z) const {
    for (std::size_t k = 0; k < vars_.size(); ++k) z[vars_[k]] = w[static_cast<Eigen::Index>(k)];
  }

  double eval(const Eigen::VectorXd& w, Eigen::VectorXd* grad) const {
    scatter(w, full_);
    if (grad) grad->setZero(w.size());
    double total = term(prob_.objective_tape(), 1.0, grad);
    auto ineqs = prob_.ineq_tapes();
    for (int i : ineqs_) {
      const Tape& t = ineqs[static_cast<std::size_t>(i)];
      double gi = t.value(full_);
      double plus = std::max(gi, 0.0);
      total += u_[i] * gi + rho_ * plus * plus;
      if (grad) term(t, u_[i] + 2.0 * rho_ * plus, grad);
    }
    auto eqs = prob_.eq_tapes();
    for (int j : eqs_) {
      const Tape& t = eqs[static_cast<std::size_t>(j)];
      double hj = t.value(full_);
      total += v_[j] * hj + rho_ * hj * hj;
      if (grad) term(t, v_[j] + 2.0 * rho_ * hj, grad);
    }
    return total;
  }

  Objective objective() const {
    return Objective{[this](const Eigen::VectorXd& w) { return eval(w, nullptr); },
                     [this](const Eigen::VectorXd& w, Eigen::VectorXd& g) { return eval(w, &g); }};
  }

 private:
  // Adds weight * gradient of `t` restricted to the block; returns t's value.
  double term(const Tape& t, double weight, Eigen::VectorXd* grad) const {
    if (!grad) return t.value(full_);
    double value = t.value_and_gradient(full_, scratch_);
    if (weight == 0.0) return value;
    auto vars = t.vars();
    for (std::size_t k = 0; k < vars.size(); ++k) {
      auto it = local_.find(vars[k]);
      if (it != local_.end()) (*grad)[it->second] += weight * scratch_[static_cast<Eigen::Index>(k)];
    }
    return value;
  }

  const CnfProblem& prob_;
  std::vector<int> vars_, ineqs_, eqs_;
  const Eigen::VectorXd& u_;
  const Eigen::VectorXd& v_;
  double rho_;
  mutable Eigen::VectorXd full_;
  mutable Eigen::VectorXd scratch_;
  std::unordered_map<int, int> local_;
};

}  // namespace

AlpfTrace solve_decomposed(const CnfProblem& prob, const BlockPartition& partition, const AlpfConfig& cfg) {
  cfg.validate();
  BlockPartition part = partition;
  part.assign_constraints(prob);

  AlpfTrace trace;
  trace.solver = "decomposed";
  Eigen::VectorXd z = detail::start_point(prob, cfg);
  Eigen::VectorXd u = Eigen::VectorXd::Zero(prob.s());
  Eigen::VectorXd v = Eigen::VectorXd::Zero(prob.r());
  double sigma = cfg.rho0;
  int failed_in_row = 0;

  struct BlockData {
    std::vector<int> vars, ineqs, eqs;
  };
  std::vector<BlockData> blocks(part.blocks.size());
  for (std::size_t b = 0; b < part.blocks.size(); ++b) {
    for (int i : part.blocks[b].x) blocks[b].vars.push_back(i);
    for (int i : part.blocks[b].y) blocks[b].vars.push_back(prob.n() + i);
    std::sort(blocks[b].vars.begin(), blocks[b].vars.end());
  }
  for (std::size_t i = 0; i < part.ineq_block.size(); ++i) {
    if (part.ineq_block[i] >= 0) blocks[static_cast<std::size_t>(part.ineq_block[i])].ineqs.push_back(static_cast<int>(i));
  }
  for (std::size_t j = 0; j < part.eq_block.size(); ++j) {
    if (part.eq_block[j] >= 0) blocks[static_cast<std::size_t>(part.eq_block[j])].eqs.push_back(static_cast<int>(j));
  }

  for (int k = 1; k <= cfg.max_outer; ++k) {
    const double rho = 0.5 * sigma;
    const Eigen::VectorXd u_used = u, v_used = v;
    InnerResult worst;
    worst.status = InnerStatus::converged;
    int total_iterations = 0;
    bool diverged = false, any_max_iters = false;

    for (const BlockData& blk : blocks) {
      if (blk.vars.empty()) continue;
      BlockObjective obj(prob, blk.vars, blk.ineqs, blk.eqs, u_used, v_used, rho, z);
      InnerResult inner = minimize(obj.objective(), obj.restrict(z), cfg.inner);
      obj.scatter(inner.z, z);
      total_iterations += inner.iterations;
      if (inner.status == InnerStatus::diverged) diverged = true;
      if (inner.status == InnerStatus::max_iters) any_max_iters = true;
      if (diverged) break;
    }
    worst.iterations = total_iterations;
    worst.status = diverged ? InnerStatus::diverged : any_max_iters ? InnerStatus::max_iters : InnerStatus::converged;

    detail::Residuals res = detail::residuals(prob, z);
    trace.records.push_back(detail::make_record(prob, cfg, k, rho, z, u_used, v_used, res, worst));
    const IterationRecord& rec = trace.records.back();
    if (diverged) {
      trace.status = StopReason::inner_failure;
      break;
    }
    failed_in_row = any_max_iters ? failed_in_row + 1 : 0;
    if (failed_in_row >= 2) {
      trace.status = StopReason::inner_failure;
      break;
    }
    if (rec.e < cfg.eps) {
      trace.status = StopReason::approx_stop;
      break;
    }
    // Constraints of a block depend only on that block, so updating all
    // multipliers after the sweep equals updating each block right after
    // its own solve.
    u = update_u(u, res.g, rho);
    v = update_v(v, res.h, rho);
    sigma *= cfg.growth;
    if (k == cfg.max_outer) trace.status = StopReason::max_outer;
  }
  detail::finish_trace(prob, trace);
  return trace;
}

}  // namespace cnf
