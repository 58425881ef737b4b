#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/LU>

#include "cnf/lp.hpp"

namespace cnf {

LpProblem LpProblem::with_vars(int vars) {
  if (vars < 0) throw std::invalid_argument("negative LP variable count");
  return LpProblem{Eigen::VectorXd::Zero(vars), Eigen::MatrixXd(0, vars), Eigen::VectorXd(0),
                   Eigen::MatrixXd(0, vars), Eigen::VectorXd(0)};
}

void LpProblem::validate() const {
  const Eigen::Index n = c.size();
  if (A_ub.cols() != n || A_eq.cols() != n) throw std::invalid_argument("LP matrix column count differs from c");
  if (A_ub.rows() != b_ub.size()) throw std::invalid_argument("A_ub rows differ from b_ub length");
  if (A_eq.rows() != b_eq.size()) throw std::invalid_argument("A_eq rows differ from b_eq length");
  if (!c.allFinite() || !A_ub.allFinite() || !b_ub.allFinite() || !A_eq.allFinite() || !b_eq.allFinite()) {
    throw std::invalid_argument("LP data must be finite");
  }
}

std::string_view to_string(LpStatus s) {
  switch (s) {
    case LpStatus::optimal:
      return "optimal";
    case LpStatus::unbounded:
      return "unbounded";
    case LpStatus::infeasible:
      return "infeasible";
  }
  return "?";
}

double LpSolution::dual_objective(const LpProblem& lp) const {
  return -lp.b_ub.dot(dual_ub) - lp.b_eq.dot(dual_eq);
}

namespace {

constexpr double kPivotTol = 1e-10;
constexpr double kOptTol = 1e-9;
constexpr int kIterationGuard = 100000;

// Standard form min cs^T x, A x = b, x >= 0 over columns
// [d+ (nv) | d- (nv) | slacks (mu) | artificials (na)].
class Simplex {
 public:
  explicit Simplex(const LpProblem& lp) : lp_(lp) {
    nv_ = lp.num_vars();
    mu_ = static_cast<int>(lp.A_ub.rows());
    me_ = static_cast<int>(lp.A_eq.rows());
    rows_ = mu_ + me_;
    sign_.assign(static_cast<std::size_t>(rows_), 1.0);

    std::vector<int> needs_artificial;
    for (int i = 0; i < rows_; ++i) {
      double rhs = i < mu_ ? lp.b_ub[i] : lp.b_eq[i - mu_];
      if (rhs < 0) sign_[static_cast<std::size_t>(i)] = -1.0;
      if (i >= mu_ || rhs < 0) needs_artificial.push_back(i);
    }
    na_ = static_cast<int>(needs_artificial.size());
    cols_ = 2 * nv_ + mu_ + na_;

    A_ = Eigen::MatrixXd::Zero(rows_, cols_);
    b_.resize(rows_);
    for (int i = 0; i < rows_; ++i) {
      double s = sign_[static_cast<std::size_t>(i)];
      Eigen::RowVectorXd row = i < mu_ ? Eigen::RowVectorXd(lp.A_ub.row(i)) : Eigen::RowVectorXd(lp.A_eq.row(i - mu_));
      A_.block(i, 0, 1, nv_) = s * row;
      A_.block(i, nv_, 1, nv_) = -s * row;
      if (i < mu_) A_(i, 2 * nv_ + i) = s;
      b_[i] = s * (i < mu_ ? lp.b_ub[i] : lp.b_eq[i - mu_]);
    }
    basis_.assign(static_cast<std::size_t>(rows_), -1);
    for (int i = 0; i < mu_; ++i) {
      if (sign_[static_cast<std::size_t>(i)] > 0) basis_[static_cast<std::size_t>(i)] = 2 * nv_ + i;
    }
    for (int k = 0; k < na_; ++k) {
      int row = needs_artificial[static_cast<std::size_t>(k)];
      A_(row, first_artificial() + k) = 1.0;
      basis_[static_cast<std::size_t>(row)] = first_artificial() + k;
    }
    cost_ = Eigen::VectorXd::Zero(cols_);
    cost_.head(nv_) = lp.c;
    cost_.segment(nv_, nv_) = -lp.c;
  }

  LpSolution solve() {
    LpSolution sol;
    // Tableau rows hold B^-1 A | B^-1 b; the initial basis is the identity.
    T_ = Eigen::MatrixXd(rows_, cols_ + 1);
    T_.leftCols(cols_) = A_;
    T_.col(cols_) = b_;

    if (na_ > 0) {
      Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(cols_);
      phase1.tail(na_).setOnes();
      int ignored = -1;
      run(phase1, /*allow_artificial=*/true, ignored, sol.iterations);
      double value = 0.0;
      for (int i = 0; i < rows_; ++i) {
        if (is_artificial(basis_[static_cast<std::size_t>(i)])) value += T_(i, cols_);
      }
      double threshold = 1e-8 * std::max(1.0, b_.size() > 0 ? b_.cwiseAbs().maxCoeff() : 0.0);
      if (value > threshold) {
        sol.status = LpStatus::infeasible;
        sol.phase1_value = value;
        return sol;
      }
      drive_out_artificials();
    }

    int unbounded_col = -1;
    run(cost_, /*allow_artificial=*/false, unbounded_col, sol.iterations);
    Eigen::VectorXd x = primal();
    sol.d = x.head(nv_) - x.segment(nv_, nv_);
    if (unbounded_col >= 0) {
      sol.status = LpStatus::unbounded;
      Eigen::VectorXd dir = Eigen::VectorXd::Zero(cols_);
      dir[unbounded_col] = 1.0;
      for (int i = 0; i < rows_; ++i) dir[basis_[static_cast<std::size_t>(i)]] -= T_(i, unbounded_col);
      sol.ray = dir.head(nv_) - dir.segment(nv_, nv_);
      sol.objective = -std::numeric_limits<double>::infinity();
      return sol;
    }
    sol.status = LpStatus::optimal;
    sol.objective = lp_.c.dot(sol.d);
    duals(sol);
    return sol;
  }

 private:
  int first_artificial() const { return 2 * nv_ + mu_; }
  bool is_artificial(int col) const { return col >= first_artificial(); }

  void pivot(int row, int col) {
    T_.row(row) /= T_(row, col);
    for (int i = 0; i < rows_; ++i) {
      if (i != row && T_(i, col) != 0.0) T_.row(i) -= T_(i, col) * T_.row(row);
    }
    basis_[static_cast<std::size_t>(row)] = col;
  }

  // Bland's rule: lowest-index improving column, lowest-index leaving basic
  // variable among ratio ties. Sets `unbounded_col` when a column has no
  // positive entry.
  void run(const Eigen::VectorXd& cost, bool allow_artificial, int& unbounded_col, int& iterations) {
    unbounded_col = -1;
    const int limit = allow_artificial ? cols_ : first_artificial();
    for (;;) {
      if (++iterations > kIterationGuard) throw std::logic_error("simplex iteration guard exceeded");
      int entering = -1;
      for (int j = 0; j < limit; ++j) {
        double reduced = cost[j];
        for (int i = 0; i < rows_; ++i) reduced -= cost[basis_[static_cast<std::size_t>(i)]] * T_(i, j);
        if (reduced < -kOptTol) {
          entering = j;
          break;
        }
      }
      if (entering < 0) return;
      int leaving = -1;
      double best = 0.0;
      for (int i = 0; i < rows_; ++i) {
        double a = T_(i, entering);
        if (a <= kPivotTol) continue;
        double ratio = std::max(T_(i, cols_), 0.0) / a;
        if (leaving < 0 || ratio < best - 1e-12 ||
            (ratio <= best + 1e-12 &&
             basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(leaving)])) {
          leaving = i;
          best = ratio;
        }
      }
      if (leaving < 0) {
        unbounded_col = entering;
        return;
      }
      pivot(leaving, entering);
    }
  }

  void drive_out_artificials() {
    for (int i = 0; i < rows_; ++i) {
      if (!is_artificial(basis_[static_cast<std::size_t>(i)])) continue;
      int best = -1;
      for (int j = 0; j < first_artificial(); ++j) {
        if (std::abs(T_(i, j)) > kPivotTol && (best < 0 || std::abs(T_(i, j)) > std::abs(T_(i, best)))) best = j;
      }
      if (best >= 0) pivot(i, best);
      // A row with no usable pivot is redundant; its artificial stays basic
      // at zero and never re-enters.
    }
  }

  Eigen::VectorXd primal() const {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(cols_);
    for (int i = 0; i < rows_; ++i) x[basis_[static_cast<std::size_t>(i)]] = T_(i, cols_);
    return x;
  }

  void duals(LpSolution& sol) const {
    sol.dual_ub = Eigen::VectorXd::Zero(mu_);
    sol.dual_eq = Eigen::VectorXd::Zero(me_);
    if (rows_ == 0) return;
    Eigen::MatrixXd basis_matrix(rows_, rows_);
    Eigen::VectorXd cb(rows_);
    for (int i = 0; i < rows_; ++i) {
      int col = basis_[static_cast<std::size_t>(i)];
      basis_matrix.col(i) = A_.col(col);
      cb[i] = is_artificial(col) ? 0.0 : cost_[col];
    }
    Eigen::VectorXd y = basis_matrix.transpose().fullPivLu().solve(cb);
    for (int i = 0; i < mu_; ++i) sol.dual_ub[i] = -y[i] * sign_[static_cast<std::size_t>(i)];
    for (int i = 0; i < me_; ++i) sol.dual_eq[i] = -y[mu_ + i] * sign_[static_cast<std::size_t>(mu_ + i)];
  }

  const LpProblem& lp_;
  int nv_ = 0, mu_ = 0, me_ = 0, rows_ = 0, na_ = 0, cols_ = 0;
  std::vector<double> sign_;
  std::vector<int> basis_;
  Eigen::MatrixXd A_;
  Eigen::VectorXd b_;
  Eigen::VectorXd cost_;
  Eigen::MatrixXd T_;
};

}  // namespace

LpSolution solve_lp(const LpProblem& lp) {
  lp.validate();
  return Simplex(lp).solve();
}

}  // namespace cnf
