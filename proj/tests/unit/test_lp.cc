#include <random>

#include <gtest/gtest.h>

#include "cnf/lp.hpp"
#include "oracles.hpp"

namespace cnf {
namespace {

LpProblem one_var(double c, std::vector<std::pair<double, double>> ub) {
  LpProblem lp = LpProblem::with_vars(1);
  lp.c[0] = c;
  lp.A_ub.resize(static_cast<Eigen::Index>(ub.size()), 1);
  lp.b_ub.resize(static_cast<Eigen::Index>(ub.size()));
  for (std::size_t i = 0; i < ub.size(); ++i) {
    lp.A_ub(static_cast<Eigen::Index>(i), 0) = ub[i].first;
    lp.b_ub[static_cast<Eigen::Index>(i)] = ub[i].second;
  }
  return lp;
}

void expect_certified_optimal(const LpProblem& lp, const LpSolution& s, double tol) {
  ASSERT_EQ(s.status, LpStatus::optimal);
  // Primal feasibility.
  if (lp.A_ub.rows() > 0) EXPECT_LE((lp.A_ub * s.d - lp.b_ub).maxCoeff(), tol);
  if (lp.A_eq.rows() > 0) EXPECT_LE((lp.A_eq * s.d - lp.b_eq).cwiseAbs().maxCoeff(), tol);
  // Dual feasibility.
  if (s.dual_ub.size() > 0) EXPECT_GE(s.dual_ub.minCoeff(), -tol);
  Eigen::VectorXd stat = lp.c + lp.A_ub.transpose() * s.dual_ub + lp.A_eq.transpose() * s.dual_eq;
  EXPECT_LE(stat.cwiseAbs().maxCoeff(), tol);
  // Complementary slackness.
  for (Eigen::Index i = 0; i < lp.A_ub.rows(); ++i) {
    EXPECT_LE(std::abs(s.dual_ub[i] * (lp.A_ub.row(i).dot(s.d) - lp.b_ub[i])), tol);
  }
  // Strong duality.
  EXPECT_NEAR(s.objective, lp.c.dot(s.d), tol);
  EXPECT_NEAR(s.objective, s.dual_objective(lp), tol * std::max(1.0, std::abs(s.objective)));
}

void expect_valid_ray(const LpProblem& lp, const LpSolution& s) {
  ASSERT_EQ(s.status, LpStatus::unbounded);
  ASSERT_EQ(s.ray.size(), lp.num_vars());
  EXPECT_LT(lp.c.dot(s.ray), -1e-9);
  if (lp.A_ub.rows() > 0) EXPECT_LE((lp.A_ub * s.ray).maxCoeff(), 1e-9);
  if (lp.A_eq.rows() > 0) EXPECT_LE((lp.A_eq * s.ray).cwiseAbs().maxCoeff(), 1e-9);
  // The returned point is feasible, so d + t r stays feasible for every t.
  if (lp.A_ub.rows() > 0) EXPECT_LE((lp.A_ub * s.d - lp.b_ub).maxCoeff(), 1e-7);
}

TEST(Lp, NonnegativeSingleVariable) {
  LpProblem lp = LpProblem::with_vars(6);
  lp.c[5] = 1;
  lp.A_ub = Eigen::MatrixXd::Zero(1, 6);
  lp.A_ub(0, 5) = -1;
  lp.b_ub = Eigen::VectorXd::Zero(1);
  LpSolution s = solve_lp(lp);
  EXPECT_EQ(s.status, LpStatus::optimal);
  EXPECT_EQ(s.objective, 0.0);
  expect_certified_optimal(lp, s, 1e-9);
}

TEST(Lp, FreeVariableUnbounded) {
  LpProblem lp = LpProblem::with_vars(1);
  lp.c[0] = -1;
  LpSolution s = solve_lp(lp);
  expect_valid_ray(lp, s);
}

TEST(Lp, ContradictoryBoundsAreInfeasible) {
  LpSolution s = solve_lp(one_var(0, {{1, -1}, {-1, -1}}));
  EXPECT_EQ(s.status, LpStatus::infeasible);
  EXPECT_GT(s.phase1_value, 0.0);
}

TEST(Lp, BoxedVariable) {
  LpProblem lp = one_var(2, {{1, 3}, {-1, 4}});
  LpSolution s = solve_lp(lp);
  EXPECT_NEAR(s.d[0], -4, 1e-12);
  EXPECT_NEAR(s.objective, -8, 1e-12);
  expect_certified_optimal(lp, s, 1e-9);
}

TEST(Lp, EqualityRowsAndDegeneracy) {
  // min x1 + x2  s.t.  x1 - x2 = 1,  x1 >= 0,  x2 >= 0,  x1 + x2 >= 1 (redundant and degenerate).
  LpProblem lp = LpProblem::with_vars(2);
  lp.c << 1, 1;
  lp.A_eq = Eigen::RowVector2d(1, -1);
  lp.b_eq = Eigen::VectorXd::Ones(1);
  lp.A_ub.resize(3, 2);
  lp.A_ub << -1, 0, 0, -1, -1, -1;
  lp.b_ub = Eigen::Vector3d(0, 0, -1);
  LpSolution s = solve_lp(lp);
  EXPECT_NEAR(s.objective, 1.0, 1e-12);
  expect_certified_optimal(lp, s, 1e-9);
}

TEST(Lp, RejectsMalformedData) {
  LpProblem lp = LpProblem::with_vars(2);
  lp.A_ub = Eigen::MatrixXd::Zero(1, 3);
  lp.b_ub = Eigen::VectorXd::Zero(1);
  EXPECT_THROW(solve_lp(lp), std::invalid_argument);
  lp = LpProblem::with_vars(1);
  lp.c[0] = NAN;
  EXPECT_THROW(solve_lp(lp), std::invalid_argument);
  EXPECT_THROW(LpProblem::with_vars(-1), std::invalid_argument);
}

TEST(Lp, EmptyProblem) {
  LpSolution s = solve_lp(LpProblem::with_vars(0));
  EXPECT_EQ(s.status, LpStatus::optimal);
  EXPECT_EQ(s.objective, 0.0);
}

TEST(LpProperty, AgreesWithVertexEnumeration) {
  std::mt19937_64 rng(101);
  int counts[3] = {0, 0, 0};
  for (int trial = 0; trial < 200; ++trial) {
    LpProblem lp = testing::random_lp(rng, 6, 10);
    testing::OracleSolution oracle = testing::enumerate_vertices(lp);
    LpSolution s = solve_lp(lp);
    ++counts[static_cast<int>(oracle.status)];
    ASSERT_EQ(s.status, oracle.status) << "trial " << trial;
    if (s.status == LpStatus::optimal) {
      EXPECT_NEAR(s.objective, oracle.objective, 1e-7 * std::max(1.0, std::abs(oracle.objective))) << trial;
      expect_certified_optimal(lp, s, 1e-7);
    } else if (s.status == LpStatus::unbounded) {
      expect_valid_ray(lp, s);
    }
  }
  // The generator must exercise every outcome.
  EXPECT_GT(counts[0], 20);
  EXPECT_GT(counts[1], 5);
  EXPECT_GT(counts[2], 5);
}

TEST(LpProperty, ScalingTheObjectiveScalesTheValue) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    LpProblem lp = testing::random_lp(rng, 5, 8);
    LpSolution a = solve_lp(lp);
    if (a.status != LpStatus::optimal) continue;
    lp.c *= 3.0;
    LpSolution b = solve_lp(lp);
    ASSERT_EQ(b.status, LpStatus::optimal);
    EXPECT_NEAR(b.objective, 3.0 * a.objective, 1e-7 * std::max(1.0, std::abs(b.objective)));
  }
}

TEST(LpProperty, DeterministicAcrossRuns) {
  std::mt19937_64 rng(9);
  LpProblem lp = testing::random_lp(rng, 6, 10);
  LpSolution a = solve_lp(lp);
  LpSolution b = solve_lp(lp);
  EXPECT_EQ(a.status, b.status);
  EXPECT_EQ(a.d, b.d);
  EXPECT_EQ(a.iterations, b.iterations);
}

}  // namespace
}  // namespace cnf
