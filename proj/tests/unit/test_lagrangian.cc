#include <cstring>
#include <random>

#include <Eigen/LU>
#include <gtest/gtest.h>

#include "cnf/lagrangian.hpp"
#include "cnf/problems.hpp"
#include "oracles.hpp"

namespace cnf {
namespace {

Expr x(int i) { return x_var(i); }
Expr y(int i) { return y_var(i); }

Multipliers mult(std::vector<double> u, std::vector<double> v, SignMode mode = SignMode::v_free) {
  return Multipliers{Eigen::Map<Eigen::VectorXd>(u.data(), static_cast<Eigen::Index>(u.size())),
                     Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())), mode};
}

Point origin(const CnfProblem& prob) { return Point{Eigen::VectorXd::Zero(prob.n()), Eigen::VectorXd::Zero(prob.m())}; }

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

TEST(Lagrangian, ZeroMultipliersGiveTheObjective) {
  std::mt19937_64 rng(1);
  for (CatalogId id : all_catalog_ids()) {
    CnfProblem prob = build(id).problem;
    Point p = Point::split(testing::uniform_point(rng, prob.dim(), -2, 2), prob.n());
    EXPECT_TRUE(same_bits(lagrangian(prob, p, Multipliers::zero(prob)), prob.objective_value(p.stacked())))
        << to_string(id);
  }
}

TEST(Lagrangian, Ex6AtTheOrigin) {
  CnfProblem prob = build(CatalogId::ex5).problem;
  EXPECT_EQ(lagrangian(prob, origin(prob), mult({1}, {0, 0, 0, 0}, SignMode::v_nonneg)), 0.0);
}

TEST(Lagrangian, Ex7WithUnitEqualityMultipliers) {
  CnfProblem prob = build(CatalogId::ex7).problem;
  Point p{Eigen::Vector2d(2, 2), Eigen::Vector3d(2, 2, 2)};
  // g = 8 - 2.1 + 1/3 + 0 - 1 + 4, h = (16 - 2, 64 - 2, 8 - 2).
  double expected = 8.0 - 2.1 + 1.0 / 3.0 - 1.0 + 4.0 + 14.0 + 62.0 + 6.0;
  EXPECT_NEAR(lagrangian(prob, p, mult({0, 0, 0, 0}, {1, 1, 1})), expected, 1e-12);
}

TEST(Lagrangian, DimensionMismatch) {
  CnfProblem prob = build(CatalogId::ex5).problem;
  EXPECT_THROW(lagrangian(prob, origin(prob), mult({1, 2}, {0, 0, 0, 0})), std::invalid_argument);
  EXPECT_THROW(lagrangian(prob, Point{Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(4)}, Multipliers::zero(prob)),
               DimensionError);
}

TEST(Multipliers, Validation) {
  CnfProblem prob = build(CatalogId::ex5).problem;
  EXPECT_THROW(mult({-1}, {0, 0, 0, 0}).validate(prob), std::invalid_argument);
  EXPECT_THROW(mult({1}, {0, -1, 0, 0}, SignMode::v_nonneg).validate(prob), std::invalid_argument);
  EXPECT_NO_THROW(mult({1}, {0, -1, 0, 0}, SignMode::v_free).validate(prob));
}

TEST(Augmented, EqualsLagrangianAtFeasiblePoints) {
  CnfProblem prob = build(CatalogId::ex5).problem;
  Point p = prob.lift(Eigen::Vector2d(0.7, -1.3));
  Multipliers m = mult({0.4}, {1, -2, 0.5, 3});
  EXPECT_NEAR(augmented(prob, p, m, {10.0}), lagrangian(prob, p, m), 1e-12);
}

TEST(Augmented, Ex6AtTheOriginForAnyRho) {
  CnfProblem prob = build(CatalogId::ex5).problem;
  for (double rho : {0.1, 1.0, 1e3}) {
    EXPECT_EQ(augmented(prob, origin(prob), mult({1}, {0, 0, 0, 0}, SignMode::v_nonneg), {rho}), 0.0);
  }
}

TEST(Augmented, SingleViolatedInequality) {
  CnfSpec spec;
  spec.n = 1;
  spec.objective = pow(x(0), 2);
  spec.ineqs = {x(0) - 1.0};
  CnfProblem prob(spec);
  Point p{Eigen::VectorXd::Constant(1, 1.5), Eigen::VectorXd(0)};
  EXPECT_DOUBLE_EQ(augmented(prob, p, Multipliers::zero(prob), {10.0}), 2.25 + 2.5);
  EXPECT_THROW(augmented(prob, p, Multipliers::zero(prob), {0.0}), std::invalid_argument);
}

TEST(AugmentedGradient, FeasibleInteriorPointWithZeroMultipliers) {
  CnfProblem prob = build(CatalogId::ex7).problem;
  Point p = prob.lift(Eigen::Vector2d(0.5, -1.0));
  EXPECT_TRUE(augmented_gradient(prob, p, Multipliers::zero(prob), {10.0})
                  .isApprox(prob.objective_gradient(p.stacked()), 1e-12));
}

TEST(AugmentedGradient, Ex6StationaryAtTheOrigin) {
  CnfProblem prob = build(CatalogId::ex5).problem;
  Eigen::VectorXd g = augmented_gradient(prob, origin(prob), mult({1}, {0, 0, 0, 0}), {10.0});
  EXPECT_EQ(g.norm(), 0.0) << g.transpose();
}

TEST(AugmentedGradient, MatchesFiniteDifferencesOnEx7) {
  CnfProblem prob = build(CatalogId::ex7).problem;
  std::mt19937_64 rng(4);
  for (int k = 0; k < 50; ++k) {
    Eigen::VectorXd z = testing::uniform_point(rng, prob.dim(), -2, 2);
    Multipliers m{testing::uniform_point(rng, prob.s(), 0, 3), testing::uniform_point(rng, prob.r(), -3, 3)};
    auto f = [&](const Eigen::VectorXd& w) { return augmented(prob, Point::split(w, prob.n()), m, {10.0}); };
    Eigen::VectorXd fd = testing::fd_gradient(f, z);
    Eigen::VectorXd ad = augmented_gradient(prob, Point::split(z, prob.n()), m, {10.0});
    EXPECT_LE((ad - fd).norm(), 1e-6 * fd.norm() + 1e-8 * std::max(1.0, std::abs(f(z))));
  }
}

TEST(AugmentedGradient, ActiveInequalityFromBothSides) {
  CnfSpec spec;
  spec.n = 2;
  spec.objective = pow(x(0), 2) + x(1);
  spec.ineqs = {x(0) + x(1) - 1.0};
  CnfProblem prob(spec);
  Multipliers m{Eigen::VectorXd::Constant(1, 0.5), Eigen::VectorXd(0)};
  for (double shift : {-1e-3, 0.0, 1e-3}) {
    Eigen::VectorXd z(2);
    z << 0.25 + shift, 0.75;
    auto f = [&](const Eigen::VectorXd& w) { return augmented(prob, Point::split(w, 2), m, {7.0}); };
    Eigen::VectorXd fd = testing::fd_gradient(f, z, 1e-7);
    Eigen::VectorXd ad = augmented_gradient(prob, Point::split(z, 2), m, {7.0});
    EXPECT_LE((ad - fd).norm(), 1e-6 * std::max(1.0, fd.norm())) << "shift " << shift;
  }
}

TEST(Penalty, FeasiblePointGivesObjective) {
  CnfProblem prob = build(CatalogId::ex8).problem;
  Point p = prob.lift(Eigen::VectorXd::LinSpaced(5, -2, 2));
  EXPECT_NEAR(penalty(prob, p, {10.0}), prob.objective_value(p.stacked()), 1e-12);
}

TEST(Penalty, MatchesAugmentedWithZeroMultipliers) {
  std::mt19937_64 rng(6);
  CnfProblem prob = build(CatalogId::ex9).problem;
  for (int k = 0; k < 20; ++k) {
    Point p = Point::split(testing::uniform_point(rng, prob.dim(), -2, 2), prob.n());
    EXPECT_TRUE(same_bits(penalty(prob, p, {3.5}), augmented(prob, p, Multipliers::zero(prob), {3.5})));
  }
}

TEST(Penalty, Ex8OneViolatedEquality) {
  CnfProblem prob = build(CatalogId::ex8).problem;
  Point p = prob.lift(Eigen::VectorXd::Constant(5, 1.5));
  p.y[5] += 0.1;  // h_1 = y_1^2 - y_6 = -0.1 and h_6 = x_1^2 - y_6 = -0.1
  double g = prob.objective_value(p.stacked());
  EXPECT_NEAR(penalty(prob, p, {10.0}), g + 10.0 * (0.01 + 0.01), 1e-12);

  Point q = prob.lift(Eigen::VectorXd::Constant(5, 1.5));
  q.x[0] = std::sqrt(1.5 * 1.5 + 0.1);  // only h_6 = 0.1 is violated
  EXPECT_NEAR(penalty(prob, q, {10.0}), prob.objective_value(q.stacked()) + 0.1, 1e-12);
}

TEST(AugmentedProperty, DominatesLagrangianAndGrowsWithRho) {
  std::mt19937_64 rng(12);
  for (CatalogId id : all_catalog_ids()) {
    CnfProblem prob = build(id).problem;
    for (int k = 0; k < 30; ++k) {
      Point p = Point::split(testing::uniform_point(rng, prob.dim(), -2, 2), prob.n());
      Multipliers m{testing::uniform_point(rng, prob.s(), 0, 2), testing::uniform_point(rng, prob.r(), -2, 2)};
      double L = lagrangian(prob, p, m);
      double a1 = augmented(prob, p, m, {1.0});
      double a2 = augmented(prob, p, m, {10.0});
      EXPECT_GT(a1, L) << to_string(id);  // random points are infeasible
      EXPECT_GE(a2, a1) << to_string(id);
    }
    Point feasible = prob.lift(testing::uniform_point(rng, prob.n(), -2, 2));
    Multipliers m{testing::uniform_point(rng, prob.s(), 0, 2), testing::uniform_point(rng, prob.r(), -2, 2)};
    double pen = augmented(prob, feasible, m, {10.0}) - lagrangian(prob, feasible, m);
    EXPECT_NEAR(pen, 0.0, 1e-9) << to_string(id);
  }
}

TEST(LagrangianProperty, SignModesAgreeForNonnegativeV) {
  std::mt19937_64 rng(13);
  for (CatalogId id : all_catalog_ids()) {
    CnfProblem prob = build(id).problem;
    Point p = Point::split(testing::uniform_point(rng, prob.dim(), -2, 2), prob.n());
    Eigen::VectorXd u = testing::uniform_point(rng, prob.s(), 0, 2);
    Eigen::VectorXd v = testing::uniform_point(rng, prob.r(), 0, 2);
    double free = lagrangian(prob, p, Multipliers{u, v, SignMode::v_free});
    double nonneg = lagrangian(prob, p, Multipliers{u, v, SignMode::v_nonneg});
    EXPECT_TRUE(same_bits(free, nonneg)) << to_string(id);
  }
}

TEST(DualValue, Ex6AtTheSaddleMultiplier) {
  CnfProblem prob = build(CatalogId::ex5).problem;
  InnerConfig cfg;
  cfg.method = InnerMethod::newton_fd;
  DualResult r = dual_value(prob, mult({1}, {0, 0, 0, 0}, SignMode::v_nonneg), cfg, prob.lift(Eigen::Vector2d(1, 1)));
  ASSERT_EQ(r.status, DualStatus::value);
  EXPECT_NEAR(r.value, 0.0, 1e-6);
}

TEST(DualValue, Ex6OffTheSaddleMultiplierIsUnbounded) {
  CnfProblem prob = build(CatalogId::ex5).problem;
  DualResult r = dual_value(prob, mult({0.5}, {0, 0, 0, 0}, SignMode::v_nonneg), InnerConfig{}, origin(prob));
  EXPECT_EQ(r.status, DualStatus::unbounded_below);
}

TEST(DualValue, UnboundedFromALiftedStartWithGradientDescent) {
  // A unit gradient step maps x = (1, 1) to (-1, -1); the solve must not cycle there.
  CnfProblem prob = build(CatalogId::ex5).problem;
  DualResult r = dual_value(prob, mult({0.5}, {0, 0, 0, 0}, SignMode::v_nonneg), InnerConfig{},
                            prob.lift(Eigen::Vector2d(1, 1)));
  EXPECT_EQ(r.status, DualStatus::unbounded_below) << to_string(r.inner_status);
}

TEST(DualValue, StrictlyConvexQuadratic) {
  // (x1 - 1)^2 + 2 (x2 + 3)^2 + x1 x2 / 2: minimum from the 2x2 normal equations.
  CnfSpec spec;
  spec.n = 2;
  spec.objective = pow(x(0) - 1.0, 2) + 2.0 * pow(x(1) + 3.0, 2) + 0.5 * x(0) * x(1);
  CnfProblem prob(spec);
  Eigen::Matrix2d H;
  H << 2.0, 0.5, 0.5, 4.0;
  Eigen::Vector2d b(2.0, -12.0);
  Eigen::Vector2d xs = H.inverse() * b;
  double expected = prob.objective_value(xs);
  DualResult r = dual_value(prob, Multipliers::zero(prob), InnerConfig{}, origin(prob));
  ASSERT_EQ(r.status, DualStatus::value);
  EXPECT_NEAR(r.value, expected, 1e-9);
  EXPECT_TRUE(r.argmin.x.isApprox(xs, 1e-6));
}

TEST(DualProperty, WeakDualityOnFeasiblePoints) {
  std::mt19937_64 rng(23);
  InnerConfig cfg;
  cfg.method = InnerMethod::newton_fd;
  cfg.max_iters = 500;
  for (CatalogId id : all_catalog_ids()) {
    CnfProblem prob = build(id).problem;
    int finite = 0;
    for (int k = 0; k < 200; ++k) {
      Point p = prob.lift(testing::uniform_point(rng, prob.n(), -2, 2));
      Multipliers m{testing::uniform_point(rng, prob.s(), 0, 2), testing::uniform_point(rng, prob.r(), -2, 2)};
      DualResult r = dual_value(prob, m, cfg, p);
      if (r.status != DualStatus::value) continue;
      ++finite;
      EXPECT_LE(r.value, prob.objective_value(p.stacked()) + 1e-6) << to_string(id);
    }
    RecordProperty(std::string(to_string(id)) + "_finite", finite);
  }
}

}  // namespace
}  // namespace cnf
