#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "cnf/problems.hpp"
#include "oracles.hpp"

namespace cnf {
namespace {

TEST(Catalog, Ex7Dimensions) {
  CatalogEntry e = build(CatalogId::ex7);
  EXPECT_EQ(e.problem.n(), 2);
  EXPECT_EQ(e.problem.m(), 3);
  EXPECT_EQ(e.problem.s(), 4);
  EXPECT_EQ(e.problem.r(), 3);
  EXPECT_EQ(e.problem.reference_value(Eigen::Vector2d::Zero()), 0.0);
  EXPECT_EQ(e.start.stacked(), Eigen::VectorXd::Constant(5, 2.0));
}

TEST(Catalog, ParametrizedDimensions) {
  for (int n : {1, 3, 7}) {
    CnfProblem ex8 = build(CatalogId::ex8, CatalogParams{n}).problem;
    EXPECT_EQ(ex8.n(), n);
    EXPECT_EQ(ex8.m(), 2 * n + 1);
    CnfProblem ex9 = build(CatalogId::ex9, CatalogParams{n, 2.0}).problem;
    EXPECT_EQ(ex9.n(), n);
    EXPECT_EQ(ex9.m(), 2 * n);
    EXPECT_EQ(ex9.r(), 3 * n);
    EXPECT_EQ(ex9.s(), 0);
    CnfProblem ex4 = build(CatalogId::ex4, CatalogParams{n, 0.5}).problem;
    EXPECT_EQ(ex4.m(), 2 * n);
    EXPECT_EQ(ex4.s(), 2 * n);
  }
  CnfProblem ex3 = build(CatalogId::ex3, CatalogParams{4, 0.0, 5}).problem;
  EXPECT_EQ(ex3.n(), 4);
  EXPECT_EQ(ex3.m(), 10);
}

TEST(Catalog, Ex8ReferenceVanishesOnTheOptimalFamily) {
  CnfProblem prob = build(CatalogId::ex8).problem;
  for (double alpha : {0.0, 1.0, 3.4366, -2.5}) {
    Eigen::VectorXd xv = Eigen::VectorXd::Constant(5, alpha);
    xv[1] = -alpha;
    EXPECT_NEAR(prob.reference_value(xv), 0.0, 1e-12) << alpha;
  }
  EXPECT_DOUBLE_EQ(prob.reference_value(Eigen::VectorXd::LinSpaced(5, 1, 5)), 25.0 - 15.0);
}

TEST(Catalog, Ex9ReferenceAtTheTableRow) {
  CnfProblem prob = build(CatalogId::ex9, CatalogParams{10, 1.0}).problem;
  Eigen::VectorXd xv = Eigen::VectorXd::Zero(10);
  xv[8] = -0.9386;
  xv[9] = 2.8448;
  EXPECT_NEAR(prob.reference_value(xv), 2.0002, 1e-3);
  CnfProblem heavy = build(CatalogId::ex9, CatalogParams{10, 10.0}).problem;
  Eigen::VectorXd single = Eigen::VectorXd::Zero(10);
  single[9] = 2.0;
  EXPECT_DOUBLE_EQ(heavy.reference_value(single), 10.0);
}

TEST(Lift, Ex5) {
  CnfProblem prob = build(CatalogId::ex5).problem;
  Point p = prob.lift(Eigen::Vector2d(1, 1));
  EXPECT_TRUE(p.y.isApprox(Eigen::Vector4d(1, 2, 1, 1), 1e-15)) << p.y.transpose();
  EXPECT_EQ(prob.eq_values(p.stacked()).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_DOUBLE_EQ(prob.objective_value(p.stacked()), 3.0);
  EXPECT_DOUBLE_EQ(prob.reference_value(p.x), 3.0);
}

TEST(Lift, Ex9AtZero) {
  CnfProblem prob = build(CatalogId::ex9).problem;
  Point p = prob.lift(Eigen::VectorXd::Zero(10));
  EXPECT_EQ(p.y.head(10), Eigen::VectorXd::Zero(10));
  EXPECT_EQ(p.y.tail(10), Eigen::VectorXd::Ones(10));
  EXPECT_EQ(prob.eq_values(p.stacked()).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Lift, Ex8) {
  CnfProblem prob = build(CatalogId::ex8).problem;
  Eigen::VectorXd xv(5);
  xv << 1.5, -1.5, 1.5, -1.5, 1.5;
  Point p = prob.lift(xv);
  EXPECT_EQ(p.y.head(5), Eigen::VectorXd::Constant(5, 1.5));
  EXPECT_EQ(p.y.segment(5, 5), Eigen::VectorXd::Constant(5, 2.25));
  EXPECT_EQ(p.y[10], 1.5);
  EXPECT_DOUBLE_EQ(prob.objective_value(p.stacked()), 0.0);
}

TEST(Lift, BothEx1FormsAgree) {
  CnfProblem a = build(CatalogId::ex1a).problem;
  CnfProblem b = build(CatalogId::ex1b).problem;
  std::mt19937_64 rng(5);
  for (int k = 0; k < 100; ++k) {
    Eigen::VectorXd xv = testing::uniform_point(rng, 2, -3, 3);
    double ga = a.objective_value(a.lift(xv).stacked());
    double gb = b.objective_value(b.lift(xv).stacked());
    EXPECT_NEAR(ga, gb, 1e-12 * std::max(1.0, std::abs(ga)));
  }
}

TEST(Lift, WrongLengthIsRejected) {
  CatalogEntry e = build(CatalogId::ex7);
  EXPECT_THROW(lift(e, Eigen::VectorXd::Zero(3)), DimensionError);
}

TEST(CatalogProperty, ExactEntriesMatchTheirReference) {
  for (CatalogId id : all_catalog_ids()) {
    CnfProblem prob = build(id).problem;
    if (!prob.exact()) continue;
    EXPECT_LE(validate_exactness(prob, 1000, 77), 1e-8) << to_string(id);
  }
}

TEST(CatalogProperty, Ex2LiftIsNotExact) {
  CatalogEntry e = build(CatalogId::ex2);
  EXPECT_FALSE(e.problem.exact());
  EXPECT_FALSE(e.notes.empty());
  EXPECT_GT(validate_exactness(e.problem, 200, 3), 1e-3);
}

TEST(CatalogProperty, IndicatorLiftsReproduceTheReference) {
  std::mt19937_64 rng(19);
  for (CatalogId id : {CatalogId::ex4, CatalogId::ex9}) {
    CnfProblem prob = build(id).problem;
    for (int k = 0; k < 200; ++k) {
      Eigen::VectorXd xv = testing::uniform_point(rng, prob.n(), -2, 2);
      for (Eigen::Index i = 0; i < xv.size(); ++i) {
        if (std::uniform_int_distribution<int>(0, 2)(rng) == 0) xv[i] = 0.0;
      }
      Point p = prob.lift(xv);
      EXPECT_NEAR(prob.objective_value(p.stacked()), prob.reference_value(xv), 1e-9) << to_string(id);
    }
  }
}

TEST(CatalogProperty, EntriesAreDeterministicInTheSeed) {
  for (CatalogId id : all_catalog_ids()) {
    EXPECT_EQ(write_problem(build(id, CatalogParams{0, 0.0, 0, 9}).problem),
              write_problem(build(id, CatalogParams{0, 0.0, 0, 9}).problem));
  }
  EXPECT_NE(write_problem(build(CatalogId::ex3, CatalogParams{0, 0.0, 0, 1}).problem),
            write_problem(build(CatalogId::ex3, CatalogParams{0, 0.0, 0, 2}).problem));
}

TEST(CatalogProperty, StartsAndConfigsAreConsistent) {
  for (CatalogId id : all_catalog_ids()) {
    CatalogEntry e = build(id);
    EXPECT_NO_THROW(e.problem.check_point(e.start)) << to_string(id);
    EXPECT_NO_THROW(e.run_config.validate()) << to_string(id);
    ASSERT_TRUE(e.run_config.start.has_value());
    EXPECT_EQ(e.run_config.start->stacked(), e.start.stacked());
  }
  AlpfConfig dec = *build(CatalogId::ex9).decomposed_config;
  EXPECT_EQ(dec.eps, 1e-4);
}

TEST(Catalog, InvalidParams) {
  EXPECT_THROW(build(CatalogId::ex8, CatalogParams{-1}), std::invalid_argument);
  EXPECT_THROW(build(CatalogId::ex9, CatalogParams{10, -1.0}), std::invalid_argument);
  EXPECT_THROW(build(CatalogId::ex4, CatalogParams{3, -0.5}), std::invalid_argument);
  EXPECT_THROW(build(CatalogId::ex3, CatalogParams{2, 0.0, -4}), std::invalid_argument);
  EXPECT_THROW(build(CatalogId::ex2, CatalogParams{-2}), std::invalid_argument);
}

TEST(Catalog, IdsRoundTrip) {
  for (CatalogId id : all_catalog_ids()) EXPECT_EQ(catalog_id_from_string(to_string(id)), id);
  EXPECT_EQ(all_catalog_ids().size(), 9u);
  EXPECT_THROW(catalog_id_from_string("ex6"), std::invalid_argument);
  EXPECT_THROW(catalog_id_from_string("EX7"), std::invalid_argument);
}

TEST(Ex3Data, ShapeAndRounding) {
  Ex3Data d = ex3_data(3, 4, 11);
  EXPECT_EQ(d.a.rows(), 4);
  EXPECT_EQ(d.a.cols(), 3);
  for (Eigen::Index i = 0; i < d.b.size(); ++i) {
    EXPECT_GE(d.b[i], 0.0);
    EXPECT_LE(d.b[i], 2.0);
    EXPECT_NEAR(d.b[i] * 100, std::round(d.b[i] * 100), 1e-9);
  }
}

}  // namespace
}  // namespace cnf
