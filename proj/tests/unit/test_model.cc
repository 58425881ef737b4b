#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "cnf/model.hpp"
#include "cnf/problems.hpp"
#include "oracles.hpp"

namespace cnf {
namespace {

Expr x(int i) { return x_var(i); }
Expr y(int i) { return y_var(i); }

Point pt(std::vector<double> xs, std::vector<double> ys) {
  return Point{Eigen::Map<Eigen::VectorXd>(xs.data(), static_cast<Eigen::Index>(xs.size())),
               Eigen::Map<Eigen::VectorXd>(ys.data(), static_cast<Eigen::Index>(ys.size()))};
}

CnfProblem ex5() { return build(CatalogId::ex5).problem; }

TEST(CheckFeasible, Ex5OriginIsInXg) {
  FeasibilityReport r = check_feasible(ex5(), pt({0, 0}, {0, 0, 0, 0}), 1e-9);
  EXPECT_TRUE(r.in_xf);
  EXPECT_EQ(r.max_ineq_violation, 0.0);
  EXPECT_EQ(r.max_eq_residual, 0.0);
  ASSERT_TRUE(r.exactness_gap.has_value());
  EXPECT_EQ(*r.exactness_gap, 0.0);
}

TEST(CheckFeasible, Ex5WrongLiftIsRejected) {
  // h1 = 0.5 (1+1)^2 - 2 - 0.5*2 = -1, h2 = h3 = 0, h4 = 1^6 - 4 = -3.
  FeasibilityReport r = check_feasible(ex5(), pt({1, 1}, {2, 2, 4, 1}), 1e-6);
  EXPECT_FALSE(r.in_xf);
  EXPECT_DOUBLE_EQ(r.max_eq_residual, 3.0);
}

TEST(CheckFeasible, EmptyConstraintSet) {
  CnfSpec spec;
  spec.n = 2;
  spec.objective = pow(x(0), 2) + x(1);
  CnfProblem prob(spec);
  FeasibilityReport r = check_feasible(prob, pt({3, -1}, {}), 1e-12);
  EXPECT_TRUE(r.in_xf);
  EXPECT_EQ(r.max_ineq_violation, 0.0);
  EXPECT_EQ(r.max_eq_residual, 0.0);
  EXPECT_FALSE(r.exactness_gap.has_value());
}

TEST(CheckFeasible, ToleranceBoundary) {
  CnfSpec spec;
  spec.n = 1;
  spec.objective = x(0);
  spec.ineqs = {x(0) - 1.0};
  CnfProblem prob(spec);
  EXPECT_TRUE(check_feasible(prob, pt({1.5}, {}), 0.5).in_xf);
  EXPECT_FALSE(check_feasible(prob, pt({1.5}, {}), 0.25).in_xf);
  EXPECT_THROW(check_feasible(prob, pt({1.5}, {}), 0.0), std::invalid_argument);
  EXPECT_THROW(check_feasible(prob, pt({1, 2}, {}), 1e-6), DimensionError);
}

TEST(ValidateExactness, Ex3AndEx5) {
  EXPECT_LE(validate_exactness(build(CatalogId::ex3).problem, 100, 1), 1e-9);
  EXPECT_LE(validate_exactness(ex5(), 100, 1), 1e-9);
}

TEST(ValidateExactness, ConstantWithEmptyLift) {
  CnfSpec spec;
  spec.n = 1;
  spec.objective = Expr::constant(4);
  spec.reference = Expr::constant(4);
  spec.exact = true;
  spec.lift = [](const Eigen::VectorXd&) { return Eigen::VectorXd(0); };
  EXPECT_EQ(validate_exactness(CnfProblem(spec), 50, 3), 0.0);
}

TEST(ValidateExactness, NeedsLiftAndReference) {
  CnfSpec spec;
  spec.n = 1;
  spec.objective = x(0);
  EXPECT_THROW(validate_exactness(CnfProblem(spec), 10, 1), std::invalid_argument);
  spec.lift = [](const Eigen::VectorXd&) { return Eigen::VectorXd(0); };
  EXPECT_THROW(validate_exactness(CnfProblem(spec), 10, 1), std::invalid_argument);
}

TEST(SampleConvexity, Ex7ComponentsOnItsBox) {
  EXPECT_EQ(sample_convexity(build(CatalogId::ex7).problem, 500, 2, Box{-3, 3}), 0);
}

TEST(SampleConvexity, ConcaveComponentIsFlagged) {
  CnfSpec spec;
  spec.n = 1;
  spec.objective = x(0);
  spec.ineqs = {-pow(x(0), 2)};
  EXPECT_GT(sample_convexity(CnfProblem(spec), 100, 1), 0);
}

TEST(SampleConvexity, AffineComponentsPass) {
  CnfSpec spec;
  spec.n = 3;
  spec.m = 1;
  spec.objective = 3.0 * x(0) - 2.0 * x(1) + 0.5;
  spec.ineqs = {x(2) - y(0)};
  spec.eqs = {x(0) + x(1) + x(2) - 7.0};
  EXPECT_EQ(sample_convexity(CnfProblem(spec), 500, 4), 0);
}

TEST(SampleConvexity, EveryCatalogEntry) {
  for (CatalogId id : all_catalog_ids()) {
    EXPECT_EQ(sample_convexity(build(id).problem, 300, 9), 0) << to_string(id);
  }
}

TEST(CnfProblem, RejectsNonsmoothComponents) {
  CnfSpec spec;
  spec.n = 1;
  spec.objective = abs(x(0));
  EXPECT_THROW(CnfProblem{spec}, DialectError);
  spec.objective = x(0);
  spec.eqs = {Expr::norm0(Block::x)};
  EXPECT_THROW(CnfProblem{spec}, DialectError);
}

TEST(CnfProblem, ReferenceMustUseOnlyX) {
  CnfSpec spec;
  spec.n = 1;
  spec.m = 1;
  spec.objective = x(0) + y(0);
  spec.reference = abs(x(0)) + y(0);
  EXPECT_THROW(CnfProblem{spec}, std::invalid_argument);
}

TEST(CnfProblem, IndexBeyondDeclaredDimension) {
  CnfSpec spec;
  spec.n = 1;
  spec.objective = x(1);
  EXPECT_THROW(CnfProblem{spec}, DimensionError);
}

TEST(CnfProblem, JacobiansMatchFiniteDifferences) {
  CnfProblem prob = build(CatalogId::ex7).problem;
  std::mt19937_64 rng(3);
  Eigen::VectorXd z = testing::uniform_point(rng, prob.dim(), -2, 2);
  Eigen::MatrixXd J = prob.eq_jacobian(z);
  for (int j = 0; j < prob.r(); ++j) {
    auto hj = [&](const Eigen::VectorXd& w) { return prob.eq_values(w)[j]; };
    EXPECT_TRUE(J.row(j).transpose().isApprox(testing::fd_gradient(hj, z), 1e-6));
  }
}

TEST(LiftProperty, LiftPointsAreFeasible) {
  std::mt19937_64 rng(17);
  for (CatalogId id : all_catalog_ids()) {
    CnfProblem prob = build(id).problem;
    for (int k = 0; k < 50; ++k) {
      Point p = prob.lift(testing::uniform_point(rng, prob.n(), prob.box().lo, prob.box().hi));
      EXPECT_TRUE(check_feasible(prob, p, 1e-10).in_xf) << to_string(id);
    }
  }
}

TEST(ProblemText, ReadsTheDocumentedFormat) {
  std::istringstream in(R"(# lifted |x1 x2|^(1/3)
problem "demo"
var x 2
aux y 1
objective: y[1] + x[1]^2   # trailing comment
ineq: -y[1]
eq: y[1]^2 - x[1]*x[1]
reference: abs(x[1]) + x[1]^2
exact: true
box: -2 2
)");
  CnfProblem prob = read_problem(in);
  EXPECT_EQ(prob.name(), "demo");
  EXPECT_EQ(prob.n(), 2);
  EXPECT_EQ(prob.m(), 1);
  EXPECT_EQ(prob.s(), 1);
  EXPECT_EQ(prob.r(), 1);
  EXPECT_TRUE(prob.exact());
  EXPECT_TRUE(prob.has_declared_box());
  EXPECT_EQ(prob.box().lo, -2.0);
  EXPECT_DOUBLE_EQ(prob.reference_value(Eigen::Vector2d(-3, 0)), 12.0);
}

TEST(ProblemText, ErrorsCarryFilePositions) {
  auto fails_at = [](const std::string& text, int line) {
    std::istringstream in(text);
    try {
      read_problem(in);
    } catch (const ParseError& e) {
      return e.line() == line;
    }
    return false;
  };
  EXPECT_TRUE(fails_at("var x 2\nobjective: x[3]\n", 2));
  EXPECT_TRUE(fails_at("var x 2\nobjective: x[1] +\n", 2));
  EXPECT_TRUE(fails_at("var x 2\nobjective: x[1]\nexact: maybe\n", 3));
  EXPECT_TRUE(fails_at("var x 2\nobjective: x[1]\nobjective: x[2]\n", 3));
  EXPECT_TRUE(fails_at("var x 2\nfrobnicate: 3\n", 2));
  // Declarations may come in any order, so a missing one is reported past the last line.
  EXPECT_TRUE(fails_at("objective: x[1]\n", 2));

  std::istringstream column_case("var x 1\nobjective:  x[1] + * 2\n");
  try {
    read_problem(column_case);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2);
    EXPECT_EQ(e.column(), 20);
  }
}

TEST(ProblemText, NonsmoothObjectiveIsRejected) {
  std::istringstream in("var x 1\nobjective: abs(x[1])\n");
  EXPECT_THROW(read_problem(in), DialectError);
}

TEST(ProblemText, RoundTripsEveryCatalogEntry) {
  for (CatalogId id : all_catalog_ids()) {
    CnfProblem prob = build(id).problem;
    std::string text = write_problem(prob);
    std::istringstream in(text);
    CnfProblem back = read_problem(in);
    EXPECT_EQ(write_problem(back), text) << to_string(id);
    EXPECT_EQ(back.n(), prob.n());
    EXPECT_EQ(back.m(), prob.m());
    EXPECT_EQ(back.exact(), prob.exact());
    std::mt19937_64 rng(2);
    Eigen::VectorXd z = testing::uniform_point(rng, prob.dim(), -1, 1);
    EXPECT_DOUBLE_EQ(back.objective_value(z), prob.objective_value(z));
    EXPECT_TRUE(back.eq_values(z).isApprox(prob.eq_values(z)) || prob.r() == 0);
  }
}

TEST(ProblemText, GoldenFilesMatchTheCatalog) {
  for (CatalogId id : all_catalog_ids()) {
    std::string path = std::string(CNF_SOURCE_DIR) + "/problems/" + std::string(to_string(id)) + ".cnf";
    std::ifstream in(path);
    ASSERT_TRUE(in) << path;
    std::stringstream buffer;
    buffer << in.rdbuf();
    EXPECT_EQ(buffer.str(), write_problem(build(id).problem)) << path;
  }
}

}  // namespace
}  // namespace cnf
