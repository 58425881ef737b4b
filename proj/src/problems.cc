#include <cmath>
#include <random>

#include <fmt/format.h>

#include "cnf/problems.hpp"

namespace cnf {

namespace {

constexpr std::pair<CatalogId, std::string_view> kKeys[] = {
    {CatalogId::ex1a, "ex1a"}, {CatalogId::ex1b, "ex1b"}, {CatalogId::ex2, "ex2"},
    {CatalogId::ex3, "ex3"},   {CatalogId::ex4, "ex4"},   {CatalogId::ex5, "ex5"},
    {CatalogId::ex7, "ex7"},   {CatalogId::ex8, "ex8"},   {CatalogId::ex9, "ex9"},
};

Expr x(int i) { return x_var(i); }
Expr y(int i) { return y_var(i); }
Expr sq(Expr e) { return pow(std::move(e), 2); }

// sum_i c_i x_i, skipping zero coefficients.
Expr linear(const Eigen::VectorXd& c) {
  std::vector<Expr> terms;
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    if (c[i] == 0.0) continue;
    terms.push_back(c[i] == 1.0 ? x(static_cast<int>(i)) : c[i] * x(static_cast<int>(i)));
  }
  return sum(std::move(terms));
}

double round2(double v) { return std::round(v * 100.0) / 100.0; }

// Zero means unset; other invalid values are left for require() to reject.
int or_default(int v, int fallback) { return v != 0 ? v : fallback; }
double or_default(double v, double fallback) { return v != 0.0 ? v : fallback; }

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

Point stacked_start(const CnfProblem& prob, const Eigen::VectorXd& z) { return Point::split(z, prob.n()); }

AlpfConfig run_config_for(double eps, double rho0, double growth, const Point& start,
                 InnerMethod method = InnerMethod::newton_fd) {
  AlpfConfig cfg;
  cfg.inner.method = method;
  cfg.eps = eps;
  cfg.rho0 = rho0;
  cfg.growth = growth;
  cfg.start = start;
  return cfg;
}

CatalogEntry make_entry(CatalogId id, const CnfProblem& prob, const Point& start, AlpfConfig cfg) {
  return CatalogEntry{id, prob, start, std::move(cfg), std::nullopt, std::nullopt, {}, {}};
}

// |x1 x2|^(1/3) + x1^2 + x2^2 through y1 = x1 x2, y3 = y1^2, y4^6 = y3.
CatalogEntry build_ex1(CatalogId id, bool second_form) {
  CnfSpec spec;
  spec.name = std::string(to_string(id));
  spec.n = 2;
  spec.m = 4;
  spec.objective = y(3) + sq(x(0)) + sq(x(1));
  spec.ineqs = {-y(3)};
  if (second_form) {
    spec.eqs = {0.25 * sq(x(0) + x(1)) - y(0) - 0.25 * y(1), sq(x(0) - x(1)) - y(1)};
  } else {
    spec.eqs = {0.5 * sq(x(0) + x(1)) - y(0) - 0.5 * y(1), sq(x(0)) + sq(x(1)) - y(1)};
  }
  spec.eqs.push_back(sq(y(0)) - y(2));
  spec.eqs.push_back(pow(y(3), 6) - y(2));
  spec.reference = pow(abs(x(0) * x(1)), 1.0 / 3.0) + sq(x(0)) + sq(x(1));
  spec.exact = true;
  spec.lift = [second_form](const Eigen::VectorXd& v) {
    Eigen::VectorXd out(4);
    double prod = v[0] * v[1];
    out[0] = prod;
    out[1] = second_form ? (v[0] - v[1]) * (v[0] - v[1]) : v[0] * v[0] + v[1] * v[1];
    out[2] = prod * prod;
    out[3] = std::cbrt(std::abs(prod));
    return out;
  };
  CnfProblem prob(std::move(spec));
  Point start = prob.lift(Eigen::Vector2d(1.0, 1.0));
  CatalogEntry e = make_entry(id, prob, start, run_config_for(1e-6, 10, 100, start));
  e.known = KnownSolution{"origin", Eigen::VectorXd::Zero(2), 0.0};
  return e;
}

CatalogEntry build_ex2(const CatalogParams& params) {
  const int n = or_default(params.n, 2);
  require(n >= 1, "EX2 needs n >= 1");
  std::mt19937_64 rng(params.seed);
  std::uniform_int_distribution<int> coef(-3, 3);
  Eigen::VectorXd b1(n), b2(n);
  for (int i = 0; i < n; ++i) b1[i] = coef(rng);
  for (int i = 0; i < n; ++i) b2[i] = coef(rng);
  if (b1.isZero()) b1[0] = 1;
  if (b2.isZero()) b2[n - 1] = 2;

  CnfSpec spec;
  spec.name = "ex2";
  spec.n = n;
  spec.m = 4;
  spec.objective = sq(y(0) - y(1));
  spec.ineqs = {-y(0), -y(1)};
  spec.eqs = {sq(y(0)) - y(2), sq(y(1)) - y(3), sq(linear(b1)) - y(2), sq(linear(b2)) - y(3)};
  spec.reference = sq(sqrt(abs(linear(b1))) - sqrt(abs(linear(b2))));
  // The displayed constraints force y_i = |b_i^T x|, so g = (|b1^T x| - |b2^T x|)^2,
  // which differs from f; the form is kept but not marked exact.
  spec.exact = false;
  spec.lift = [b1, b2](const Eigen::VectorXd& v) {
    double p = b1.dot(v), q = b2.dot(v);
    Eigen::VectorXd out(4);
    out << std::abs(p), std::abs(q), p * p, q * q;
    return out;
  };
  CnfProblem prob(std::move(spec));
  Point start = prob.lift(Eigen::VectorXd::Ones(n));
  CatalogEntry e = make_entry(CatalogId::ex2, prob, start, run_config_for(1e-6, 10, 100, start));
  e.notes = "the lift pins y_i = |b_i^T x|, so g(x, lift(x)) = (|b1^T x| - |b2^T x|)^2 and not f";
  return e;
}

CatalogEntry build_ex3(const CatalogParams& params) {
  const int n = or_default(params.n, 2);
  const int I = or_default(params.I, 3);
  require(n >= 1 && I >= 1, "EX3 needs n >= 1 and I >= 1");
  Ex3Data data = ex3_data(n, I, params.seed);

  CnfSpec spec;
  spec.name = "ex3";
  spec.n = n;
  spec.m = 2 * I;
  std::vector<Expr> terms, ref_terms;
  for (int i = 0; i < I; ++i) {
    terms.push_back(sq(y(i) - data.b[i]));
    ref_terms.push_back(sq(abs(linear(data.a.row(i).transpose())) - data.b[i]));
    spec.ineqs.push_back(-y(i));
  }
  for (int i = 0; i < I; ++i) spec.eqs.push_back(sq(y(i)) - y(i + I));
  for (int i = 0; i < I; ++i) spec.eqs.push_back(sq(linear(data.a.row(i).transpose())) - y(i + I));
  spec.objective = sum(std::move(terms));
  spec.reference = sum(std::move(ref_terms));
  spec.exact = true;
  spec.lift = [data, I](const Eigen::VectorXd& v) {
    Eigen::VectorXd out(2 * I);
    for (int i = 0; i < I; ++i) {
      double t = data.a.row(i).dot(v);
      out[i] = std::abs(t);
      out[i + I] = t * t;
    }
    return out;
  };
  CnfProblem prob(std::move(spec));
  Point start = prob.lift(Eigen::VectorXd::Ones(n));
  return make_entry(CatalogId::ex3, prob, start, run_config_for(1e-6, 10, 100, start));
}

// Indicator-lifted 0-norm: y_i in {0, 1}, y_i = 1 wherever x_i != 0.
void add_indicator_constraints(CnfSpec& spec, int n) {
  for (int i = 0; i < n; ++i) spec.eqs.push_back(sq(x(i) + y(i) - 1.0) - y(i + n));
  for (int i = 0; i < n; ++i) spec.eqs.push_back(sq(x(i)) + sq(y(i) - 1.0) - y(i + n));
  for (int i = 0; i < n; ++i) spec.eqs.push_back(sq(y(i)) - y(i));
}

LiftMap indicator_lift(int n) {
  return [n](const Eigen::VectorXd& v) {
    Eigen::VectorXd out(2 * n);
    for (int i = 0; i < n; ++i) {
      double ind = v[i] != 0.0 ? 1.0 : 0.0;
      out[i] = ind;
      out[i + n] = v[i] * v[i] + (ind - 1.0) * (ind - 1.0);
    }
    return out;
  };
}

CatalogEntry build_ex4(const CatalogParams& params) {
  const int n = or_default(params.n, 3);
  const double lambda = or_default(params.lambda, 1.0);
  require(n >= 1 && lambda > 0, "EX4 needs n >= 1 and lambda > 0");
  std::mt19937_64 rng(params.seed);
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  Eigen::VectorXd b(n);
  for (int i = 0; i < n; ++i) b[i] = round2(dist(rng));

  CnfSpec spec;
  spec.name = "ex4";
  spec.n = n;
  spec.m = 2 * n;
  std::vector<Expr> ind, fit;
  for (int i = 0; i < n; ++i) {
    ind.push_back(y(i));
    fit.push_back(sq(x(i) - b[i]));
  }
  spec.objective = lambda * sum(ind) + sum(fit);
  for (int i = 0; i < n; ++i) spec.ineqs.push_back(-y(i));
  for (int i = 0; i < n; ++i) spec.ineqs.push_back(y(i) - 1.0);
  add_indicator_constraints(spec, n);
  spec.reference = lambda * Expr::norm0(Block::x) + sum(fit);
  spec.exact = false;
  spec.lift = indicator_lift(n);
  CnfProblem prob(std::move(spec));
  Point start = prob.lift(Eigen::VectorXd::Ones(n));
  CatalogEntry e = make_entry(CatalogId::ex4, prob, start, run_config_for(1e-6, 10, 10, start));
  e.surrogate = [n](const Point& p) { return p.y.head(n).squaredNorm(); };
  return e;
}

CatalogEntry build_ex7() {
  CnfSpec spec;
  spec.name = "ex7";
  spec.n = 2;
  spec.m = 3;
  spec.objective = 2.0 * sq(x(0)) - 1.05 * y(0) + (1.0 / 6.0) * y(1) + 0.5 * sq(x(0) - x(1)) - 0.5 * y(2) + sq(x(1));
  spec.ineqs = {-x(0) - 3.0, x(0) - 3.0, -x(1) - 3.0, x(1) - 3.0};
  spec.eqs = {pow(x(0), 4) - y(0), pow(x(0), 6) - y(1), sq(x(0)) + sq(x(1)) - y(2)};
  spec.reference = 2.0 * sq(x(0)) - 1.05 * pow(x(0), 4) + (1.0 / 6.0) * pow(x(0), 6) - x(0) * x(1) + sq(x(1));
  spec.exact = true;
  spec.box = Box{-3.0, 3.0};
  spec.lift = [](const Eigen::VectorXd& v) {
    Eigen::VectorXd out(3);
    out << std::pow(v[0], 4), std::pow(v[0], 6), v[0] * v[0] + v[1] * v[1];
    return out;
  };
  CnfProblem prob(std::move(spec));
  Point start{Eigen::Vector2d(2, 2), Eigen::Vector3d(2, 2, 2)};
  CatalogEntry e = make_entry(CatalogId::ex7, prob, start, run_config_for(1e-6, 10, 100, start, InnerMethod::gradient_descent));
  e.known = KnownSolution{"global minimizer at the origin", Eigen::VectorXd::Zero(2), 0.0};
  e.notes = "the second equality uses x1^6 so that g matches f; the fourth bound is on x2";
  return e;
}

CatalogEntry build_ex8(const CatalogParams& params) {
  const int n = or_default(params.n, 5);
  require(n >= 1, "EX8 needs n >= 1");
  const int top = 2 * n;  // index of the max variable y_{2n+1}
  CnfSpec spec;
  spec.name = "ex8";
  spec.n = n;
  spec.m = 2 * n + 1;
  std::vector<Expr> ys, absx;
  for (int i = 0; i < n; ++i) {
    ys.push_back(y(i));
    absx.push_back(abs(x(i)));
  }
  spec.objective = static_cast<double>(n) * y(top) - sum(ys);
  for (int i = 0; i < n; ++i) spec.eqs.push_back(sq(y(i)) - y(i + n));
  for (int i = 0; i < n; ++i) spec.eqs.push_back(sq(x(i)) - y(i + n));
  for (int i = 0; i < n; ++i) spec.ineqs.push_back(-y(i));
  for (int i = 0; i < n; ++i) spec.ineqs.push_back(y(i) - y(top));
  spec.reference = static_cast<double>(n) * max(absx) - sum(absx);
  spec.exact = true;
  spec.lift = [n](const Eigen::VectorXd& v) {
    Eigen::VectorXd out(2 * n + 1);
    out.head(n) = v.cwiseAbs();
    out.segment(n, n) = v.cwiseAbs2();
    out[2 * n] = v.size() > 0 ? v.cwiseAbs().maxCoeff() : 0.0;
    return out;
  };
  CnfProblem prob(std::move(spec));
  Eigen::VectorXd z = Eigen::VectorXd::LinSpaced(3 * n + 1, 1.0, 3.0 * n + 1.0);
  Point start = stacked_start(prob, z);
  CatalogEntry e = make_entry(CatalogId::ex8, prob, start, run_config_for(1e-6, 10, 100, start));
  e.known = KnownSolution{"any x with all |x_i| equal", std::nullopt, 0.0};
  return e;
}

CatalogEntry build_ex9(const CatalogParams& params) {
  const int n = or_default(params.n, 10);
  const double lambda = or_default(params.lambda, 1.0);
  require(n >= 1 && lambda > 0, "EX9 needs n >= 1 and lambda > 0");
  CnfSpec spec;
  spec.name = "ex9";
  spec.n = n;
  spec.m = 2 * n;
  Eigen::VectorXd weights = Eigen::VectorXd::LinSpaced(n, 1.0, n);
  Expr fit = sq(linear(weights) - 2.0 * n);
  std::vector<Expr> ind;
  for (int i = 0; i < n; ++i) ind.push_back(sq(y(i)));
  spec.objective = fit + lambda * sum(ind);
  add_indicator_constraints(spec, n);
  spec.reference = fit + lambda * Expr::norm0(Block::x);
  spec.exact = false;
  spec.lift = indicator_lift(n);
  CnfProblem prob(std::move(spec));
  Point start = stacked_start(prob, Eigen::VectorXd::Zero(3 * n));
  CatalogEntry e = make_entry(CatalogId::ex9, prob, start, run_config_for(1e-6, 10, 10, start));
  e.decomposed_config = run_config_for(1e-4, 5, 10, start);
  e.surrogate = [n](const Point& p) { return p.y.head(n).squaredNorm(); };
  e.notes = "equalities only; y_i^2 = y_i already forces y_i in {0, 1}, so no 0 <= y_i <= 1 bounds are added";
  return e;
}

}  // namespace

std::string_view to_string(CatalogId id) {
  for (const auto& [k, name] : kKeys) {
    if (k == id) return name;
  }
  return "?";
}

CatalogId catalog_id_from_string(std::string_view key) {
  for (const auto& [k, name] : kKeys) {
    if (name == key) return k;
  }
  throw std::invalid_argument(fmt::format("unknown catalog id '{}'", key));
}

std::vector<CatalogId> all_catalog_ids() {
  std::vector<CatalogId> ids;
  for (const auto& [k, name] : kKeys) ids.push_back(k);
  return ids;
}

Ex3Data ex3_data(int n, int I, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> target(0.0, 2.0);
  Ex3Data d{Eigen::MatrixXd(I, n), Eigen::VectorXd(I)};
  for (int i = 0; i < I; ++i) {
    for (int j = 0; j < n; ++j) d.a(i, j) = round2(normal(rng));
    d.b[i] = round2(target(rng));
  }
  return d;
}

CatalogEntry build(CatalogId id, const CatalogParams& params) {
  switch (id) {
    case CatalogId::ex1a:
      return build_ex1(id, false);
    case CatalogId::ex1b:
      return build_ex1(id, true);
    case CatalogId::ex2:
      return build_ex2(params);
    case CatalogId::ex3:
      return build_ex3(params);
    case CatalogId::ex4:
      return build_ex4(params);
    case CatalogId::ex5:
      return build_ex1(id, false);
    case CatalogId::ex7:
      return build_ex7();
    case CatalogId::ex8:
      return build_ex8(params);
    case CatalogId::ex9:
      return build_ex9(params);
  }
  throw std::invalid_argument("unknown catalog id");
}

Point lift(const CatalogEntry& entry, const Eigen::VectorXd& x) { return entry.problem.lift(x); }

}  // namespace cnf
