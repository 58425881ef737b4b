#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace cnf {

/// Variable blocks of a lifted problem: the original variables x and the
/// auxiliary variables y.
enum class Block : std::uint8_t { x, y };

/// Iterates below this magnitude count as zero in norm0.
inline constexpr double kNorm0Threshold = 1e-6;

struct SourcePos {
  int line = 0;
  int column = 0;

  bool known() const { return line > 0; }
};

enum class Op : std::uint8_t {
  constant,
  variable,
  neg,
  abs,
  sqrt,
  add,
  sub,
  mul,
  div,
  pow,
  sum,
  max,
  norm0,
};

class ExprError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Evaluation left the domain of an operation (division by zero, sqrt of a
/// negative number, fractional power of a negative base).
class DomainError : public ExprError {
 public:
  DomainError(const std::string& what, SourcePos pos) : ExprError(what), pos_(pos) {}
  SourcePos pos() const { return pos_; }

 private:
  SourcePos pos_;
};

/// A nonsmooth node was found where a differentiable expression is required.
class DialectError : public ExprError {
 public:
  using ExprError::ExprError;
};

class ParseError : public ExprError {
 public:
  ParseError(const std::string& what, int line, int column);
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

/// Dimensions of a point or coefficient vector do not match its problem.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A point (x, y) of the lifted space.
struct Point {
  Eigen::VectorXd x;
  Eigen::VectorXd y;

  /// (x, y) as one vector, x block first.
  Eigen::VectorXd stacked() const;
  static Point split(const Eigen::VectorXd& z, Eigen::Index n);
};

class ExprNode;

/// Immutable expression tree over the variable blocks x and y. Copies share
/// the underlying nodes.
class Expr {
 public:
  /// The constant 0.
  Expr();

  /// Negative values are stored as neg(|v|) so that printing round-trips.
  static Expr constant(double v);
  /// `index` is 0-based.
  static Expr variable(Block block, int index);
  static Expr unary(Op op, Expr arg);
  static Expr binary(Op op, Expr lhs, Expr rhs);
  static Expr nary(Op op, std::vector<Expr> args);
  static Expr power(Expr base, double exponent);
  static Expr norm0(Block block);

  Op op() const;
  /// Constant value, or the exponent of a pow node.
  double value() const;
  Block block() const;
  int index() const;
  std::span<const Expr> children() const;
  SourcePos pos() const;
  Expr with_pos(SourcePos pos) const;

  /// No abs, max, norm0, sqrt or fractional pow anywhere in the tree.
  bool is_smooth() const;
  bool references(Block block) const;
  /// Largest 0-based index referenced in `block`, or -1.
  int max_index(Block block) const;
  /// Number of nodes in the tree.
  std::size_t size() const;

  std::string to_string() const;

  /// Structural equality; source positions are ignored.
  friend bool operator==(const Expr& a, const Expr& b);

  const ExprNode* node() const { return node_.get(); }

 private:
  explicit Expr(std::shared_ptr<const ExprNode> node) : node_(std::move(node)) {}
  std::shared_ptr<const ExprNode> node_;
};

inline Expr x_var(int i) { return Expr::variable(Block::x, i); }
inline Expr y_var(int i) { return Expr::variable(Block::y, i); }

Expr operator+(Expr a, Expr b);
Expr operator-(Expr a, Expr b);
Expr operator*(Expr a, Expr b);
Expr operator/(Expr a, Expr b);
Expr operator-(Expr a);
Expr operator+(double a, Expr b);
Expr operator+(Expr a, double b);
Expr operator-(double a, Expr b);
Expr operator-(Expr a, double b);
Expr operator*(double a, Expr b);
Expr operator*(Expr a, double b);
Expr operator/(Expr a, double b);
Expr pow(Expr base, double exponent);
Expr abs(Expr e);
Expr sqrt(Expr e);
Expr max(std::vector<Expr> args);
Expr sum(std::vector<Expr> args);

/// Exact double-precision evaluation at p.
double eval(const Expr& e, const Point& p);

/// Forward-mode gradient at p, x block first (length n + m).
Eigen::VectorXd gradient(const Expr& e, const Point& p);

/// Declared block sizes used to range-check indices while parsing.
struct Dims {
  std::optional<int> n;
  std::optional<int> m;
};

/// Parses the expression sublanguage: `x[i]`, `y[j]` (1-based), decimal or
/// scientific literals, `+ - * / ^`, parentheses, `abs`, `sqrt`, `max`,
/// `norm0`. `line` is reported in error positions.
Expr parse(std::string_view text, const Dims& dims = {}, int line = 1);

/// Flat, postorder form of an expression bound to fixed block sizes. Used on
/// every hot evaluation path; the gradient is carried only over the variables
/// the expression actually references.
class Tape {
 public:
  Tape(const Expr& e, int n, int m);

  /// z = (x, y) stacked.
  double value(const Eigen::VectorXd& z) const;

  /// Gradient with respect to vars(), in that order.
  double value_and_gradient(const Eigen::VectorXd& z, Eigen::VectorXd& local_grad) const;

  /// Stacked indices referenced by the expression, ascending.
  std::span<const int> vars() const { return vars_; }
  bool is_smooth() const { return smooth_; }
  const Expr& expr() const { return expr_; }

 private:
  struct Instr {
    Op op;
    double c;
    int slot;         // variable: position in vars_; norm0: block start
    int count;        // norm0: block length; otherwise number of args
    int first_arg;    // into args_
    const ExprNode* node;
  };

  void compile(const ExprNode* node, int n, int m);
  [[noreturn]] void domain_error(const Instr& in, const std::string& what) const;

  Expr expr_;
  std::vector<Instr> code_;
  std::vector<int> args_;
  std::vector<int> vars_;
  bool smooth_ = true;
};

}  // namespace cnf
