#include <cmath>
#include <functional>

#include <fmt/format.h>

#include "cnf/expr.hpp"
#include "node.hpp"

namespace cnf {

namespace {

bool is_integer(double v) { return std::isfinite(v) && std::floor(v) == v; }

std::shared_ptr<ExprNode> make(Op op) {
  auto node = std::make_shared<ExprNode>();
  node->op = op;
  return node;
}

int arity(Op op) {
  switch (op) {
    case Op::constant:
    case Op::variable:
    case Op::norm0:
      return 0;
    case Op::neg:
    case Op::abs:
    case Op::sqrt:
    case Op::pow:
      return 1;
    case Op::add:
    case Op::sub:
    case Op::mul:
    case Op::div:
      return 2;
    case Op::sum:
    case Op::max:
      return -1;
  }
  return -1;
}

std::string format_number(double v) { return fmt::format("{}", v); }

// Precedence levels used by the printer; higher binds tighter.
constexpr int kPrecAdd = 1;
constexpr int kPrecMul = 2;
constexpr int kPrecNeg = 3;
constexpr int kPrecPow = 4;
constexpr int kPrecAtom = 5;

void print(const ExprNode* node, int min_prec, std::string& out);

void print_child(const Expr& e, int min_prec, std::string& out) { print(e.node(), min_prec, out); }

void print(const ExprNode* node, int min_prec, std::string& out) {
  auto open = [&](int prec) {
    bool paren = prec < min_prec;
    if (paren) out += '(';
    return paren;
  };
  switch (node->op) {
    case Op::constant:
      if (node->value < 0 || std::signbit(node->value)) {
        out += '(';
        out += format_number(node->value);
        out += ')';
      } else {
        out += format_number(node->value);
      }
      return;
    case Op::variable:
      out += fmt::format("{}[{}]", node->block == Block::x ? 'x' : 'y', node->index + 1);
      return;
    case Op::norm0:
      out += node->block == Block::x ? "norm0(x)" : "norm0(y)";
      return;
    case Op::abs:
    case Op::sqrt:
    case Op::max: {
      out += node->op == Op::abs ? "abs(" : node->op == Op::sqrt ? "sqrt(" : "max(";
      for (std::size_t i = 0; i < node->children.size(); ++i) {
        if (i > 0) out += ", ";
        print_child(node->children[i], 0, out);
      }
      out += ')';
      return;
    }
    case Op::neg: {
      bool paren = open(kPrecNeg);
      out += '-';
      print_child(node->children[0], kPrecNeg, out);
      if (paren) out += ')';
      return;
    }
    case Op::add:
    case Op::sub:
    case Op::sum: {
      bool paren = open(kPrecAdd);
      print_child(node->children[0], kPrecAdd, out);
      for (std::size_t i = 1; i < node->children.size(); ++i) {
        const Expr& c = node->children[i];
        if (node->op == Op::sub) {
          out += " - ";
          print_child(c, kPrecMul, out);
        } else if (c.op() == Op::neg) {
          out += " - ";
          print_child(c.children()[0], kPrecMul, out);
        } else {
          out += " + ";
          print_child(c, node->op == Op::sum ? kPrecAdd : kPrecMul, out);
        }
      }
      if (paren) out += ')';
      return;
    }
    case Op::mul:
    case Op::div: {
      bool paren = open(kPrecMul);
      print_child(node->children[0], kPrecMul, out);
      out += node->op == Op::mul ? '*' : '/';
      print_child(node->children[1], kPrecNeg, out);
      if (paren) out += ')';
      return;
    }
    case Op::pow: {
      bool paren = open(kPrecPow);
      print_child(node->children[0], kPrecAtom, out);
      out += '^';
      if (is_integer(node->value) && node->value >= 0) {
        out += format_number(node->value);
      } else {
        out += '(' + format_number(node->value) + ')';
      }
      if (paren) out += ')';
      return;
    }
  }
}

bool equal(const ExprNode* a, const ExprNode* b) {
  if (a == b) return true;
  if (a->op != b->op || a->children.size() != b->children.size()) return false;
  switch (a->op) {
    case Op::constant:
    case Op::pow:
      if (a->value != b->value) return false;
      break;
    case Op::variable:
      if (a->block != b->block || a->index != b->index) return false;
      break;
    case Op::norm0:
      if (a->block != b->block) return false;
      break;
    default:
      break;
  }
  for (std::size_t i = 0; i < a->children.size(); ++i) {
    if (!equal(a->children[i].node(), b->children[i].node())) return false;
  }
  return true;
}

template <class F>
void visit(const ExprNode* node, F&& f) {
  f(node);
  for (const Expr& c : node->children) visit(c.node(), f);
}

}  // namespace

std::string describe(const ExprNode* node) {
  std::string out;
  print(node, 0, out);
  return out;
}

ParseError::ParseError(const std::string& what, int line, int column)
    : ExprError(fmt::format("{}:{}: {}", line, column, what)), line_(line), column_(column) {}

Eigen::VectorXd Point::stacked() const {
  Eigen::VectorXd z(x.size() + y.size());
  z << x, y;
  return z;
}

Point Point::split(const Eigen::VectorXd& z, Eigen::Index n) {
  return Point{z.head(n), z.tail(z.size() - n)};
}

Expr::Expr() : Expr(make(Op::constant)) {}

Expr Expr::constant(double v) {
  if (!std::isfinite(v)) throw std::invalid_argument("non-finite constant");
  if (v < 0) return unary(Op::neg, constant(-v));
  auto node = make(Op::constant);
  node->value = v;
  return Expr(node);
}

Expr Expr::variable(Block block, int index) {
  if (index < 0) throw std::invalid_argument("negative variable index");
  auto node = make(Op::variable);
  node->block = block;
  node->index = index;
  return Expr(node);
}

Expr Expr::unary(Op op, Expr arg) {
  if (arity(op) != 1 || op == Op::pow) throw std::invalid_argument("not a unary operator");
  auto node = make(op);
  node->children.push_back(std::move(arg));
  return Expr(node);
}

Expr Expr::binary(Op op, Expr lhs, Expr rhs) {
  if (arity(op) != 2) throw std::invalid_argument("not a binary operator");
  auto node = make(op);
  node->children = {std::move(lhs), std::move(rhs)};
  return Expr(node);
}

Expr Expr::nary(Op op, std::vector<Expr> args) {
  if (arity(op) != -1) throw std::invalid_argument("not an n-ary operator");
  if (args.empty()) {
    if (op == Op::sum) return constant(0.0);
    throw std::invalid_argument("max of no arguments");
  }
  if (args.size() == 1) return args.front();
  auto node = make(op);
  node->children = std::move(args);
  return Expr(node);
}

Expr Expr::power(Expr base, double exponent) {
  if (!std::isfinite(exponent)) throw std::invalid_argument("non-finite exponent");
  auto node = make(Op::pow);
  node->value = exponent;
  node->children.push_back(std::move(base));
  return Expr(node);
}

Expr Expr::norm0(Block block) {
  auto node = make(Op::norm0);
  node->block = block;
  return Expr(node);
}

Op Expr::op() const { return node_->op; }
double Expr::value() const { return node_->value; }
Block Expr::block() const { return node_->block; }
int Expr::index() const { return node_->index; }
std::span<const Expr> Expr::children() const { return node_->children; }
SourcePos Expr::pos() const { return node_->pos; }

Expr Expr::with_pos(SourcePos pos) const {
  auto node = std::make_shared<ExprNode>(*node_);
  node->pos = pos;
  return Expr(node);
}

bool Expr::is_smooth() const {
  bool smooth = true;
  visit(node_.get(), [&](const ExprNode* n) {
    switch (n->op) {
      case Op::abs:
      case Op::sqrt:
      case Op::max:
      case Op::norm0:
        smooth = false;
        break;
      case Op::pow:
        if (!is_integer(n->value)) smooth = false;
        break;
      default:
        break;
    }
  });
  return smooth;
}

bool Expr::references(Block block) const {
  bool found = false;
  visit(node_.get(), [&](const ExprNode* n) {
    if ((n->op == Op::variable || n->op == Op::norm0) && n->block == block) found = true;
  });
  return found;
}

int Expr::max_index(Block block) const {
  int best = -1;
  visit(node_.get(), [&](const ExprNode* n) {
    if (n->op == Op::variable && n->block == block) best = std::max(best, n->index);
  });
  return best;
}

std::size_t Expr::size() const {
  std::size_t count = 0;
  visit(node_.get(), [&](const ExprNode*) { ++count; });
  return count;
}

std::string Expr::to_string() const { return describe(node_.get()); }

bool operator==(const Expr& a, const Expr& b) { return equal(a.node(), b.node()); }

Expr operator+(Expr a, Expr b) { return Expr::binary(Op::add, std::move(a), std::move(b)); }
Expr operator-(Expr a, Expr b) {
  return Expr::binary(Op::add, std::move(a), Expr::unary(Op::neg, std::move(b)));
}
Expr operator*(Expr a, Expr b) { return Expr::binary(Op::mul, std::move(a), std::move(b)); }
Expr operator/(Expr a, Expr b) { return Expr::binary(Op::div, std::move(a), std::move(b)); }
Expr operator-(Expr a) { return Expr::unary(Op::neg, std::move(a)); }
Expr operator+(double a, Expr b) { return Expr::constant(a) + std::move(b); }
Expr operator+(Expr a, double b) { return std::move(a) + Expr::constant(b); }
Expr operator-(double a, Expr b) { return Expr::constant(a) - std::move(b); }
Expr operator-(Expr a, double b) { return std::move(a) - Expr::constant(b); }
Expr operator*(double a, Expr b) { return Expr::constant(a) * std::move(b); }
Expr operator*(Expr a, double b) { return std::move(a) * Expr::constant(b); }
Expr operator/(Expr a, double b) { return std::move(a) / Expr::constant(b); }
Expr pow(Expr base, double exponent) { return Expr::power(std::move(base), exponent); }
Expr abs(Expr e) { return Expr::unary(Op::abs, std::move(e)); }
Expr sqrt(Expr e) { return Expr::unary(Op::sqrt, std::move(e)); }
Expr max(std::vector<Expr> args) { return Expr::nary(Op::max, std::move(args)); }
Expr sum(std::vector<Expr> args) { return Expr::nary(Op::sum, std::move(args)); }

double eval(const Expr& e, const Point& p) {
  Tape tape(e, static_cast<int>(p.x.size()), static_cast<int>(p.y.size()));
  return tape.value(p.stacked());
}

Eigen::VectorXd gradient(const Expr& e, const Point& p) {
  if (!e.is_smooth()) throw DialectError("gradient of nonsmooth expression `" + e.to_string() + "`");
  Tape tape(e, static_cast<int>(p.x.size()), static_cast<int>(p.y.size()));
  Eigen::VectorXd local;
  tape.value_and_gradient(p.stacked(), local);
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(p.x.size() + p.y.size());
  auto vars = tape.vars();
  for (std::size_t k = 0; k < vars.size(); ++k) grad[vars[k]] = local[static_cast<Eigen::Index>(k)];
  return grad;
}

}  // namespace cnf
