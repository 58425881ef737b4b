#include <cctype>
#include <charconv>

#include <fmt/format.h>

#include "cnf/expr.hpp"

namespace cnf {

namespace {

class Parser {
 public:
  Parser(std::string_view text, const Dims& dims, int line) : text_(text), dims_(dims), line_(line) {}

  Expr parse_all() {
    Expr e = expression();
    skip_space();
    if (pos_ < text_.size()) fail(fmt::format("unexpected '{}'", text_[pos_]));
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const { fail_at(what, pos_); }
  [[noreturn]] void fail_at(const std::string& what, std::size_t at) const {
    throw ParseError(what, line_, static_cast<int>(at) + 1);
  }

  SourcePos here() const { return SourcePos{line_, static_cast<int>(pos_) + 1}; }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) {
      if (pos_ >= text_.size()) fail(fmt::format("expected '{}' at end of input", c));
      fail(fmt::format("expected '{}'", c));
    }
  }

  Expr expression() {
    Expr lhs = term();
    for (;;) {
      skip_space();
      SourcePos at = here();
      if (accept('+')) {
        lhs = (lhs + term()).with_pos(at);
      } else if (accept('-')) {
        SourcePos neg_at = here();
        lhs = Expr::binary(Op::add, lhs, Expr::unary(Op::neg, term()).with_pos(neg_at)).with_pos(at);
      } else {
        return lhs;
      }
    }
  }

  Expr term() {
    Expr lhs = unary();
    for (;;) {
      skip_space();
      SourcePos at = here();
      if (accept('*')) {
        lhs = (lhs * unary()).with_pos(at);
      } else if (accept('/')) {
        lhs = (lhs / unary()).with_pos(at);
      } else {
        return lhs;
      }
    }
  }

  Expr unary() {
    skip_space();
    SourcePos at = here();
    if (accept('-')) return Expr::unary(Op::neg, unary()).with_pos(at);
    if (accept('+')) return unary();
    return power();
  }

  Expr power() {
    Expr base = primary();
    skip_space();
    SourcePos at = here();
    if (!accept('^')) return base;
    skip_space();
    std::size_t exponent_start = pos_;
    Expr exponent = unary();
    if (exponent.references(Block::x) || exponent.references(Block::y)) {
      fail_at("exponent must be a constant expression", exponent_start);
    }
    double value = 0.0;
    try {
      value = eval(exponent, Point{});
    } catch (const ExprError& e) {
      fail_at(std::string("invalid exponent: ") + e.what(), exponent_start);
    }
    return Expr::power(base, value).with_pos(at);
  }

  Expr number() {
    std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t save = pos_++;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      } else {
        pos_ = save;
      }
    }
    double value = 0.0;
    auto [end, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, value);
    if (ec != std::errc() || end != text_.data() + pos_ || pos_ == start) {
      fail_at("malformed number", start);
    }
    return Expr::constant(value).with_pos(SourcePos{line_, static_cast<int>(start) + 1});
  }

  std::string_view identifier() {
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      ++pos_;
    }
    return text_.substr(start, pos_ - start);
  }

  Expr variable(Block block, SourcePos at) {
    expect('[');
    skip_space();
    std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    int index = 0;
    auto [end, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, index);
    if (ec != std::errc() || start == pos_) fail_at("expected a 1-based integer index", start);
    char name = block == Block::x ? 'x' : 'y';
    const std::optional<int>& limit = block == Block::x ? dims_.n : dims_.m;
    if (index < 1 || (limit && index > *limit)) {
      fail_at(fmt::format("index {}[{}] out of declared range 1..{}", name, index, limit.value_or(0)),
              start);
    }
    expect(']');
    return Expr::variable(block, index - 1).with_pos(at);
  }

  std::vector<Expr> arguments() {
    std::vector<Expr> args;
    expect('(');
    if (accept(')')) return args;
    do {
      args.push_back(expression());
    } while (accept(','));
    expect(')');
    return args;
  }

  Expr primary() {
    skip_space();
    SourcePos at = here();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (accept('(')) {
      Expr inner = expression();
      expect(')');
      return inner;
    }
    if (!std::isalpha(static_cast<unsigned char>(c))) fail(fmt::format("unexpected '{}'", c));
    std::size_t name_start = pos_;
    std::string_view name = identifier();
    if (name == "x" || name == "y") return variable(name == "x" ? Block::x : Block::y, at);
    if (name == "norm0") {
      expect('(');
      skip_space();
      std::string_view block = identifier();
      if (block != "x" && block != "y") fail("norm0 takes a variable block, x or y");
      expect(')');
      return Expr::norm0(block == "x" ? Block::x : Block::y).with_pos(at);
    }
    if (name == "abs" || name == "sqrt") {
      std::vector<Expr> args = arguments();
      if (args.size() != 1) fail_at(fmt::format("{} takes one argument", name), name_start);
      return Expr::unary(name == "abs" ? Op::abs : Op::sqrt, args[0]).with_pos(at);
    }
    if (name == "max") {
      std::vector<Expr> args = arguments();
      if (args.empty()) fail_at("max needs at least one argument", name_start);
      if (args.size() == 1) return args[0];
      return Expr::nary(Op::max, std::move(args)).with_pos(at);
    }
    fail_at(fmt::format("unknown identifier '{}'", name), name_start);
  }

  std::string_view text_;
  Dims dims_;
  int line_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr parse(std::string_view text, const Dims& dims, int line) {
  return Parser(text, dims, line).parse_all();
}

}  // namespace cnf
