#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "cnf/expr.hpp"
#include "node.hpp"

namespace cnf {

namespace {

bool is_integer(double v) { return std::floor(v) == v; }

std::string where(const ExprNode* node) {
  std::string text = fmt::format("in `{}`", describe(node));
  if (node->pos.known()) text += fmt::format(" at {}:{}", node->pos.line, node->pos.column);
  return text;
}

// Per-thread scratch so that evaluation does not allocate on hot paths.
struct Scratch {
  std::vector<double> values;
  std::vector<double> grads;
};

Scratch& scratch() {
  thread_local Scratch s;
  return s;
}

}  // namespace

Tape::Tape(const Expr& e, int n, int m) : expr_(e) {
  if (n < 0 || m < 0) throw DimensionError("negative block size");
  // Collect referenced variables first so slots are known during compilation.
  std::vector<int> flat;
  std::vector<const ExprNode*> stack{e.node()};
  while (!stack.empty()) {
    const ExprNode* node = stack.back();
    stack.pop_back();
    if (node->op == Op::variable) {
      int limit = node->block == Block::x ? n : m;
      if (node->index >= limit) {
        throw DimensionError(fmt::format("variable {}[{}] out of range (block size {}) {}",
                                         node->block == Block::x ? 'x' : 'y', node->index + 1, limit,
                                         where(node)));
      }
      flat.push_back(node->block == Block::x ? node->index : n + node->index);
    }
    for (const Expr& c : node->children) stack.push_back(c.node());
  }
  std::sort(flat.begin(), flat.end());
  flat.erase(std::unique(flat.begin(), flat.end()), flat.end());
  vars_ = std::move(flat);
  compile(e.node(), n, m);
}

void Tape::compile(const ExprNode* node, int n, int m) {
  std::vector<int> kids;
  kids.reserve(node->children.size());
  for (const Expr& c : node->children) {
    compile(c.node(), n, m);
    kids.push_back(static_cast<int>(code_.size()) - 1);
  }
  Instr in{node->op, node->value, -1, static_cast<int>(kids.size()), static_cast<int>(args_.size()), node};
  args_.insert(args_.end(), kids.begin(), kids.end());
  switch (node->op) {
    case Op::variable: {
      int flat = node->block == Block::x ? node->index : n + node->index;
      in.slot = static_cast<int>(std::lower_bound(vars_.begin(), vars_.end(), flat) - vars_.begin());
      break;
    }
    case Op::norm0:
      in.slot = node->block == Block::x ? 0 : n;
      in.count = node->block == Block::x ? n : m;
      smooth_ = false;
      break;
    case Op::abs:
    case Op::sqrt:
    case Op::max:
      smooth_ = false;
      break;
    case Op::pow:
      if (!is_integer(node->value)) smooth_ = false;
      break;
    default:
      break;
  }
  code_.push_back(in);
}

void Tape::domain_error(const Instr& in, const std::string& what) const {
  throw DomainError(fmt::format("{} {}", what, where(in.node)), in.node->pos);
}

double Tape::value(const Eigen::VectorXd& z) const {
  std::vector<double>& v = scratch().values;
  v.resize(code_.size());
  for (std::size_t i = 0; i < code_.size(); ++i) {
    const Instr& in = code_[i];
    const int* a = args_.data() + in.first_arg;
    double r = 0.0;
    switch (in.op) {
      case Op::constant:
        r = in.c;
        break;
      case Op::variable:
        r = z[vars_[static_cast<std::size_t>(in.slot)]];
        break;
      case Op::neg:
        r = -v[a[0]];
        break;
      case Op::abs:
        r = std::abs(v[a[0]]);
        break;
      case Op::sqrt:
        if (v[a[0]] < 0) domain_error(in, fmt::format("sqrt of negative argument {}", v[a[0]]));
        r = std::sqrt(v[a[0]]);
        break;
      case Op::add:
        r = v[a[0]] + v[a[1]];
        break;
      case Op::sub:
        r = v[a[0]] - v[a[1]];
        break;
      case Op::mul:
        r = v[a[0]] * v[a[1]];
        break;
      case Op::div:
        if (v[a[1]] == 0.0) domain_error(in, "division by zero");
        r = v[a[0]] / v[a[1]];
        break;
      case Op::pow: {
        double base = v[a[0]];
        if (base == 0.0 && in.c < 0) domain_error(in, "negative power of zero");
        if (base < 0 && !is_integer(in.c)) {
          domain_error(in, fmt::format("fractional power of negative base {}", base));
        }
        r = std::pow(base, in.c);
        break;
      }
      case Op::sum:
        for (int k = 0; k < in.count; ++k) r += v[a[k]];
        break;
      case Op::max:
        r = v[a[0]];
        for (int k = 1; k < in.count; ++k) r = std::max(r, v[a[k]]);
        break;
      case Op::norm0:
        for (int k = 0; k < in.count; ++k) {
          if (std::abs(z[in.slot + k]) > kNorm0Threshold) r += 1.0;
        }
        break;
    }
    v[i] = r;
  }
  return v.back();
}

double Tape::value_and_gradient(const Eigen::VectorXd& z, Eigen::VectorXd& local_grad) const {
  if (!smooth_) throw DialectError("gradient of nonsmooth expression `" + expr_.to_string() + "`");
  Scratch& s = scratch();
  const std::size_t k = vars_.size();
  s.values.resize(code_.size());
  s.grads.assign(code_.size() * k, 0.0);
  double* v = s.values.data();
  for (std::size_t i = 0; i < code_.size(); ++i) {
    const Instr& in = code_[i];
    const int* a = args_.data() + in.first_arg;
    double* g = s.grads.data() + i * k;
    auto child = [&](int c) { return s.grads.data() + static_cast<std::size_t>(c) * k; };
    double r = 0.0;
    switch (in.op) {
      case Op::constant:
        r = in.c;
        break;
      case Op::variable:
        r = z[vars_[static_cast<std::size_t>(in.slot)]];
        g[in.slot] = 1.0;
        break;
      case Op::neg: {
        r = -v[a[0]];
        const double* ga = child(a[0]);
        for (std::size_t j = 0; j < k; ++j) g[j] = -ga[j];
        break;
      }
      case Op::add:
      case Op::sub: {
        double sign = in.op == Op::add ? 1.0 : -1.0;
        r = v[a[0]] + sign * v[a[1]];
        const double* ga = child(a[0]);
        const double* gb = child(a[1]);
        for (std::size_t j = 0; j < k; ++j) g[j] = ga[j] + sign * gb[j];
        break;
      }
      case Op::sum:
        for (int c = 0; c < in.count; ++c) {
          r += v[a[c]];
          const double* gc = child(a[c]);
          for (std::size_t j = 0; j < k; ++j) g[j] += gc[j];
        }
        break;
      case Op::mul: {
        double x = v[a[0]], y = v[a[1]];
        r = x * y;
        const double* ga = child(a[0]);
        const double* gb = child(a[1]);
        for (std::size_t j = 0; j < k; ++j) g[j] = y * ga[j] + x * gb[j];
        break;
      }
      case Op::div: {
        double x = v[a[0]], y = v[a[1]];
        if (y == 0.0) domain_error(in, "division by zero");
        r = x / y;
        const double* ga = child(a[0]);
        const double* gb = child(a[1]);
        for (std::size_t j = 0; j < k; ++j) g[j] = (ga[j] - r * gb[j]) / y;
        break;
      }
      case Op::pow: {
        double base = v[a[0]];
        if (base == 0.0 && in.c < 0) domain_error(in, "negative power of zero");
        r = std::pow(base, in.c);
        double d = in.c == 0.0 ? 0.0 : in.c * std::pow(base, in.c - 1.0);
        const double* ga = child(a[0]);
        for (std::size_t j = 0; j < k; ++j) g[j] = d * ga[j];
        break;
      }
      case Op::abs:
      case Op::sqrt:
      case Op::max:
      case Op::norm0:
        break;  // unreachable: rejected by the smoothness check above
    }
    v[i] = r;
  }
  local_grad.resize(static_cast<Eigen::Index>(k));
  const double* root = s.grads.data() + (code_.size() - 1) * k;
  for (std::size_t j = 0; j < k; ++j) local_grad[static_cast<Eigen::Index>(j)] = root[j];
  return v[code_.size() - 1];
}

}  // namespace cnf
