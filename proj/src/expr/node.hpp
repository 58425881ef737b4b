#pragma once

#include <vector>

#include "cnf/expr.hpp"

namespace cnf {

class ExprNode {
 public:
  Op op = Op::constant;
  double value = 0.0;
  Block block = Block::x;
  int index = 0;
  std::vector<Expr> children;
  SourcePos pos;
};

std::string describe(const ExprNode* node);

}  // namespace cnf
