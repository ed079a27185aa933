#pragma once

#include <string>

#include "coopcheck/ast.hpp"

namespace coopcheck {

// Renders an AST back to parseable source. Parentheses are emitted only where
// precedence requires them, so printing exercises the parser's precedence
// rules on a round trip.
std::string print_class(const ClassAst& cls);
std::string print_expr(const Expr& expr);
std::string print_instruction(const Instruction& instr, int indent = 0);

}  // namespace coopcheck
