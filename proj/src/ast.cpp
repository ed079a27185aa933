#include "coopcheck/ast.hpp"

namespace coopcheck {

namespace {

bool exprs_equal(const std::vector<ExprPtr>& a, const std::vector<ExprPtr>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); i++)
    if (!expr_equal(*a[i], *b[i])) return false;
  return true;
}

bool instrs_equal(const std::vector<InstrPtr>& a, const std::vector<InstrPtr>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); i++)
    if (!instr_equal(*a[i], *b[i])) return false;
  return true;
}

bool type_equal(const TypeAnnot& a, const TypeAnnot& b) {
  return a.base == b.base && a.separate == b.separate;
}

bool params_equal(const std::vector<Param>& a, const std::vector<Param>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); i++)
    if (a[i].name != b[i].name || !type_equal(a[i].type, b[i].type)) return false;
  return true;
}

bool clauses_equal(const std::vector<AssertionClause>& a,
                   const std::vector<AssertionClause>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); i++)
    if (a[i].tag != b[i].tag || !expr_equal(*a[i].expr, *b[i].expr)) return false;
  return true;
}

}  // namespace

bool expr_equal(const Expr& a, const Expr& b) {
  if (a.node.index() != b.node.index()) return false;
  return std::visit(
      [&](const auto& lhs) -> bool {
        using T = std::decay_t<decltype(lhs)>;
        const auto& rhs = std::get<T>(b.node);
        if constexpr (std::is_same_v<T, IntLit>) {
          return lhs.value == rhs.value;
        } else if constexpr (std::is_same_v<T, BoolLit>) {
          return lhs.value == rhs.value;
        } else if constexpr (std::is_same_v<T, NameExpr>) {
          return lhs.name == rhs.name && lhs.has_args == rhs.has_args &&
                 exprs_equal(lhs.args, rhs.args);
        } else if constexpr (std::is_same_v<T, QualifiedCall>) {
          return lhs.feature == rhs.feature &&
                 expr_equal(*lhs.target, *rhs.target) &&
                 exprs_equal(lhs.args, rhs.args);
        } else if constexpr (std::is_same_v<T, BinaryExpr>) {
          return lhs.op == rhs.op && expr_equal(*lhs.lhs, *rhs.lhs) &&
                 expr_equal(*lhs.rhs, *rhs.rhs);
        } else if constexpr (std::is_same_v<T, UnaryExpr>) {
          return lhs.op == rhs.op && expr_equal(*lhs.operand, *rhs.operand);
        } else {
          return true;  // Void / Current / Result carry no payload
        }
      },
      a.node);
}

bool instr_equal(const Instruction& a, const Instruction& b) {
  if (a.node.index() != b.node.index()) return false;
  return std::visit(
      [&](const auto& lhs) -> bool {
        using T = std::decay_t<decltype(lhs)>;
        const auto& rhs = std::get<T>(b.node);
        if constexpr (std::is_same_v<T, CreateInstr>) {
          return lhs.target == rhs.target &&
                 lhs.creation_proc == rhs.creation_proc &&
                 exprs_equal(lhs.args, rhs.args);
        } else if constexpr (std::is_same_v<T, AssignInstr>) {
          return lhs.to_result == rhs.to_result && lhs.target == rhs.target &&
                 expr_equal(*lhs.value, *rhs.value);
        } else if constexpr (std::is_same_v<T, CallInstr>) {
          if ((lhs.target == nullptr) != (rhs.target == nullptr)) return false;
          if (lhs.target && !expr_equal(*lhs.target, *rhs.target)) return false;
          return lhs.feature == rhs.feature && exprs_equal(lhs.args, rhs.args);
        } else if constexpr (std::is_same_v<T, IfInstr>) {
          return expr_equal(*lhs.condition, *rhs.condition) &&
                 instrs_equal(lhs.then_branch, rhs.then_branch) &&
                 instrs_equal(lhs.else_branch, rhs.else_branch);
        } else {
          return instrs_equal(lhs.init, rhs.init) &&
                 expr_equal(*lhs.until, *rhs.until) &&
                 instrs_equal(lhs.body, rhs.body);
        }
      },
      a.node);
}

bool class_equal(const ClassAst& a, const ClassAst& b) {
  if (a.name != b.name || a.creation_procs != b.creation_procs) return false;
  if (a.attributes.size() != b.attributes.size()) return false;
  for (size_t i = 0; i < a.attributes.size(); i++)
    if (a.attributes[i].name != b.attributes[i].name ||
        !type_equal(a.attributes[i].type, b.attributes[i].type))
      return false;
  if (a.routines.size() != b.routines.size()) return false;
  for (size_t i = 0; i < a.routines.size(); i++) {
    const auto& ra = a.routines[i];
    const auto& rb = b.routines[i];
    if (ra.name != rb.name || !params_equal(ra.formals, rb.formals) ||
        !params_equal(ra.locals, rb.locals))
      return false;
    if (ra.return_type.has_value() != rb.return_type.has_value()) return false;
    if (ra.return_type && !type_equal(*ra.return_type, *rb.return_type))
      return false;
    if (!clauses_equal(ra.require_clauses, rb.require_clauses) ||
        !clauses_equal(ra.ensure_clauses, rb.ensure_clauses))
      return false;
    if (!instrs_equal(ra.body, rb.body)) return false;
  }
  return true;
}

}  // namespace coopcheck
