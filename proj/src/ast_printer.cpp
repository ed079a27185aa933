#include <sstream>

#include "coopcheck/ast_printer.hpp"

namespace coopcheck {

namespace {

// Binding strength, loosest first. Unary `not` binds tighter than any binary
// operator; primaries never need parentheses.
int precedence(const std::string& op) {
  if (op == "or") return 1;
  if (op == "and") return 2;
  if (op == "<" || op == "<=" || op == ">" || op == ">=" || op == "=" ||
      op == "/=")
    return 3;
  if (op == "+" || op == "-") return 4;
  if (op == "*" || op == "/") return 5;
  return 6;  // not
}

void print_expr_prec(std::ostream& os, const Expr& expr, int min_prec);

void print_args(std::ostream& os, const std::vector<ExprPtr>& args) {
  os << " (";
  for (size_t i = 0; i < args.size(); i++) {
    if (i) os << ", ";
    print_expr_prec(os, *args[i], 0);
  }
  os << ")";
}

void print_expr_prec(std::ostream& os, const Expr& expr, int min_prec) {
  std::visit(
      [&](const auto& node) {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, IntLit>) {
          os << node.value;
        } else if constexpr (std::is_same_v<T, BoolLit>) {
          os << (node.value ? "True" : "False");
        } else if constexpr (std::is_same_v<T, VoidLit>) {
          os << "Void";
        } else if constexpr (std::is_same_v<T, CurrentLit>) {
          os << "Current";
        } else if constexpr (std::is_same_v<T, ResultLit>) {
          os << "Result";
        } else if constexpr (std::is_same_v<T, NameExpr>) {
          os << node.name;
          if (node.has_args) print_args(os, node.args);
        } else if constexpr (std::is_same_v<T, QualifiedCall>) {
          print_expr_prec(os, *node.target, 7);
          os << "." << node.feature;
          if (!node.args.empty()) print_args(os, node.args);
        } else if constexpr (std::is_same_v<T, BinaryExpr>) {
          int prec = precedence(node.op);
          bool parens = prec < min_prec;
          if (parens) os << "(";
          print_expr_prec(os, *node.lhs, prec);
          os << " " << node.op << " ";
          print_expr_prec(os, *node.rhs, prec + 1);
          if (parens) os << ")";
        } else if constexpr (std::is_same_v<T, UnaryExpr>) {
          bool parens = 6 < min_prec;
          if (parens) os << "(";
          os << "not ";
          print_expr_prec(os, *node.operand, 6);
          if (parens) os << ")";
        }
      },
      expr.node);
}

std::string pad(int indent) { return std::string(static_cast<size_t>(indent), '\t'); }

void print_type(std::ostream& os, const TypeAnnot& type) {
  if (type.separate) os << "separate ";
  os << type.base;
}

void print_instr(std::ostream& os, const Instruction& instr, int indent);

void print_block(std::ostream& os, const std::vector<InstrPtr>& block, int indent) {
  for (const auto& instr : block) print_instr(os, *instr, indent);
}

void print_instr(std::ostream& os, const Instruction& instr, int indent) {
  os << pad(indent);
  std::visit(
      [&](const auto& node) {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, CreateInstr>) {
          os << "create " << node.target << "." << node.creation_proc;
          if (!node.args.empty()) print_args(os, node.args);
          os << "\n";
        } else if constexpr (std::is_same_v<T, AssignInstr>) {
          os << (node.to_result ? "Result" : node.target) << " := ";
          print_expr_prec(os, *node.value, 0);
          os << "\n";
        } else if constexpr (std::is_same_v<T, CallInstr>) {
          if (node.target) {
            print_expr_prec(os, *node.target, 7);
            os << ".";
          }
          os << node.feature;
          if (!node.args.empty()) print_args(os, node.args);
          os << "\n";
        } else if constexpr (std::is_same_v<T, IfInstr>) {
          os << "if ";
          print_expr_prec(os, *node.condition, 0);
          os << " then\n";
          print_block(os, node.then_branch, indent + 1);
          if (!node.else_branch.empty()) {
            os << pad(indent) << "else\n";
            print_block(os, node.else_branch, indent + 1);
          }
          os << pad(indent) << "end\n";
        } else if constexpr (std::is_same_v<T, LoopInstr>) {
          os << "from\n";
          print_block(os, node.init, indent + 1);
          os << pad(indent) << "until\n";
          os << pad(indent + 1);
          print_expr_prec(os, *node.until, 0);
          os << "\n" << pad(indent) << "loop\n";
          print_block(os, node.body, indent + 1);
          os << pad(indent) << "end\n";
        }
      },
      instr.node);
}

void print_clauses(std::ostream& os, const char* keyword,
                   const std::vector<AssertionClause>& clauses, int indent) {
  if (clauses.empty()) return;
  os << pad(indent) << keyword << "\n";
  for (const auto& clause : clauses) {
    os << pad(indent + 1);
    if (!clause.tag.empty()) os << clause.tag << ": ";
    print_expr_prec(os, *clause.expr, 0);
    os << "\n";
  }
}

void print_params(std::ostream& os, const std::vector<Param>& params) {
  for (size_t i = 0; i < params.size(); i++) {
    if (i) os << "; ";
    os << params[i].name << ": ";
    print_type(os, params[i].type);
  }
}

}  // namespace

std::string print_expr(const Expr& expr) {
  std::ostringstream os;
  print_expr_prec(os, expr, 0);
  return os.str();
}

std::string print_instruction(const Instruction& instr, int indent) {
  std::ostringstream os;
  print_instr(os, instr, indent);
  return os.str();
}

std::string print_class(const ClassAst& cls) {
  std::ostringstream os;
  os << "class " << cls.name << "\n\n";
  if (!cls.creation_procs.empty()) {
    os << "create ";
    for (size_t i = 0; i < cls.creation_procs.size(); i++) {
      if (i) os << ", ";
      os << cls.creation_procs[i];
    }
    os << "\n\n";
  }
  os << "feature\n\n";
  for (const auto& attr : cls.attributes) {
    os << "\t" << attr.name << ": ";
    print_type(os, attr.type);
    os << "\n\n";
  }
  for (const auto& routine : cls.routines) {
    os << "\t" << routine.name;
    if (!routine.formals.empty()) {
      os << " (";
      print_params(os, routine.formals);
      os << ")";
    }
    if (routine.return_type) {
      os << ": ";
      print_type(os, *routine.return_type);
    }
    os << "\n";
    print_clauses(os, "require", routine.require_clauses, 2);
    if (!routine.locals.empty()) {
      os << "\t\tlocal\n\t\t\t";
      print_params(os, routine.locals);
      os << "\n";
    }
    os << "\t\tdo\n";
    for (const auto& instr : routine.body) print_instr(os, *instr, 3);
    print_clauses(os, "ensure", routine.ensure_clauses, 2);
    os << "\t\tend\n\n";
  }
  os << "end\n";
  return os.str();
}

}  // namespace coopcheck
