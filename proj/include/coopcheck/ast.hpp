#pragma once

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "coopcheck/diagnostics.hpp"

namespace coopcheck {

// Type annotation as written: an optional `separate` marker plus a base name.
// INTEGER and BOOLEAN are value types and are never separate.
struct TypeAnnot {
  std::string base;
  bool separate = false;
  SourceLoc loc;

  bool is_integer() const { return base == "INTEGER"; }
  bool is_boolean() const { return base == "BOOLEAN"; }
  bool is_reference() const { return !is_integer() && !is_boolean(); }
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct IntLit { long long value = 0; };
struct BoolLit { bool value = false; };
struct VoidLit {};
struct CurrentLit {};
struct ResultLit {};
// A bare name, or an unqualified call when args are present. Without args the
// lowering decides between formal/local/attribute and a parameterless query.
struct NameExpr {
  std::string name;
  bool has_args = false;
  std::vector<ExprPtr> args;
};
struct QualifiedCall {
  ExprPtr target;
  std::string feature;
  std::vector<ExprPtr> args;
};
struct BinaryExpr {
  std::string op;  // + - * / < <= > >= = /= and or
  ExprPtr lhs;
  ExprPtr rhs;
};
struct UnaryExpr {
  std::string op;  // not
  ExprPtr operand;
};

struct Expr {
  std::variant<IntLit, BoolLit, VoidLit, CurrentLit, ResultLit, NameExpr,
               QualifiedCall, BinaryExpr, UnaryExpr>
      node;
  SourceLoc loc;
};

bool expr_equal(const Expr& a, const Expr& b);

struct Instruction;
using InstrPtr = std::shared_ptr<const Instruction>;

struct CreateInstr {
  std::string target;  // local or attribute name
  std::string creation_proc;
  std::vector<ExprPtr> args;
};
struct AssignInstr {
  bool to_result = false;
  std::string target;  // empty when to_result
  ExprPtr value;
};
struct CallInstr {
  ExprPtr target;  // null for unqualified calls (implicit Current)
  std::string feature;
  std::vector<ExprPtr> args;
};
struct IfInstr {
  ExprPtr condition;
  std::vector<InstrPtr> then_branch;
  std::vector<InstrPtr> else_branch;
};
struct LoopInstr {
  std::vector<InstrPtr> init;
  ExprPtr until;  // loop exits when this becomes True
  std::vector<InstrPtr> body;
};

struct Instruction {
  std::variant<CreateInstr, AssignInstr, CallInstr, IfInstr, LoopInstr> node;
  SourceLoc loc;
};

bool instr_equal(const Instruction& a, const Instruction& b);

struct Param {
  std::string name;
  TypeAnnot type;
  SourceLoc loc;
};

struct AssertionClause {
  std::string tag;  // may be empty
  ExprPtr expr;
  SourceLoc loc;
};

struct AttributeAst {
  std::string name;
  TypeAnnot type;
  SourceLoc loc;
};

struct FeatureAst {
  std::string name;
  std::vector<Param> formals;
  std::optional<TypeAnnot> return_type;
  std::vector<AssertionClause> require_clauses;
  std::vector<Param> locals;
  std::vector<InstrPtr> body;
  std::vector<AssertionClause> ensure_clauses;
  SourceLoc loc;

  bool is_query() const { return return_type.has_value(); }
};

struct ClassAst {
  std::string name;
  std::vector<std::string> creation_procs;
  std::vector<AttributeAst> attributes;  // source declaration order
  std::vector<FeatureAst> routines;      // source declaration order
  SourceLoc loc;

  const FeatureAst* find_routine(const std::string& name) const;
  const AttributeAst* find_attribute(const std::string& name) const;
};

bool class_equal(const ClassAst& a, const ClassAst& b);

}  // namespace coopcheck
