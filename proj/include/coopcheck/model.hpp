#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "coopcheck/diagnostics.hpp"

namespace coopcheck {

enum class ValueKind : uint8_t { int_v, bool_v, ref_v };

// Resolved type: value kind, separateness, and the class (by template index)
// for references.
struct TypeRef {
  ValueKind kind = ValueKind::int_v;
  bool separate = false;
  int class_id = -1;

  bool is_ref() const { return kind == ValueKind::ref_v; }
  bool same_shape(const TypeRef& other) const {
    return kind == other.kind && (!is_ref() || class_id == other.class_id);
  }
};

struct SlotDef {
  std::string name;
  TypeRef type;
};

struct ObjectTemplate {
  std::string class_name;
  std::vector<SlotDef> slots;  // source declaration order

  int slot_index(const std::string& name) const {
    for (size_t i = 0; i < slots.size(); i++)
      if (slots[i].name == name) return static_cast<int>(i);
    return -1;
  }
};

// ---- lowered expressions ----

struct IrExpr;
using IrExprPtr = std::shared_ptr<const IrExpr>;

struct IrInt { long long value; };
struct IrBool { bool value; };
struct IrVoid {};
struct IrCurrent {};
struct IrResult {};
struct IrFormal { int index; };
struct IrLocal { int index; };
struct IrAttr { int slot; };
// A query call, qualified or on Current. `feature` indexes ModelProgram's
// feature table; synthesized attribute getters land here too.
struct IrQuery {
  IrExprPtr target;
  int feature;
  std::vector<IrExprPtr> args;
};
struct IrBinary {
  std::string op;
  IrExprPtr lhs;
  IrExprPtr rhs;
};
struct IrNot { IrExprPtr operand; };

struct IrExpr {
  std::variant<IrInt, IrBool, IrVoid, IrCurrent, IrResult, IrFormal, IrLocal,
               IrAttr, IrQuery, IrBinary, IrNot>
      node;
  TypeRef type;
  SourceLoc loc;
};

// ---- feature graphs ----

using StateId = int;

// Assignment targets and lock sets name variables of the executing frame.
struct VarRef {
  enum class Kind : uint8_t { formal, local, attr_slot, result } kind;
  int index = 0;
};

enum class TestRole : uint8_t {
  control,       // if / loop branch
  require_pass,
  require_fail,  // taking this branch means the require clause failed
  ensure_pass,
  ensure_fail,   // taking this branch means the ensure clause failed
};

struct Action {
  enum class Kind : uint8_t {
    assign,
    command_call,
    create,
    lock,
    unlock,
    unlock_creator,
    test,
    noop,
  };

  Kind kind;
  StateId out_state = -1;
  SourceLoc loc;

  // assign
  VarRef assign_target{};
  IrExprPtr expr;  // assign rhs or test condition

  // command_call / create
  IrExprPtr call_target;  // command_call only
  int callee = -1;        // feature index
  std::vector<IrExprPtr> args;
  VarRef create_target{};  // create only
  bool create_separate = false;

  // lock / unlock
  std::vector<VarRef> lock_vars;

  // test
  TestRole test_role = TestRole::control;
  StateId retry_state = -1;  // require_fail: the entry Lock state
  std::string tag;           // assertion tag for diagnostics
};

struct FeatureGraph {
  int index = -1;
  std::string class_name;
  std::string feature_name;
  int class_id = -1;
  bool is_query = false;
  bool is_creation = false;
  bool synthesized_getter = false;
  TypeRef return_type;  // queries only

  struct Formal {
    std::string name;
    TypeRef type;
  };
  std::vector<Formal> formals;
  std::vector<Formal> locals;

  struct State {
    std::vector<int> out_actions;  // at most 2; 2 means a complementary Test pair
  };
  std::vector<State> states;
  std::vector<Action> actions;

  StateId init_state = -1;
  StateId body_final = -1;
  StateId post_final = -1;          // -1 when no ensure chain
  StateId ensure_entry = -1;        // check_postcondition link from body_final
  StateId entry_lock_state = -1;

  bool is_final(StateId s) const { return states[s].out_actions.empty(); }
  std::string qualified_name() const { return class_name + "." + feature_name; }
};

struct ModelProgram {
  std::vector<ObjectTemplate> templates;  // index = class id
  std::map<std::string, int> class_index;
  std::vector<FeatureGraph> features;
  std::map<std::pair<int, std::string>, int> feature_index;
  int root_class = -1;
  int root_feature = -1;

  int find_class(const std::string& name) const {
    auto it = class_index.find(name);
    return it == class_index.end() ? -1 : it->second;
  }
  int find_feature(int class_id, const std::string& name) const {
    auto it = feature_index.find({class_id, name});
    return it == feature_index.end() ? -1 : it->second;
  }
};

// Structural well-formedness of the lowered program; returns one diagnostic
// per violation.
std::vector<Diagnostic> validate_model(const ModelProgram& program);

// Line-oriented, tab-separated dump. Byte-identical across runs for the same
// input; the format is documented in docs/model-dump.md.
std::string dump_model(const ModelProgram& program);

std::string describe_ir_expr(const IrExpr& expr);

}  // namespace coopcheck
