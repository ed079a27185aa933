#include <functional>
#include <sstream>

#include "coopcheck/model.hpp"

namespace coopcheck {

namespace {

std::string type_name(const ModelProgram& prog, const TypeRef& t) {
  switch (t.kind) {
    case ValueKind::int_v: return "INTEGER";
    case ValueKind::bool_v: return "BOOLEAN";
    case ValueKind::ref_v:
      break;
  }
  std::string base =
      t.class_id >= 0 ? prog.templates[t.class_id].class_name : "NONE";
  return t.separate ? "separate " + base : base;
}

std::string var_name(const ModelProgram& prog, const FeatureGraph& g,
                     const VarRef& ref) {
  switch (ref.kind) {
    case VarRef::Kind::formal: return g.formals[ref.index].name;
    case VarRef::Kind::local: return g.locals[ref.index].name;
    case VarRef::Kind::attr_slot:
      return prog.templates[g.class_id].slots[ref.index].name;
    case VarRef::Kind::result: return "Result";
  }
  return "?";
}

std::string render_expr(const ModelProgram& prog, const FeatureGraph& g,
                        const IrExpr& e) {
  return std::visit(
      [&](const auto& node) -> std::string {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, IrInt>) {
          return std::to_string(node.value);
        } else if constexpr (std::is_same_v<T, IrBool>) {
          return node.value ? "True" : "False";
        } else if constexpr (std::is_same_v<T, IrVoid>) {
          return "Void";
        } else if constexpr (std::is_same_v<T, IrCurrent>) {
          return "Current";
        } else if constexpr (std::is_same_v<T, IrResult>) {
          return "Result";
        } else if constexpr (std::is_same_v<T, IrFormal>) {
          return g.formals[node.index].name;
        } else if constexpr (std::is_same_v<T, IrLocal>) {
          return g.locals[node.index].name;
        } else if constexpr (std::is_same_v<T, IrAttr>) {
          return prog.templates[g.class_id].slots[node.slot].name;
        } else if constexpr (std::is_same_v<T, IrQuery>) {
          std::string out = render_expr(prog, g, *node.target) + "." +
                            prog.features[node.feature].feature_name;
          if (!node.args.empty()) {
            out += "(";
            for (size_t i = 0; i < node.args.size(); i++) {
              if (i) out += ", ";
              out += render_expr(prog, g, *node.args[i]);
            }
            out += ")";
          }
          return out;
        } else if constexpr (std::is_same_v<T, IrBinary>) {
          return "(" + render_expr(prog, g, *node.lhs) + " " + node.op + " " +
                 render_expr(prog, g, *node.rhs) + ")";
        } else {  // IrNot
          return "(not " + render_expr(prog, g, *node.operand) + ")";
        }
      },
      e.node);
}

const char* role_name(TestRole role) {
  switch (role) {
    case TestRole::control: return "control";
    case TestRole::require_pass: return "require_pass";
    case TestRole::require_fail: return "require_fail";
    case TestRole::ensure_pass: return "ensure_pass";
    case TestRole::ensure_fail: return "ensure_fail";
  }
  return "?";
}

const char* kind_name(Action::Kind kind) {
  switch (kind) {
    case Action::Kind::assign: return "assign";
    case Action::Kind::command_call: return "call";
    case Action::Kind::create: return "create";
    case Action::Kind::lock: return "lock";
    case Action::Kind::unlock: return "unlock";
    case Action::Kind::unlock_creator: return "unlock_creator";
    case Action::Kind::test: return "test";
    case Action::Kind::noop: return "noop";
  }
  return "?";
}

}  // namespace

std::string describe_ir_expr(const IrExpr& expr) {
  return std::visit(
      [&](const auto& node) -> std::string {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, IrInt>) {
          return std::to_string(node.value);
        } else if constexpr (std::is_same_v<T, IrBool>) {
          return node.value ? "True" : "False";
        } else if constexpr (std::is_same_v<T, IrVoid>) {
          return "Void";
        } else if constexpr (std::is_same_v<T, IrCurrent>) {
          return "Current";
        } else if constexpr (std::is_same_v<T, IrResult>) {
          return "Result";
        } else if constexpr (std::is_same_v<T, IrFormal>) {
          return "formal#" + std::to_string(node.index);
        } else if constexpr (std::is_same_v<T, IrLocal>) {
          return "local#" + std::to_string(node.index);
        } else if constexpr (std::is_same_v<T, IrAttr>) {
          return "attr#" + std::to_string(node.slot);
        } else if constexpr (std::is_same_v<T, IrQuery>) {
          std::string out =
              describe_ir_expr(*node.target) + ".f" + std::to_string(node.feature);
          out += "(";
          for (size_t i = 0; i < node.args.size(); i++) {
            if (i) out += ", ";
            out += describe_ir_expr(*node.args[i]);
          }
          out += ")";
          return out;
        } else if constexpr (std::is_same_v<T, IrBinary>) {
          return "(" + describe_ir_expr(*node.lhs) + " " + node.op + " " +
                 describe_ir_expr(*node.rhs) + ")";
        } else {  // IrNot
          return "(not " + describe_ir_expr(*node.operand) + ")";
        }
      },
      expr.node);
}

std::vector<Diagnostic> validate_model(const ModelProgram& program) {
  std::vector<Diagnostic> issues;
  auto complain = [&](const FeatureGraph& g, const std::string& msg) {
    issues.push_back(
        {DiagKind::lowering_error, {}, g.qualified_name() + ": " + msg});
  };

  std::function<void(const FeatureGraph&, const IrExpr&)> check_expr =
      [&](const FeatureGraph& g, const IrExpr& e) {
        std::visit(
            [&](const auto& node) {
              using T = std::decay_t<decltype(node)>;
              if constexpr (std::is_same_v<T, IrFormal>) {
                if (node.index < 0 ||
                    node.index >= static_cast<int>(g.formals.size()))
                  complain(g, "formal index out of range in expression");
              } else if constexpr (std::is_same_v<T, IrLocal>) {
                if (node.index < 0 ||
                    node.index >= static_cast<int>(g.locals.size()))
                  complain(g, "local index out of range in expression");
              } else if constexpr (std::is_same_v<T, IrAttr>) {
                const auto& slots = program.templates[g.class_id].slots;
                if (node.slot < 0 || node.slot >= static_cast<int>(slots.size()))
                  complain(g, "attribute slot out of range in expression");
              } else if constexpr (std::is_same_v<T, IrQuery>) {
                if (node.feature < 0 ||
                    node.feature >= static_cast<int>(program.features.size()))
                  complain(g, "query feature index out of range");
                else if (!program.features[node.feature].is_query)
                  complain(g, "query expression calls a command");
                check_expr(g, *node.target);
                for (const auto& arg : node.args) check_expr(g, *arg);
              } else if constexpr (std::is_same_v<T, IrBinary>) {
                check_expr(g, *node.lhs);
                check_expr(g, *node.rhs);
              } else if constexpr (std::is_same_v<T, IrNot>) {
                check_expr(g, *node.operand);
              }
            },
            e.node);
      };

  for (const auto& g : program.features) {
    int n_states = static_cast<int>(g.states.size());
    auto valid_state = [&](StateId s) { return s >= 0 && s < n_states; };

    if (!valid_state(g.init_state)) complain(g, "init state out of range");
    if (!valid_state(g.body_final)) complain(g, "body_final out of range");
    if ((g.ensure_entry >= 0) != (g.post_final >= 0))
      complain(g, "ensure_entry and post_final must be set together");
    if (g.ensure_entry >= 0 &&
        (!valid_state(g.ensure_entry) || !valid_state(g.post_final)))
      complain(g, "ensure chain states out of range");

    if (valid_state(g.body_final) && !g.is_final(g.body_final))
      complain(g, "body_final has outgoing actions");
    if (g.post_final >= 0 && valid_state(g.post_final) && !g.is_final(g.post_final))
      complain(g, "post_final has outgoing actions");

    for (const auto& action : g.actions) {
      if (!valid_state(action.out_state))
        complain(g, "action out state out of range");
      if (action.kind == Action::Kind::test &&
          action.test_role == TestRole::require_fail) {
        if (action.retry_state != g.entry_lock_state)
          complain(g, "require_fail retry does not land on the entry lock");
      }
      if ((action.kind == Action::Kind::command_call ||
           action.kind == Action::Kind::create) &&
          (action.callee < 0 ||
           action.callee >= static_cast<int>(program.features.size())))
        complain(g, "callee index out of range");
      if (action.expr) check_expr(g, *action.expr);
      if (action.call_target) check_expr(g, *action.call_target);
      for (const auto& arg : action.args) check_expr(g, *arg);
    }

    for (size_t s = 0; s < g.states.size(); s++) {
      const auto& outs = g.states[s].out_actions;
      if (outs.size() > 2) {
        complain(g, "state " + std::to_string(s) + " has more than two actions");
        continue;
      }
      for (int a : outs)
        if (a < 0 || a >= static_cast<int>(g.actions.size()))
          complain(g, "state " + std::to_string(s) + " lists a bad action index");
      if (outs.size() == 2) {
        const Action& first = g.actions[outs[0]];
        const Action& second = g.actions[outs[1]];
        bool pair_ok = first.kind == Action::Kind::test &&
                       second.kind == Action::Kind::test && second.expr &&
                       std::holds_alternative<IrNot>(second.expr->node) &&
                       std::get<IrNot>(second.expr->node).operand == first.expr;
        if (!pair_ok)
          complain(g, "state " + std::to_string(s) +
                          " branches without a complementary test pair");
      }
    }

    // Every state must be reachable from the entry or the ensure chain.
    std::vector<bool> seen(g.states.size(), false);
    std::vector<StateId> work;
    auto push = [&](StateId s) {
      if (valid_state(s) && !seen[s]) {
        seen[s] = true;
        work.push_back(s);
      }
    };
    push(g.init_state);
    push(g.ensure_entry);
    while (!work.empty()) {
      StateId s = work.back();
      work.pop_back();
      for (int a : g.states[s].out_actions)
        if (a >= 0 && a < static_cast<int>(g.actions.size()))
          push(g.actions[a].out_state);
    }
    for (size_t s = 0; s < g.states.size(); s++)
      if (!seen[s]) complain(g, "state " + std::to_string(s) + " is unreachable");
  }
  return issues;
}

std::string dump_model(const ModelProgram& program) {
  std::ostringstream out;
  for (const auto& tmpl : program.templates) {
    out << "class " << tmpl.class_name << "\n";
    for (size_t i = 0; i < tmpl.slots.size(); i++)
      out << "\tslot " << i << " " << tmpl.slots[i].name << " "
          << type_name(program, tmpl.slots[i].type) << "\n";
  }
  for (const auto& g : program.features) {
    out << "feature " << g.qualified_name() << " kind="
        << (g.is_query ? "query" : "command") << " creation=" << g.is_creation
        << " getter=" << g.synthesized_getter;
    if (g.is_query) out << " return=" << type_name(program, g.return_type);
    out << "\n";
    for (size_t i = 0; i < g.formals.size(); i++)
      out << "\tformal " << i << " " << g.formals[i].name << " "
          << type_name(program, g.formals[i].type) << "\n";
    for (size_t i = 0; i < g.locals.size(); i++)
      out << "\tlocal " << i << " " << g.locals[i].name << " "
          << type_name(program, g.locals[i].type) << "\n";
    out << "\tstates=" << g.states.size() << " init=" << g.init_state
        << " body_final=" << g.body_final << " ensure_entry=" << g.ensure_entry
        << " post_final=" << g.post_final << "\n";
    for (size_t a = 0; a < g.actions.size(); a++) {
      const Action& action = g.actions[a];
      StateId from = -1;
      for (size_t s = 0; s < g.states.size() && from < 0; s++)
        for (int idx : g.states[s].out_actions)
          if (idx == static_cast<int>(a)) from = static_cast<StateId>(s);
      out << "\taction " << a << " " << from << "->" << action.out_state << " "
          << kind_name(action.kind);
      switch (action.kind) {
        case Action::Kind::assign:
          out << " " << var_name(program, g, action.assign_target) << " := "
              << render_expr(program, g, *action.expr);
          break;
        case Action::Kind::command_call:
          out << " " << render_expr(program, g, *action.call_target) << "."
              << program.features[action.callee].feature_name;
          break;
        case Action::Kind::create:
          out << " " << var_name(program, g, action.create_target) << "."
              << program.features[action.callee].feature_name
              << " separate=" << action.create_separate;
          break;
        case Action::Kind::lock:
        case Action::Kind::unlock: {
          out << " {";
          for (size_t i = 0; i < action.lock_vars.size(); i++) {
            if (i) out << ", ";
            out << var_name(program, g, action.lock_vars[i]);
          }
          out << "}";
          break;
        }
        case Action::Kind::test:
          out << " " << role_name(action.test_role);
          if (!action.tag.empty()) out << " tag=" << action.tag;
          out << " " << render_expr(program, g, *action.expr);
          if (action.retry_state >= 0) out << " retry=" << action.retry_state;
          break;
        case Action::Kind::unlock_creator:
        case Action::Kind::noop:
          break;
      }
      if (action.kind == Action::Kind::command_call ||
          action.kind == Action::Kind::create) {
        out << "(";
        for (size_t i = 0; i < action.args.size(); i++) {
          if (i) out << ", ";
          out << render_expr(program, g, *action.args[i]);
        }
        out << ")";
      }
      out << "\n";
    }
  }
  return out.str();
}

}  // namespace coopcheck
