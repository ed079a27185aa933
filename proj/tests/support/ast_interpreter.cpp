#include "ast_interpreter.hpp"

namespace coopcheck::testing {

namespace {

struct V {
  bool is_bool = false;
  long long i = 0;
  bool b = false;

  static V of_int(long long v) { return {false, v, false}; }
  static V of_bool(bool v) { return {true, 0, v}; }
};

struct Activation {
  std::map<std::string, V> vars;  // formals and locals
  V result;
};

struct Interp {
  const ClassAst& cls;
  std::map<std::string, V> attrs;

  explicit Interp(const ClassAst& c) : cls(c) {
    for (const auto& a : c.attributes) {
      if (a.type.is_integer())
        attrs[a.name] = V::of_int(0);
      else if (a.type.is_boolean())
        attrs[a.name] = V::of_bool(false);
      else
        throw OracleFailure("oracle supports INTEGER and BOOLEAN attributes "
                            "only: " + a.name);
    }
  }

  V* lookup(Activation& act, const std::string& name) {
    if (auto it = act.vars.find(name); it != act.vars.end()) return &it->second;
    if (auto it = attrs.find(name); it != attrs.end()) return &it->second;
    return nullptr;
  }

  V eval(Activation& act, const Expr& e) {
    if (auto* lit = std::get_if<IntLit>(&e.node)) return V::of_int(lit->value);
    if (auto* lit = std::get_if<BoolLit>(&e.node)) return V::of_bool(lit->value);
    if (std::get_if<ResultLit>(&e.node)) return act.result;
    if (auto* name = std::get_if<NameExpr>(&e.node)) {
      if (!name->has_args)
        if (V* v = lookup(act, name->name)) return *v;
      return call(name->name, eval_args(act, name->args));
    }
    if (auto* bin = std::get_if<BinaryExpr>(&e.node)) {
      V l = eval(act, *bin->lhs);
      V r = eval(act, *bin->rhs);
      const std::string& op = bin->op;
      if (op == "and") return V::of_bool(l.b && r.b);
      if (op == "or") return V::of_bool(l.b || r.b);
      if (op == "=")
        return V::of_bool(l.is_bool ? l.b == r.b : l.i == r.i);
      if (op == "/=")
        return V::of_bool(l.is_bool ? l.b != r.b : l.i != r.i);
      if (op == "<") return V::of_bool(l.i < r.i);
      if (op == "<=") return V::of_bool(l.i <= r.i);
      if (op == ">") return V::of_bool(l.i > r.i);
      if (op == ">=") return V::of_bool(l.i >= r.i);
      if (op == "+") return V::of_int(l.i + r.i);
      if (op == "-") return V::of_int(l.i - r.i);
      if (op == "*") return V::of_int(l.i * r.i);
      if (op == "/") {
        if (r.i == 0) throw OracleFailure("division by zero");
        return V::of_int(l.i / r.i);
      }
      throw OracleFailure("oracle: unknown operator " + op);
    }
    if (auto* un = std::get_if<UnaryExpr>(&e.node)) {
      V v = eval(act, *un->operand);
      return V::of_bool(!v.b);
    }
    throw OracleFailure("oracle: unsupported expression form");
  }

  std::vector<V> eval_args(Activation& act, const std::vector<ExprPtr>& args) {
    std::vector<V> out;
    for (const auto& a : args) out.push_back(eval(act, *a));
    return out;
  }

  void exec_block(Activation& act, const std::vector<InstrPtr>& block) {
    for (const auto& instr : block) exec(act, *instr);
  }

  void exec(Activation& act, const Instruction& instr) {
    if (auto* assign = std::get_if<AssignInstr>(&instr.node)) {
      V v = eval(act, *assign->value);
      if (assign->to_result) {
        act.result = v;
      } else if (V* slot = lookup(act, assign->target)) {
        *slot = v;
      } else {
        throw OracleFailure("oracle: unknown assignment target " +
                            assign->target);
      }
      return;
    }
    if (auto* call_instr = std::get_if<CallInstr>(&instr.node)) {
      if (call_instr->target)
        throw OracleFailure("oracle: qualified calls unsupported");
      call(call_instr->feature, eval_args(act, call_instr->args));
      return;
    }
    if (auto* branch = std::get_if<IfInstr>(&instr.node)) {
      if (eval(act, *branch->condition).b)
        exec_block(act, branch->then_branch);
      else
        exec_block(act, branch->else_branch);
      return;
    }
    if (auto* loop = std::get_if<LoopInstr>(&instr.node)) {
      exec_block(act, loop->init);
      long long guard = 0;
      while (!eval(act, *loop->until).b) {
        exec_block(act, loop->body);
        if (++guard > 1000000)
          throw OracleFailure("oracle: loop ran past 1e6 iterations");
      }
      return;
    }
    throw OracleFailure("oracle: creation instructions unsupported");
  }

  V call(const std::string& name, std::vector<V> args) {
    const FeatureAst* routine = cls.find_routine(name);
    if (!routine) throw OracleFailure("oracle: no routine " + name);
    if (routine->formals.size() != args.size())
      throw OracleFailure("oracle: argument count mismatch calling " + name);

    Activation act;
    for (size_t i = 0; i < args.size(); i++)
      act.vars[routine->formals[i].name] = args[i];
    for (const auto& local : routine->locals) {
      if (local.type.is_integer())
        act.vars[local.name] = V::of_int(0);
      else if (local.type.is_boolean())
        act.vars[local.name] = V::of_bool(false);
      else
        throw OracleFailure("oracle: reference local " + local.name);
    }
    if (routine->return_type) {
      if (routine->return_type->is_integer())
        act.result = V::of_int(0);
      else if (routine->return_type->is_boolean())
        act.result = V::of_bool(false);
      else
        throw OracleFailure("oracle: reference result in " + name);
    }

    for (const auto& clause : routine->require_clauses)
      if (!eval(act, *clause.expr).b)
        throw OracleFailure("oracle: require failed in " + name);
    exec_block(act, routine->body);
    for (const auto& clause : routine->ensure_clauses)
      if (!eval(act, *clause.expr).b)
        throw OracleFailure("oracle: ensure failed in " + name);
    return act.result;
  }
};

}  // namespace

OracleResult interpret_sequential(const ClassAst& root_class,
                                  const std::string& root_proc) {
  Interp interp(root_class);
  interp.call(root_proc, {});

  OracleResult out;
  for (const auto& [name, v] : interp.attrs) {
    if (v.is_bool)
      out.bools[name] = v.b;
    else
      out.ints[name] = v.i;
  }
  return out;
}

}  // namespace coopcheck::testing
