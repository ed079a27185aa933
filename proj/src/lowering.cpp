#include <algorithm>
#include <cassert>
#include <set>

#include "coopcheck/lowering.hpp"

namespace coopcheck {

namespace {

IrExprPtr make_ir(IrExpr e) { return std::make_shared<const IrExpr>(std::move(e)); }

[[noreturn]] void fail(DiagKind kind, const std::string& msg, const SourceLoc& loc) {
  throw CompileError({kind, loc, msg});
}

std::string shape_name(const ModelProgram& prog, const TypeRef& t) {
  switch (t.kind) {
    case ValueKind::int_v: return "INTEGER";
    case ValueKind::bool_v: return "BOOLEAN";
    case ValueKind::ref_v:
      break;
  }
  std::string name = t.class_id >= 0 ? prog.templates[t.class_id].class_name
                                     : std::string("NONE");
  return t.separate ? "separate " + name : name;
}

class Lowerer {
 public:
  Lowerer(const std::vector<ClassAst>& classes, const std::string& root)
      : classes_(classes), root_(root) {}

  ModelProgram run() {
    symbols_ = collect_signatures(classes_);
    build_templates();
    enumerate_features();
    for (const auto& cls : sorted_classes_) build_class_features(*cls);
    resolve_root();
    return std::move(prog_);
  }

 private:
  // ---- pass structure ----

  void build_templates() {
    for (const auto& cls : classes_) sorted_classes_.push_back(&cls);
    std::sort(sorted_classes_.begin(), sorted_classes_.end(),
              [](const ClassAst* a, const ClassAst* b) { return a->name < b->name; });
    for (const auto* cls : sorted_classes_) {
      int id = static_cast<int>(prog_.templates.size());
      prog_.class_index.emplace(cls->name, id);
      prog_.templates.push_back({cls->name, {}});
    }
    for (const auto* cls : sorted_classes_) {
      auto& tmpl = prog_.templates[prog_.class_index.at(cls->name)];
      for (const auto& attr : cls->attributes)
        tmpl.slots.push_back({attr.name, resolve_type(attr.type)});
    }
  }

  TypeRef resolve_type(const TypeAnnot& annot) const {
    if (annot.is_integer()) return {ValueKind::int_v, false, -1};
    if (annot.is_boolean()) return {ValueKind::bool_v, false, -1};
    auto it = prog_.class_index.find(annot.base);
    if (it == prog_.class_index.end())
      fail(DiagKind::unknown_type, "unknown type " + annot.base, annot.loc);
    return {ValueKind::ref_v, annot.separate, it->second};
  }

  void enumerate_features() {
    for (const auto* cls : sorted_classes_) {
      int class_id = prog_.class_index.at(cls->name);
      for (const auto& attr : cls->attributes) declare_feature(class_id, attr.name);
      for (const auto& routine : cls->routines) declare_feature(class_id, routine.name);
    }
  }

  void declare_feature(int class_id, const std::string& name) {
    int index = static_cast<int>(prog_.features.size());
    prog_.feature_index.emplace(std::make_pair(class_id, name), index);
    FeatureGraph graph;
    graph.index = index;
    graph.class_id = class_id;
    graph.class_name = prog_.templates[class_id].class_name;
    graph.feature_name = name;
    prog_.features.push_back(std::move(graph));
  }

  void build_class_features(const ClassAst& cls) {
    int class_id = prog_.class_index.at(cls.name);
    const auto& tmpl = prog_.templates[class_id];
    for (const auto& attr : cls.attributes) {
      int index = prog_.find_feature(class_id, attr.name);
      build_getter(prog_.features[index], tmpl.slot_index(attr.name));
    }
    std::set<std::string> creation(cls.creation_procs.begin(), cls.creation_procs.end());
    for (const auto& routine : cls.routines) {
      int index = prog_.find_feature(class_id, routine.name);
      build_routine(prog_.features[index], cls, routine, creation.count(routine.name) > 0);
    }
  }

  void build_getter(FeatureGraph& graph, int slot) {
    const auto& tmpl = prog_.templates[graph.class_id];
    graph.is_query = true;
    graph.synthesized_getter = true;
    graph.return_type = tmpl.slots[slot].type;
    graph.states.resize(2);
    graph.init_state = 0;
    graph.body_final = 1;
    graph.entry_lock_state = 0;
    Action read;
    read.kind = Action::Kind::assign;
    read.assign_target = {VarRef::Kind::result, 0};
    read.expr = make_ir({IrAttr{slot}, graph.return_type, {}});
    read.out_state = 1;
    graph.states[0].out_actions.push_back(0);
    graph.actions.push_back(std::move(read));
  }

  // ---- routine lowering ----

  struct Ctx {
    const ClassAst* cls = nullptr;
    int class_id = -1;
    const FeatureAst* routine = nullptr;
    FeatureGraph* graph = nullptr;
  };

  StateId new_state(FeatureGraph& g) {
    g.states.emplace_back();
    return static_cast<StateId>(g.states.size() - 1);
  }

  int add_action(FeatureGraph& g, StateId from, Action action) {
    int index = static_cast<int>(g.actions.size());
    g.actions.push_back(std::move(action));
    g.states[from].out_actions.push_back(index);
    return index;
  }

  void build_routine(FeatureGraph& graph, const ClassAst& cls,
                     const FeatureAst& routine, bool is_creation) {
    graph.is_query = routine.is_query();
    graph.is_creation = is_creation;
    if (routine.return_type) graph.return_type = resolve_type(*routine.return_type);
    for (const auto& p : routine.formals)
      graph.formals.push_back({p.name, resolve_type(p.type)});
    for (const auto& p : routine.locals)
      graph.locals.push_back({p.name, resolve_type(p.type)});

    Ctx ctx{&cls, graph.class_id, &routine, &graph};

    graph.init_state = new_state(graph);
    graph.entry_lock_state = graph.init_state;

    std::vector<VarRef> lock_set;
    for (size_t i = 0; i < graph.formals.size(); i++)
      if (graph.formals[i].type.is_ref() && graph.formals[i].type.separate)
        lock_set.push_back({VarRef::Kind::formal, static_cast<int>(i)});

    StateId cur = new_state(graph);
    {
      Action entry;
      entry.kind = lock_set.empty() ? Action::Kind::noop : Action::Kind::lock;
      entry.lock_vars = lock_set;
      entry.out_state = cur;
      entry.loc = routine.loc;
      add_action(graph, graph.init_state, std::move(entry));
    }

    for (const auto& clause : routine.require_clauses)
      cur = lower_assertion(ctx, cur, clause, TestRole::require_pass);

    cur = lower_block(ctx, cur, routine.body);

    if (is_creation) {
      StateId next = new_state(graph);
      Action release;
      release.kind = Action::Kind::unlock_creator;
      release.out_state = next;
      release.loc = routine.loc;
      add_action(graph, cur, std::move(release));
      cur = next;
    }

    if (!lock_set.empty()) {
      StateId next = new_state(graph);
      Action exit;
      exit.kind = Action::Kind::unlock;
      exit.lock_vars = lock_set;
      exit.out_state = next;
      exit.loc = routine.loc;
      add_action(graph, cur, std::move(exit));
      cur = next;
    }
    graph.body_final = cur;

    if (!routine.ensure_clauses.empty()) {
      StateId post = new_state(graph);
      graph.ensure_entry = post;
      for (const auto& clause : routine.ensure_clauses)
        post = lower_assertion(ctx, post, clause, TestRole::ensure_pass);
      graph.post_final = post;
    }
  }

  StateId lower_assertion(Ctx& ctx, StateId from, const AssertionClause& clause,
                          TestRole pass_role) {
    IrExprPtr cond = lower_expr(ctx, *clause.expr);
    require_bool(cond, clause.loc);
    StateId pass_state = new_state(*ctx.graph);

    Action pass;
    pass.kind = Action::Kind::test;
    pass.expr = cond;
    pass.test_role = pass_role;
    pass.tag = clause.tag;
    pass.out_state = pass_state;
    pass.loc = clause.loc;
    add_action(*ctx.graph, from, std::move(pass));

    Action failed;
    failed.kind = Action::Kind::test;
    failed.expr = make_ir({IrNot{cond}, {ValueKind::bool_v, false, -1}, clause.loc});
    failed.tag = clause.tag;
    failed.loc = clause.loc;
    if (pass_role == TestRole::require_pass) {
      failed.test_role = TestRole::require_fail;
      failed.retry_state = ctx.graph->entry_lock_state;
      failed.out_state = ctx.graph->entry_lock_state;
    } else {
      failed.test_role = TestRole::ensure_fail;
      failed.out_state = pass_state;  // never advanced: taking it raises the error
    }
    add_action(*ctx.graph, from, std::move(failed));

    return pass_state;
  }

  StateId lower_block(Ctx& ctx, StateId from, const std::vector<InstrPtr>& block) {
    for (const auto& instr : block) from = lower_instr(ctx, from, *instr);
    return from;
  }

  StateId lower_instr(Ctx& ctx, StateId from, const Instruction& instr) {
    FeatureGraph& g = *ctx.graph;
    return std::visit(
        [&](const auto& node) -> StateId {
          using T = std::decay_t<decltype(node)>;
          if constexpr (std::is_same_v<T, AssignInstr>) {
            return lower_assign(ctx, from, node, instr.loc);
          } else if constexpr (std::is_same_v<T, CallInstr>) {
            return lower_call(ctx, from, node, instr.loc);
          } else if constexpr (std::is_same_v<T, CreateInstr>) {
            return lower_create(ctx, from, node, instr.loc);
          } else if constexpr (std::is_same_v<T, IfInstr>) {
            IrExprPtr cond = lower_expr(ctx, *node.condition);
            require_bool(cond, instr.loc);
            StateId then_start = new_state(g);
            Action then_test;
            then_test.kind = Action::Kind::test;
            then_test.expr = cond;
            then_test.out_state = then_start;
            then_test.loc = instr.loc;
            add_action(g, from, std::move(then_test));

            Action else_test;
            else_test.kind = Action::Kind::test;
            else_test.expr =
                make_ir({IrNot{cond}, {ValueKind::bool_v, false, -1}, instr.loc});
            else_test.loc = instr.loc;
            StateId join = lower_block(ctx, then_start, node.then_branch);
            if (node.else_branch.empty()) {
              else_test.out_state = join;
              add_action(g, from, std::move(else_test));
            } else {
              StateId else_start = new_state(g);
              else_test.out_state = else_start;
              add_action(g, from, std::move(else_test));
              StateId else_end = lower_block(ctx, else_start, node.else_branch);
              Action bridge;
              bridge.kind = Action::Kind::noop;
              bridge.out_state = join;
              bridge.loc = instr.loc;
              add_action(g, else_end, std::move(bridge));
            }
            return join;
          } else {  // LoopInstr
            StateId head = lower_block(ctx, from, node.init);
            IrExprPtr until = lower_expr(ctx, *node.until);
            require_bool(until, instr.loc);
            StateId exit_state = new_state(g);
            Action exit_test;
            exit_test.kind = Action::Kind::test;
            exit_test.expr = until;
            exit_test.out_state = exit_state;
            exit_test.loc = instr.loc;
            add_action(g, head, std::move(exit_test));

            Action continue_test;
            continue_test.kind = Action::Kind::test;
            continue_test.expr =
                make_ir({IrNot{until}, {ValueKind::bool_v, false, -1}, instr.loc});
            continue_test.loc = instr.loc;
            if (node.body.empty()) {
              continue_test.out_state = head;
              add_action(g, head, std::move(continue_test));
            } else {
              StateId body_start = new_state(g);
              continue_test.out_state = body_start;
              add_action(g, head, std::move(continue_test));
              StateId body_end = lower_block(ctx, body_start, node.body);
              Action back;
              back.kind = Action::Kind::noop;
              back.out_state = head;
              back.loc = instr.loc;
              add_action(g, body_end, std::move(back));
            }
            return exit_state;
          }
        },
        instr.node);
  }

  StateId lower_assign(Ctx& ctx, StateId from, const AssignInstr& assign,
                       const SourceLoc& loc) {
    FeatureGraph& g = *ctx.graph;
    IrExprPtr value = lower_expr(ctx, *assign.value);
    Action action;
    action.kind = Action::Kind::assign;
    action.expr = value;
    action.loc = loc;

    TypeRef target_type;
    if (assign.to_result) {
      if (!g.is_query)
        fail(DiagKind::lowering_error,
             g.qualified_name() + " is not a query, Result cannot be assigned", loc);
      action.assign_target = {VarRef::Kind::result, 0};
      target_type = g.return_type;
    } else {
      auto [ref, type] = resolve_var(ctx, assign.target, loc);
      if (ref.kind == VarRef::Kind::formal)
        fail(DiagKind::lowering_error,
             "cannot assign to formal argument '" + assign.target + "'", loc);
      action.assign_target = ref;
      target_type = type;
    }
    check_binding(target_type, value->type, loc, "assignment to");

    StateId next = new_state(g);
    action.out_state = next;
    add_action(g, from, std::move(action));
    return next;
  }

  StateId lower_call(Ctx& ctx, StateId from, const CallInstr& call,
                     const SourceLoc& loc) {
    FeatureGraph& g = *ctx.graph;
    IrExprPtr target = call.target
                           ? lower_expr(ctx, *call.target)
                           : make_ir({IrCurrent{},
                                      {ValueKind::ref_v, false, ctx.class_id}, loc});
    auto [callee, sig] = resolve_callee(target, call.feature, loc);
    if (sig->return_type)
      fail(DiagKind::lowering_error,
           call.feature + " is a query and cannot be called as an instruction", loc);
    Action action;
    action.kind = Action::Kind::command_call;
    action.call_target = target;
    action.callee = callee;
    action.args = lower_args(ctx, *sig, call.args, loc);
    action.loc = loc;
    StateId next = new_state(g);
    action.out_state = next;
    add_action(g, from, std::move(action));
    return next;
  }

  StateId lower_create(Ctx& ctx, StateId from, const CreateInstr& create,
                       const SourceLoc& loc) {
    FeatureGraph& g = *ctx.graph;
    auto [ref, type] = resolve_var(ctx, create.target, loc);
    if (ref.kind == VarRef::Kind::formal)
      fail(DiagKind::lowering_error,
           "cannot create into formal argument '" + create.target + "'", loc);
    if (!type.is_ref())
      fail(DiagKind::type_mismatch,
           "creation target '" + create.target + "' must have a reference type", loc);

    const ClassAst* target_cls = nullptr;
    for (const auto& c : classes_)
      if (prog_.class_index.at(c.name) == type.class_id) target_cls = &c;
    assert(target_cls);
    if (std::find(target_cls->creation_procs.begin(), target_cls->creation_procs.end(),
                  create.creation_proc) == target_cls->creation_procs.end())
      fail(DiagKind::lowering_error,
           create.creation_proc + " is not a creation procedure of class " +
               target_cls->name,
           loc);
    const auto& sig = symbols_.find(target_cls->name)->routines.at(create.creation_proc);

    Action action;
    action.kind = Action::Kind::create;
    action.create_target = ref;
    action.create_separate = type.separate;
    action.callee = prog_.find_feature(type.class_id, create.creation_proc);
    action.args = lower_args(ctx, sig, create.args, loc);
    action.loc = loc;
    StateId next = new_state(g);
    action.out_state = next;
    add_action(g, from, std::move(action));

    if (type.separate) {
      // The new processor starts creation-locked; the creator's paired
      // lock/unlock below keeps creation synchronous.
      StateId locked = new_state(g);
      Action lock;
      lock.kind = Action::Kind::lock;
      lock.lock_vars = {ref};
      lock.out_state = locked;
      lock.loc = loc;
      add_action(g, next, std::move(lock));

      StateId released = new_state(g);
      Action unlock;
      unlock.kind = Action::Kind::unlock;
      unlock.lock_vars = {ref};
      unlock.out_state = released;
      unlock.loc = loc;
      add_action(g, locked, std::move(unlock));
      return released;
    }
    return next;
  }

  // ---- expressions ----

  std::pair<VarRef, TypeRef> resolve_var(Ctx& ctx, const std::string& name,
                                         const SourceLoc& loc) {
    FeatureGraph& g = *ctx.graph;
    for (size_t i = 0; i < g.formals.size(); i++)
      if (g.formals[i].name == name)
        return {{VarRef::Kind::formal, static_cast<int>(i)}, g.formals[i].type};
    for (size_t i = 0; i < g.locals.size(); i++)
      if (g.locals[i].name == name)
        return {{VarRef::Kind::local, static_cast<int>(i)}, g.locals[i].type};
    const auto& tmpl = prog_.templates[ctx.class_id];
    int slot = tmpl.slot_index(name);
    if (slot >= 0) return {{VarRef::Kind::attr_slot, slot}, tmpl.slots[slot].type};
    fail(DiagKind::lowering_error,
         "unknown entity '" + name + "' in " + ctx.graph->qualified_name(), loc);
  }

  void require_bool(const IrExprPtr& e, const SourceLoc& loc) {
    if (e->type.kind != ValueKind::bool_v)
      fail(DiagKind::type_mismatch, "expected a BOOLEAN expression", loc);
  }

  void check_binding(const TypeRef& target, const TypeRef& source,
                     const SourceLoc& loc, const std::string& what) {
    auto mismatch = [&] {
      fail(DiagKind::type_mismatch,
           what + " " + shape_name(prog_, target) + " from " +
               shape_name(prog_, source),
           loc);
    };
    if (target.kind != source.kind) mismatch();
    if (target.is_ref()) {
      if (source.class_id >= 0 && source.class_id != target.class_id) mismatch();
      // A non-separate source may flow into a separate target, never the
      // reverse.
      if (source.separate && !target.separate) mismatch();
    }
  }

  std::pair<int, const RoutineSig*> resolve_callee(const IrExprPtr& target,
                                                   const std::string& feature,
                                                   const SourceLoc& loc) {
    if (!target->type.is_ref() || target->type.class_id < 0)
      fail(DiagKind::lowering_error,
           "expression of type " + shape_name(prog_, target->type) +
               " has no feature '" + feature + "'",
           loc);
    if (target->type.separate && !std::holds_alternative<IrFormal>(target->node))
      fail(DiagKind::non_controlled_separate_target,
           "separate call target must be a formal argument (call to '" + feature +
               "')",
           loc);
    const std::string& cls = prog_.templates[target->type.class_id].class_name;
    const ClassInfo* info = symbols_.find(cls);
    auto it = info->routines.find(feature);
    if (it == info->routines.end())
      fail(DiagKind::lowering_error,
           "class " + cls + " has no feature '" + feature + "'", loc);
    return {prog_.find_feature(target->type.class_id, feature), &it->second};
  }

  std::vector<IrExprPtr> lower_args(Ctx& ctx, const RoutineSig& sig,
                                    const std::vector<ExprPtr>& args,
                                    const SourceLoc& loc) {
    if (args.size() != sig.formal_types.size())
      fail(DiagKind::lowering_error,
           sig.name + " expects " + std::to_string(sig.formal_types.size()) +
               " argument(s), got " + std::to_string(args.size()),
           loc);
    std::vector<IrExprPtr> lowered;
    for (size_t i = 0; i < args.size(); i++) {
      IrExprPtr arg = lower_expr(ctx, *args[i]);
      check_binding(resolve_type(sig.formal_types[i]), arg->type, args[i]->loc,
                    "argument " + std::to_string(i + 1) + " of " + sig.name + ",");
      lowered.push_back(std::move(arg));
    }
    return lowered;
  }

  IrExprPtr lower_expr(Ctx& ctx, const Expr& expr) {
    return std::visit(
        [&](const auto& node) -> IrExprPtr {
          using T = std::decay_t<decltype(node)>;
          const SourceLoc& loc = expr.loc;
          if constexpr (std::is_same_v<T, IntLit>) {
            return make_ir({IrInt{node.value}, {ValueKind::int_v, false, -1}, loc});
          } else if constexpr (std::is_same_v<T, BoolLit>) {
            return make_ir({IrBool{node.value}, {ValueKind::bool_v, false, -1}, loc});
          } else if constexpr (std::is_same_v<T, VoidLit>) {
            return make_ir({IrVoid{}, {ValueKind::ref_v, false, -1}, loc});
          } else if constexpr (std::is_same_v<T, CurrentLit>) {
            return make_ir(
                {IrCurrent{}, {ValueKind::ref_v, false, ctx.class_id}, loc});
          } else if constexpr (std::is_same_v<T, ResultLit>) {
            if (!ctx.graph->is_query)
              fail(DiagKind::lowering_error,
                   "Result is only available in queries", loc);
            return make_ir({IrResult{}, ctx.graph->return_type, loc});
          } else if constexpr (std::is_same_v<T, NameExpr>) {
            return lower_name(ctx, node, loc);
          } else if constexpr (std::is_same_v<T, QualifiedCall>) {
            IrExprPtr target = lower_expr(ctx, *node.target);
            return lower_query(ctx, target, node.feature, node.args, loc);
          } else if constexpr (std::is_same_v<T, BinaryExpr>) {
            return lower_binary(ctx, node, loc);
          } else {  // UnaryExpr (not)
            IrExprPtr operand = lower_expr(ctx, *node.operand);
            require_bool(operand, loc);
            return make_ir({IrNot{operand}, {ValueKind::bool_v, false, -1}, loc});
          }
        },
        expr.node);
  }

  IrExprPtr lower_name(Ctx& ctx, const NameExpr& name, const SourceLoc& loc) {
    if (!name.has_args) {
      FeatureGraph& g = *ctx.graph;
      for (size_t i = 0; i < g.formals.size(); i++)
        if (g.formals[i].name == name.name)
          return make_ir(
              {IrFormal{static_cast<int>(i)}, g.formals[i].type, loc});
      for (size_t i = 0; i < g.locals.size(); i++)
        if (g.locals[i].name == name.name)
          return make_ir({IrLocal{static_cast<int>(i)}, g.locals[i].type, loc});
      const auto& tmpl = prog_.templates[ctx.class_id];
      int slot = tmpl.slot_index(name.name);
      if (slot >= 0)
        return make_ir({IrAttr{slot}, tmpl.slots[slot].type, loc});
    }
    // Unqualified call on Current.
    IrExprPtr current =
        make_ir({IrCurrent{}, {ValueKind::ref_v, false, ctx.class_id}, loc});
    const ClassInfo* info = symbols_.find(ctx.cls->name);
    if (info->routines.count(name.name) == 0)
      fail(DiagKind::lowering_error,
           "unknown entity '" + name.name + "' in " + ctx.graph->qualified_name(),
           loc);
    return lower_query(ctx, current, name.name, name.args, loc);
  }

  IrExprPtr lower_query(Ctx& ctx, const IrExprPtr& target,
                        const std::string& feature,
                        const std::vector<ExprPtr>& args, const SourceLoc& loc) {
    auto [callee, sig] = resolve_callee(target, feature, loc);
    if (!sig->return_type)
      fail(DiagKind::lowering_error,
           feature + " is a command and has no value in an expression", loc);
    TypeRef rtype = resolve_type(*sig->return_type);
    IrQuery query{target, callee, lower_args(ctx, *sig, args, loc)};
    return make_ir({std::move(query), rtype, loc});
  }

  IrExprPtr lower_binary(Ctx& ctx, const BinaryExpr& bin, const SourceLoc& loc) {
    IrExprPtr lhs = lower_expr(ctx, *bin.lhs);
    IrExprPtr rhs = lower_expr(ctx, *bin.rhs);
    const std::string& op = bin.op;
    TypeRef bool_type{ValueKind::bool_v, false, -1};
    TypeRef int_type{ValueKind::int_v, false, -1};

    auto both_int = [&] {
      return lhs->type.kind == ValueKind::int_v && rhs->type.kind == ValueKind::int_v;
    };
    auto mismatch = [&]() -> IrExprPtr {
      fail(DiagKind::type_mismatch,
           "operator '" + op + "' cannot combine " + shape_name(prog_, lhs->type) +
               " and " + shape_name(prog_, rhs->type),
           loc);
    };

    if (op == "+" || op == "-" || op == "*" || op == "/") {
      if (!both_int()) return mismatch();
      return make_ir({IrBinary{op, lhs, rhs}, int_type, loc});
    }
    if (op == "<" || op == "<=" || op == ">" || op == ">=") {
      if (!both_int()) return mismatch();
      return make_ir({IrBinary{op, lhs, rhs}, bool_type, loc});
    }
    if (op == "and" || op == "or") {
      if (lhs->type.kind != ValueKind::bool_v || rhs->type.kind != ValueKind::bool_v)
        return mismatch();
      return make_ir({IrBinary{op, lhs, rhs}, bool_type, loc});
    }
    // = and /=: value equality on INTEGER/BOOLEAN, identity on references.
    if (lhs->type.kind != rhs->type.kind) return mismatch();
    if (lhs->type.is_ref() && lhs->type.class_id >= 0 && rhs->type.class_id >= 0 &&
        lhs->type.class_id != rhs->type.class_id)
      return mismatch();
    return make_ir({IrBinary{op, lhs, rhs}, bool_type, loc});
  }

  void resolve_root() {
    auto dot = root_.find('.');
    if (dot == std::string::npos)
      fail(DiagKind::lowering_error,
           "root must have the form CLASS.procedure, got '" + root_ + "'", {});
    std::string cls = root_.substr(0, dot);
    std::string proc = root_.substr(dot + 1);
    int class_id = prog_.find_class(cls);
    if (class_id < 0)
      fail(DiagKind::lowering_error, "root class " + cls + " not found", {});
    int feature = prog_.find_feature(class_id, proc);
    if (feature < 0)
      fail(DiagKind::lowering_error,
           "root procedure " + cls + "." + proc + " not found", {});
    const FeatureGraph& graph = prog_.features[feature];
    if (!graph.is_creation || graph.synthesized_getter)
      fail(DiagKind::lowering_error,
           cls + "." + proc + " is not a creation procedure", {});
    if (!graph.formals.empty())
      fail(DiagKind::lowering_error,
           "root procedure " + cls + "." + proc + " must not take arguments", {});
    if (graph.is_query)
      fail(DiagKind::lowering_error,
           "root procedure " + cls + "." + proc + " must not be a query", {});
    prog_.root_class = class_id;
    prog_.root_feature = feature;
  }

  const std::vector<ClassAst>& classes_;
  std::string root_;
  std::vector<const ClassAst*> sorted_classes_;
  SymbolTable symbols_;
  ModelProgram prog_;
};

}  // namespace

SymbolTable collect_signatures(const std::vector<ClassAst>& classes) {
  SymbolTable table;
  for (const auto& cls : classes) {
    ClassInfo info;
    info.name = cls.name;
    for (const auto& attr : cls.attributes) {
      info.attributes.emplace_back(attr.name, attr.type);
      RoutineSig getter;
      getter.name = attr.name;
      getter.return_type = attr.type;
      getter.synthesized_getter = true;
      info.routines.emplace(attr.name, std::move(getter));
    }
    for (const auto& routine : cls.routines) {
      RoutineSig sig;
      sig.name = routine.name;
      for (const auto& p : routine.formals) sig.formal_types.push_back(p.type);
      sig.return_type = routine.return_type;
      sig.is_creation =
          std::find(cls.creation_procs.begin(), cls.creation_procs.end(),
                    routine.name) != cls.creation_procs.end();
      info.routines.emplace(routine.name, std::move(sig));
    }
    table.classes.emplace(cls.name, std::move(info));
  }
  // Every type annotation must name INTEGER, BOOLEAN, or a known class.
  auto check_type = [&](const TypeAnnot& t) {
    if (t.is_integer() || t.is_boolean()) return;
    if (table.classes.count(t.base) == 0)
      throw CompileError({DiagKind::unknown_type, t.loc, "unknown type " + t.base});
  };
  for (const auto& cls : classes) {
    for (const auto& attr : cls.attributes) check_type(attr.type);
    for (const auto& routine : cls.routines) {
      for (const auto& p : routine.formals) check_type(p.type);
      for (const auto& p : routine.locals) check_type(p.type);
      if (routine.return_type) check_type(*routine.return_type);
    }
  }
  return table;
}

ModelProgram lower_program(const std::vector<ClassAst>& classes,
                           const std::string& root) {
  return Lowerer(classes, root).run();
}

}  // namespace coopcheck
