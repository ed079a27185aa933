#include <algorithm>
#include <cassert>
#include <limits>
#include <stdexcept>

#include "coopcheck/engine.hpp"

namespace coopcheck {

const char* rule_name(RuleId rule) {
  switch (rule) {
    case RuleId::assign: return "assign";
    case RuleId::noop: return "noop";
    case RuleId::test: return "test";
    case RuleId::test_precondition_fail: return "test_precondition_fail";
    case RuleId::test_wait_retry: return "test_wait_retry";
    case RuleId::test_postcondition_fail: return "test_postcondition_fail";
    case RuleId::call_nonsep: return "call_nonsep";
    case RuleId::call_sep: return "call_sep";
    case RuleId::query_nonsep: return "query_nonsep";
    case RuleId::query_sep: return "query_sep";
    case RuleId::create_nonsep: return "create_nonsep";
    case RuleId::create_sep: return "create_sep";
    case RuleId::lock: return "lock";
    case RuleId::unlock: return "unlock";
    case RuleId::unlock_creator: return "unlock_creator";
    case RuleId::unlock_creator_nonsep: return "unlock_creator_nonsep";
    case RuleId::dequeue: return "dequeue";
    case RuleId::pass_token: return "pass_token";
    case RuleId::pass_token_first: return "pass_token_first";
    case RuleId::reset_token: return "reset_token";
    case RuleId::cleanup_token: return "cleanup_token";
  }
  return "?";
}

const char* error_class_name(ErrorClass cls) {
  switch (cls) {
    case ErrorClass::deadlock: return "deadlock";
    case ErrorClass::wait_condition_deadlock: return "wait_condition_deadlock";
    case ErrorClass::precondition_fail: return "precondition_fail";
    case ErrorClass::postcondition_fail: return "postcondition_fail";
    case ErrorClass::void_call: return "void_call";
    case ErrorClass::divide_by_zero: return "divide_by_zero";
    case ErrorClass::int_overflow: return "int_overflow";
    case ErrorClass::internal_invariant: return "internal_invariant";
  }
  return "?";
}

const char* status_name(Status s) {
  switch (s) {
    case Status::idle: return "idle";
    case Status::running: return "running";
    case Status::awaiting_result: return "awaiting_result";
    case Status::awaiting_lock_restore: return "awaiting_lock_restore";
    case Status::awaiting_locks: return "awaiting_locks";
  }
  return "?";
}

bool rule_is_token_gated(RuleId rule) {
  switch (rule) {
    case RuleId::assign:
    case RuleId::noop:
    case RuleId::test:
    case RuleId::test_postcondition_fail:
    case RuleId::call_nonsep:
    case RuleId::query_nonsep:
    case RuleId::create_nonsep:
    case RuleId::unlock_creator_nonsep:
      return true;
    default:
      return false;
  }
}

bool rule_is_interleaving(RuleId rule) {
  switch (rule) {
    case RuleId::call_sep:
    case RuleId::query_sep:
    case RuleId::create_sep:
    case RuleId::lock:
    case RuleId::unlock:
    case RuleId::unlock_creator:
    case RuleId::dequeue:
    case RuleId::test_precondition_fail:
    case RuleId::test_wait_retry:
      return true;
    default:
      return false;
  }
}

namespace {

Value read_var(const Configuration& cfg, const Frame& f, const VarRef& ref) {
  switch (ref.kind) {
    case VarRef::Kind::formal: return f.formals[ref.index];
    case VarRef::Kind::local: return f.locals[ref.index];
    case VarRef::Kind::attr_slot: return cfg.obj(f.current_object).slots[ref.index];
    case VarRef::Kind::result: return f.result;
  }
  return Value::make_void();
}

void write_var(Configuration& cfg, Frame& f, const VarRef& ref, const Value& v) {
  switch (ref.kind) {
    case VarRef::Kind::formal: f.formals[ref.index] = v; break;
    case VarRef::Kind::local: f.locals[ref.index] = v; break;
    case VarRef::Kind::attr_slot:
      cfg.obj(f.current_object).slots[ref.index] = v;
      break;
    case VarRef::Kind::result: f.result = v; break;
  }
}

void sorted_insert(std::vector<int>& v, int x) {
  auto it = std::lower_bound(v.begin(), v.end(), x);
  if (it == v.end() || *it != x) v.insert(it, x);
}

bool sorted_contains(const std::vector<int>& v, int x) {
  return std::binary_search(v.begin(), v.end(), x);
}

void sorted_erase(std::vector<int>& v, int x) {
  auto it = std::lower_bound(v.begin(), v.end(), x);
  if (it != v.end() && *it == x) v.erase(it);
}

// Expression replay against the active frame's memo of completed sub-query
// results. Stops at the first sub-query not yet in the memo, or at the first
// evaluation error.
struct EvalWalk {
  const ModelProgram& prog;
  const Configuration& cfg;
  int pid;
  const Frame& frame;
  size_t cursor = 0;
  bool stopped = false;
  EvalOutcome out = {};
  // When set, receives the handler of every sub-query target (used by
  // require-clause classification).
  std::function<void(int handler)>* on_query_handler = nullptr;

  std::optional<Value> stop_error(ErrorClass cls, const SourceLoc& loc,
                                  std::string detail) {
    stopped = true;
    out.kind = EvalOutcome::Kind::error;
    out.error = EngineError{cls, pid, frame.feature, "", loc, std::move(detail)};
    return std::nullopt;
  }

  std::optional<Value> walk(const IrExpr& e) {
    if (stopped) return std::nullopt;
    return std::visit(
        [&](const auto& node) -> std::optional<Value> {
          using T = std::decay_t<decltype(node)>;
          if constexpr (std::is_same_v<T, IrInt>) {
            return Value::make_int(node.value);
          } else if constexpr (std::is_same_v<T, IrBool>) {
            return Value::make_bool(node.value);
          } else if constexpr (std::is_same_v<T, IrVoid>) {
            return Value::make_void();
          } else if constexpr (std::is_same_v<T, IrCurrent>) {
            return Value::make_ref(frame.current_object);
          } else if constexpr (std::is_same_v<T, IrResult>) {
            return frame.result;
          } else if constexpr (std::is_same_v<T, IrFormal>) {
            return frame.formals[node.index];
          } else if constexpr (std::is_same_v<T, IrLocal>) {
            return frame.locals[node.index];
          } else if constexpr (std::is_same_v<T, IrAttr>) {
            return cfg.obj(frame.current_object).slots[node.slot];
          } else if constexpr (std::is_same_v<T, IrNot>) {
            auto v = walk(*node.operand);
            if (!v) return std::nullopt;
            return Value::make_bool(!v->bval);
          } else if constexpr (std::is_same_v<T, IrBinary>) {
            return walk_binary(e, node);
          } else {  // IrQuery
            return walk_query(e, node);
          }
        },
        e.node);
  }

  std::optional<Value> walk_binary(const IrExpr& e, const IrBinary& node) {
    auto lhs = walk(*node.lhs);
    if (!lhs) return std::nullopt;
    auto rhs = walk(*node.rhs);
    if (!rhs) return std::nullopt;
    const std::string& op = node.op;
    if (op == "and") return Value::make_bool(lhs->bval && rhs->bval);
    if (op == "or") return Value::make_bool(lhs->bval || rhs->bval);
    if (op == "=") return Value::make_bool(*lhs == *rhs);
    if (op == "/=") return Value::make_bool(*lhs != *rhs);
    long long a = lhs->ival, b = rhs->ival;
    if (op == "<") return Value::make_bool(a < b);
    if (op == "<=") return Value::make_bool(a <= b);
    if (op == ">") return Value::make_bool(a > b);
    if (op == ">=") return Value::make_bool(a >= b);
    long long r = 0;
    if (op == "+") {
      if (__builtin_add_overflow(a, b, &r))
        return stop_error(ErrorClass::int_overflow, e.loc, "integer overflow in +");
      return Value::make_int(r);
    }
    if (op == "-") {
      if (__builtin_sub_overflow(a, b, &r))
        return stop_error(ErrorClass::int_overflow, e.loc, "integer overflow in -");
      return Value::make_int(r);
    }
    if (op == "*") {
      if (__builtin_mul_overflow(a, b, &r))
        return stop_error(ErrorClass::int_overflow, e.loc, "integer overflow in *");
      return Value::make_int(r);
    }
    // division
    if (b == 0)
      return stop_error(ErrorClass::divide_by_zero, e.loc, "division by zero");
    if (a == std::numeric_limits<long long>::min() && b == -1)
      return stop_error(ErrorClass::int_overflow, e.loc, "integer overflow in /");
    return Value::make_int(a / b);
  }

  std::optional<Value> walk_query(const IrExpr& e, const IrQuery& node) {
    auto target = walk(*node.target);
    if (!target) return std::nullopt;
    std::vector<Value> args;
    for (const auto& arg : node.args) {
      auto v = walk(*arg);
      if (!v) return std::nullopt;
      args.push_back(*v);
    }
    if (on_query_handler && !target->is_void())
      (*on_query_handler)(cfg.obj(target->oid).handler);
    if (cursor < frame.eval_memo.size()) return frame.eval_memo[cursor++];
    // Next sub-query to run.
    stopped = true;
    if (target->is_void()) {
      out.kind = EvalOutcome::Kind::error;
      out.error = EngineError{
          ErrorClass::void_call, pid, frame.feature, "", e.loc,
          "query " + prog.features[node.feature].feature_name + " on Void target"};
      return std::nullopt;
    }
    out.kind = cfg.obj(target->oid).handler == pid ? EvalOutcome::Kind::push_local
                                                   : EvalOutcome::Kind::issue_separate;
    out.query = &e;
    out.target = *target;
    out.args = std::move(args);
    return std::nullopt;
  }
};

// Joint evaluation of a call's target and argument expressions under one memo
// cursor (the issue order interleaves them left to right).
struct CallEval {
  EvalOutcome::Kind kind = EvalOutcome::Kind::value;
  Value target;
  std::vector<Value> args;
  EvalOutcome pending;  // suspension or error when kind != value
};

CallEval eval_call_parts(const ModelProgram& prog, const Configuration& cfg,
                         int pid, const IrExprPtr& target,
                         const std::vector<IrExprPtr>& args) {
  const Frame& frame = cfg.proc(pid).top();
  EvalWalk walk{prog, cfg, pid, frame};
  CallEval result;
  if (target) {
    auto t = walk.walk(*target);
    if (walk.stopped) {
      result.kind = walk.out.kind;
      result.pending = std::move(walk.out);
      return result;
    }
    result.target = *t;
  }
  for (const auto& arg : args) {
    auto v = walk.walk(*arg);
    if (walk.stopped) {
      result.kind = walk.out.kind;
      result.pending = std::move(walk.out);
      return result;
    }
    result.args.push_back(*v);
  }
  return result;
}

}  // namespace

Engine::Engine(const ModelProgram& program, EngineOptions options,
               EngineHooks hooks)
    : program_(program), options_(options), hooks_(std::move(hooks)) {}

EvalOutcome Engine::eval_expression(const Configuration& config, int pid,
                                    const IrExpr& expr) const {
  EvalWalk walk{program_, config, pid, config.proc(pid).top()};
  auto v = walk.walk(expr);
  if (walk.stopped) return walk.out;
  EvalOutcome out;
  out.kind = EvalOutcome::Kind::value;
  out.value = *v;
  return out;
}

std::vector<int> Engine::locked_by(const Configuration& config, int pid) const {
  std::vector<int> out;
  for (const auto& p : config.processors)
    if (p.lock.kind == LockState::Kind::locked && p.lock.owner == pid)
      out.push_back(p.id);
  return out;
}

bool Engine::should_pass_locks(const Configuration& config, int pid,
                               const std::vector<Value>& actuals,
                               const FeatureGraph& callee) const {
  for (size_t i = 0; i < actuals.size(); i++) {
    if (!callee.formals[i].type.is_ref()) continue;
    if (actuals[i].is_void()) continue;
    const LockState& lock = config.proc(config.handler_of(actuals[i])).lock;
    if (lock.kind == LockState::Kind::locked && lock.owner == pid) return true;
  }
  return false;
}

bool Engine::classify_precondition(const Configuration& config, int pid,
                                   const IrExpr& condition) const {
  const Frame& frame = config.proc(pid).top();
  std::vector<int> referenced;
  std::function<void(int)> collect = [&](int handler) {
    if (handler != pid) referenced.push_back(handler);
  };
  EvalWalk walk{program_, config, pid, frame};
  walk.on_query_handler = &collect;
  walk.walk(condition);
  for (int h : referenced)
    if (!sorted_contains(frame.controls, h)) return false;
  return true;
}

Configuration Engine::initial() const {
  Configuration cfg;
  cfg.options = options_;
  const FeatureGraph& root = program_.features[program_.root_feature];

  ObjectInstance obj;
  obj.id = 0;
  obj.class_id = program_.root_class;
  obj.handler = 0;
  for (const auto& slot : program_.templates[program_.root_class].slots)
    obj.slots.push_back(Value::default_for(slot.type));
  cfg.objects.push_back(std::move(obj));

  Processor proc;
  proc.id = 0;
  proc.status = Status::running;
  proc.pos_feature = root.index;
  proc.pos_state = root.init_state;
  proc.has_token = options_.token_mode;

  Frame frame;
  frame.feature = root.index;
  frame.current_object = 0;
  for (const auto& local : root.locals)
    frame.locals.push_back(Value::default_for(local.type));
  frame.return_kind = Frame::ReturnKind::request;
  proc.stack.push_back(std::move(frame));

  cfg.processors.push_back(std::move(proc));
  cfg.first_processor = 0;
  cfg.last_processor = 0;
  cfg.error = detect_errors(cfg);
  return cfg;
}

int Engine::token_holder(const Configuration& config) const {
  for (const auto& p : config.processors)
    if (p.has_token) return p.id;
  return -1;
}

Engine::Plan Engine::plan_for(const Configuration& config, int pid) const {
  const Processor& p = config.proc(pid);
  Plan none;
  if (p.status == Status::idle)
    return p.queue.empty() ? none
                           : Plan{true, RuleId::dequeue, false, -1};
  if (p.status != Status::running) return none;

  const FeatureGraph& g = program_.features[p.pos_feature];
  const auto& outs = g.states[p.pos_state].out_actions;
  if (outs.empty()) return none;  // folded away in apply; defensive

  auto suspended_plan = [&](const EvalOutcome& out, RuleId own_rule,
                            int action_index) -> Plan {
    switch (out.kind) {
      case EvalOutcome::Kind::issue_separate:
        return {true, RuleId::query_sep, false, action_index};
      case EvalOutcome::Kind::push_local:
        return {true, RuleId::query_nonsep, true, action_index};
      default:  // value or error: the action itself runs
        return {true, own_rule, rule_is_token_gated(own_rule), action_index};
    }
  };

  const Action& first = g.actions[outs[0]];
  if (first.kind == Action::Kind::test) {
    EvalOutcome cond = eval_expression(config, pid, *first.expr);
    if (cond.kind != EvalOutcome::Kind::value)
      return suspended_plan(cond, RuleId::test, outs[0]);
    int taken = cond.value.bval ? outs[0] : outs[1];
    const Action& branch = g.actions[taken];
    switch (branch.test_role) {
      case TestRole::require_fail:
        return classify_precondition(config, pid, *first.expr)
                   ? Plan{true, RuleId::test_precondition_fail, false, taken}
                   : Plan{true, RuleId::test_wait_retry, false, taken};
      case TestRole::ensure_fail:
        return {true, RuleId::test_postcondition_fail, true, taken};
      default:
        return {true, RuleId::test, true, taken};
    }
  }

  const Action& act = first;
  int idx = outs[0];
  switch (act.kind) {
    case Action::Kind::noop:
      return {true, RuleId::noop, true, idx};
    case Action::Kind::lock:
      return {true, RuleId::lock, false, idx};
    case Action::Kind::unlock:
      return {true, RuleId::unlock, false, idx};
    case Action::Kind::unlock_creator:
      return p.lock.kind == LockState::Kind::creation_locked
                 ? Plan{true, RuleId::unlock_creator, false, idx}
                 : Plan{true, RuleId::unlock_creator_nonsep, true, idx};
    case Action::Kind::assign: {
      EvalOutcome out = eval_expression(config, pid, *act.expr);
      return suspended_plan(out, RuleId::assign, idx);
    }
    case Action::Kind::command_call: {
      CallEval parts = eval_call_parts(program_, config, pid, act.call_target,
                                       act.args);
      if (parts.kind != EvalOutcome::Kind::value) {
        RuleId own = act.call_target->type.separate ? RuleId::call_sep
                                                    : RuleId::call_nonsep;
        return suspended_plan(parts.pending, own, idx);
      }
      if (parts.target.is_void())
        return {true,
                act.call_target->type.separate ? RuleId::call_sep
                                               : RuleId::call_nonsep,
                !act.call_target->type.separate, idx};
      bool separate = config.handler_of(parts.target) != pid;
      return separate ? Plan{true, RuleId::call_sep, false, idx}
                      : Plan{true, RuleId::call_nonsep, true, idx};
    }
    case Action::Kind::create: {
      CallEval parts = eval_call_parts(program_, config, pid, nullptr, act.args);
      RuleId own = act.create_separate ? RuleId::create_sep : RuleId::create_nonsep;
      if (parts.kind != EvalOutcome::Kind::value)
        return suspended_plan(parts.pending, own, idx);
      return {true, own, !act.create_separate, idx};
    }
    case Action::Kind::test:
      break;  // handled above
  }
  return none;
}

std::vector<Transition> Engine::enabled(const Configuration& config) const {
  std::vector<Transition> out;
  if (config.error) return out;

  int n = static_cast<int>(config.processors.size());
  std::vector<Plan> plans(n);
  for (int pid = 0; pid < n; pid++) plans[pid] = plan_for(config, pid);

  if (!config.options.token_mode) {
    for (int pid = 0; pid < n; pid++)
      if (plans[pid].exists)
        out.push_back({plans[pid].rule, pid, plans[pid].action_index});
    return out;
  }

  int holder = token_holder(config);
  if (holder >= 0 && plans[holder].exists && plans[holder].local) {
    out.push_back({plans[holder].rule, holder, plans[holder].action_index});
    return out;
  }
  if (holder >= 0) {
    if (config.proc(holder).list_next >= 0) {
      out.push_back({RuleId::pass_token, holder, -1});
      return out;
    }
    if (config.action_executed_indicator) {
      out.push_back({RuleId::pass_token_first, holder, -1});
      return out;
    }
  }
  for (int pid = 0; pid < n; pid++)
    if (plans[pid].exists && !plans[pid].local)
      out.push_back({plans[pid].rule, pid, plans[pid].action_index});
  if (!out.empty()) return out;

  if (config.reset_token_flag) {
    out.push_back({RuleId::reset_token, config.first_processor, -1});
    return out;
  }
  if (holder >= 0) out.push_back({RuleId::cleanup_token, holder, -1});
  return out;
}

void Engine::raise(Configuration& config, EngineError error) const {
  config.error = std::move(error);
}

void Engine::fail_wait_condition(Configuration& config, int pid,
                                 const Action& failed) const {
  Processor& p = config.proc(pid);
  Frame& frame = p.top();
  for (int h : frame.entry_acquired) {
    LockState& lock = config.proc(h).lock;
    if (lock.kind == LockState::Kind::locked && lock.owner == pid)
      lock = LockState{};
  }
  frame.entry_acquired.clear();
  frame.eval_memo.clear();
  p.pos_state = failed.retry_state;
}

void Engine::complete_request(Configuration& config, int pid) const {
  Processor& p = config.proc(pid);
  Frame frame = std::move(p.stack.back());
  p.stack.pop_back();
  assert(p.stack.empty() && "request frames sit at the stack bottom");

  for (int h : frame.passed_locks) {
    LockState& lock = config.proc(h).lock;
    if (lock.kind == LockState::Kind::locked && lock.owner == pid)
      lock.owner = frame.restore_to;
  }
  if (frame.reply_to >= 0) {
    Processor& caller = config.proc(frame.reply_to);
    if (frame.reply_expected) caller.top().eval_memo.push_back(frame.result);
    caller.status = Status::running;
  }
  p.status = Status::idle;
  p.pos_feature = -1;
  p.pos_state = -1;
}

void Engine::fold_completions(Configuration& config, int pid) const {
  Processor& p = config.proc(pid);
  while (p.status == Status::running && !p.stack.empty()) {
    const FeatureGraph& g = program_.features[p.pos_feature];
    if (!g.is_final(p.pos_state)) return;
    if (p.pos_state == g.body_final && g.ensure_entry >= 0 &&
        config.options.postconditions) {
      p.pos_state = g.ensure_entry;
      continue;
    }
    Frame done = std::move(p.stack.back());
    p.stack.pop_back();
    switch (done.return_kind) {
      case Frame::ReturnKind::to_state:
        p.pos_feature = p.top().feature;
        p.pos_state = done.return_state;
        p.top().eval_memo.clear();
        break;
      case Frame::ReturnKind::to_memo:
        p.pos_feature = p.top().feature;
        p.pos_state = done.return_state;
        p.top().eval_memo.push_back(done.result);
        break;
      case Frame::ReturnKind::request:
        p.stack.push_back(std::move(done));  // complete_request pops it
        complete_request(config, pid);
        return;
    }
  }
}

void Engine::refresh_lock_waiters(Configuration& config) const {
  for (auto& p : config.processors) {
    if (p.status != Status::awaiting_locks) continue;
    const FeatureGraph& g = program_.features[p.pos_feature];
    const auto& outs = g.states[p.pos_state].out_actions;
    assert(outs.size() == 1 &&
           g.actions[outs[0]].kind == Action::Kind::lock);
    const Action& act = g.actions[outs[0]];
    std::vector<int> blockers;
    for (const auto& var : act.lock_vars) {
      Value v = read_var(config, p.top(), var);
      if (v.is_void()) continue;
      int h = config.handler_of(v);
      if (h == p.id) continue;
      if (!config.proc(h).lock.acquirable_by(p.id)) sorted_insert(blockers, h);
    }
    if (blockers.empty()) {
      p.wait_set.clear();
      p.status = Status::running;
    } else {
      p.wait_set = std::move(blockers);
    }
  }
}

namespace {

// Prepared pieces shared by the call/create rules.
Frame make_callee_frame(const FeatureGraph& callee, int current_object,
                        std::vector<Value> args) {
  Frame frame;
  frame.feature = callee.index;
  frame.current_object = current_object;
  frame.formals = std::move(args);
  for (const auto& local : callee.locals)
    frame.locals.push_back(Value::default_for(local.type));
  if (callee.is_query) frame.result = Value::default_for(callee.return_type);
  return frame;
}

}  // namespace

void Engine::apply_action(Configuration& config, const Transition& t) const {
  Processor& p = config.proc(t.pid);

  switch (t.rule) {
    case RuleId::pass_token: {
      p.has_token = false;
      config.proc(p.list_next).has_token = true;
      return;
    }
    case RuleId::pass_token_first: {
      p.has_token = false;
      config.proc(config.first_processor).has_token = true;
      config.action_executed_indicator = false;
      return;
    }
    case RuleId::reset_token: {
      config.reset_token_flag = false;
      for (auto& q : config.processors) q.has_token = false;
      config.proc(config.first_processor).has_token = true;
      return;
    }
    case RuleId::cleanup_token: {
      p.has_token = false;
      return;
    }
    case RuleId::dequeue: {
      Request req = std::move(p.queue.front());
      p.queue.erase(p.queue.begin());
      const FeatureGraph& callee = program_.features[req.frame.feature];
      p.stack.push_back(std::move(req.frame));
      p.pos_feature = callee.index;
      p.pos_state = callee.init_state;
      p.status = Status::running;
      return;
    }
    default:
      break;
  }

  const FeatureGraph& g = program_.features[p.pos_feature];
  const Action& act = g.actions[t.action_index];

  auto advance = [&](StateId next) {
    p.pos_state = next;
    p.top().eval_memo.clear();
  };

  // The pending sub-query found by re-walking the acting action's
  // expressions; identical to the one found at enumeration time.
  auto pending_query = [&]() -> EvalOutcome {
    if (act.kind == Action::Kind::command_call)
      return eval_call_parts(program_, config, t.pid, act.call_target, act.args)
          .pending;
    if (act.kind == Action::Kind::create)
      return eval_call_parts(program_, config, t.pid, nullptr, act.args).pending;
    const IrExprPtr& expr =
        act.kind == Action::Kind::test && !g.states[p.pos_state].out_actions.empty()
            ? g.actions[g.states[p.pos_state].out_actions[0]].expr
            : act.expr;
    return eval_expression(config, t.pid, *expr);
  };

  switch (t.rule) {
    case RuleId::query_nonsep: {
      EvalOutcome out = pending_query();
      assert(out.kind == EvalOutcome::Kind::push_local);
      const IrQuery& q = std::get<IrQuery>(out.query->node);
      Frame frame = make_callee_frame(program_.features[q.feature],
                                      out.target.oid, std::move(out.args));
      frame.return_kind = Frame::ReturnKind::to_memo;
      frame.return_state = p.pos_state;
      frame.controls = locked_by(config, t.pid);
      const FeatureGraph& callee = program_.features[q.feature];
      p.stack.push_back(std::move(frame));
      p.pos_feature = callee.index;
      p.pos_state = callee.init_state;
      break;
    }
    case RuleId::query_sep: {
      EvalOutcome out = pending_query();
      assert(out.kind == EvalOutcome::Kind::issue_separate);
      const IrQuery& q = std::get<IrQuery>(out.query->node);
      int target_pid = config.handler_of(out.target);
      Frame frame = make_callee_frame(program_.features[q.feature],
                                      out.target.oid, std::move(out.args));
      frame.return_kind = Frame::ReturnKind::request;
      frame.reply_to = t.pid;
      frame.reply_expected = true;
      frame.controls = locked_by(config, t.pid);
      // Queries always pass the caller's locks to the supplier.
      frame.passed_locks = locked_by(config, t.pid);
      frame.restore_to = frame.passed_locks.empty() ? -1 : t.pid;
      for (int h : frame.passed_locks) config.proc(h).lock.owner = target_pid;
      config.proc(target_pid)
          .queue.push_back({std::move(frame), config.next_enqueue_seq++});
      p.status = Status::awaiting_result;
      break;
    }
    case RuleId::assign: {
      EvalOutcome out = eval_expression(config, t.pid, *act.expr);
      if (out.kind == EvalOutcome::Kind::error) {
        raise(config, out.error);
        return;
      }
      assert(out.kind == EvalOutcome::Kind::value);
      write_var(config, p.top(), act.assign_target, out.value);
      advance(act.out_state);
      break;
    }
    case RuleId::noop: {
      advance(act.out_state);
      break;
    }
    case RuleId::test: {
      const auto& outs = g.states[p.pos_state].out_actions;
      EvalOutcome cond =
          eval_expression(config, t.pid, *g.actions[outs[0]].expr);
      if (cond.kind == EvalOutcome::Kind::error) {
        raise(config, cond.error);
        return;
      }
      assert(cond.kind == EvalOutcome::Kind::value);
      int taken = cond.value.bval ? outs[0] : outs[1];
      assert(taken == t.action_index);
      advance(g.actions[taken].out_state);
      break;
    }
    case RuleId::test_precondition_fail: {
      if (hooks_.on_classify) hooks_.on_classify(t.pid, true, act.tag);
      raise(config, EngineError{ErrorClass::precondition_fail, t.pid, g.index,
                                act.tag, act.loc,
                                "require clause failed in " + g.qualified_name()});
      return;
    }
    case RuleId::test_wait_retry: {
      if (hooks_.on_classify) hooks_.on_classify(t.pid, false, act.tag);
      fail_wait_condition(config, t.pid, act);
      break;
    }
    case RuleId::test_postcondition_fail: {
      raise(config, EngineError{ErrorClass::postcondition_fail, t.pid, g.index,
                                act.tag, act.loc,
                                "ensure clause failed in " + g.qualified_name()});
      return;
    }
    case RuleId::call_nonsep:
    case RuleId::call_sep: {
      CallEval parts =
          eval_call_parts(program_, config, t.pid, act.call_target, act.args);
      if (parts.kind == EvalOutcome::Kind::error) {
        raise(config, parts.pending.error);
        return;
      }
      assert(parts.kind == EvalOutcome::Kind::value);
      if (parts.target.is_void()) {
        raise(config,
              EngineError{ErrorClass::void_call, t.pid, g.index, "", act.loc,
                          "command " +
                              program_.features[act.callee].feature_name +
                              " on Void target"});
        return;
      }
      const FeatureGraph& callee = program_.features[act.callee];
      int target_pid = config.handler_of(parts.target);
      Frame frame = make_callee_frame(callee, parts.target.oid,
                                      std::move(parts.args));
      frame.controls = locked_by(config, t.pid);
      if (t.rule == RuleId::call_nonsep) {
        assert(target_pid == t.pid);
        frame.return_kind = Frame::ReturnKind::to_state;
        frame.return_state = act.out_state;
        p.stack.push_back(std::move(frame));
        p.pos_feature = callee.index;
        p.pos_state = callee.init_state;
      } else {
        assert(target_pid != t.pid);
        frame.return_kind = Frame::ReturnKind::request;
        bool pass = should_pass_locks(config, t.pid, frame.formals, callee);
        if (pass) {
          frame.passed_locks = locked_by(config, t.pid);
          frame.restore_to = t.pid;
          frame.reply_to = t.pid;
          for (int h : frame.passed_locks)
            config.proc(h).lock.owner = target_pid;
        }
        config.proc(target_pid)
            .queue.push_back({std::move(frame), config.next_enqueue_seq++});
        advance(act.out_state);
        if (pass) p.status = Status::awaiting_lock_restore;
      }
      break;
    }
    case RuleId::create_nonsep: {
      CallEval parts = eval_call_parts(program_, config, t.pid, nullptr, act.args);
      if (parts.kind == EvalOutcome::Kind::error) {
        raise(config, parts.pending.error);
        return;
      }
      const FeatureGraph& callee = program_.features[act.callee];
      int oid = static_cast<int>(config.objects.size());
      ObjectInstance obj;
      obj.id = oid;
      obj.class_id = callee.class_id;
      obj.handler = t.pid;
      for (const auto& slot : program_.templates[callee.class_id].slots)
        obj.slots.push_back(Value::default_for(slot.type));
      config.objects.push_back(std::move(obj));
      write_var(config, p.top(), act.create_target, Value::make_ref(oid));
      Frame frame =
          make_callee_frame(callee, oid, std::move(parts.args));
      frame.return_kind = Frame::ReturnKind::to_state;
      frame.return_state = act.out_state;
      frame.controls = locked_by(config, t.pid);
      p.stack.push_back(std::move(frame));
      p.pos_feature = callee.index;
      p.pos_state = callee.init_state;
      break;
    }
    case RuleId::create_sep: {
      CallEval parts = eval_call_parts(program_, config, t.pid, nullptr, act.args);
      if (parts.kind == EvalOutcome::Kind::error) {
        raise(config, parts.pending.error);
        return;
      }
      const FeatureGraph& callee = program_.features[act.callee];
      int new_pid = static_cast<int>(config.processors.size());
      int oid = static_cast<int>(config.objects.size());
      ObjectInstance obj;
      obj.id = oid;
      obj.class_id = callee.class_id;
      obj.handler = new_pid;
      for (const auto& slot : program_.templates[callee.class_id].slots)
        obj.slots.push_back(Value::default_for(slot.type));
      config.objects.push_back(std::move(obj));

      Processor fresh;
      fresh.id = new_pid;
      fresh.lock = {LockState::Kind::creation_locked, t.pid};
      Frame frame =
          make_callee_frame(callee, oid, std::move(parts.args));
      frame.return_kind = Frame::ReturnKind::request;
      frame.controls = locked_by(config, t.pid);
      fresh.queue.push_back({std::move(frame), config.next_enqueue_seq++});
      config.processors.push_back(std::move(fresh));
      config.proc(config.last_processor).list_next = new_pid;
      config.last_processor = new_pid;

      write_var(config, config.proc(t.pid).top(), act.create_target,
                Value::make_ref(oid));
      Processor& self = config.proc(t.pid);
      self.pos_state = act.out_state;
      self.top().eval_memo.clear();
      break;
    }
    case RuleId::lock: {
      std::vector<int> targets;
      for (const auto& var : act.lock_vars) {
        Value v = read_var(config, p.top(), var);
        if (v.is_void()) continue;
        int h = config.handler_of(v);
        if (h != t.pid) sorted_insert(targets, h);
      }
      std::vector<int> blockers;
      for (int h : targets)
        if (!config.proc(h).lock.acquirable_by(t.pid)) sorted_insert(blockers, h);
      if (!blockers.empty()) {
        p.wait_set = std::move(blockers);
        p.status = Status::awaiting_locks;
        return;
      }
      for (int h : targets) {
        LockState& lock = config.proc(h).lock;
        if (lock.kind == LockState::Kind::unlocked) {
          lock = {LockState::Kind::locked, t.pid};
          sorted_insert(p.top().entry_acquired, h);
        }
      }
      p.wait_set.clear();
      advance(act.out_state);
      break;
    }
    case RuleId::unlock: {
      for (const auto& var : act.lock_vars) {
        Value v = read_var(config, p.top(), var);
        if (v.is_void()) continue;
        int h = config.handler_of(v);
        if (h == t.pid) continue;
        if (!sorted_contains(p.top().entry_acquired, h)) continue;
        LockState& lock = config.proc(h).lock;
        if (lock.kind == LockState::Kind::locked && lock.owner == t.pid)
          lock = LockState{};
        sorted_erase(p.top().entry_acquired, h);
      }
      advance(act.out_state);
      break;
    }
    case RuleId::unlock_creator: {
      p.lock = LockState{};
      advance(act.out_state);
      break;
    }
    case RuleId::unlock_creator_nonsep: {
      advance(act.out_state);
      break;
    }
    default:
      throw std::logic_error("unhandled rule in apply");
  }
}

Configuration Engine::apply(const Configuration& config,
                            const Transition& t) const {
  Configuration next = config;
  apply_action(next, t);
  if (!next.error) {
    // Completions cascade: popping a request frame can wake a caller whose
    // position is itself final.
    bool progress = true;
    while (progress) {
      progress = false;
      for (auto& q : next.processors) {
        if (q.status != Status::running || q.stack.empty()) continue;
        if (!program_.features[q.pos_feature].is_final(q.pos_state)) continue;
        fold_completions(next, q.id);
        progress = true;
      }
    }
    refresh_lock_waiters(next);
    if (!next.error) next.error = detect_errors(next);
  }
  if (config.options.token_mode && !next.error) {
    if (rule_is_token_gated(t.rule)) next.action_executed_indicator = true;
    if (rule_is_interleaving(t.rule)) next.reset_token_flag = true;
  }
  return next;
}

std::optional<EngineError> Engine::detect_errors(
    const Configuration& config) const {
  int n = static_cast<int>(config.processors.size());

  // Waits-for cycle over lock ownership. An edge points at whoever must act
  // to release the awaited queue: the lock owner, or for a creation lock the
  // created processor itself (its UnlockCreator clears it).
  std::vector<std::vector<int>> lock_edges(n);
  for (const auto& p : config.processors) {
    if (p.status != Status::awaiting_locks) continue;
    for (int w : p.wait_set) {
      const LockState& lock = config.proc(w).lock;
      if (lock.kind == LockState::Kind::creation_locked)
        lock_edges[p.id].push_back(w);
      else if (lock.kind == LockState::Kind::locked)
        lock_edges[p.id].push_back(lock.owner);
    }
  }
  auto find_cycle = [n](const std::vector<std::vector<int>>& edges)
      -> std::vector<int> {
    std::vector<int> color(n, 0);  // 0 new, 1 on path, 2 done
    std::vector<int> path;
    std::vector<int> cycle;
    std::function<bool(int)> visit = [&](int u) {
      color[u] = 1;
      path.push_back(u);
      for (int v : edges[u]) {
        if (color[v] == 1) {
          auto it = std::find(path.begin(), path.end(), v);
          cycle.assign(it, path.end());
          return true;
        }
        if (color[v] == 0 && visit(v)) return true;
      }
      color[u] = 2;
      path.pop_back();
      return false;
    };
    for (int u = 0; u < n; u++)
      if (color[u] == 0 && visit(u)) return cycle;
    return {};
  };

  std::vector<int> cycle = find_cycle(lock_edges);
  if (!cycle.empty()) {
    std::string detail = "waits-for cycle:";
    for (int pid : cycle) detail += " p" + std::to_string(pid);
    int pid = cycle.front();
    return EngineError{ErrorClass::deadlock, pid,
                       config.proc(pid).pos_feature, "", {}, detail};
  }

  // Query-service cycle: a blocked processor whose pending request sits
  // unserved in the queue of another blocked processor.
  auto blocked = [&](int pid) {
    Status s = config.proc(pid).status;
    return s == Status::awaiting_result || s == Status::awaiting_locks ||
           s == Status::awaiting_lock_restore;
  };
  std::vector<std::vector<int>> await_edges(n);
  for (const auto& p : config.processors) {
    if (p.status != Status::awaiting_result &&
        p.status != Status::awaiting_lock_restore)
      continue;
    for (const auto& q : config.processors) {
      bool pending = false;
      for (const auto& req : q.queue)
        if (req.frame.reply_to == p.id) pending = true;
      if (pending && blocked(q.id)) await_edges[p.id].push_back(q.id);
    }
  }
  cycle = find_cycle(await_edges);
  if (!cycle.empty()) {
    std::string detail = "request-service cycle:";
    for (int pid : cycle) detail += " p" + std::to_string(pid);
    int pid = cycle.front();
    return EngineError{ErrorClass::wait_condition_deadlock, pid,
                       config.proc(pid).pos_feature, "", {}, detail};
  }

  int tokens = 0;
  for (const auto& p : config.processors) tokens += p.has_token ? 1 : 0;
  if (tokens > 1)
    return EngineError{ErrorClass::internal_invariant, -1, -1, "", {},
                       "multiple token holders"};
  for (const auto& obj : config.objects)
    if (obj.handler < 0 || obj.handler >= n)
      return EngineError{ErrorClass::internal_invariant, -1, -1, "", {},
                         "object " + std::to_string(obj.id) +
                             " has no valid handler"};
  return std::nullopt;
}

std::string Engine::describe(const Configuration& config,
                             const Transition& t) const {
  std::string who = "p" + std::to_string(t.pid);
  switch (t.rule) {
    case RuleId::pass_token:
      return who + " passes the token to p" +
             std::to_string(config.proc(t.pid).list_next);
    case RuleId::pass_token_first:
      return "token returns to p" + std::to_string(config.first_processor);
    case RuleId::reset_token:
      return "token reset to p" + std::to_string(config.first_processor);
    case RuleId::cleanup_token:
      return "token removed at quiescence";
    case RuleId::dequeue: {
      const auto& req = config.proc(t.pid).queue.front();
      return who + " starts serving " +
             program_.features[req.frame.feature].qualified_name();
    }
    default:
      break;
  }
  const Processor& p = config.proc(t.pid);
  const FeatureGraph& g = program_.features[p.pos_feature];
  const Action& act = g.actions[t.action_index];
  std::string where = g.qualified_name();
  auto tagged = [&](const std::string& what) {
    return who + " " + where + ": " + what +
           (act.tag.empty() ? "" : " [" + act.tag + "]");
  };
  switch (t.rule) {
    case RuleId::assign:
      return tagged("assign");
    case RuleId::noop:
      return tagged("noop");
    case RuleId::test:
      switch (act.test_role) {
        case TestRole::require_pass: return tagged("require holds");
        case TestRole::ensure_pass: return tagged("ensure holds");
        default: return tagged("branch");
      }
    case RuleId::test_precondition_fail:
      return tagged("precondition violated");
    case RuleId::test_wait_retry:
      return tagged("wait condition fails, releasing locks and retrying");
    case RuleId::test_postcondition_fail:
      return tagged("postcondition violated");
    case RuleId::call_nonsep:
      return tagged("call " + program_.features[act.callee].feature_name);
    case RuleId::call_sep:
      return tagged("separate call " +
                    program_.features[act.callee].feature_name);
    case RuleId::query_nonsep:
    case RuleId::query_sep: {
      EvalOutcome out;
      if (act.kind == Action::Kind::command_call)
        out = eval_call_parts(program_, config, t.pid, act.call_target, act.args)
                  .pending;
      else if (act.kind == Action::Kind::create)
        out = eval_call_parts(program_, config, t.pid, nullptr, act.args).pending;
      else if (act.kind == Action::Kind::test)
        out = eval_expression(
            config, t.pid,
            *g.actions[g.states[p.pos_state].out_actions[0]].expr);
      else
        out = eval_expression(config, t.pid, *act.expr);
      std::string name = out.query
                             ? program_
                                   .features[std::get<IrQuery>(out.query->node)
                                                 .feature]
                                   .feature_name
                             : "?";
      return tagged((t.rule == RuleId::query_sep ? "separate query " : "query ") +
                    name);
    }
    case RuleId::create_nonsep:
    case RuleId::create_sep:
      return tagged("create " + program_.features[act.callee].qualified_name());
    case RuleId::lock: {
      std::string out = "acquire locks {";
      bool first = true;
      for (const auto& var : act.lock_vars) {
        Value v = read_var(config, p.top(), var);
        if (v.is_void()) continue;
        int h = config.handler_of(v);
        if (h == t.pid) continue;
        if (!first) out += ", ";
        out += "p" + std::to_string(h);
        first = false;
      }
      return tagged(out + "}");
    }
    case RuleId::unlock:
      return tagged("release locks");
    case RuleId::unlock_creator:
      return tagged("creation lock released");
    case RuleId::unlock_creator_nonsep:
      return tagged("creation lock no-op");
    default:
      return tagged(rule_name(t.rule));
  }
}

std::vector<std::string> Engine::check_invariants(
    const Configuration& config) const {
  std::vector<std::string> out;
  int n = static_cast<int>(config.processors.size());
  auto complain = [&](std::string msg) { out.push_back(std::move(msg)); };

  int tokens = 0;
  for (const auto& p : config.processors) tokens += p.has_token ? 1 : 0;
  if (tokens > 1) complain("more than one token holder");
  if (!config.options.token_mode && tokens != 0)
    complain("token present outside token mode");

  for (const auto& p : config.processors) {
    std::string who = "p" + std::to_string(p.id);
    if (p.lock.kind != LockState::Kind::unlocked &&
        (p.lock.owner < 0 || p.lock.owner >= n))
      complain(who + " locked by a processor that does not exist");
    if ((p.status == Status::idle) != p.stack.empty())
      complain(who + " idle/stack mismatch");
    if (p.stack.empty() != (p.pos_feature < 0))
      complain(who + " stack/position mismatch");
    if ((p.status == Status::awaiting_locks) != !p.wait_set.empty())
      complain(who + " wait-set/status mismatch");
    long long last_seq = -1;
    for (const auto& req : p.queue) {
      if (req.enqueue_seq <= last_seq)
        complain(who + " queue is out of FIFO order");
      last_seq = req.enqueue_seq;
    }
    for (const auto& frame : p.stack) {
      for (int c : frame.controls)
        if (c < 0 || c >= n) complain(who + " frame controls unknown processor");
      if (!frame.passed_locks.empty() && frame.restore_to < 0)
        complain(who + " passed locks without a restore target");
      if (frame.current_object < 0 ||
          frame.current_object >= static_cast<int>(config.objects.size()))
        complain(who + " frame has no current object");
    }
    if (!p.stack.empty() && p.stack.front().return_kind !=
                                Frame::ReturnKind::request)
      complain(who + " bottom frame is not a request frame");
  }

  for (const auto& obj : config.objects) {
    if (obj.handler < 0 || obj.handler >= n) {
      complain("object " + std::to_string(obj.id) + " has no handler");
      continue;
    }
    const auto& slots = program_.templates[obj.class_id].slots;
    if (obj.slots.size() != slots.size())
      complain("object " + std::to_string(obj.id) + " slot count mismatch");
  }

  std::vector<Transition> ts = enabled(config);
  if (config.error && !ts.empty())
    complain("error configuration has enabled transitions");
  if (config.options.token_mode) {
    auto level = [](RuleId r) {
      if (rule_is_token_gated(r)) return 6;
      if (r == RuleId::pass_token) return 3;
      if (r == RuleId::pass_token_first) return 2;
      if (rule_is_interleaving(r)) return 1;
      return 0;
    };
    for (size_t i = 1; i < ts.size(); i++)
      if (level(ts[i].rule) != level(ts[0].rule))
        complain("enabled transitions span more than one priority level");
  }
  return out;
}

}  // namespace coopcheck
