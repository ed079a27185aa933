#pragma once

#include <functional>

#include "coopcheck/configuration.hpp"

namespace coopcheck {

// Closed catalog of transition labels. (rule, pid) identifies a transition
// uniquely within one configuration: a processor contributes at most one
// step, and its branch (test outcome, dequeued request) is determined by the
// configuration itself.
enum class RuleId : uint8_t {
  assign,
  noop,
  test,
  test_precondition_fail,
  test_wait_retry,
  test_postcondition_fail,
  call_nonsep,
  call_sep,
  query_nonsep,
  query_sep,
  create_nonsep,
  create_sep,
  lock,
  unlock,
  unlock_creator,
  unlock_creator_nonsep,
  dequeue,
  pass_token,
  pass_token_first,
  reset_token,
  cleanup_token,
};

const char* rule_name(RuleId rule);

// Priority level a rule belongs to. Token-gated rules run only while holding
// the token; interleaving rules run for every processor; the remainder are
// token administration.
bool rule_is_token_gated(RuleId rule);
bool rule_is_interleaving(RuleId rule);

struct Transition {
  RuleId rule;
  int pid = -1;
  int action_index = -1;  // acting action in its feature graph, -1 for token rules

  bool operator==(const Transition& other) const {
    return rule == other.rule && pid == other.pid;
  }
};

// Outcome of attempting to evaluate an expression against the active frame's
// memo: a finished value, a sub-query that must run first (separate issue or
// synchronous push), or an evaluation error.
struct EvalOutcome {
  enum class Kind : uint8_t { value, issue_separate, push_local, error } kind =
      Kind::value;
  Value value;

  const IrExpr* query = nullptr;  // the pending IrQuery node
  Value target;                   // its evaluated target
  std::vector<Value> args;        // its evaluated arguments

  EngineError error;
};

struct EngineHooks {
  // Fired when a failed require clause is classified. `precondition` is true
  // for a real violation, false for a wait condition retry.
  std::function<void(int pid, bool precondition, const std::string& tag)>
      on_classify;
};

class Engine {
 public:
  Engine(const ModelProgram& program, EngineOptions options,
         EngineHooks hooks = {});

  Configuration initial() const;

  // All transitions of the highest nonempty priority level; empty means the
  // configuration is quiescent (or carries an error).
  std::vector<Transition> enabled(const Configuration& config) const;

  Configuration apply(const Configuration& config, const Transition& t) const;

  // Human-readable step description for traces.
  std::string describe(const Configuration& config, const Transition& t) const;

  std::optional<EngineError> detect_errors(const Configuration& config) const;

  // Evaluates `expr` for pid's active frame. Pure: no configuration change.
  EvalOutcome eval_expression(const Configuration& config, int pid,
                              const IrExpr& expr) const;

  // True when calling `callee` with these actuals hands the caller's locks to
  // the supplier (separate commands only; queries always pass).
  bool should_pass_locks(const Configuration& config, int pid,
                         const std::vector<Value>& actuals,
                         const FeatureGraph& callee) const;

  // Debug invariant suite; returns one message per violation.
  std::vector<std::string> check_invariants(const Configuration& config) const;

  const ModelProgram& program() const { return program_; }
  const EngineOptions& options() const { return options_; }

 private:
  struct Plan {
    bool exists = false;
    RuleId rule = RuleId::noop;
    bool local = false;  // true: token-gated level; false: interleaving level
    int action_index = -1;
  };

  Plan plan_for(const Configuration& config, int pid) const;
  int token_holder(const Configuration& config) const;

  void apply_action(Configuration& config, const Transition& t) const;
  void fold_completions(Configuration& config, int pid) const;
  void complete_request(Configuration& config, int pid) const;
  void refresh_lock_waiters(Configuration& config) const;
  void fail_wait_condition(Configuration& config, int pid,
                           const Action& failed) const;
  bool classify_precondition(const Configuration& config, int pid,
                             const IrExpr& condition) const;
  std::vector<int> locked_by(const Configuration& config, int pid) const;
  void raise(Configuration& config, EngineError error) const;

  const ModelProgram& program_;
  EngineOptions options_;
  EngineHooks hooks_;
};

}  // namespace coopcheck
