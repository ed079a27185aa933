#pragma once

#include <optional>
#include <vector>

#include "coopcheck/value.hpp"

namespace coopcheck {

struct EngineOptions {
  bool token_mode = true;
  bool postconditions = true;
};

enum class ErrorClass : uint8_t {
  deadlock,
  wait_condition_deadlock,
  precondition_fail,
  postcondition_fail,
  void_call,
  divide_by_zero,
  int_overflow,
  internal_invariant,
};

const char* error_class_name(ErrorClass cls);

struct EngineError {
  ErrorClass cls = ErrorClass::internal_invariant;
  int proc = -1;
  int feature = -1;  // feature graph index, -1 when not applicable
  std::string tag;   // assertion tag when one exists
  SourceLoc loc;
  std::string detail;
};

struct ObjectInstance {
  int id = -1;
  int class_id = -1;
  int handler = -1;
  std::vector<Value> slots;  // template order
};

// One activation record. Frames reach the stack either as served requests
// (bottom of a processor's stack) or as synchronous pushes for non-separate
// calls and sub-queries.
struct Frame {
  int feature = -1;
  int current_object = -1;
  std::vector<Value> formals;
  std::vector<Value> locals;
  Value result;  // default of the return type until assigned

  enum class ReturnKind : uint8_t {
    request,   // served from the queue; completion may reply / restore locks
    to_state,  // synchronous command: resume caller at return_state
    to_memo,   // synchronous sub-query: append result to caller's memo
  };
  ReturnKind return_kind = ReturnKind::request;
  StateId return_state = -1;
  int reply_to = -1;           // pid to wake on completion (-1: nobody)
  bool reply_expected = false; // true when reply_to awaits the query result

  std::vector<int> controls;        // pids the caller had locked at call time
  int restore_to = -1;              // lock passing: owner to restore
  std::vector<int> passed_locks;    // pids whose queue locks were passed in
  std::vector<int> entry_acquired;  // pids this frame locked itself

  // Results of completed sub-queries of the action being evaluated, in issue
  // order. Evaluation replays the expression against this list, so the next
  // unsatisfied sub-query is always the one past the end.
  std::vector<Value> eval_memo;
};

struct Request {
  Frame frame;
  long long enqueue_seq = 0;  // debug FIFO bookkeeping, not part of the state
};

struct LockState {
  enum class Kind : uint8_t { unlocked, locked, creation_locked } kind =
      Kind::unlocked;
  int owner = -1;

  bool acquirable_by(int pid) const {
    if (kind == Kind::unlocked) return true;
    // A creation lock blocks everybody, including its own holder; the
    // creator's follow-up Lock waits for UnlockCreator.
    return kind == Kind::locked && owner == pid;
  }
};

enum class Status : uint8_t {
  idle,
  running,
  awaiting_result,
  awaiting_lock_restore,
  awaiting_locks,
};

const char* status_name(Status s);

struct Processor {
  int id = -1;
  LockState lock;
  std::vector<Request> queue;  // index 0 = front
  std::vector<Frame> stack;    // back = active frame
  int pos_feature = -1;
  StateId pos_state = -1;
  Status status = Status::idle;
  std::vector<int> wait_set;  // sorted; nonempty iff awaiting_locks
  bool has_token = false;
  int list_next = -1;  // creation-order chain

  bool idle() const { return status == Status::idle; }
  const Frame& top() const { return stack.back(); }
  Frame& top() { return stack.back(); }
};

struct Configuration {
  std::vector<Processor> processors;  // index = pid
  std::vector<ObjectInstance> objects;  // index = oid
  int first_processor = 0;
  int last_processor = 0;
  bool action_executed_indicator = false;
  bool reset_token_flag = false;
  EngineOptions options;
  std::optional<EngineError> error;
  long long next_enqueue_seq = 0;

  const Processor& proc(int pid) const { return processors[pid]; }
  Processor& proc(int pid) { return processors[pid]; }
  const ObjectInstance& obj(int oid) const { return objects[oid]; }
  ObjectInstance& obj(int oid) { return objects[oid]; }
  int handler_of(const Value& ref) const { return objects[ref.oid].handler; }
};

}  // namespace coopcheck
