#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <unordered_map>

#include "coopcheck/canonical.hpp"
#include "coopcheck/engine.hpp"

namespace coopcheck {

enum class VerdictKind : uint8_t { nonterminal, ok_idle, error, stuck };

const char* verdict_name(VerdictKind v);

// Deduplicated state graph. States are numbered in discovery order, which is
// deterministic for a fixed strategy and worker count independent.
struct Lts {
  struct State {
    CanonicalKey key;
    VerdictKind verdict = VerdictKind::nonterminal;
    std::optional<EngineError> error;
    int depth = 0;
    // Discovery tree edge, for trace reconstruction by replay.
    int parent = -1;
    RuleId parent_rule = RuleId::noop;
    int parent_pid = -1;
  };
  struct Edge {
    int src;
    RuleId rule;
    int pid;
    int dst;
  };

  std::vector<State> states;
  std::vector<Edge> edges;
  std::unordered_map<CanonicalKey, int, CanonicalKeyHash> index;
  int initial = 0;
};

struct TraceStep {
  RuleId rule;
  int pid;
  std::string desc;
};

struct Trace {
  std::vector<TraceStep> steps;
  VerdictKind verdict = VerdictKind::nonterminal;
  std::optional<EngineError> error;
  CanonicalKey final_key;
};

enum class Strategy : uint8_t { bfs, dfs };

struct ExploreOptions {
  Strategy strategy = Strategy::bfs;
  std::optional<long long> bound;  // max states to discover
  int jobs = 1;                    // BFS level parallelism; DFS ignores it
  bool check_invariants = false;   // debug sweep over every discovered state
};

struct Stats {
  long long states = 0;
  long long transitions = 0;
  double wall_seconds = 0;
  long long peak_frontier = 0;
  long long dedup_hits = 0;
  bool bounded = false;  // true when the bound cut exploration short
};

struct ExploreResult {
  Lts lts;
  Stats stats;
  // One shortest (BFS) or first-found (DFS) trace per reachable error class.
  std::map<ErrorClass, Trace> error_traces;
  std::optional<Trace> stuck_trace;
  std::map<VerdictKind, long long> verdict_counts;
  std::vector<std::string> invariant_failures;  // populated by check_invariants
};

struct ReplayDivergence : std::runtime_error {
  explicit ReplayDivergence(const std::string& what)
      : std::runtime_error(what) {}
};

ExploreResult explore(const Engine& engine, const ExploreOptions& options);

// Stops at the first discovered state whose error matches a requested class.
// Empty result means no such state exists in the (bounded) space.
std::optional<Trace> find_counterexample(const Engine& engine,
                                         const std::set<ErrorClass>& classes,
                                         const ExploreOptions& options,
                                         Stats* stats_out = nullptr);

// Replays a trace from the initial configuration, validating that every step
// is enabled; returns the final configuration. Throws ReplayDivergence on
// mismatch, including a final key mismatch.
Configuration replay(const Engine& engine, const Trace& trace);

// Rebuilds the trace reaching `state` through discovery tree edges, replaying
// from the initial configuration to attach step descriptions.
Trace trace_to_state(const Engine& engine, const Lts& lts, int state);

}  // namespace coopcheck
