#include <atomic>
#include <chrono>
#include <thread>

#include "coopcheck/explorer.hpp"

namespace coopcheck {

const char* verdict_name(VerdictKind v) {
  switch (v) {
    case VerdictKind::nonterminal: return "nonterminal";
    case VerdictKind::ok_idle: return "ok_idle";
    case VerdictKind::error: return "error";
    case VerdictKind::stuck: return "stuck";
  }
  return "?";
}

namespace {

bool all_idle(const Configuration& config) {
  for (const auto& p : config.processors)
    if (p.status != Status::idle) return false;
  return true;
}

struct SuccRec {
  Transition step;
  CanonicalKey key;
  Configuration config;
};

// Expansion result for one frontier state: either a terminal classification
// or the full successor list, in enabled order.
struct Expansion {
  bool terminal = false;
  VerdictKind verdict = VerdictKind::nonterminal;
  std::vector<SuccRec> succs;
};

Expansion expand(const Engine& engine, const Configuration& config) {
  Expansion out;
  std::vector<Transition> ts = engine.enabled(config);
  if (ts.empty()) {
    out.terminal = true;
    out.verdict = all_idle(config) ? VerdictKind::ok_idle : VerdictKind::stuck;
    return out;
  }
  out.succs.reserve(ts.size());
  for (const Transition& t : ts) {
    SuccRec rec;
    rec.step = t;
    rec.config = engine.apply(config, t);
    rec.key = canonical_key(rec.config);
    out.succs.push_back(std::move(rec));
  }
  return out;
}

struct Driver {
  const Engine& engine;
  const ExploreOptions& options;
  const std::set<ErrorClass>* stop_classes;  // find_counterexample mode

  ExploreResult result;
  int hit_state = -1;
  std::map<ErrorClass, int> first_error_state;
  int first_stuck_state = -1;

  explicit Driver(const Engine& eng, const ExploreOptions& opt,
                  const std::set<ErrorClass>* stop)
      : engine(eng), options(opt), stop_classes(stop) {}

  bool bound_reached() const {
    return options.bound &&
           static_cast<long long>(result.lts.states.size()) >= *options.bound;
  }

  void note_invariants(const Configuration& config) {
    if (!options.check_invariants) return;
    if (result.invariant_failures.size() >= 50) return;
    for (std::string& msg : engine.check_invariants(config))
      result.invariant_failures.push_back(std::move(msg));
  }

  // Registers a discovered configuration; returns its state index, or -1
  // when the bound rejects it.
  int insert(const CanonicalKey& key, const Configuration& config, int parent,
             const Transition& step) {
    auto it = result.lts.index.find(key);
    if (it != result.lts.index.end()) {
      result.stats.dedup_hits++;
      return it->second;
    }
    if (parent >= 0 && bound_reached()) {
      result.stats.bounded = true;
      return -1;
    }
    int idx = static_cast<int>(result.lts.states.size());
    Lts::State state;
    state.key = key;
    state.parent = parent;
    if (parent >= 0) {
      state.parent_rule = step.rule;
      state.parent_pid = step.pid;
      state.depth = result.lts.states[parent].depth + 1;
    }
    if (config.error) {
      state.verdict = VerdictKind::error;
      state.error = config.error;
      if (!first_error_state.count(config.error->cls))
        first_error_state[config.error->cls] = idx;
      if (stop_classes && stop_classes->count(config.error->cls) &&
          hit_state < 0)
        hit_state = idx;
    }
    result.lts.index.emplace(key, idx);
    result.lts.states.push_back(std::move(state));
    note_invariants(config);
    return idx;
  }

  void classify_terminal(int idx, VerdictKind verdict) {
    Lts::State& state = result.lts.states[idx];
    if (state.verdict == VerdictKind::nonterminal) state.verdict = verdict;
    if (verdict == VerdictKind::stuck && first_stuck_state < 0)
      first_stuck_state = idx;
  }

  void run() {
    auto start = std::chrono::steady_clock::now();
    Configuration init = engine.initial();
    CanonicalKey init_key = canonical_key(init);
    int init_idx = insert(init_key, init, -1, {});
    result.lts.initial = init_idx;
    if (hit_state < 0 && !init.error) {
      if (options.strategy == Strategy::bfs)
        run_bfs(std::move(init), init_idx);
      else
        run_dfs(std::move(init), init_idx);
    }
    finish(start);
  }

  void run_bfs(Configuration init, int init_idx) {
    std::vector<std::pair<int, Configuration>> frontier;
    frontier.emplace_back(init_idx, std::move(init));
    while (!frontier.empty() && hit_state < 0) {
      result.stats.peak_frontier = std::max(
          result.stats.peak_frontier,
          static_cast<long long>(frontier.size()));
      std::vector<Expansion> expansions(frontier.size());
      int jobs = std::max(1, options.jobs);
      if (jobs == 1 || frontier.size() == 1) {
        for (size_t i = 0; i < frontier.size(); i++)
          expansions[i] = expand(engine, frontier[i].second);
      } else {
        std::vector<std::thread> workers;
        std::atomic<size_t> next{0};
        for (int w = 0; w < jobs; w++)
          workers.emplace_back([&]() {
            for (size_t i = next.fetch_add(1); i < frontier.size();
                 i = next.fetch_add(1))
              expansions[i] = expand(engine, frontier[i].second);
          });
        for (auto& worker : workers) worker.join();
      }
      // Deterministic merge: frontier order, then enabled order, exactly as
      // a sequential pass would insert.
      std::vector<std::pair<int, Configuration>> next_frontier;
      for (size_t i = 0; i < frontier.size(); i++) {
        int src = frontier[i].first;
        Expansion& ex = expansions[i];
        if (ex.terminal) {
          classify_terminal(src, ex.verdict);
          continue;
        }
        for (SuccRec& rec : ex.succs) {
          bool known = result.lts.index.count(rec.key) > 0;
          int dst = insert(rec.key, rec.config, src, rec.step);
          if (dst < 0) continue;
          result.lts.edges.push_back({src, rec.step.rule, rec.step.pid, dst});
          if (!known && !rec.config.error)
            next_frontier.emplace_back(dst, std::move(rec.config));
          if (hit_state >= 0) break;
        }
        if (hit_state >= 0) break;
      }
      frontier = std::move(next_frontier);
    }
  }

  void run_dfs(Configuration init, int init_idx) {
    std::vector<std::pair<int, Configuration>> stack;
    stack.emplace_back(init_idx, std::move(init));
    while (!stack.empty() && hit_state < 0) {
      result.stats.peak_frontier = std::max(
          result.stats.peak_frontier, static_cast<long long>(stack.size()));
      auto [src, config] = std::move(stack.back());
      stack.pop_back();
      Expansion ex = expand(engine, config);
      if (ex.terminal) {
        classify_terminal(src, ex.verdict);
        continue;
      }
      std::vector<std::pair<int, Configuration>> pushed;
      for (SuccRec& rec : ex.succs) {
        bool known = result.lts.index.count(rec.key) > 0;
        int dst = insert(rec.key, rec.config, src, rec.step);
        if (dst < 0) continue;
        result.lts.edges.push_back({src, rec.step.rule, rec.step.pid, dst});
        if (!known && !rec.config.error)
          pushed.emplace_back(dst, std::move(rec.config));
        if (hit_state >= 0) break;
      }
      // First enabled transition explored first.
      for (auto it = pushed.rbegin(); it != pushed.rend(); ++it)
        stack.push_back(std::move(*it));
    }
  }

  void finish(std::chrono::steady_clock::time_point start) {
    result.stats.states = static_cast<long long>(result.lts.states.size());
    result.stats.transitions = static_cast<long long>(result.lts.edges.size());
    result.stats.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    for (const auto& state : result.lts.states)
      result.verdict_counts[state.verdict]++;
    for (const auto& [cls, idx] : first_error_state)
      result.error_traces.emplace(cls,
                                  trace_to_state(engine, result.lts, idx));
    if (first_stuck_state >= 0)
      result.stuck_trace = trace_to_state(engine, result.lts, first_stuck_state);
  }
};

}  // namespace

ExploreResult explore(const Engine& engine, const ExploreOptions& options) {
  Driver driver(engine, options, nullptr);
  driver.run();
  return std::move(driver.result);
}

std::optional<Trace> find_counterexample(const Engine& engine,
                                         const std::set<ErrorClass>& classes,
                                         const ExploreOptions& options,
                                         Stats* stats_out) {
  Driver driver(engine, options, &classes);
  driver.run();
  if (stats_out) *stats_out = driver.result.stats;
  if (driver.hit_state < 0) return std::nullopt;
  return trace_to_state(engine, driver.result.lts, driver.hit_state);
}

Trace trace_to_state(const Engine& engine, const Lts& lts, int state) {
  std::vector<std::pair<RuleId, int>> steps;
  for (int at = state; lts.states[at].parent >= 0; at = lts.states[at].parent)
    steps.emplace_back(lts.states[at].parent_rule, lts.states[at].parent_pid);
  std::reverse(steps.begin(), steps.end());

  Trace trace;
  trace.verdict = lts.states[state].verdict;
  trace.error = lts.states[state].error;
  Configuration config = engine.initial();
  for (auto [rule, pid] : steps) {
    std::vector<Transition> ts = engine.enabled(config);
    const Transition* match = nullptr;
    for (const Transition& t : ts)
      if (t.rule == rule && t.pid == pid) match = &t;
    if (!match)
      throw ReplayDivergence(std::string("step not enabled during replay: ") +
                             rule_name(rule) + " p" + std::to_string(pid));
    trace.steps.push_back({rule, pid, engine.describe(config, *match)});
    config = engine.apply(config, *match);
  }
  trace.final_key = canonical_key(config);
  if (trace.final_key != lts.states[state].key)
    throw ReplayDivergence("replayed trace reaches a different state");
  return trace;
}

Configuration replay(const Engine& engine, const Trace& trace) {
  Configuration config = engine.initial();
  for (const TraceStep& step : trace.steps) {
    std::vector<Transition> ts = engine.enabled(config);
    const Transition* match = nullptr;
    for (const Transition& t : ts)
      if (t.rule == step.rule && t.pid == step.pid) match = &t;
    if (!match)
      throw ReplayDivergence(std::string("step not enabled during replay: ") +
                             rule_name(step.rule) + " p" +
                             std::to_string(step.pid));
    config = engine.apply(config, *match);
  }
  CanonicalKey key = canonical_key(config);
  if ((trace.final_key.lo || trace.final_key.hi) && key != trace.final_key)
    throw ReplayDivergence("final configuration does not match the trace key");
  return config;
}

}  // namespace coopcheck
