#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>
#include <utility>

#include "coopcheck/explorer.hpp"
#include "coopcheck/lowering.hpp"
#include "coopcheck/parser.hpp"

using namespace coopcheck;

namespace {

ModelProgram lower_text(const std::string& text, const std::string& root) {
  ParseResult parsed = parse_program({{"test.e", text}});
  {
    INFO(text);
    for (const auto& d : parsed.diagnostics) INFO(d.render());
    REQUIRE(parsed.ok());
  }
  return lower_program(parsed.classes, root);
}

// Two counters stepping independently: plenty of commuting interleavings and
// no errors anywhere.
const char* kTwoCounters =
    "class\n\tAPPLICATION\ncreate\n\tmake\nfeature\n"
    "\tc1: separate COUNTER\n\tc2: separate COUNTER\n"
    "\tmake\n\t\tdo\n"
    "\t\t\tcreate c1.make\n\t\t\tcreate c2.make\n"
    "\t\t\tlaunch (c1)\n\t\t\tlaunch (c2)\n"
    "\t\tend\n"
    "\tlaunch (c: separate COUNTER)\n\t\tdo\n\t\t\tc.count_up\n\t\tend\nend\n"
    "class\n\tCOUNTER\ncreate\n\tmake\nfeature\n"
    "\tn: INTEGER\n"
    "\tmake\n\t\tdo\n\t\tend\n"
    "\tcount_up\n\t\tdo\n"
    "\t\t\tfrom\n\t\t\tuntil\n\t\t\t\tn >= 3\n\t\t\tloop\n"
    "\t\t\t\tn := n + 1\n\t\t\tend\n\t\tend\nend\n";

// Crossed fork order, same shape as the engine deadlock toy.
const char* kCrossedForks =
    "class\n\tAPPLICATION\ncreate\n\tmake\nfeature\n"
    "\tf1: separate FORK\n\tf2: separate FORK\n"
    "\te1: separate EATER\n\te2: separate EATER\n"
    "\tmake\n\t\tdo\n"
    "\t\t\tcreate f1.make\n\t\t\tcreate f2.make\n"
    "\t\t\tcreate e1.make (f1, f2)\n\t\t\tcreate e2.make (f2, f1)\n"
    "\t\t\tkick (e1)\n\t\t\tkick (e2)\n"
    "\t\tend\n"
    "\tkick (x: separate EATER)\n\t\tdo\n\t\t\tx.go\n\t\tend\nend\n"
    "class\n\tFORK\ncreate\n\tmake\nfeature\n\tmake\n\t\tdo\n\t\tend\nend\n"
    "class\n\tEATER\ncreate\n\tmake\nfeature\n"
    "\tfirst: separate FORK\n\tsecond: separate FORK\n"
    "\tmake (a, b: separate FORK)\n\t\tdo\n"
    "\t\t\tfirst := a\n\t\t\tsecond := b\n\t\tend\n"
    "\tgo\n\t\tdo\n\t\t\tgrab_first (first)\n\t\tend\n"
    "\tgrab_first (f: separate FORK)\n\t\tdo\n\t\t\tgrab_second (second)\n\t\tend\n"
    "\tgrab_second (f: separate FORK)\n\t\tdo\n\t\tend\nend\n";

std::set<std::pair<uint64_t, uint64_t>> key_set(const Lts& lts) {
  std::set<std::pair<uint64_t, uint64_t>> keys;
  for (const auto& s : lts.states) keys.insert({s.key.lo, s.key.hi});
  return keys;
}

}  // namespace

TEST_CASE("canonical keys are stable and react to state changes") {
  ModelProgram prog = lower_text(kTwoCounters, "APPLICATION.make");
  Engine engine(prog, {});
  Configuration cfg = engine.initial();

  CanonicalKey a = canonical_key(cfg);
  CanonicalKey b = canonical_key(cfg);
  CHECK(a == b);
  CHECK(a.bytes.empty());
  CanonicalKey with_bytes = canonical_key(cfg, true);
  CHECK(with_bytes == a);
  CHECK_FALSE(with_bytes.bytes.empty());
  CHECK(canonical_bytes(cfg) == with_bytes.bytes);

  auto enabled = engine.enabled(cfg);
  REQUIRE_FALSE(enabled.empty());
  Configuration next = engine.apply(cfg, enabled[0]);
  CHECK(canonical_key(next) != a);
}

TEST_CASE("independent local steps of different processors commute") {
  ModelProgram prog = lower_text(kTwoCounters, "APPLICATION.make");
  Engine engine(prog, {.token_mode = false, .postconditions = true});

  // Scan forward for a configuration offering token-gated (purely local)
  // steps on two distinct processors, then close the diamond.
  Configuration cfg = engine.initial();
  int diamonds = 0;
  for (int step = 0; step < 400; step++) {
    auto options = engine.enabled(cfg);
    if (options.empty()) break;
    std::vector<Transition> local;
    for (const auto& t : options)
      if (rule_is_token_gated(t.rule)) local.push_back(t);
    for (size_t i = 0; i < local.size(); i++)
      for (size_t j = i + 1; j < local.size(); j++) {
        if (local[i].pid == local[j].pid) continue;
        Configuration ij = engine.apply(engine.apply(cfg, local[i]), local[j]);
        Configuration ji = engine.apply(engine.apply(cfg, local[j]), local[i]);
        CHECK(canonical_key(ij) == canonical_key(ji));
        diamonds++;
      }
    cfg = engine.apply(cfg, options[step % options.size()]);
  }
  CHECK(diamonds >= 3);
}

TEST_CASE("exploration merges commuting interleavings through the key index") {
  ModelProgram prog = lower_text(kTwoCounters, "APPLICATION.make");
  Engine engine(prog, {.token_mode = false, .postconditions = true});
  ExploreResult result = explore(engine, {});
  CHECK(result.stats.dedup_hits > 0);
  CHECK(result.stats.states == static_cast<long long>(result.lts.states.size()));
  CHECK(result.lts.index.size() == result.lts.states.size());
}

TEST_CASE("error-free programs terminate with ok_idle verdicts only") {
  ModelProgram prog = lower_text(kTwoCounters, "APPLICATION.make");
  Engine engine(prog, {});
  ExploreResult result = explore(engine, {});
  CHECK(result.error_traces.empty());
  CHECK_FALSE(result.stuck_trace.has_value());
  CHECK(result.verdict_counts[VerdictKind::ok_idle] >= 1);
  CHECK(result.verdict_counts[VerdictKind::error] == 0);
  CHECK(result.verdict_counts[VerdictKind::stuck] == 0);
  CHECK_FALSE(result.stats.bounded);
}

TEST_CASE("discovery tree edges stay within the graph and point backwards") {
  ModelProgram prog = lower_text(kTwoCounters, "APPLICATION.make");
  Engine engine(prog, {});
  ExploreResult result = explore(engine, {});
  const Lts& lts = result.lts;
  CHECK(lts.initial == 0);
  CHECK(lts.states[0].parent == -1);
  CHECK(lts.states[0].depth == 0);
  for (size_t i = 1; i < lts.states.size(); i++) {
    REQUIRE(lts.states[i].parent >= 0);
    CHECK(lts.states[i].parent < static_cast<int>(i));
    CHECK(lts.states[i].depth ==
          lts.states[lts.states[i].parent].depth + 1);
  }
  for (const auto& e : lts.edges) {
    CHECK(e.src >= 0);
    CHECK(e.src < static_cast<int>(lts.states.size()));
    CHECK(e.dst >= 0);
    CHECK(e.dst < static_cast<int>(lts.states.size()));
  }
}

TEST_CASE("a state bound cuts exploration short and reports it") {
  ModelProgram prog = lower_text(kTwoCounters, "APPLICATION.make");
  Engine engine(prog, {});
  ExploreResult full = explore(engine, {});
  REQUIRE(full.stats.states > 10);

  ExploreOptions bounded;
  bounded.bound = 10;
  ExploreResult cut = explore(engine, bounded);
  CHECK(cut.stats.bounded);
  CHECK(cut.stats.states <= 10);

  ExploreOptions roomy;
  roomy.bound = full.stats.states * 2;
  ExploreResult whole = explore(engine, roomy);
  CHECK_FALSE(whole.stats.bounded);
  CHECK(whole.stats.states == full.stats.states);
}

TEST_CASE("breadth-first and depth-first reach the same states and verdicts") {
  for (const char* text : {kTwoCounters, kCrossedForks}) {
    ModelProgram prog = lower_text(text, "APPLICATION.make");
    Engine engine(prog, {});
    ExploreOptions dfs;
    dfs.strategy = Strategy::dfs;
    ExploreResult by_breadth = explore(engine, {});
    ExploreResult by_depth = explore(engine, dfs);
    CHECK(key_set(by_breadth.lts) == key_set(by_depth.lts));
    CHECK(by_breadth.verdict_counts == by_depth.verdict_counts);

    std::set<ErrorClass> breadth_classes, depth_classes;
    for (const auto& [cls, trace] : by_breadth.error_traces)
      breadth_classes.insert(cls);
    for (const auto& [cls, trace] : by_depth.error_traces)
      depth_classes.insert(cls);
    CHECK(breadth_classes == depth_classes);
  }
}

TEST_CASE("exploration is deterministic run to run") {
  ModelProgram prog = lower_text(kCrossedForks, "APPLICATION.make");
  Engine engine(prog, {});
  ExploreResult first = explore(engine, {});
  ExploreResult second = explore(engine, {});
  REQUIRE(first.lts.states.size() == second.lts.states.size());
  for (size_t i = 0; i < first.lts.states.size(); i++) {
    CHECK(first.lts.states[i].key == second.lts.states[i].key);
    CHECK(first.lts.states[i].verdict == second.lts.states[i].verdict);
  }
  CHECK(first.stats.transitions == second.stats.transitions);
}

TEST_CASE("level-parallel breadth-first search changes nothing observable") {
  ModelProgram prog = lower_text(kCrossedForks, "APPLICATION.make");
  Engine engine(prog, {});
  ExploreOptions parallel;
  parallel.jobs = 2;
  ExploreResult lone = explore(engine, {});
  ExploreResult pair = explore(engine, parallel);
  CHECK(key_set(lone.lts) == key_set(pair.lts));
  CHECK(lone.stats.states == pair.stats.states);
  CHECK(lone.verdict_counts == pair.verdict_counts);
}

TEST_CASE("explored deadlocks come with a replayable shortest trace") {
  ModelProgram prog = lower_text(kCrossedForks, "APPLICATION.make");
  Engine engine(prog, {});
  ExploreResult result = explore(engine, {});
  REQUIRE(result.error_traces.count(ErrorClass::deadlock) == 1);
  const Trace& trace = result.error_traces.at(ErrorClass::deadlock);
  CHECK(trace.verdict == VerdictKind::error);
  REQUIRE(trace.error.has_value());
  CHECK(trace.error->cls == ErrorClass::deadlock);
  for (const auto& step : trace.steps) CHECK_FALSE(step.desc.empty());

  Configuration end = replay(engine, trace);
  CHECK(canonical_key(end) == trace.final_key);
  auto detected = engine.detect_errors(end);
  REQUIRE(detected.has_value());
  CHECK(detected->cls == ErrorClass::deadlock);
}

TEST_CASE("replaying against different engine options diverges loudly") {
  ModelProgram prog = lower_text(kCrossedForks, "APPLICATION.make");
  Engine engine(prog, {});
  ExploreResult result = explore(engine, {});
  REQUIRE(result.error_traces.count(ErrorClass::deadlock) == 1);
  const Trace& trace = result.error_traces.at(ErrorClass::deadlock);

  Engine other(prog, {.token_mode = false, .postconditions = true});
  CHECK_THROWS_AS(replay(other, trace), ReplayDivergence);
}

TEST_CASE("trace_to_state rebuilds the discovery path of any state") {
  ModelProgram prog = lower_text(kTwoCounters, "APPLICATION.make");
  Engine engine(prog, {});
  ExploreResult result = explore(engine, {});
  REQUIRE(result.lts.states.size() > 5);

  for (int id : {1, static_cast<int>(result.lts.states.size()) - 1}) {
    Trace trace = trace_to_state(engine, result.lts, id);
    CHECK(trace.steps.size() ==
          static_cast<size_t>(result.lts.states[id].depth));
    CHECK(trace.final_key == result.lts.states[id].key);
    Configuration end = replay(engine, trace);
    CHECK(canonical_key(end) == result.lts.states[id].key);
  }
}

TEST_CASE("find_counterexample stops early and honors the requested classes") {
  ModelProgram prog = lower_text(kCrossedForks, "APPLICATION.make");
  Engine engine(prog, {});

  Stats stats;
  auto trace = find_counterexample(engine, {ErrorClass::deadlock}, {}, &stats);
  REQUIRE(trace.has_value());
  REQUIRE(trace->error.has_value());
  CHECK(trace->error->cls == ErrorClass::deadlock);

  ExploreResult full = explore(engine, {});
  CHECK(stats.states <= full.stats.states);

  Configuration end = replay(engine, *trace);
  CHECK(canonical_key(end) == trace->final_key);

  // Classes that never occur: the search sweeps the whole space and says no.
  Stats none_stats;
  auto none = find_counterexample(engine, {ErrorClass::divide_by_zero}, {},
                                  &none_stats);
  CHECK_FALSE(none.has_value());
  CHECK_FALSE(none_stats.bounded);

  ExploreOptions tiny;
  tiny.bound = 3;
  Stats tiny_stats;
  auto cut = find_counterexample(engine, {ErrorClass::deadlock}, tiny,
                                 &tiny_stats);
  CHECK_FALSE(cut.has_value());
  CHECK(tiny_stats.bounded);
}

TEST_CASE("the invariant sweep stays quiet across explored toys") {
  for (const char* text : {kTwoCounters, kCrossedForks}) {
    ModelProgram prog = lower_text(text, "APPLICATION.make");
    for (bool token : {true, false}) {
      Engine engine(prog, {.token_mode = token, .postconditions = true});
      ExploreOptions options;
      options.check_invariants = true;
      ExploreResult result = explore(engine, options);
      for (const auto& msg : result.invariant_failures) INFO(msg);
      CHECK(result.invariant_failures.empty());
    }
  }
}
