#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "coopcheck/lowering.hpp"
#include "coopcheck/parser.hpp"
#include "coopcheck/report.hpp"

using namespace coopcheck;

namespace {

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

ModelProgram lower_forks() {
  ParseResult parsed = parse_program({{"test.e", kCrossedForks}});
  REQUIRE(parsed.ok());
  return lower_program(parsed.classes, "APPLICATION.make");
}

RunSetup forks_setup() {
  RunSetup setup;
  setup.program = "crossed-forks";
  setup.root = "APPLICATION.make";
  return setup;
}

}  // namespace

TEST_CASE("full reports carry setup, stats, terminals and all error classes") {
  ModelProgram prog = lower_forks();
  Engine engine(prog, {});
  ExploreResult result = explore(engine, {});
  auto report = report_json(forks_setup(), result);

  CHECK(report["mode"] == "full");
  CHECK(report["program"] == "crossed-forks");
  CHECK(report["root"] == "APPLICATION.make");
  CHECK(report["options"]["strategy"] == "bfs");
  CHECK(report["options"]["token"] == true);
  CHECK(report["options"]["bound"].is_null());
  CHECK(report["stats"]["states"].get<long long>() == result.stats.states);
  CHECK(report["stats"]["bounded"] == false);
  CHECK_FALSE(report["stats"].contains("wall_seconds"));
  CHECK(report["terminals"]["error"].get<long long>() >= 1);

  REQUIRE(report["errors"].size() == 8);
  CHECK(report["errors"][0]["class"] == "deadlock");
  CHECK(report["errors"][0]["status"] == "reachable");
  const auto& trace = report["errors"][0]["trace"];
  CHECK(trace["verdict"] == "error");
  CHECK(trace["error_class"] == "deadlock");
  CHECK(trace["length"].get<size_t>() == trace["steps"].size());
  REQUIRE_FALSE(trace["steps"].empty());
  CHECK(trace["steps"][0]["step"] == 0);
  CHECK_FALSE(trace["steps"][0]["desc"].get<std::string>().empty());

  for (size_t i = 1; i < report["errors"].size(); i++) {
    CHECK(report["errors"][i]["status"] == "unreachable");
    CHECK_FALSE(report["errors"][i].contains("trace"));
  }
}

TEST_CASE("identical runs serialize to identical bytes") {
  ModelProgram prog = lower_forks();
  Engine engine(prog, {});
  std::string first = report_json(forks_setup(), explore(engine, {})).dump(2);
  std::string second = report_json(forks_setup(), explore(engine, {})).dump(2);
  CHECK(first == second);
}

TEST_CASE("bounded exploration downgrades unreached classes to unknown") {
  ModelProgram prog = lower_forks();
  Engine engine(prog, {});
  ExploreOptions options;
  options.bound = 3;
  auto report = report_json(forks_setup(), explore(engine, options));
  CHECK(report["stats"]["bounded"] == true);
  for (const auto& entry : report["errors"])
    if (entry["status"] != "reachable") CHECK(entry["status"] == "unknown");
}

TEST_CASE("counterexample reports cover exactly the requested classes") {
  ModelProgram prog = lower_forks();
  Engine engine(prog, {});

  RunSetup setup = forks_setup();
  setup.requested = {ErrorClass::deadlock, ErrorClass::wait_condition_deadlock};
  Stats stats;
  auto trace =
      find_counterexample(engine, {ErrorClass::deadlock,
                                   ErrorClass::wait_condition_deadlock},
                          {}, &stats);
  REQUIRE(trace.has_value());
  auto report = counterexample_json(setup, stats, trace);

  CHECK(report["mode"] == "counterexample");
  REQUIRE(report["errors"].size() == 2);
  CHECK(report["errors"][0]["class"] == "deadlock");
  bool one_reachable = false;
  for (const auto& entry : report["errors"])
    if (entry["status"] == "reachable") one_reachable = true;
  CHECK(one_reachable);

  // A class the program cannot produce, swept without a bound: settled no.
  RunSetup none_setup = forks_setup();
  none_setup.requested = {ErrorClass::divide_by_zero};
  Stats none_stats;
  auto none = find_counterexample(engine, {ErrorClass::divide_by_zero}, {},
                                  &none_stats);
  auto none_report = counterexample_json(none_setup, none_stats, none);
  CHECK(none_report["errors"][0]["status"] == "unreachable");

  ExploreOptions tiny;
  tiny.bound = 3;
  Stats tiny_stats;
  auto cut = find_counterexample(engine, {ErrorClass::divide_by_zero}, tiny,
                                 &tiny_stats);
  auto cut_report = counterexample_json(none_setup, tiny_stats, cut);
  CHECK(cut_report["errors"][0]["status"] == "unknown");
}

TEST_CASE("trace_jsonl emits one parsable object per step") {
  ModelProgram prog = lower_forks();
  Engine engine(prog, {});
  ExploreResult result = explore(engine, {});
  REQUIRE(result.error_traces.count(ErrorClass::deadlock) == 1);
  const Trace& trace = result.error_traces.at(ErrorClass::deadlock);

  std::string jsonl = trace_jsonl(trace);
  std::istringstream lines(jsonl);
  std::string line;
  size_t count = 0;
  while (std::getline(lines, line)) {
    auto obj = nlohmann::json::parse(line);
    CHECK(obj["step"] == count);
    CHECK(obj.contains("rule"));
    CHECK(obj["proc"].is_number_integer());
    CHECK_FALSE(obj["desc"].get<std::string>().empty());
    count++;
  }
  CHECK(count == trace.steps.size());
}

TEST_CASE("the rendered report reads the same facts back") {
  ModelProgram prog = lower_forks();
  Engine engine(prog, {});
  ExploreResult result = explore(engine, {});
  std::string text = render_report(report_json(forks_setup(), result));

  CHECK(text.find("program: crossed-forks") != std::string::npos);
  CHECK(text.find("(full exploration)") != std::string::npos);
  CHECK(text.find("deadlock: REACHABLE") != std::string::npos);
  CHECK(text.find("void_call: UNREACHABLE") != std::string::npos);

  Stats stats;
  auto trace = find_counterexample(engine, {ErrorClass::deadlock}, {}, &stats);
  RunSetup setup = forks_setup();
  setup.requested = {ErrorClass::deadlock};
  std::string search = render_report(counterexample_json(setup, stats, trace));
  CHECK(search.find("(counterexample search)") != std::string::npos);

  ExploreOptions tiny;
  tiny.bound = 3;
  auto bounded = report_json(forks_setup(), explore(engine, tiny));
  std::string cut = render_report(bounded);
  CHECK(cut.find("(bounded, incomplete)") != std::string::npos);
  CHECK(cut.find("UNKNOWN") != std::string::npos);
}
