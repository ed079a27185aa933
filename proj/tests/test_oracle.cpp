#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "coopcheck/engine.hpp"
#include "coopcheck/lowering.hpp"
#include "coopcheck/parser.hpp"
#include "support/ast_interpreter.hpp"
#include "support/program_gen.hpp"

using namespace coopcheck;
using namespace coopcheck::testing;

namespace {

// Runs a deterministic schedule (always the first enabled transition) until
// quiescence. Sequential programs have one maximal run, so the choice of
// schedule cannot matter.
Configuration run_to_idle(const Engine& engine) {
  Configuration cfg = engine.initial();
  long long steps = 0;
  while (true) {
    auto ts = engine.enabled(cfg);
    if (ts.empty()) break;
    cfg = engine.apply(cfg, ts[0]);
    REQUIRE_FALSE(cfg.error.has_value());
    REQUIRE(++steps < 500000);
  }
  return cfg;
}

void check_program_against_oracle(const std::string& text, bool token_mode) {
  ParseResult parsed = parse_program({{"gen.e", text}});
  {
    INFO(text);
    REQUIRE(parsed.ok());
  }
  REQUIRE(parsed.classes.size() == 1);

  OracleResult want = interpret_sequential(parsed.classes[0], "make");

  ModelProgram program = lower_program(parsed.classes, "APPLICATION.make");
  EngineOptions options;
  options.token_mode = token_mode;
  Engine engine(program, options);
  Configuration final_cfg = run_to_idle(engine);

  for (const auto& p : final_cfg.processors) CHECK(p.idle());
  REQUIRE_FALSE(final_cfg.objects.empty());
  const ObjectInstance& root = final_cfg.objects[0];
  const ObjectTemplate& tmpl = program.templates[root.class_id];
  REQUIRE(tmpl.class_name == "APPLICATION");

  for (const auto& [name, value] : want.ints) {
    int slot = tmpl.slot_index(name);
    REQUIRE(slot >= 0);
    INFO("attribute ", name);
    CHECK(root.slots[static_cast<size_t>(slot)].ival == value);
  }
  for (const auto& [name, value] : want.bools) {
    int slot = tmpl.slot_index(name);
    REQUIRE(slot >= 0);
    INFO("attribute ", name);
    CHECK(root.slots[static_cast<size_t>(slot)].bval == value);
  }
}

}  // namespace

TEST_CASE("division truncates toward zero, matching the oracle") {
  const char* text =
      "class\n"
      "\tAPPLICATION\n"
      "create\n"
      "\tmake\n"
      "feature\n"
      "\ta0: INTEGER\n"
      "\ta1: INTEGER\n"
      "\tmake\n"
      "\t\tdo\n"
      "\t\t\ta0 := (0 - 7) / 2\n"
      "\t\t\ta1 := 7 / 2\n"
      "\t\tend\n"
      "end\n";
  ParseResult parsed = parse_program({{"div.e", text}});
  REQUIRE(parsed.ok());
  OracleResult want = interpret_sequential(parsed.classes[0], "make");
  CHECK(want.ints.at("a0") == -3);
  CHECK(want.ints.at("a1") == 3);
  check_program_against_oracle(text, true);
}

TEST_CASE("query results feed later expressions in call order") {
  const char* text =
      "class\n"
      "\tAPPLICATION\n"
      "create\n"
      "\tmake\n"
      "feature\n"
      "\ttotal: INTEGER\n"
      "\tflag: BOOLEAN\n"
      "\tdouble_of (x: INTEGER): INTEGER\n"
      "\t\tdo\n"
      "\t\t\tResult := x * 2\n"
      "\t\tend\n"
      "\tmake\n"
      "\t\tdo\n"
      "\t\t\ttotal := double_of (3) + double_of (double_of (2))\n"
      "\t\t\tflag := total = 14 and (not (total /= 14))\n"
      "\t\tend\n"
      "end\n";
  ParseResult parsed = parse_program({{"q.e", text}});
  REQUIRE(parsed.ok());
  OracleResult want = interpret_sequential(parsed.classes[0], "make");
  CHECK(want.ints.at("total") == 14);
  CHECK(want.bools.at("flag") == true);
  check_program_against_oracle(text, true);
}

TEST_CASE("loops and branches settle to the oracle's values") {
  const char* text =
      "class\n"
      "\tAPPLICATION\n"
      "create\n"
      "\tmake\n"
      "feature\n"
      "\tsum: INTEGER\n"
      "\tparity: BOOLEAN\n"
      "\tmake\n"
      "\t\tlocal\n"
      "\t\t\ti: INTEGER\n"
      "\t\tdo\n"
      "\t\t\tfrom\n"
      "\t\t\t\ti := 5\n"
      "\t\t\tuntil\n"
      "\t\t\t\ti < 1\n"
      "\t\t\tloop\n"
      "\t\t\t\tsum := sum + i\n"
      "\t\t\t\ti := i - 1\n"
      "\t\t\tend\n"
      "\t\t\tif sum > 10 then\n"
      "\t\t\t\tparity := sum - (sum / 2) * 2 = 1\n"
      "\t\t\telse\n"
      "\t\t\t\tparity := False\n"
      "\t\t\tend\n"
      "\t\tend\n"
      "end\n";
  ParseResult parsed = parse_program({{"loop.e", text}});
  REQUIRE(parsed.ok());
  OracleResult want = interpret_sequential(parsed.classes[0], "make");
  CHECK(want.ints.at("sum") == 15);
  CHECK(want.bools.at("parity") == true);
  check_program_against_oracle(text, true);
}

TEST_CASE("20 generated sequential programs match the AST oracle exactly") {
  for (unsigned seed = 1; seed <= 20; seed++) {
    CAPTURE(seed);
    std::string text = generate_sequential_program(seed);
    check_program_against_oracle(text, true);
  }
}

TEST_CASE("generated programs agree with the oracle without the token rules") {
  for (unsigned seed = 1; seed <= 5; seed++) {
    CAPTURE(seed);
    check_program_against_oracle(generate_sequential_program(seed), false);
  }
}
