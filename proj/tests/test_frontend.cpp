#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "coopcheck/ast_printer.hpp"
#include "coopcheck/corpus.hpp"
#include "coopcheck/parser.hpp"
#include "coopcheck/token.hpp"
#include "support/program_gen.hpp"

using namespace coopcheck;

namespace {

std::vector<ClassAst> parse_one(const std::string& text) {
  ParseResult parsed = parse_program({{"test.e", text}});
  {
    INFO(text);
    for (const auto& d : parsed.diagnostics) INFO(d.render());
    REQUIRE(parsed.ok());
  }
  return parsed.classes;
}

const char* kMinimal =
    "class\n"
    "\tFOO\n"
    "create\n"
    "\tmake\n"
    "feature\n"
    "\tmake\n"
    "\t\tdo\n"
    "\t\tend\n"
    "end\n";

}  // namespace

TEST_CASE("lexer distinguishes keywords, builtins and identifiers") {
  auto tokens = tokenize("class True Current Result make 42 := /= -- note\nend", "t.e");
  std::vector<std::pair<TokenKind, std::string>> want = {
      {TokenKind::keyword, "class"},      {TokenKind::boolean_literal, "True"},
      {TokenKind::keyword, "Current"},    {TokenKind::keyword, "Result"},
      {TokenKind::identifier, "make"},    {TokenKind::integer_literal, "42"},
      {TokenKind::op, ":="},              {TokenKind::op, "/="},
      {TokenKind::keyword, "end"}};
  REQUIRE(tokens.size() == want.size());
  for (size_t i = 0; i < want.size(); i++) {
    CHECK(tokens[i].kind == want[i].first);
    CHECK(tokens[i].text == want[i].second);
  }
  CHECK(tokens.back().line == 2);
}

TEST_CASE("lexer reports positions and rejects stray characters") {
  auto tokens = tokenize("a\n  b", "t.e");
  REQUIRE(tokens.size() == 2);
  CHECK(tokens[0].line == 1);
  CHECK(tokens[0].column == 1);
  CHECK(tokens[1].line == 2);
  CHECK(tokens[1].column == 3);
  CHECK_THROWS_AS(tokenize("a ? b", "t.e"), CompileError);
}

TEST_CASE("parser accepts the minimal class and records its shape") {
  auto classes = parse_one(kMinimal);
  REQUIRE(classes.size() == 1);
  CHECK(classes[0].name == "FOO");
  REQUIRE(classes[0].creation_procs.size() == 1);
  CHECK(classes[0].creation_procs[0] == "make");
  REQUIRE(classes[0].routines.size() == 1);
  CHECK(classes[0].routines[0].body.empty());
}

TEST_CASE("operator precedence binds multiplication before addition") {
  auto plain = parse_one(
      "class\n\tFOO\ncreate\n\tmake\nfeature\n\ta: INTEGER\n"
      "\tmake\n\t\tdo\n\t\t\ta := 1 + 2 * 3\n\t\tend\nend\n");
  auto parens = parse_one(
      "class\n\tFOO\ncreate\n\tmake\nfeature\n\ta: INTEGER\n"
      "\tmake\n\t\tdo\n\t\t\ta := 1 + (2 * 3)\n\t\tend\nend\n");
  auto other = parse_one(
      "class\n\tFOO\ncreate\n\tmake\nfeature\n\ta: INTEGER\n"
      "\tmake\n\t\tdo\n\t\t\ta := (1 + 2) * 3\n\t\tend\nend\n");
  CHECK(class_equal(plain[0], parens[0]));
  CHECK_FALSE(class_equal(plain[0], other[0]));
}

TEST_CASE("unary not binds tightest, then comparisons, then and, then or") {
  auto plain = parse_one(
      "class\n\tFOO\ncreate\n\tmake\nfeature\n\tb: BOOLEAN\n"
      "\tmake\n\t\tdo\n\t\t\tb := not b and 3 < 4 or b\n\t\tend\nend\n");
  auto parens = parse_one(
      "class\n\tFOO\ncreate\n\tmake\nfeature\n\tb: BOOLEAN\n"
      "\tmake\n\t\tdo\n\t\t\tb := ((not b) and (3 < 4)) or b\n\t\tend\nend\n");
  CHECK(class_equal(plain[0], parens[0]));
}

TEST_CASE("printing and reparsing reproduces the same AST") {
  std::vector<std::string> sources;
  for (const auto& bench : corpus::default_suite()) {
    auto files = corpus::instantiate(bench);
    for (auto& f : files) sources.push_back(f.text);
  }
  for (unsigned seed = 1; seed <= 10; seed++)
    sources.push_back(coopcheck::testing::generate_sequential_program(seed));

  for (const auto& text : sources) {
    auto classes = parse_one(text);
    for (const auto& cls : classes) {
      std::string printed = print_class(cls);
      auto again = parse_one(printed);
      REQUIRE(again.size() == 1);
      INFO(printed);
      CHECK(class_equal(cls, again[0]));
    }
  }
}

TEST_CASE("multi-name declaration groups expand in order") {
  auto classes = parse_one(
      "class\n\tFOO\ncreate\n\tmake\nfeature\n"
      "\tx, y, z: INTEGER\n"
      "\tmake (a, b: INTEGER; c: BOOLEAN)\n\t\tdo\n\t\tend\nend\n");
  REQUIRE(classes[0].attributes.size() == 3);
  CHECK(classes[0].attributes[0].name == "x");
  CHECK(classes[0].attributes[2].name == "z");
  REQUIRE(classes[0].routines[0].formals.size() == 3);
  CHECK(classes[0].routines[0].formals[0].name == "a");
  CHECK(classes[0].routines[0].formals[1].name == "b");
  CHECK(classes[0].routines[0].formals[2].type.is_boolean());
}

TEST_CASE("export markers are accepted and invariants are skipped with a warning") {
  ParseResult parsed = parse_program(
      {{"t.e",
        "class\n\tFOO\ncreate\n\tmake\nfeature {NONE} -- hidden\n"
        "\ta: INTEGER\n\tmake\n\t\tdo\n\t\tend\n"
        "invariant\n\tpositive: a >= 0\nend\n"}});
  REQUIRE(parsed.ok());
  bool warned = false;
  for (const auto& d : parsed.diagnostics)
    if (!d.is_error()) warned = true;
  CHECK(warned);
  CHECK(parsed.classes[0].attributes.size() == 1);
}

TEST_CASE("parse errors carry locations and do not abort later files") {
  ParseResult parsed = parse_program(
      {{"bad.e", "class\n\tA\ncreate\n\tmake\nfeature\n\tmake\n\t\tdo\n"},
       {"good.e", kMinimal}});
  CHECK_FALSE(parsed.ok());
  REQUIRE(parsed.classes.size() == 1);
  CHECK(parsed.classes[0].name == "FOO");
  bool located = false;
  for (const auto& d : parsed.diagnostics)
    if (d.is_error() && d.loc.file == "bad.e" && d.loc.line > 0) located = true;
  CHECK(located);
}

TEST_CASE("duplicate class names across files are an error") {
  ParseResult parsed =
      parse_program({{"a.e", kMinimal}, {"b.e", kMinimal}});
  CHECK_FALSE(parsed.ok());
}

TEST_CASE("empty input is an error") {
  CHECK_FALSE(parse_program({}).ok());
}
