#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>

#include "coopcheck/corpus.hpp"

using namespace coopcheck;
using namespace coopcheck::corpus;

TEST_CASE("benchmark specs parse into name, parameters and variant") {
  Benchmark dp = parse_benchmark("DP(3,2,bad_eat)");
  CHECK(dp.name == "DP");
  CHECK(dp.params == std::vector<long long>{3, 2});
  CHECK(dp.variant == "bad_eat");

  Benchmark ds = parse_benchmark(" DS ( 2 , 2 , 2 , good ) ");
  CHECK(ds.name == "DS");
  CHECK(ds.params == std::vector<long long>{2, 2, 2});
  CHECK(ds.variant == "good");

  Benchmark cs = parse_benchmark("CS(4)");
  CHECK(cs.name == "CS");
  CHECK(cs.params == std::vector<long long>{4});
  CHECK(cs.variant.empty());

  CHECK(parse_benchmark("SEPC(5)").params == std::vector<long long>{5});
  CHECK(parse_benchmark("Counter(2,3)").params == std::vector<long long>{2, 3});
  CHECK(parse_benchmark("BS(2,1,1)").params == std::vector<long long>{2, 1, 1});
}

TEST_CASE("malformed benchmark specs are rejected") {
  for (const char* bad :
       {"", "DP", "DP(", "DP)", "XX(1)", "DP(2,1)", "DP(2,1,eat,extra)",
        "DP(0,1,eat)", "DP(2,1,nope)", "CS(1,good)", "CS()", "DP(2,,eat)",
        "DP(eat,2,1)", "DP(99999999999999999999,1,eat)"}) {
    INFO(bad);
    CHECK_THROWS_AS(parse_benchmark(bad), std::invalid_argument);
  }
}

TEST_CASE("labels round-trip through the parser") {
  for (const Benchmark& bench : default_suite()) {
    Benchmark again = parse_benchmark(benchmark_label(bench));
    CHECK(again.name == bench.name);
    CHECK(again.params == bench.params);
    CHECK(again.variant == bench.variant);
  }
  CHECK(benchmark_label(parse_benchmark("DP(2,1,eat)")) == "DP(2,1,eat)");
  CHECK(benchmark_label(parse_benchmark("CS(1)")) == "CS(1)");
}

TEST_CASE("instantiation substitutes every placeholder") {
  for (const Benchmark& bench : default_suite()) {
    auto files = instantiate(bench);
    REQUIRE_FALSE(files.empty());
    for (const auto& f : files) {
      INFO(benchmark_label(bench), " ", f.name);
      CHECK(f.text.find("{{") == std::string::npos);
      CHECK_FALSE(f.text.empty());
    }
  }
}

TEST_CASE("variants select different sources or call sites") {
  auto good = instantiate(parse_benchmark("DS(2,2,2,good)"));
  auto bad = instantiate(parse_benchmark("DS(2,2,2,bad)"));
  auto file_names = [](const std::vector<SourceFile>& files) {
    std::set<std::string> names;
    for (const auto& f : files) names.insert(f.name);
    return names;
  };
  CHECK(file_names(good).count("ds/savage_good.e") == 1);
  CHECK(file_names(bad).count("ds/savage_bad.e") == 1);

  auto eat = instantiate(parse_benchmark("DP(2,1,eat)"));
  auto bad_eat = instantiate(parse_benchmark("DP(2,1,bad_eat)"));
  auto philosopher_text = [](const std::vector<SourceFile>& files) {
    for (const auto& f : files)
      if (f.name == "dp/philosopher.e") return f.text;
    return std::string();
  };
  CHECK(philosopher_text(eat).find("eat (left_fork, right_fork)") !=
        std::string::npos);
  CHECK(philosopher_text(bad_eat).find("bad_eat") != std::string::npos);
}

TEST_CASE("custom overrides rewrite single template keys") {
  Benchmark bench = parse_benchmark("DP(2,1,eat)");
  auto files = instantiate_custom(bench, {{"ID_ARG", "0"}});
  bool found = false;
  for (const auto& f : files)
    if (f.name == "dp/application.e" && f.text.find("make (0,") != std::string::npos)
      found = true;
  CHECK(found);
}

TEST_CASE("the corpus directory honors the environment override") {
  std::string baked = corpus_dir();
  CHECK_FALSE(baked.empty());
  ::setenv("COOPCHECK_CORPUS_DIR", "/nonexistent/corpus", 1);
  CHECK(corpus_dir() == "/nonexistent/corpus");
  CHECK_THROWS_AS(instantiate(parse_benchmark("CS(1)")), std::runtime_error);
  ::unsetenv("COOPCHECK_CORPUS_DIR");
  CHECK(corpus_dir() == baked);
}

TEST_CASE("every default suite instance compiles without diagnostics") {
  for (const Benchmark& bench : default_suite()) {
    std::vector<Diagnostic> diags;
    auto prog = compile_benchmark(bench, &diags);
    INFO(benchmark_label(bench));
    for (const auto& d : diags) INFO(d.render());
    REQUIRE(prog.has_value());
    CHECK(diags.empty());
    CHECK(prog->root_class >= 0);
    CHECK(prog->root_feature >= 0);
  }
}

TEST_CASE("expectations list reachable error classes per instance") {
  CHECK(expected(parse_benchmark("DP(2,1,eat)")).reachable.empty());
  CHECK(expected(parse_benchmark("DP(3,2,eat)")).reachable.empty());

  auto bad = expected(parse_benchmark("DP(2,1,bad_eat)"));
  CHECK(bad.reachable == std::set<ErrorClass>{ErrorClass::deadlock});

  auto ds_bad = expected(parse_benchmark("DS(2,2,2,bad)"));
  CHECK(ds_bad.reachable.empty());
  CHECK(ds_bad.notes.find("livelock") != std::string::npos);

  CHECK(expected(parse_benchmark("SEPC(5)")).reachable.empty());
  CHECK(expected(parse_benchmark("CS(1)")).desk_scale);
  CHECK_FALSE(expected(parse_benchmark("CS(50)")).desk_scale);
}

TEST_CASE("the default suite is desk scale throughout") {
  auto suite = default_suite();
  REQUIRE_FALSE(suite.empty());
  for (const Benchmark& bench : suite) {
    INFO(benchmark_label(bench));
    CHECK(expected(bench).desk_scale);
  }
}

TEST_CASE("run_suite verifies small instances end to end") {
  std::vector<Benchmark> selection = {parse_benchmark("DS(1,2,1,bad)"),
                                      parse_benchmark("Counter(2,2)")};
  SuiteResult result = run_suite(selection);
  REQUIRE(result.entries.size() == 2);
  for (const auto& entry : result.entries) {
    INFO(entry.label, ": ", entry.detail);
    CHECK(entry.passed);
    CHECK(entry.states > 0);
    CHECK(entry.states_no_token >= entry.states);
    CHECK(entry.detail.find("states") != std::string::npos);
  }
  CHECK(result.entries[0].label == "DS(1,2,1,bad)");
  CHECK(result.entries[1].label == "Counter(2,2)");
  CHECK(result.all_passed());
}

TEST_CASE("an empty selection passes vacuously") {
  SuiteResult result = run_suite({});
  CHECK(result.entries.empty());
  CHECK(result.all_passed());
}
