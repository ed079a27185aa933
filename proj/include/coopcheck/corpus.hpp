#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "coopcheck/explorer.hpp"
#include "coopcheck/lowering.hpp"
#include "coopcheck/parser.hpp"

namespace coopcheck::corpus {

struct Benchmark {
  std::string name;  // DP, DS, CS, SEPC, Counter, BS
  std::vector<long long> params;
  std::string variant;  // empty when the benchmark has none
};

// Parses "DP(3,1,bad_eat)", "DS(2,2,2,good)", "CS(1)" and friends. Throws
// std::invalid_argument on unknown names, wrong parameter counts, values < 1,
// or invalid variants.
Benchmark parse_benchmark(const std::string& text);

std::string benchmark_label(const Benchmark& bench);

// Every benchmark starts at APPLICATION.make.
std::string benchmark_root();

// Where the template sources live: $COOPCHECK_CORPUS_DIR when set, otherwise
// the directory baked in at build time.
std::string corpus_dir();

// Substituted sources for one instance, ready for parse_program. Throws
// std::runtime_error when a template file is missing or a placeholder is left
// over after substitution.
std::vector<SourceFile> instantiate(const Benchmark& bench);

// Same, with individual template keys overridden. Tests use this to plant
// contract violations without touching the sources.
std::vector<SourceFile> instantiate_custom(
    const Benchmark& bench,
    const std::map<std::string, std::string>& overrides);

// What full exploration is expected to report.
struct Expectation {
  std::set<ErrorClass> reachable;
  bool desk_scale = true;  // exhaustively explorable in a test run
  std::string notes;
};

Expectation expected(const Benchmark& bench);

// instantiate + parse + lower in one step. Returns nullopt on any diagnostic
// error; the diagnostics land in `diags` when given.
std::optional<ModelProgram> compile_benchmark(
    const Benchmark& bench, std::vector<Diagnostic>* diags = nullptr);
std::optional<ModelProgram> compile_benchmark_custom(
    const Benchmark& bench,
    const std::map<std::string, std::string>& overrides,
    std::vector<Diagnostic>* diags = nullptr);

struct SuiteOptions {
  bool determinism = true;      // explore twice, require identical results
  bool token_soundness = true;  // re-run without token reductions, compare
  int jobs = 1;
};

struct SuiteEntry {
  std::string label;
  bool passed = false;
  std::string detail;  // failure reason, or a short stats line on success
  long long states = 0;
  long long states_no_token = 0;  // 0 when the soundness run was skipped
  double wall_seconds = 0;
};

struct SuiteResult {
  std::vector<SuiteEntry> entries;

  bool all_passed() const {
    for (const auto& e : entries)
      if (!e.passed) return false;
    return true;
  }
};

// All desk-scale instances exercised by CI.
std::vector<Benchmark> default_suite();

// Instantiates, compiles and explores each selection entry, comparing the set
// of reachable error classes against expected(). Per-benchmark failures are
// collected in the result, never thrown.
SuiteResult run_suite(const std::vector<Benchmark>& selection,
                      const SuiteOptions& options = {});

}  // namespace coopcheck::corpus
