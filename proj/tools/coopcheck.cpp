#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "coopcheck/corpus.hpp"
#include "coopcheck/report.hpp"

namespace fs = std::filesystem;
using namespace coopcheck;

namespace {

// Exit codes shared by verify and corpus: 0 nothing reachable (full
// exploration), 1 requested error reachable, 2 inconclusive (bounded), 3
// input or translation error.
constexpr int kExitClean = 0;
constexpr int kExitReachable = 1;
constexpr int kExitInconclusive = 2;
constexpr int kExitInputError = 3;

struct VerifyArgs {
  std::vector<std::string> paths;
  std::string root = "APPLICATION.make";
  std::vector<std::string> checks;
  std::string strategy = "bfs";
  long long bound = 0;  // 0: unbounded
  bool no_token = false;
  bool no_postconditions = false;
  std::string mode = "full";
  std::string report_path;
  std::string trace_path;
  std::string model_path;
  int jobs = 1;
};

void add_verify_flags(CLI::App* cmd, VerifyArgs& args) {
  cmd->add_option("--root", args.root,
                  "Root creation procedure, CLASS.procedure")
      ->capture_default_str();
  cmd->add_option("--check", args.checks,
                  "Error classes to check for (repeatable); default: all")
      ->check(CLI::IsMember({"deadlock", "void-call", "precondition",
                             "postcondition", "divide-by-zero"}));
  cmd->add_option("--strategy", args.strategy, "Exploration order")
      ->check(CLI::IsMember({"bfs", "dfs"}))
      ->capture_default_str();
  cmd->add_option("--bound", args.bound, "Stop after this many states")
      ->check(CLI::PositiveNumber);
  cmd->add_flag("--no-token-opt", args.no_token,
                "Disable the token reduction (full interleaving)");
  cmd->add_flag("--no-postconditions", args.no_postconditions,
                "Skip postcondition checks");
  cmd->add_option("--mode", args.mode,
                  "full: explore everything; counterexample: stop at the "
                  "first requested error")
      ->check(CLI::IsMember({"full", "counterexample"}))
      ->capture_default_str();
  cmd->add_option("--report", args.report_path, "Write the JSON report here");
  cmd->add_option("--trace", args.trace_path,
                  "Write the counterexample trace here (JSON lines)");
  cmd->add_option("--emit-model", args.model_path,
                  "Write the lowered control-flow model here");
  cmd->add_option("--jobs", args.jobs, "Exploration worker threads")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
}

std::set<ErrorClass> requested_classes(const std::vector<std::string>& checks) {
  if (checks.empty())
    return {ErrorClass::deadlock,        ErrorClass::wait_condition_deadlock,
            ErrorClass::precondition_fail, ErrorClass::postcondition_fail,
            ErrorClass::void_call,       ErrorClass::divide_by_zero,
            ErrorClass::int_overflow,    ErrorClass::internal_invariant};
  std::set<ErrorClass> out;
  for (const std::string& c : checks) {
    if (c == "deadlock") {
      out.insert(ErrorClass::deadlock);
      out.insert(ErrorClass::wait_condition_deadlock);
    } else if (c == "void-call") {
      out.insert(ErrorClass::void_call);
    } else if (c == "precondition") {
      out.insert(ErrorClass::precondition_fail);
    } else if (c == "postcondition") {
      out.insert(ErrorClass::postcondition_fail);
    } else if (c == "divide-by-zero") {
      out.insert(ErrorClass::divide_by_zero);
      out.insert(ErrorClass::int_overflow);
    }
  }
  return out;
}

bool write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
  return static_cast<bool>(out);
}

// Files given directly are taken as they are; directories contribute their
// *.e entries in name order.
std::optional<std::vector<SourceFile>> collect_sources(
    const std::vector<std::string>& paths) {
  std::vector<SourceFile> sources;
  for (const std::string& p : paths) {
    std::error_code ec;
    std::vector<fs::path> files;
    if (fs::is_directory(p, ec)) {
      for (const auto& entry : fs::directory_iterator(p, ec))
        if (entry.is_regular_file() && entry.path().extension() == ".e")
          files.push_back(entry.path());
      std::sort(files.begin(), files.end());
      if (files.empty()) {
        std::cerr << "coopcheck: no .e files in " << p << "\n";
        return std::nullopt;
      }
    } else {
      files.push_back(p);
    }
    for (const fs::path& f : files) {
      std::ifstream in(f, std::ios::binary);
      if (!in) {
        std::cerr << "coopcheck: cannot read " << f.string() << "\n";
        return std::nullopt;
      }
      std::ostringstream text;
      text << in.rdbuf();
      sources.push_back({f.string(), text.str()});
    }
  }
  return sources;
}

int model_states(const ModelProgram& program) {
  int n = 0;
  for (const auto& f : program.features) n += static_cast<int>(f.states.size());
  return n;
}

int model_actions(const ModelProgram& program) {
  int n = 0;
  for (const auto& f : program.features)
    for (const auto& s : f.states) n += static_cast<int>(s.out_actions.size());
  return n;
}

// Shared back half of verify and corpus: lower, explore, report.
int run_verification(const VerifyArgs& args, const std::string& label,
                     std::vector<ClassAst> classes) {
  ModelProgram program;
  try {
    program = lower_program(classes, args.root);
  } catch (const CompileError& e) {
    std::cerr << "coopcheck: " << e.what() << "\n";
    return kExitInputError;
  }

  if (!args.model_path.empty() &&
      !write_file(args.model_path, dump_model(program))) {
    std::cerr << "coopcheck: cannot write " << args.model_path << "\n";
    return kExitInputError;
  }

  EngineOptions eo;
  eo.token_mode = !args.no_token;
  eo.postconditions = !args.no_postconditions;
  Engine engine(program, eo);

  ExploreOptions xo;
  xo.strategy = args.strategy == "dfs" ? Strategy::dfs : Strategy::bfs;
  if (args.bound > 0) xo.bound = args.bound;
  xo.jobs = args.jobs;

  std::set<ErrorClass> requested = requested_classes(args.checks);
  RunSetup setup;
  setup.program = label;
  setup.root = args.root;
  setup.strategy = xo.strategy;
  setup.token_mode = eo.token_mode;
  setup.postconditions = eo.postconditions;
  setup.bound = xo.bound;
  setup.jobs = xo.jobs;
  setup.requested.assign(requested.begin(), requested.end());

  std::cout << "model: " << program.templates.size() << " templates, "
            << model_states(program) << " states, " << model_actions(program)
            << " actions\n";

  nlohmann::ordered_json report;
  std::optional<Trace> trace;
  bool reachable = false;
  bool bounded = false;
  double wall = 0;

  if (args.mode == "counterexample") {
    Stats stats;
    trace = find_counterexample(engine, requested, xo, &stats);
    report = counterexample_json(setup, stats, trace);
    reachable = trace.has_value();
    bounded = stats.bounded;
    wall = stats.wall_seconds;
  } else {
    ExploreResult result = explore(engine, xo);
    report = report_json(setup, result);
    for (const auto& [cls, t] : result.error_traces)
      if (requested.count(cls)) {
        if (!trace) trace = t;
        reachable = true;
      }
    bounded = result.stats.bounded;
    wall = result.stats.wall_seconds;
  }

  std::cout << render_report(report);
  std::cout << "wall time: " << wall << " s\n";

  if (!args.report_path.empty()) {
    if (!write_file(args.report_path, report.dump(2) + "\n")) {
      std::cerr << "coopcheck: cannot write " << args.report_path << "\n";
      return kExitInputError;
    }
    std::cout << "report written: " << args.report_path << "\n";
  }
  if (!args.trace_path.empty()) {
    if (trace) {
      if (!write_file(args.trace_path, trace_jsonl(*trace))) {
        std::cerr << "coopcheck: cannot write " << args.trace_path << "\n";
        return kExitInputError;
      }
      std::cout << "trace written: " << args.trace_path << "\n";
    } else {
      std::cout << "no trace written (no requested error reachable)\n";
    }
  }

  if (reachable) return kExitReachable;
  return bounded ? kExitInconclusive : kExitClean;
}

int cmd_verify(const VerifyArgs& args) {
  auto sources = collect_sources(args.paths);
  if (!sources) return kExitInputError;

  for (const auto& s : *sources)
    if (s.text.find("{{") != std::string::npos) {
      std::cerr << "coopcheck: " << s.name
                << " contains {{...}} placeholders; this is a corpus "
                   "template, try `coopcheck corpus`\n";
      return kExitInputError;
    }

  ParseResult parsed = parse_program(*sources);
  for (const auto& d : parsed.diagnostics) std::cerr << d.render() << "\n";
  if (!parsed.ok()) return kExitInputError;

  std::string label;
  for (const auto& p : args.paths) {
    if (!label.empty()) label += " ";
    label += p;
  }
  return run_verification(args, label, std::move(parsed.classes));
}

int cmd_corpus(const VerifyArgs& args, const std::string& spec,
               const std::string& emit_dir) {
  corpus::Benchmark bench;
  std::vector<SourceFile> sources;
  try {
    bench = corpus::parse_benchmark(spec);
    sources = corpus::instantiate(bench);
  } catch (const std::exception& e) {
    std::cerr << "coopcheck: " << e.what() << "\n";
    return kExitInputError;
  }

  if (!emit_dir.empty()) {
    std::error_code ec;
    fs::create_directories(emit_dir, ec);
    for (const auto& s : sources) {
      fs::path out = fs::path(emit_dir) / fs::path(s.name).filename();
      if (!write_file(out.string(), s.text)) {
        std::cerr << "coopcheck: cannot write " << out.string() << "\n";
        return kExitInputError;
      }
    }
    std::cout << "sources written: " << emit_dir << "\n";
  }

  ParseResult parsed = parse_program(sources);
  for (const auto& d : parsed.diagnostics) std::cerr << d.render() << "\n";
  if (!parsed.ok()) return kExitInputError;

  return run_verification(args, corpus::benchmark_label(bench),
                          std::move(parsed.classes));
}

int cmd_suite(const std::vector<std::string>& specs, int jobs) {
  std::vector<corpus::Benchmark> selection;
  try {
    if (specs.empty()) {
      selection = corpus::default_suite();
    } else {
      for (const std::string& s : specs)
        selection.push_back(corpus::parse_benchmark(s));
    }
  } catch (const std::exception& e) {
    std::cerr << "coopcheck: " << e.what() << "\n";
    return kExitInputError;
  }

  corpus::SuiteOptions options;
  options.jobs = jobs;
  corpus::SuiteResult result = corpus::run_suite(selection, options);
  for (const auto& e : result.entries)
    std::cout << (e.passed ? "PASS" : "FAIL") << "  " << e.label << "  "
              << e.detail << "\n";
  std::cout << (result.all_passed() ? "suite: all passed"
                                    : "suite: FAILURES")
            << " (" << result.entries.size() << " benchmarks)\n";
  return result.all_passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"coopcheck: exhaustive verifier for a SCOOP subset"};
  app.require_subcommand(1);

  VerifyArgs verify_args;
  CLI::App* verify = app.add_subcommand(
      "verify", "Verify SCOOP sources (files or directories of .e files)");
  verify->add_option("paths", verify_args.paths, "Input files or directories")
      ->required();
  add_verify_flags(verify, verify_args);

  VerifyArgs corpus_args;
  std::string corpus_spec;
  std::string emit_dir;
  CLI::App* corpus_cmd = app.add_subcommand(
      "corpus", "Instantiate and verify a benchmark, e.g. DP(2,1,bad_eat)");
  corpus_cmd->add_option("benchmark", corpus_spec, "Benchmark instance spec")
      ->required();
  corpus_cmd->add_option("--emit-sources", emit_dir,
                         "Also write the substituted sources here");
  add_verify_flags(corpus_cmd, corpus_args);

  std::vector<std::string> suite_specs;
  int suite_jobs = 1;
  CLI::App* suite = app.add_subcommand(
      "suite", "Run the regression suite over benchmark instances");
  suite->add_option("benchmarks", suite_specs,
                    "Instances to run; default: the full desk-scale suite");
  suite->add_option("--jobs", suite_jobs, "Exploration worker threads")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitInputError;
  }

  try {
    if (verify->parsed()) return cmd_verify(verify_args);
    if (corpus_cmd->parsed()) return cmd_corpus(corpus_args, corpus_spec, emit_dir);
    return cmd_suite(suite_specs, suite_jobs);
  } catch (const std::exception& e) {
    std::cerr << "coopcheck: " << e.what() << "\n";
    return kExitInputError;
  }
}
