#include "coopcheck/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "coopcheck/report.hpp"

#ifndef COOPCHECK_CORPUS_DIR
#define COOPCHECK_CORPUS_DIR "corpus"
#endif

namespace coopcheck::corpus {

namespace {

struct BenchDesc {
  std::string dir;
  std::vector<std::string> param_keys;
  std::vector<std::string> variants;      // empty: benchmark has no variant
  std::vector<std::string> fixed_files;   // included in every instance
  std::map<std::string, std::string> variant_files;  // variant -> extra file
};

const std::map<std::string, BenchDesc>& bench_table() {
  static const std::map<std::string, BenchDesc> table = {
      {"DP",
       {"dp",
        {"N", "M"},
        {"eat", "bad_eat"},
        {"application.e", "philosopher.e", "fork.e"},
        {}}},
      {"DS",
       {"ds",
        {"SAVAGES", "CAPACITY", "HUNGER"},
        {"good", "bad"},
        {"application.e", "cook.e", "pot.e"},
        {{"good", "savage_good.e"}, {"bad", "savage_bad.e"}}}},
      {"CS",
       {"cs",
        {"ROUNDS"},
        {},
        {"application.e", "dealer.e", "ingredient_pair.e", "client.e"},
        {}}},
      {"SEPC",
       {"sepc",
        {"ITEMS"},
        {},
        {"application.e", "buffer.e", "producer.e", "consumer.e"},
        {}}},
      {"Counter",
       {"counter", {"COUNTERS", "LIMIT"}, {}, {"application.e", "counter.e"}, {}}},
      {"BS",
       {"bs",
        {"CUSTOMERS", "CHAIRS", "VISITS"},
        {},
        {"application.e", "shop.e", "barber.e", "customer.e"},
        {}}},
  };
  return table;
}

const BenchDesc& desc_for(const Benchmark& bench) {
  auto it = bench_table().find(bench.name);
  if (it == bench_table().end())
    throw std::invalid_argument("unknown benchmark '" + bench.name + "'");
  return it->second;
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

bool all_digits(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return std::isdigit(c) != 0;
  });
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read corpus file: " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

// Default values for keys that are not benchmark parameters.
std::map<std::string, std::string> template_keys(const Benchmark& bench) {
  const BenchDesc& d = desc_for(bench);
  std::map<std::string, std::string> keys;
  for (size_t i = 0; i < d.param_keys.size(); ++i)
    keys[d.param_keys[i]] = std::to_string(bench.params[i]);
  if (bench.name == "DP") {
    keys["EAT_CALL"] =
        bench.variant == "eat" ? "eat (left_fork, right_fork)" : "bad_eat";
    keys["ID_ARG"] = "i";
    keys["ID_ASSIGN"] = "philosopher";
  }
  return keys;
}

std::string substitute(const std::string& text,
                       const std::map<std::string, std::string>& keys,
                       const std::string& file) {
  std::string out;
  out.reserve(text.size());
  size_t pos = 0;
  while (true) {
    size_t open = text.find("{{", pos);
    if (open == std::string::npos) {
      out.append(text, pos, std::string::npos);
      break;
    }
    size_t close = text.find("}}", open + 2);
    if (close == std::string::npos)
      throw std::runtime_error(file + ": unterminated {{ placeholder");
    out.append(text, pos, open - pos);
    std::string key = text.substr(open + 2, close - open - 2);
    auto it = keys.find(key);
    if (it == keys.end())
      throw std::runtime_error(file + ": no value for placeholder {{" + key +
                               "}}");
    out += it->second;
    pos = close + 2;
  }
  return out;
}

std::vector<std::string> instance_files(const Benchmark& bench) {
  const BenchDesc& d = desc_for(bench);
  std::vector<std::string> files = d.fixed_files;
  if (auto it = d.variant_files.find(bench.variant); it != d.variant_files.end())
    files.push_back(it->second);
  return files;
}

std::vector<SourceFile> instantiate_with(
    const Benchmark& bench, const std::map<std::string, std::string>& keys) {
  const BenchDesc& d = desc_for(bench);
  std::string base = corpus_dir() + "/" + d.dir;
  std::vector<SourceFile> sources;
  for (const std::string& file : instance_files(bench)) {
    std::string name = d.dir + "/" + file;
    sources.push_back({name, substitute(read_file(base + "/" + file), keys, name)});
  }
  return sources;
}

std::optional<ModelProgram> compile_sources(const std::vector<SourceFile>& sources,
                                            std::vector<Diagnostic>* diags) {
  ParseResult parsed = parse_program(sources);
  if (diags)
    diags->insert(diags->end(), parsed.diagnostics.begin(),
                  parsed.diagnostics.end());
  if (!parsed.ok()) return std::nullopt;
  try {
    return lower_program(parsed.classes, benchmark_root());
  } catch (const CompileError& e) {
    if (diags) diags->push_back(e.diag());
    return std::nullopt;
  }
}

std::string classes_text(const std::set<ErrorClass>& classes) {
  if (classes.empty()) return "none";
  std::string out;
  for (ErrorClass c : classes) {
    if (!out.empty()) out += ", ";
    out += error_class_name(c);
  }
  return out;
}

std::set<ErrorClass> reachable_classes(const ExploreResult& r) {
  std::set<ErrorClass> out;
  for (const auto& [cls, trace] : r.error_traces) out.insert(cls);
  return out;
}

// The suite re-explores without token reductions only below this many token
// mode states; the unreduced space is one to two orders of magnitude larger.
constexpr long long kSoundnessStateCap = 4000;

}  // namespace

Benchmark parse_benchmark(const std::string& raw) {
  auto fail = [&](const std::string& why) -> void {
    throw std::invalid_argument("bad benchmark '" + raw + "': " + why);
  };
  std::string text = trim(raw);
  size_t lp = text.find('(');
  if (lp == std::string::npos || text.empty() || text.back() != ')')
    fail("expected NAME(arg, ...)");
  Benchmark bench;
  bench.name = trim(text.substr(0, lp));
  auto it = bench_table().find(bench.name);
  if (it == bench_table().end())
    fail("unknown name; expected one of DP, DS, CS, SEPC, Counter, BS");
  const BenchDesc& d = it->second;

  std::string args = text.substr(lp + 1, text.size() - lp - 2);
  std::vector<std::string> items;
  size_t pos = 0;
  while (pos <= args.size() && !args.empty()) {
    size_t comma = args.find(',', pos);
    std::string item =
        trim(comma == std::string::npos ? args.substr(pos)
                                        : args.substr(pos, comma - pos));
    if (item.empty()) fail("empty argument");
    items.push_back(item);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }

  for (size_t i = 0; i < items.size(); ++i) {
    if (all_digits(items[i])) {
      if (!bench.variant.empty()) fail("number after variant");
      long long v = 0;
      try {
        v = std::stoll(items[i]);
      } catch (const std::exception&) {
        fail("parameter out of range: " + items[i]);
      }
      if (v < 1) fail("parameters must be positive");
      bench.params.push_back(v);
    } else {
      if (!bench.variant.empty()) fail("more than one variant");
      bench.variant = items[i];
    }
  }

  if (bench.params.size() != d.param_keys.size())
    fail("expected " + std::to_string(d.param_keys.size()) +
         " numeric parameters");
  if (d.variants.empty()) {
    if (!bench.variant.empty()) fail("benchmark has no variants");
  } else {
    if (bench.variant.empty())
      fail("missing variant; one of: " + d.variants[0] + ", " + d.variants[1]);
    if (std::find(d.variants.begin(), d.variants.end(), bench.variant) ==
        d.variants.end())
      fail("unknown variant '" + bench.variant + "'");
  }
  return bench;
}

std::string benchmark_label(const Benchmark& bench) {
  std::string out = bench.name + "(";
  for (size_t i = 0; i < bench.params.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(bench.params[i]);
  }
  if (!bench.variant.empty()) {
    if (!bench.params.empty()) out += ",";
    out += bench.variant;
  }
  return out + ")";
}

std::string benchmark_root() { return "APPLICATION.make"; }

std::string corpus_dir() {
  if (const char* env = std::getenv("COOPCHECK_CORPUS_DIR"); env && *env)
    return env;
  return COOPCHECK_CORPUS_DIR;
}

std::vector<SourceFile> instantiate(const Benchmark& bench) {
  return instantiate_with(bench, template_keys(bench));
}

std::vector<SourceFile> instantiate_custom(
    const Benchmark& bench,
    const std::map<std::string, std::string>& overrides) {
  auto keys = template_keys(bench);
  for (const auto& [k, v] : overrides) keys[k] = v;
  return instantiate_with(bench, keys);
}

Expectation expected(const Benchmark& bench) {
  Expectation ex;
  if (bench.name == "DP") {
    if (bench.variant == "bad_eat" && bench.params[0] >= 2)
      ex.reachable.insert(ErrorClass::deadlock);
    ex.desk_scale = bench.params[0] <= 4 && bench.params[1] <= 2;
  } else if (bench.name == "DS") {
    if (bench.variant == "bad") ex.notes = "livelock undetected by design";
    ex.desk_scale = bench.params[0] <= 3 && bench.params[2] <= 3;
  } else if (bench.name == "CS") {
    ex.desk_scale = bench.params[0] <= 2;
  } else if (bench.name == "SEPC") {
    ex.desk_scale = bench.params[0] <= 6;
  } else if (bench.name == "Counter") {
    ex.desk_scale = bench.params[0] <= 3 && bench.params[1] <= 4;
  } else if (bench.name == "BS") {
    ex.desk_scale = bench.params[0] <= 3 && bench.params[2] <= 2;
  } else {
    throw std::invalid_argument("unknown benchmark '" + bench.name + "'");
  }
  return ex;
}

std::optional<ModelProgram> compile_benchmark(const Benchmark& bench,
                                              std::vector<Diagnostic>* diags) {
  return compile_sources(instantiate(bench), diags);
}

std::optional<ModelProgram> compile_benchmark_custom(
    const Benchmark& bench, const std::map<std::string, std::string>& overrides,
    std::vector<Diagnostic>* diags) {
  return compile_sources(instantiate_custom(bench, overrides), diags);
}

std::vector<Benchmark> default_suite() {
  static const char* const specs[] = {
      "DP(2,1,eat)",     "DP(3,1,eat)",     "DP(3,2,eat)", "DP(4,1,eat)",
      "DP(2,1,bad_eat)", "DP(3,1,bad_eat)", "DS(2,2,2,good)",
      "DS(2,2,2,bad)",   "DS(1,2,1,bad)",   "CS(1)",       "SEPC(5)",
      "Counter(2,2)",    "BS(2,1,1)",
  };
  std::vector<Benchmark> out;
  for (const char* s : specs) out.push_back(parse_benchmark(s));
  return out;
}

SuiteResult run_suite(const std::vector<Benchmark>& selection,
                      const SuiteOptions& options) {
  SuiteResult result;
  for (const Benchmark& bench : selection) {
    SuiteEntry entry;
    entry.label = benchmark_label(bench);
    try {
      std::vector<Diagnostic> diags;
      auto program = compile_benchmark(bench, &diags);
      if (!program) {
        entry.detail = diags.empty() ? "compilation failed"
                                     : diags.front().render();
        result.entries.push_back(entry);
        continue;
      }
      // Self-check: generated sources must be diagnostic-free, warnings too.
      if (!diags.empty()) {
        entry.detail = "unexpected diagnostic: " + diags.front().render();
        result.entries.push_back(entry);
        continue;
      }

      Expectation want = expected(bench);
      ExploreOptions xo;
      xo.jobs = options.jobs;
      Engine engine(*program, EngineOptions{});
      ExploreResult run = explore(engine, xo);
      entry.states = run.stats.states;
      entry.wall_seconds = run.stats.wall_seconds;

      std::set<ErrorClass> got = reachable_classes(run);
      if (got != want.reachable) {
        entry.detail = "reachable errors: got {" + classes_text(got) +
                       "}, want {" + classes_text(want.reachable) + "}";
        result.entries.push_back(entry);
        continue;
      }
      long long stuck = 0;
      if (auto it = run.verdict_counts.find(VerdictKind::stuck);
          it != run.verdict_counts.end())
        stuck = it->second;
      if (want.reachable.empty() && stuck > 0) {
        entry.detail = "unexpected stuck states: " + std::to_string(stuck);
        result.entries.push_back(entry);
        continue;
      }

      RunSetup setup;
      setup.program = entry.label;
      setup.root = benchmark_root();
      setup.jobs = options.jobs;
      if (options.determinism) {
        ExploreResult again = explore(engine, xo);
        if (report_json(setup, run).dump() != report_json(setup, again).dump()) {
          entry.detail = "two identical runs produced different reports";
          result.entries.push_back(entry);
          continue;
        }
      }

      if (options.token_soundness && entry.states <= kSoundnessStateCap) {
        EngineOptions plain;
        plain.token_mode = false;
        Engine unreduced(*program, plain);
        ExploreResult full = explore(unreduced, xo);
        entry.states_no_token = full.stats.states;
        if (reachable_classes(full) != got) {
          entry.detail = "token mode changes reachable errors";
          result.entries.push_back(entry);
          continue;
        }
        std::set<VerdictKind> kinds_on, kinds_off;
        for (const auto& [k, n] : run.verdict_counts)
          if (n > 0) kinds_on.insert(k);
        for (const auto& [k, n] : full.verdict_counts)
          if (n > 0) kinds_off.insert(k);
        if (kinds_on != kinds_off) {
          entry.detail = "token mode changes terminal verdict kinds";
          result.entries.push_back(entry);
          continue;
        }
        if (run.stats.states > full.stats.states) {
          entry.detail = "token mode explored more states than unreduced run";
          result.entries.push_back(entry);
          continue;
        }
      }

      entry.passed = true;
      std::ostringstream stats_line;
      stats_line << entry.states << " states";
      if (entry.states_no_token > 0)
        stats_line << " (" << entry.states_no_token << " without token)";
      entry.detail = stats_line.str();
    } catch (const std::exception& e) {
      entry.passed = false;
      entry.detail = e.what();
    }
    result.entries.push_back(entry);
  }
  return result;
}

}  // namespace coopcheck::corpus
