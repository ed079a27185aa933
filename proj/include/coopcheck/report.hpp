#pragma once

#include <json.hpp>

#include "coopcheck/explorer.hpp"

namespace coopcheck {

// Echo of the verification run setup, carried into reports.
struct RunSetup {
  std::string program;  // label: benchmark spec or input file list
  std::string root;     // CLASS.feature
  Strategy strategy = Strategy::bfs;
  bool token_mode = true;
  bool postconditions = true;
  std::optional<long long> bound;
  int jobs = 1;
  std::vector<ErrorClass> requested;  // error classes the caller asked about
};

// Full-exploration report. Field names and key order are stable; wall time
// is deliberately absent so identical runs produce identical bytes.
nlohmann::ordered_json report_json(const RunSetup& setup,
                                   const ExploreResult& result);

// Counterexample-search report for the same schema, with partial stats.
nlohmann::ordered_json counterexample_json(const RunSetup& setup,
                                           const Stats& stats,
                                           const std::optional<Trace>& trace);

// Human-readable rendering of either report form.
std::string render_report(const nlohmann::ordered_json& report);

// One JSON object per line: {"step": n, "rule": id, "proc": pid, "desc": text}.
std::string trace_jsonl(const Trace& trace);

}  // namespace coopcheck
