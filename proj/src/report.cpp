#include "coopcheck/report.hpp"

namespace coopcheck {

namespace {

using nlohmann::ordered_json;

const ErrorClass kAllClasses[] = {
    ErrorClass::deadlock,          ErrorClass::wait_condition_deadlock,
    ErrorClass::precondition_fail, ErrorClass::postcondition_fail,
    ErrorClass::void_call,         ErrorClass::divide_by_zero,
    ErrorClass::int_overflow,      ErrorClass::internal_invariant,
};

ordered_json options_json(const RunSetup& setup) {
  ordered_json out;
  out["strategy"] = setup.strategy == Strategy::bfs ? "bfs" : "dfs";
  out["token"] = setup.token_mode;
  out["postconditions"] = setup.postconditions;
  out["bound"] = setup.bound ? ordered_json(*setup.bound) : ordered_json(nullptr);
  out["jobs"] = setup.jobs;
  return out;
}

ordered_json stats_json(const Stats& stats) {
  ordered_json out;
  out["states"] = stats.states;
  out["transitions"] = stats.transitions;
  out["peak_frontier"] = stats.peak_frontier;
  out["dedup_hits"] = stats.dedup_hits;
  out["bounded"] = stats.bounded;
  return out;
}

ordered_json trace_json(const Trace& trace) {
  ordered_json steps = ordered_json::array();
  for (size_t i = 0; i < trace.steps.size(); i++) {
    ordered_json step;
    step["step"] = i;
    step["rule"] = rule_name(trace.steps[i].rule);
    step["proc"] = trace.steps[i].pid;
    step["desc"] = trace.steps[i].desc;
    steps.push_back(std::move(step));
  }
  ordered_json out;
  out["length"] = trace.steps.size();
  out["verdict"] = verdict_name(trace.verdict);
  if (trace.error) {
    out["error_class"] = error_class_name(trace.error->cls);
    out["error_proc"] = trace.error->proc;
    if (!trace.error->tag.empty()) out["error_tag"] = trace.error->tag;
    out["error_detail"] = trace.error->detail;
  }
  out["steps"] = std::move(steps);
  return out;
}

ordered_json error_entry(ErrorClass cls, const std::string& status,
                         const Trace* trace) {
  ordered_json out;
  out["class"] = error_class_name(cls);
  out["status"] = status;
  if (trace) out["trace"] = trace_json(*trace);
  return out;
}

}  // namespace

ordered_json report_json(const RunSetup& setup, const ExploreResult& result) {
  ordered_json out;
  out["mode"] = "full";
  out["program"] = setup.program;
  out["root"] = setup.root;
  out["options"] = options_json(setup);
  out["stats"] = stats_json(result.stats);

  ordered_json verdicts;
  auto count = [&](VerdictKind v) {
    auto it = result.verdict_counts.find(v);
    return it == result.verdict_counts.end() ? 0LL : it->second;
  };
  verdicts["ok_idle"] = count(VerdictKind::ok_idle);
  verdicts["stuck"] = count(VerdictKind::stuck);
  verdicts["error"] = count(VerdictKind::error);
  out["terminals"] = std::move(verdicts);

  ordered_json errors = ordered_json::array();
  for (ErrorClass cls : kAllClasses) {
    auto it = result.error_traces.find(cls);
    if (it != result.error_traces.end()) {
      errors.push_back(error_entry(cls, "reachable", &it->second));
    } else {
      errors.push_back(error_entry(
          cls, result.stats.bounded ? "unknown" : "unreachable", nullptr));
    }
  }
  out["errors"] = std::move(errors);
  if (result.stuck_trace) out["stuck_trace"] = trace_json(*result.stuck_trace);
  return out;
}

ordered_json counterexample_json(const RunSetup& setup, const Stats& stats,
                                 const std::optional<Trace>& trace) {
  ordered_json out;
  out["mode"] = "counterexample";
  out["program"] = setup.program;
  out["root"] = setup.root;
  out["options"] = options_json(setup);
  out["stats"] = stats_json(stats);

  ordered_json errors = ordered_json::array();
  for (ErrorClass cls : setup.requested) {
    if (trace && trace->error && trace->error->cls == cls)
      errors.push_back(error_entry(cls, "reachable", &*trace));
    else
      errors.push_back(error_entry(
          cls, !trace && !stats.bounded ? "unreachable" : "unknown", nullptr));
  }
  out["errors"] = std::move(errors);
  return out;
}

std::string render_report(const ordered_json& report) {
  std::string out;
  auto line = [&](const std::string& s) { out += s + "\n"; };

  line("program: " + report["program"].get<std::string>() +
       "  root: " + report["root"].get<std::string>());
  const auto& opt = report["options"];
  std::string opts = "strategy " + opt["strategy"].get<std::string>();
  opts += opt["token"].get<bool>() ? ", token on" : ", token off";
  opts += opt["postconditions"].get<bool>() ? ", postconditions on"
                                            : ", postconditions off";
  if (!opt["bound"].is_null())
    opts += ", bound " + std::to_string(opt["bound"].get<long long>());
  line(opts);

  const auto& stats = report["stats"];
  bool bounded = stats["bounded"].get<bool>();
  bool search = report["mode"].get<std::string>() == "counterexample";
  line("states " + std::to_string(stats["states"].get<long long>()) +
       ", transitions " + std::to_string(stats["transitions"].get<long long>()) +
       (bounded   ? " (bounded, incomplete)"
        : search ? " (counterexample search)"
                 : " (full exploration)"));
  if (report.contains("terminals")) {
    const auto& t = report["terminals"];
    line("terminals: ok_idle " + std::to_string(t["ok_idle"].get<long long>()) +
         ", stuck " + std::to_string(t["stuck"].get<long long>()) + ", error " +
         std::to_string(t["error"].get<long long>()));
  }

  for (const auto& entry : report["errors"]) {
    std::string cls = entry["class"].get<std::string>();
    std::string status = entry["status"].get<std::string>();
    if (status == "reachable") {
      const auto& trace = entry["trace"];
      line(cls + ": REACHABLE (trace of " +
           std::to_string(trace["length"].get<long long>()) + " steps)");
      for (const auto& step : trace["steps"])
        line("  " + std::to_string(step["step"].get<long long>() + 1) + ". " +
             step["desc"].get<std::string>());
    } else if (status == "unreachable") {
      line(cls + ": UNREACHABLE (full exploration)");
    } else {
      line(cls + ": UNKNOWN (bounded at " +
           std::to_string(stats["states"].get<long long>()) + " states)");
    }
  }
  return out;
}

std::string trace_jsonl(const Trace& trace) {
  std::string out;
  for (size_t i = 0; i < trace.steps.size(); i++) {
    ordered_json step;
    step["step"] = i;
    step["rule"] = rule_name(trace.steps[i].rule);
    step["proc"] = trace.steps[i].pid;
    step["desc"] = trace.steps[i].desc;
    out += step.dump() + "\n";
  }
  return out;
}

}  // namespace coopcheck
