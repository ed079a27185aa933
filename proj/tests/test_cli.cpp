#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int code = -1;
  std::string output;  // stdout and stderr combined
};

// Runs the installed binary with the given arguments in a shell.
RunResult run_cli(const std::string& args) {
  static int counter = 0;
  fs::path capture =
      fs::temp_directory_path() / ("coopcheck_cli_" + std::to_string(counter++));
  std::string cmd =
      std::string(COOPCHECK_BIN) + " " + args + " > " + capture.string() + " 2>&1";
  int raw = std::system(cmd.c_str());
  RunResult result;
  result.code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  std::ifstream in(capture);
  std::stringstream buf;
  buf << in.rdbuf();
  result.output = buf.str();
  fs::remove(capture);
  return result;
}

// Scratch directory that lives for one test case.
struct Scratch {
  fs::path dir;
  Scratch() {
    std::string tmpl =
        (fs::temp_directory_path() / "coopcheck_testXXXXXX").string();
    dir = mkdtemp(tmpl.data());
  }
  ~Scratch() { fs::remove_all(dir); }

  fs::path write(const std::string& name, const std::string& text) const {
    fs::path p = dir / name;
    std::ofstream(p) << text;
    return p;
  }
  std::string read(const fs::path& p) const {
    std::ifstream in(p);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
  }
};

const char* kQuiet =
    "class\n\tAPPLICATION\ncreate\n\tmake\nfeature\n\tn: INTEGER\n"
    "\tmake\n\t\tdo\n\t\t\tn := 2 + 3\n\t\tend\nend\n";

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

}  // namespace

TEST_CASE("--help exits cleanly and lists the subcommands") {
  RunResult r = run_cli("--help");
  CHECK(r.code == 0);
  CHECK(r.output.find("verify") != std::string::npos);
  CHECK(r.output.find("corpus") != std::string::npos);
  CHECK(r.output.find("suite") != std::string::npos);
}

TEST_CASE("a clean program verifies with exit 0") {
  Scratch tmp;
  fs::path src = tmp.write("app.e", kQuiet);
  RunResult r = run_cli("verify " + src.string());
  CHECK(r.code == 0);
  CHECK(r.output.find("full exploration") != std::string::npos);
  CHECK(r.output.find("wall time:") != std::string::npos);
}

TEST_CASE("a reachable deadlock exits 1 and prints the trace") {
  Scratch tmp;
  fs::path src = tmp.write("forks.e", kCrossedForks);
  RunResult r = run_cli("verify " + src.string());
  CHECK(r.code == 1);
  CHECK(r.output.find("deadlock: REACHABLE") != std::string::npos);
}

TEST_CASE("a state bound makes the verdict inconclusive") {
  Scratch tmp;
  fs::path src = tmp.write("forks.e", kCrossedForks);
  RunResult r = run_cli("verify --bound 3 " + src.string());
  CHECK(r.code == 2);
  CHECK(r.output.find("bounded, incomplete") != std::string::npos);
}

TEST_CASE("only requested error classes drive the exit code") {
  Scratch tmp;
  fs::path src = tmp.write("forks.e", kCrossedForks);
  RunResult deadlock = run_cli("verify --check deadlock " + src.string());
  CHECK(deadlock.code == 1);
  RunResult precondition =
      run_cli("verify --check precondition " + src.string());
  CHECK(precondition.code == 0);
}

TEST_CASE("input problems exit 3") {
  CHECK(run_cli("verify /nonexistent/missing.e").code == 3);
  CHECK(run_cli("corpus \"DP(9)\"").code == 3);
  CHECK(run_cli("verify --no-such-flag x.e").code == 3);
  CHECK(run_cli("corpus \"XX(1)\"").code == 3);

  Scratch tmp;
  fs::path bad = tmp.write("bad.e", "class\n\tFOO\nfeature oops");
  CHECK(run_cli("verify " + bad.string()).code == 3);
}

TEST_CASE("verifying a raw template points at the corpus subcommand") {
  Scratch tmp;
  fs::path src = tmp.write("tpl.e",
                           "class\n\tAPPLICATION\ncreate\n\tmake\nfeature\n"
                           "\tn: INTEGER\n\tmake\n\t\tdo\n"
                           "\t\t\tn := {{N}}\n\t\tend\nend\n");
  RunResult r = run_cli("verify " + src.string());
  CHECK(r.code == 3);
  CHECK(r.output.find("corpus template") != std::string::npos);
}

TEST_CASE("report, trace and model files land on disk") {
  Scratch tmp;
  fs::path src = tmp.write("forks.e", kCrossedForks);
  fs::path report = tmp.dir / "report.json";
  fs::path trace = tmp.dir / "trace.jsonl";
  fs::path model = tmp.dir / "model.txt";

  RunResult r = run_cli("verify --report " + report.string() + " --trace " +
                        trace.string() + " --emit-model " + model.string() +
                        " " + src.string());
  CHECK(r.code == 1);
  REQUIRE(fs::exists(report));
  REQUIRE(fs::exists(trace));
  REQUIRE(fs::exists(model));

  auto parsed = nlohmann::json::parse(tmp.read(report));
  CHECK(parsed["mode"] == "full");
  CHECK(parsed["errors"][0]["class"] == "deadlock");
  CHECK(parsed["errors"][0]["status"] == "reachable");

  std::istringstream lines(tmp.read(trace));
  std::string line;
  int steps = 0;
  while (std::getline(lines, line)) {
    auto obj = nlohmann::json::parse(line);
    CHECK(obj["step"] == steps);
    steps++;
  }
  CHECK(steps > 0);

  CHECK(tmp.read(model).rfind("class ", 0) == 0);
}

TEST_CASE("counterexample mode stops at the first hit") {
  Scratch tmp;
  fs::path src = tmp.write("forks.e", kCrossedForks);
  RunResult r = run_cli("verify --mode counterexample " + src.string());
  CHECK(r.code == 1);
  CHECK(r.output.find("counterexample search") != std::string::npos);
}

TEST_CASE("corpus instances verify straight from their spec") {
  RunResult clean = run_cli("corpus \"DP(2,1,eat)\"");
  CHECK(clean.code == 0);
  CHECK(clean.output.find("DP(2,1,eat)") != std::string::npos);

  RunResult deadlocked = run_cli("corpus \"DP(2,1,bad_eat)\" --check deadlock");
  CHECK(deadlocked.code == 1);
  CHECK(deadlocked.output.find("deadlock: REACHABLE") != std::string::npos);
}

TEST_CASE("emitted corpus sources verify as plain input") {
  Scratch tmp;
  fs::path out = tmp.dir / "emitted";
  RunResult emit =
      run_cli("corpus \"DP(2,1,bad_eat)\" --emit-sources " + out.string());
  CHECK(emit.code == 1);
  REQUIRE(fs::exists(out / "application.e"));
  REQUIRE(fs::exists(out / "philosopher.e"));
  REQUIRE(fs::exists(out / "fork.e"));
  CHECK(tmp.read(out / "philosopher.e").find("{{") == std::string::npos);

  RunResult again = run_cli("verify " + out.string());
  CHECK(again.code == 1);
  CHECK(again.output.find("deadlock: REACHABLE") != std::string::npos);
}

TEST_CASE("the suite subcommand prints one verdict per instance") {
  RunResult r = run_cli("suite \"DS(1,2,1,bad)\" \"Counter(2,2)\"");
  CHECK(r.code == 0);
  CHECK(r.output.find("PASS  DS(1,2,1,bad)") != std::string::npos);
  CHECK(r.output.find("PASS  Counter(2,2)") != std::string::npos);
  CHECK(r.output.find("FAIL") == std::string::npos);
}
