#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace {

namespace fs = std::filesystem;

fs::path work_dir() {
  static fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "dar_cli_suite";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

int run_cli(const std::string& args, std::string* output = nullptr) {
  static int call_no = 0;
  fs::path capture = work_dir() / ("cli_out_" + std::to_string(call_no++));
  std::string cmd = std::string("\"") + DAR_CLI_BIN + "\" " + args + " > " +
                    capture.string() + " 2>&1";
  int status = std::system(cmd.c_str());
  if (output) {
    std::ifstream in(capture);
    std::ostringstream buf;
    buf << in.rdbuf();
    *output = buf.str();
  }
  return WEXITSTATUS(status);
}

std::string file_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// One golden fixture + config + brief, shared by the run tests.
struct CliSetup {
  fs::path db = work_dir() / "golden.dardb";
  fs::path config = work_dir() / "dar.json";
  fs::path brief = work_dir() / "brief.txt";

  CliSetup() {
    if (fs::exists(config)) return;
    REQUIRE(run_cli("fixture --seed 42 --assets 26 --incidents 2000 --out " +
                    db.string()) == 0);
    nlohmann::json cfg = {
        {"llm",
         {{"provider", "scripted"},
          {"transcript", std::string(DAR_SOURCE_DIR) +
                             "/tests/fixtures/golden_transcript.json"}}},
        {"connection",
         {{"kind", "embedded"},
          {"location", db.string()},
          {"default_dataset", "research_poc"}}},
        {"budget", {{"max_llm_calls", 200}}}};
    std::ofstream(config) << cfg.dump(1);
    std::ofstream(brief)
        << "Perform exploratory data analysis on the provided dataset, "
           "identify significant patterns, trends, and anomalies, generate "
           "actionable insights from the findings, and produce a written "
           "report with recommendations.";
  }
};

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("fixture command is deterministic; bad scale exits 2") {
  fs::path a = work_dir() / "fa.dardb";
  fs::path b = work_dir() / "fb.dardb";
  CHECK(run_cli("fixture --seed 11 --assets 5 --incidents 40 --out " +
                a.string()) == 0);
  CHECK(run_cli("fixture --seed 11 --assets 5 --incidents 40 --out " +
                b.string()) == 0);
  CHECK(file_bytes(a) == file_bytes(b));
  CHECK(file_bytes(a.string() + ".truth.json") ==
        file_bytes(b.string() + ".truth.json"));

  std::string out;
  CHECK(run_cli("fixture --assets 0 --incidents 1 --out " +
                    (work_dir() / "bad.dardb").string(),
                &out) == 2);
  CHECK(out.find("n_assets") != std::string::npos);
}

TEST_CASE("validate accepts the golden config and rejects a missing one") {
  CliSetup setup;
  std::string out;
  CHECK(run_cli("validate --config " + setup.config.string(), &out) == 0);
  CHECK(out.find("config ok") != std::string::npos);
  CHECK(run_cli("validate --config /nonexistent/dar.json", &out) == 2);
}

TEST_CASE("run writes report and metrics, exit 0") {
  CliSetup setup;
  fs::path out_dir = work_dir() / "run1";
  std::string out;
  int rc = run_cli("run --brief " + setup.brief.string() + " --config " +
                       setup.config.string() + " --out " + out_dir.string(),
                   &out);
  CHECK(rc == 0);
  CHECK(fs::exists(out_dir / "report.md"));
  CHECK(fs::exists(out_dir / "metrics.json"));
  CHECK(fs::exists(out_dir / "checkpoint.json"));
  std::string report = file_bytes(out_dir / "report.md");
  CHECK(report.find("# Research Report") != std::string::npos);
  CHECK(report.find("## Evidence") != std::string::npos);
}

TEST_CASE("dry run prints the plan and executes nothing") {
  CliSetup setup;
  fs::path out_dir = work_dir() / "dry";
  std::string out;
  int rc = run_cli("run --dry-run --brief " + setup.brief.string() +
                       " --config " + setup.config.string() + " --out " +
                       out_dir.string(),
                   &out);
  CHECK(rc == 0);
  CHECK(out.find("research plan (4 subtasks)") != std::string::npos);
  CHECK(out.find("Count the total number of incidents") != std::string::npos);
  CHECK(!fs::exists(out_dir / "report.md"));
  CHECK(!fs::exists(out_dir / "metrics.json"));
}

TEST_CASE("missing config exits 2 naming the path") {
  CliSetup setup;
  std::string out;
  int rc = run_cli("run --brief " + setup.brief.string() +
                       " --config /nonexistent/dar.json --out " +
                       (work_dir() / "x").string(),
                   &out);
  CHECK(rc == 2);
  CHECK(out.find("/nonexistent/dar.json") != std::string::npos);
}

TEST_CASE("unreachable database exits 3") {
  CliSetup setup;
  nlohmann::json cfg = nlohmann::json::parse(file_bytes(setup.config));
  cfg["connection"]["location"] = (work_dir() / "missing.dardb").string();
  fs::path bad = work_dir() / "bad_conn.json";
  std::ofstream(bad) << cfg.dump();
  std::string out;
  int rc = run_cli("run --brief " + setup.brief.string() + " --config " +
                       bad.string() + " --out " + (work_dir() / "y").string(),
                   &out);
  CHECK(rc == 3);
}

TEST_CASE("budget exhausted before any validated result exits 4") {
  CliSetup setup;
  std::string out;
  int rc = run_cli("run --brief " + setup.brief.string() + " --config " +
                       setup.config.string() + " --out " +
                       (work_dir() / "budget").string() +
                       " --max-llm-calls 3",
                   &out);
  CHECK(rc == 4);
  CHECK(out.find("budget exhausted") != std::string::npos);
}

TEST_CASE("inspect agrees with metrics.json on the counters") {
  CliSetup setup;
  fs::path out_dir = work_dir() / "run_inspect";
  REQUIRE(run_cli("run --brief " + setup.brief.string() + " --config " +
                  setup.config.string() + " --out " + out_dir.string()) == 0);

  std::string out;
  int rc = run_cli(
      "inspect --checkpoint " + (out_dir / "checkpoint.json").string(), &out);
  CHECK(rc == 0);
  CHECK(out.find("phase: done") != std::string::npos);
  CHECK(out.find("plan: 4 subtask(s)") != std::string::npos);
  CHECK(out.find("PASS/ok") != std::string::npos);

  nlohmann::json metrics =
      nlohmann::json::parse(file_bytes(out_dir / "metrics.json"));
  std::string needle =
      "llm_calls=" + std::to_string(metrics["llm_calls"].get<int64_t>());
  CHECK(out.find(needle) != std::string::npos);
  std::string sqln =
      "sql_executions=" +
      std::to_string(metrics["sql_executions"].get<int64_t>());
  CHECK(out.find(sqln) != std::string::npos);

  // corrupt checkpoint exits 2
  fs::path corrupt = work_dir() / "corrupt.json";
  std::ofstream(corrupt) << "{not json";
  CHECK(run_cli("inspect --checkpoint " + corrupt.string(), &out) == 2);
}

}  // TEST_SUITE
