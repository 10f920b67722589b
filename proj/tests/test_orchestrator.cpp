#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "dar/fixtures/generator.hpp"
#include "dar/orch/config.hpp"
#include "dar/orch/orchestrator.hpp"
#include "support/test_util.hpp"

using namespace dar;
using namespace dar::orch;

namespace {

std::string transcript_path() {
  return std::string(DAR_SOURCE_DIR) + "/tests/fixtures/golden_transcript.json";
}

std::shared_ptr<engine::Database> golden_db() {
  static std::shared_ptr<engine::Database> db = [] {
    fixtures::FixtureScale scale;
    scale.n_assets = 26;
    scale.n_incidents = 2000;
    return fixtures::generate_fixture(42, scale).database;
  }();
  return db;
}

nlohmann::json golden_truth() {
  static nlohmann::json truth = [] {
    fixtures::FixtureScale scale;
    scale.n_assets = 26;
    scale.n_incidents = 2000;
    return fixtures::generate_fixture(42, scale).ground_truth;
  }();
  return truth;
}

ResearchBrief golden_brief(int64_t budget = 200) {
  ResearchBrief b;
  b.objective =
      "Perform exploratory data analysis on the provided dataset, identify "
      "significant patterns, trends, and anomalies, generate actionable "
      "insights from the findings, and produce a written report with "
      "recommendations.";
  b.constraints.max_llm_calls = budget;
  return b;
}

std::string fresh_out_dir(const std::string& tag) {
  auto dir = std::filesystem::temp_directory_path() / ("dar_orch_" + tag);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir.string();
}

RunResult golden_run(const std::string& tag, int64_t budget = 200,
                     const std::string& stop_after = "") {
  auto backend = llm::ScriptedBackend::from_file(transcript_path());
  llm::Gateway gateway(backend, llm::TemplateRegistry::builtin(),
                       llm::SchemaRegistry::builtin());
  db::EmbeddedConnection conn(golden_db(), "research_poc");
  RunConfig config;
  config.stop_after = stop_after;
  Orchestrator orch(gateway, conn, config, fresh_out_dir(tag));
  return orch.run(golden_brief(budget));
}

}  // namespace

TEST_SUITE("orch") {

TEST_CASE("golden run: structure, evidence, planted pattern") {
  RunResult r = golden_run("golden");
  CHECK(!r.failure_report);
  CHECK(r.validated_count == 4);

  const std::string& md = r.report_markdown;
  for (const char* section :
       {"## Executive Summary", "## Data Overview", "## Patterns & Trends",
        "## Anomalies", "## Recommendations", "## Evidence"}) {
    CAPTURE(section);
    CHECK(md.find(section) != std::string::npos);
  }

  // at least 3 footnoted claims, resolvable in the appendix
  int footnotes = 0;
  for (int n = 1; n <= 4; ++n) {
    std::string ref = "[^" + std::to_string(n) + "]";
    if (md.find(ref) != std::string::npos &&
        md.find(ref + ": Q") != std::string::npos) {
      footnotes++;
    }
  }
  CHECK(footnotes >= 3);

  // the report names the planted spike week from the ground-truth sidecar
  std::string spike =
      golden_truth()["patterns"]["spike_week"]["week"].get<std::string>();
  CHECK(md.find(spike) != std::string::npos);

  // every cited query passed validation
  for (const auto& attempt : r.session.query_history()) {
    CHECK(attempt.verdict.pass());
  }

  // files exist
  CHECK(std::filesystem::exists(r.report_path));
  CHECK(std::filesystem::exists(r.metrics_path));
  CHECK(std::filesystem::exists(r.checkpoint_path));
}

TEST_CASE("golden run is byte-identical across two runs") {
  RunResult a = golden_run("det_a");
  RunResult b = golden_run("det_b");
  CHECK(a.report_markdown == b.report_markdown);
  CHECK(a.metrics.llm_calls == b.metrics.llm_calls);
  CHECK(a.metrics.sql_executions == b.metrics.sql_executions);
  CHECK(a.metrics.revisions == b.metrics.revisions);
}

TEST_CASE("metrics: totals are exact sums, counters match the backend log") {
  auto backend = llm::ScriptedBackend::from_file(transcript_path());
  llm::Gateway gateway(backend, llm::TemplateRegistry::builtin(),
                       llm::SchemaRegistry::builtin());
  db::EmbeddedConnection conn(golden_db(), "research_poc");
  Orchestrator orch(gateway, conn, RunConfig{}, fresh_out_dir("metrics"));
  RunResult r = orch.run(golden_brief());

  CHECK(r.metrics.total_time_us() ==
        r.metrics.analysis_time_us + r.metrics.report_time_us);
  CHECK(r.metrics.llm_calls == backend->invocations());
  CHECK(r.metrics.llm_calls == r.session.counters().llm_calls);
  CHECK(r.metrics.sql_executions == r.session.counters().sql_executions);
  // intent + plan + 4x(understand + generate) + 8 ai cells + outline +
  // draft + quality
  CHECK(r.metrics.llm_calls == 21);
  CHECK(r.metrics.sql_executions == 4);
  CHECK(r.metrics.revisions == 0);

  // metrics file round-trips
  std::ifstream in(r.metrics_path);
  nlohmann::json mj;
  in >> mj;
  CHECK(mj["llm_calls"] == 21);
  CHECK(mj["total_time_s"].get<double>() ==
        doctest::Approx(mj["analysis_time_s"].get<double>() +
                        mj["report_time_s"].get<double>()));
}

TEST_CASE("kill-and-resume after execution reproduces the report") {
  RunResult full = golden_run("resume_full");

  // staged run stops once the execution checkpoint is on disk
  auto backend1 = llm::ScriptedBackend::from_file(transcript_path());
  llm::Gateway gw1(backend1, llm::TemplateRegistry::builtin(),
                   llm::SchemaRegistry::builtin());
  db::EmbeddedConnection conn1(golden_db(), "research_poc");
  RunConfig staged;
  staged.stop_after = "exec_done";
  std::string out_dir = fresh_out_dir("resume_staged");
  Orchestrator orch1(gw1, conn1, staged, out_dir);
  RunResult partial = orch1.run(golden_brief());
  CHECK(partial.report_markdown.empty());
  CHECK(partial.validated_count == 4);

  // a fresh process picks the checkpoint up
  auto backend2 = llm::ScriptedBackend::from_file(transcript_path());
  llm::Gateway gw2(backend2, llm::TemplateRegistry::builtin(),
                   llm::SchemaRegistry::builtin());
  db::EmbeddedConnection conn2(golden_db(), "research_poc");
  Orchestrator orch2(gw2, conn2, RunConfig{}, out_dir);
  nlohmann::json checkpoint =
      Orchestrator::load_checkpoint(out_dir + "/checkpoint.json");
  CHECK(checkpoint["phase"] == "exec_done");
  RunResult resumed = orch2.resume(checkpoint);

  CHECK(resumed.report_markdown == full.report_markdown);
  CHECK(resumed.metrics.llm_calls == full.metrics.llm_calls);
}

TEST_CASE("dry run plans but executes nothing") {
  auto backend = llm::ScriptedBackend::from_file(transcript_path());
  llm::Gateway gateway(backend, llm::TemplateRegistry::builtin(),
                       llm::SchemaRegistry::builtin());
  db::EmbeddedConnection conn(golden_db(), "research_poc");
  Orchestrator orch(gateway, conn, RunConfig{}, fresh_out_dir("dry"));
  ResearchPlan plan = orch.dry_run(golden_brief());
  CHECK(plan.subtasks.size() == 4);
  CHECK(backend->invocations() == 2);  // intent + plan only
}

TEST_CASE("all subtasks failing still emits a structured failure report") {
  auto backend = test::scripted({
      test::rule("research initiator",
                 R"({"analysis_goals":[{"goal":"volume","entities":["incidents"]}],
                     "entities_of_interest":[],"deliverable":"report"})"),
      test::rule("plan generator",
                 R"({"subtasks":[
                     {"id":"1","objective":"alpha probe","referenced_tables":["incidents"],"expected_output":"table"},
                     {"id":"2","objective":"beta probe","referenced_tables":["incidents"],"expected_output":"table"},
                     {"id":"3","objective":"gamma probe","referenced_tables":["incidents"],"expected_output":"table"}]})"),
      test::rule("query-understanding",
                 R"({"tables":["incidents"],"columns":[],"filters":["broken"],"aggregation":"none"})"),
      test::rule("query-generation", "SELECT ghost FROM research_poc.incidents"),
      test::rule("query-review", "SELECT ghost FROM research_poc.incidents"),
  });
  llm::Gateway gateway = test::make_gateway(backend);
  db::EmbeddedConnection conn(golden_db(), "research_poc");
  Orchestrator orch(gateway, conn, RunConfig{}, fresh_out_dir("allfail"));
  RunResult r = orch.run(golden_brief());
  CHECK(r.failure_report);
  CHECK(r.validated_count == 0);
  CHECK(r.report_markdown.find("## Run Failed") != std::string::npos);
  CHECK(r.report_markdown.find("alpha probe") != std::string::npos);
  CHECK(r.report_markdown.find("iterations_exhausted") != std::string::npos);
  CHECK(std::filesystem::exists(r.report_path));
}

TEST_CASE("one failed subtask is skipped with a note in Data Overview") {
  // subtask 2's SQL always fails; the run still composes a report from the
  // other three. Rebuild the golden rule list with a broken severity query.
  std::vector<llm::ScriptedRule> rules;
  {
    std::ifstream in(transcript_path());
    nlohmann::json j;
    in >> j;
    for (const auto& rj : j["rules"]) {
      llm::ScriptedRule r;
      r.match = rj["match"];
      r.reply = rj["reply"];
      r.is_regex = rj.value("regex", false);
      r.consume_once = rj.value("consume_once", false);
      if (r.match == "goal:severity_dist") {
        r.reply = "SELECT ghost FROM research_poc.incidents";
      }
      rules.push_back(std::move(r));
    }
    rules.push_back(test::rule("query-review",
                               "SELECT ghost FROM research_poc.incidents"));
    // the golden draft cites Q2, which no longer resolves; the lint repair
    // hands back a draft grounded in the surviving evidence
    rules.push_back(test::rule(
        "evidence lint",
        "## Executive Summary\nThe dataset records 2000 incidents. [Q1]\n\n"
        "## Data Overview\nThe incidents table holds 2000 rows. [Q1]\n\n"
        "## Patterns & Trends\nRegion_5 leads with 513 incidents. [Q4]\n\n"
        "## Anomalies\nWeek 2024-W22 reaches 76 incidents. [Q3]\n\n"
        "## Recommendations\nInvestigate the 2024-W22 spike. [Q3]\n"));
  }
  auto backend = test::scripted(rules);
  llm::Gateway gateway = test::make_gateway(backend);
  db::EmbeddedConnection conn(golden_db(), "research_poc");
  Orchestrator orch(gateway, conn, RunConfig{}, fresh_out_dir("skip"));
  RunResult r = orch.run(golden_brief());
  CHECK(!r.failure_report);
  CHECK(r.validated_count == 3);
  CHECK(r.report_markdown.find("was skipped") != std::string::npos);
  size_t overview = r.report_markdown.find("## Data Overview");
  size_t note = r.report_markdown.find("_Note: subtask 2");
  REQUIRE(overview != std::string::npos);
  REQUIRE(note != std::string::npos);
  CHECK(note > overview);
}

TEST_CASE("budget exhaustion terminates on the budget path, exact calls") {
  RunResult r = golden_run("budget", 3);
  CHECK(r.budget_exhausted);
  CHECK(r.failure_report);
  CHECK(r.validated_count == 0);
  CHECK(r.session.counters().llm_calls == 3);  // exactly the budget
  CHECK(r.report_markdown.find("budget exhausted") != std::string::npos);
}

TEST_CASE("phase ordering: no sql before the plan exists") {
  RunResult r = golden_run("order");
  // the plan lands in the log before the first query attempt is recorded
  const auto& log = r.session.conversation_log();
  size_t plan_pos = std::string::npos;
  for (size_t i = 0; i < log.size(); ++i) {
    if (log[i].role == "assistant" &&
        log[i].content.find("\"subtasks\"") != std::string::npos) {
      plan_pos = i;
      break;
    }
  }
  REQUIRE(plan_pos != std::string::npos);
  CHECK(r.session.query_history().size() == 4);
}

TEST_CASE("config loading round trip and validation") {
  nlohmann::json j = {
      {"llm", {{"provider", "scripted"}, {"transcript", transcript_path()}}},
      {"connection",
       {{"kind", "embedded"}, {"in_memory", true}}},
      {"report", {{"theta", 0.7}, {"max_revisions", 2}}},
      {"pipeline", {{"max_review_iterations", 5}}},
      {"budget", {{"max_llm_calls", 33}}}};
  DarConfig cfg = DarConfig::from_json(j);
  CHECK(cfg.run.escalation.theta == doctest::Approx(0.7));
  CHECK(cfg.run.escalation.max_revisions == 2);
  CHECK(cfg.run.pipeline.max_review_iterations == 5);
  CHECK(cfg.budget.max_llm_calls == 33);

  nlohmann::json bad = j;
  bad["report"]["theta"] = 1.5;
  CHECK_THROWS_AS(DarConfig::from_json(bad), ConfigError);
  nlohmann::json no_conn = j;
  no_conn.erase("connection");
  CHECK_THROWS_AS(DarConfig::from_json(no_conn), ConfigError);
  CHECK_THROWS_AS(DarConfig::load("/nonexistent/dar.json"), ConfigError);
}

}  // TEST_SUITE
