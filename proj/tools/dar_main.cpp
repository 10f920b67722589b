// dar: autonomous database research runs from a one-shot brief.
//   dar run      --brief brief.txt --config dar.json --out out/
//   dar fixture  --seed 42 --assets 26 --incidents 11489 --out fixture.dardb
//   dar inspect  --checkpoint out/checkpoint.json
//   dar validate --config dar.json

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "dar/fixtures/generator.hpp"
#include "dar/orch/config.hpp"
#include "dar/orch/orchestrator.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFatal = 1;
constexpr int kExitConfig = 2;
constexpr int kExitConnection = 3;
constexpr int kExitBudget = 4;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw dar::ConfigError("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

int cmd_run(const std::string& brief_path, const std::string& config_path,
            const std::string& out_dir, bool dry_run, bool resume,
            int64_t max_llm_calls_override,
            const std::vector<std::string>& scope) {
  dar::orch::DarConfig config = dar::orch::DarConfig::load(config_path);

  dar::ResearchBrief brief;
  brief.objective = read_file(brief_path);
  brief.constraints = config.budget;
  brief.target_scope = scope;
  if (max_llm_calls_override > 0) {
    brief.constraints.max_llm_calls = max_llm_calls_override;
  }
  brief.validate();

  auto gateway = dar::orch::make_gateway(config.llm);
  auto connection = dar::db::connect(config.connection);
  dar::orch::Orchestrator orchestrator(*gateway, *connection, config.run,
                                       out_dir);

  if (dry_run) {
    dar::ResearchPlan plan = orchestrator.dry_run(brief);
    std::cout << "research plan (" << plan.subtasks.size() << " subtasks):\n";
    for (const auto& st : plan.subtasks) {
      std::cout << "  [" << st.id << "] " << st.objective << " (tables:";
      for (const auto& t : st.referenced_tables) std::cout << " " << t;
      std::cout << "; output: " << dar::to_string(st.expected_output) << ")\n";
    }
    return kExitOk;
  }

  dar::orch::RunResult result;
  if (resume) {
    nlohmann::json checkpoint = dar::orch::Orchestrator::load_checkpoint(
        out_dir + "/checkpoint.json");
    result = orchestrator.resume(checkpoint);
  } else {
    result = orchestrator.run(brief);
  }

  std::cout << "report:  " << result.report_path << "\n"
            << "metrics: " << result.metrics_path << "\n"
            << "validated subtasks: " << result.validated_count << "\n"
            << "llm calls: " << result.metrics.llm_calls
            << ", sql executions: " << result.metrics.sql_executions << "\n";
  if (result.failure_report) {
    std::cout << "run degraded: failure report emitted\n";
  }
  if (result.budget_exhausted && result.validated_count == 0) {
    std::cerr << "error: budget exhausted before any validated result\n";
    return kExitBudget;
  }
  return kExitOk;
}

int cmd_fixture(uint64_t seed, int64_t assets, int64_t incidents,
                const std::string& out_path) {
  dar::fixtures::FixtureScale scale;
  scale.n_assets = assets;
  scale.n_incidents = incidents;
  dar::fixtures::FixtureResult fixture =
      dar::fixtures::generate_fixture(seed, scale);
  std::string sidecar = out_path + ".truth.json";
  dar::fixtures::write_fixture(fixture, out_path, sidecar);
  std::cout << "database: " << out_path << "\n"
            << "sidecar:  " << sidecar << "\n"
            << "assets: " << assets << ", incidents: " << incidents
            << ", seed: " << seed << "\n";
  return kExitOk;
}

int cmd_inspect(const std::string& checkpoint_path) {
  nlohmann::json checkpoint =
      dar::orch::Orchestrator::load_checkpoint(checkpoint_path);
  dar::SessionState session =
      dar::SessionState::from_json(checkpoint.at("session"));

  std::cout << "phase: " << checkpoint.value("phase", "?") << "\n";
  std::cout << "objective: " << session.brief().objective.substr(0, 100)
            << "\n";
  auto plan_json = session.get_stage_json("plan");
  if (plan_json) {
    dar::ResearchPlan plan = dar::plan_from_json(*plan_json);
    std::cout << "plan: " << plan.subtasks.size() << " subtask(s)\n";
    for (const auto& st : plan.subtasks) {
      std::cout << "  [" << st.id << "] " << st.objective << "\n";
    }
  } else {
    std::cout << "plan: (not yet generated)\n";
  }
  std::cout << "attempts: " << session.query_history().size() << "\n";
  for (size_t i = 0; i < session.query_history().size(); ++i) {
    const auto& a = session.query_history()[i];
    std::cout << "  #" << i << " subtask " << a.candidate.subtask_id
              << " rev " << a.candidate.revision_index << " -> "
              << (a.verdict.pass() ? "PASS" : "FAIL") << "/"
              << dar::to_string(a.verdict.reason);
    if (a.outcome.error) std::cout << " (" << a.outcome.error->code << ")";
    std::cout << "\n";
  }
  const auto& c = session.counters();
  std::cout << "counters: llm_calls=" << c.llm_calls
            << " sql_executions=" << c.sql_executions
            << " review_iterations=" << c.query_review_iterations
            << " revisions=" << c.revision_iterations << "\n";
  return kExitOk;
}

int cmd_validate(const std::string& config_path) {
  dar::orch::DarConfig config = dar::orch::DarConfig::load(config_path);
  std::cout << "config ok: provider=" << config.llm.provider << ", connection="
            << (config.connection.kind ==
                        dar::db::ConnectionConfig::Kind::Embedded
                    ? "embedded"
                    : "remote")
            << ", theta=" << config.run.escalation.theta
            << ", max_review_iterations="
            << config.run.pipeline.max_review_iterations << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dar: autonomous database researcher"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "run a research session");
  std::string brief_path, config_path, out_dir = "out";
  bool dry_run = false, resume = false;
  int64_t max_llm_calls = 0;
  std::vector<std::string> scope;
  run->add_option("--brief", brief_path, "brief text file")->required();
  run->add_option("--config", config_path, "config JSON file")->required();
  run->add_option("--out", out_dir, "output directory");
  run->add_flag("--dry-run", dry_run, "plan only, execute nothing");
  run->add_flag("--resume", resume, "resume from <out>/checkpoint.json");
  run->add_option("--max-llm-calls", max_llm_calls,
                  "override the LLM call budget");
  run->add_option("--scope", scope, "dataset ids to research (default: all)");

  // fixture
  auto* fixture = app.add_subcommand("fixture", "generate a synthetic fixture");
  uint64_t seed = 42;
  int64_t assets = 26, incidents = 11489;
  std::string fixture_out = "fixture.dardb";
  fixture->add_option("--seed", seed, "generator seed");
  fixture->add_option("--assets", assets, "asset row count");
  fixture->add_option("--incidents", incidents, "incident row count");
  fixture->add_option("--out", fixture_out, "database file path");

  // inspect
  auto* inspect = app.add_subcommand("inspect", "pretty-print a checkpoint");
  std::string checkpoint_path;
  inspect->add_option("--checkpoint", checkpoint_path, "checkpoint file")
      ->required();

  // validate
  auto* validate = app.add_subcommand("validate", "check a config file");
  std::string validate_path;
  validate->add_option("--config", validate_path, "config JSON file")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      return cmd_run(brief_path, config_path, out_dir, dry_run, resume,
                     max_llm_calls, scope);
    }
    if (fixture->parsed()) {
      return cmd_fixture(seed, assets, incidents, fixture_out);
    }
    if (inspect->parsed()) return cmd_inspect(checkpoint_path);
    if (validate->parsed()) return cmd_validate(validate_path);
  } catch (const dar::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const dar::ConnectionError& e) {
    std::cerr << "connection error: " << e.what() << "\n";
    return kExitConnection;
  } catch (const dar::DarError& e) {
    if (e.code() == "invalid_scale" || e.code() == "invalid_brief") {
      std::cerr << "error: " << e.what() << "\n";
      return kExitConfig;
    }
    std::cerr << "error [" << e.code() << "]: " << e.what() << "\n";
    return kExitFatal;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFatal;
  }
  return kExitOk;
}
