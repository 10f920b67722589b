#include "dar/orch/orchestrator.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dar/meta/extractor.hpp"

namespace dar::orch {

namespace {

using Clock = std::chrono::steady_clock;

int64_t elapsed_us(Clock::time_point since) {
  return std::chrono::duration_cast<std::chrono::microseconds>(Clock::now() -
                                                               since)
      .count();
}

std::string escape_md(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '\n') {
      out += ' ';
    } else {
      out.push_back(c);
    }
  }
  return out;
}

}  // namespace

Orchestrator::Orchestrator(llm::Gateway& gateway, db::Connection& connection,
                           RunConfig config, std::string output_dir)
    : gateway_(gateway),
      conn_(connection),
      config_(std::move(config)),
      output_dir_(std::move(output_dir)) {
  std::filesystem::create_directories(output_dir_);
}

nlohmann::json Orchestrator::load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open checkpoint: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("corrupt checkpoint " + path + ": " + e.what());
  }
  if (j.value("dar_checkpoint", 0) != 1 || !j.contains("session")) {
    throw ConfigError("not a dar checkpoint: " + path);
  }
  return j;
}

void Orchestrator::write_checkpoint(const PhaseState& state) const {
  nlohmann::json j = {{"dar_checkpoint", 1},
                      {"phase", state.phase},
                      {"session", state.session.to_json()}};
  std::ofstream out(output_dir_ + "/checkpoint.json", std::ios::binary);
  out << j.dump(1) << "\n";
}

int64_t Orchestrator::accumulated_analysis_us(
    const SessionState& session) const {
  auto timing = session.get_stage_json("timing");
  return timing ? timing->value("analysis_us", int64_t{0}) : 0;
}

RunMetrics metrics_from_session(const SessionState& session) {
  RunMetrics m;
  auto timing = session.get_stage_json("timing");
  if (timing) {
    m.analysis_time_us = timing->value("analysis_us", int64_t{0});
    m.report_time_us = timing->value("report_us", int64_t{0});
  }
  m.llm_calls = session.counters().llm_calls;
  m.sql_executions = session.counters().sql_executions;
  m.revisions = session.counters().revision_iterations;
  m.query_cost = session.counters().query_cost;
  return m;
}

ResearchPlan Orchestrator::dry_run(const ResearchBrief& brief) {
  PhaseState state;
  state.session = SessionState::new_session(brief);
  state.phase = "fresh";
  phase_initialization(state);
  auto plan = state.session.get_stage_json("plan");
  return plan_from_json(*plan);
}

RunResult Orchestrator::run(const ResearchBrief& brief) {
  PhaseState state;
  state.session = SessionState::new_session(brief);
  state.phase = "fresh";
  return run_phases(std::move(state));
}

RunResult Orchestrator::resume(const nlohmann::json& checkpoint) {
  PhaseState state;
  state.session = SessionState::from_json(checkpoint.at("session"));
  state.phase = checkpoint.value("phase", "fresh");
  return run_phases(std::move(state));
}

RunResult Orchestrator::partial_result(PhaseState& state) {
  RunResult result;
  result.metrics = metrics_from_session(state.session);
  auto validated = state.session.get_stage_json("validated");
  result.validated_count = validated ? static_cast<int>(validated->size()) : 0;
  result.checkpoint_path = output_dir_ + "/checkpoint.json";
  result.session = std::move(state.session);
  return result;
}

RunResult Orchestrator::run_phases(PhaseState state) {
  try {
    if (state.phase == "fresh") {
      phase_initialization(state);
      if (config_.stop_after == "init_done") return partial_result(state);
    }
    if (state.phase == "init_done") {
      phase_execution(state);
      if (config_.stop_after == "exec_done") return partial_result(state);
    }
    if (state.phase == "exec_done") {
      return phase_synthesis(state);
    }
    if (state.phase == "done") {
      throw ConfigError("checkpoint is already finished (phase=done)");
    }
    throw ConfigError("unknown checkpoint phase: " + state.phase);
  } catch (const BudgetExhausted& e) {
    RunResult r = emit_failure_report(
        state, std::string("LLM call budget exhausted: ") + e.what());
    r.budget_exhausted = true;
    return r;
  }
}

void Orchestrator::phase_initialization(PhaseState& state) {
  auto t0 = Clock::now();

  std::optional<std::vector<std::string>> scope;
  if (!state.session.brief().target_scope.empty()) {
    scope = state.session.brief().target_scope;
  }
  std::vector<std::string> warnings;
  SchemaCatalog catalog = meta::build_catalog(conn_, scope, &warnings);
  for (const auto& w : warnings) state.session.append_log("note", w);

  agents::ResearchIntent intent = agents::infer_intent(
      state.session, gateway_, state.session.brief(), catalog);
  ResearchPlan plan = agents::generate_plan(
      state.session, gateway_, intent, catalog,
      state.session.brief().constraints, config_.planner);

  state.session.set_stage_json("catalog", to_json(catalog));
  state.session.set_stage_json("intent", agents::to_json(intent));
  state.session.set_stage_json("plan", to_json(plan));
  state.session.set_stage_json(
      "timing", {{"analysis_us",
                  accumulated_analysis_us(state.session) + elapsed_us(t0)},
                 {"report_us", 0}});
  state.phase = "init_done";
  write_checkpoint(state);
}

void Orchestrator::phase_execution(PhaseState& state) {
  auto t0 = Clock::now();

  SchemaCatalog catalog =
      catalog_from_json(*state.session.get_stage_json("catalog"));
  ResearchPlan plan = plan_from_json(*state.session.get_stage_json("plan"));

  nlohmann::json validated = nlohmann::json::array();
  nlohmann::json failed = nlohmann::json::array();

  const auto& constraints = state.session.brief().constraints;
  for (const auto& subtask : plan.subtasks) {
    if (state.session.counters().query_cost > constraints.max_query_cost) {
      failed.push_back({{"subtask_id", subtask.id},
                        {"objective", subtask.objective},
                        {"reason", "query cost budget exhausted"}});
      continue;
    }
    agents::SubtaskRun run = agents::run_subtask(
        state.session, gateway_, conn_, subtask, catalog, config_.pipeline,
        config_.limits, config_.shim);
    if (run.success) {
      validated.push_back(
          {{"subtask_id", subtask.id},
           {"marker", "Q" + subtask.id},
           {"history_index",
            static_cast<int64_t>(state.session.query_history().size()) - 1}});
    } else {
      failed.push_back({{"subtask_id", subtask.id},
                        {"objective", subtask.objective},
                        {"reason", run.failure_reason}});
      state.session.append_log(
          "note", "subtask " + subtask.id + " skipped: " + run.failure_reason);
    }
  }

  state.session.set_stage_json("validated", validated);
  state.session.set_stage_json("failed", failed);
  auto timing = *state.session.get_stage_json("timing");
  timing["analysis_us"] =
      timing.value("analysis_us", int64_t{0}) + elapsed_us(t0);
  state.session.set_stage_json("timing", timing);
  state.phase = "exec_done";
  write_checkpoint(state);
}

RunResult Orchestrator::phase_synthesis(PhaseState& state) {
  auto t0 = Clock::now();

  SchemaCatalog catalog =
      catalog_from_json(*state.session.get_stage_json("catalog"));
  ResearchPlan plan = plan_from_json(*state.session.get_stage_json("plan"));
  nlohmann::json validated = *state.session.get_stage_json("validated");
  nlohmann::json failed = *state.session.get_stage_json("failed");

  std::vector<agents::ValidatedResult> results;
  for (const auto& vj : validated) {
    agents::ValidatedResult r;
    r.subtask_id = vj.at("subtask_id").get<std::string>();
    r.marker = vj.at("marker").get<std::string>();
    r.history_index = static_cast<int>(vj.at("history_index").get<int64_t>());
    const auto& attempt =
        state.session.query_history().at(static_cast<size_t>(r.history_index));
    r.candidate = attempt.candidate;
    r.outcome = attempt.outcome;
    r.summary = agents::summarize_outcome(
        r.outcome, config_.pipeline.result_summary_row_cap);
    results.push_back(std::move(r));
  }

  if (results.empty()) {
    std::ostringstream reason;
    reason << "all " << plan.subtasks.size() << " subtask(s) failed";
    auto finish_timing = [&]() {
      auto timing = *state.session.get_stage_json("timing");
      timing["report_us"] =
          timing.value("report_us", int64_t{0}) + elapsed_us(t0);
      state.session.set_stage_json("timing", timing);
    };
    finish_timing();
    return emit_failure_report(state, reason.str());
  }

  RunMetrics so_far = metrics_from_session(state.session);
  agents::ReportRunResult report = agents::run_report_pipeline(
      state.session, gateway_, plan, results, catalog, config_.escalation,
      so_far);

  std::string markdown = report.report.markdown;

  // Skipped subtasks are noted in Data Overview.
  if (!failed.empty()) {
    std::ostringstream notes;
    for (const auto& fj : failed) {
      notes << "\n_Note: subtask " << fj.at("subtask_id").get<std::string>()
            << " (" << escape_md(fj.at("objective").get<std::string>())
            << ") was skipped: "
            << escape_md(fj.at("reason").get<std::string>()) << "_\n";
    }
    const std::string heading = "## Data Overview\n";
    size_t pos = markdown.find(heading);
    if (pos != std::string::npos) {
      markdown.insert(pos + heading.size(), notes.str());
    } else {
      markdown += "\n## Data Overview\n" + notes.str();
    }
  }

  auto timing = *state.session.get_stage_json("timing");
  timing["report_us"] = timing.value("report_us", int64_t{0}) + elapsed_us(t0);
  state.session.set_stage_json("timing", timing);

  return finalize(state, std::move(markdown), false, false);
}

RunResult Orchestrator::emit_failure_report(PhaseState& state,
                                            const std::string& reason) {
  // Deterministic, LLM-free fallback document.
  RunMetrics m = metrics_from_session(state.session);
  std::ostringstream out;
  out << "```dar-run\n";
  out << "analysis_time_s: " << llround(m.analysis_time_s()) << "\n";
  out << "report_time_s: " << llround(m.report_time_s()) << "\n";
  out << "total_time_s: " << llround(m.total_time_s()) << "\n";
  out << "llm_calls: " << m.llm_calls << "\n";
  out << "sql_executions: " << m.sql_executions << "\n";
  out << "revisions: " << m.revisions << "\n";
  out << "below_threshold: false\n";
  out << "```\n\n";
  out << "# Research Report\n\n";
  out << "## Run Failed\n" << escape_md(reason) << "\n\n";
  out << "## Subtask Outcomes\n";
  auto failed = state.session.get_stage_json("failed");
  auto plan_json = state.session.get_stage_json("plan");
  if (failed && plan_json) {
    for (const auto& fj : *failed) {
      out << "- subtask " << fj.at("subtask_id").get<std::string>() << " ("
          << escape_md(fj.at("objective").get<std::string>())
          << "): " << escape_md(fj.at("reason").get<std::string>()) << "\n";
    }
    auto validated = state.session.get_stage_json("validated");
    if (validated) {
      for (const auto& vj : *validated) {
        out << "- subtask " << vj.at("subtask_id").get<std::string>()
            << ": validated\n";
      }
    }
  } else {
    out << "- run ended before execution\n";
  }
  out << "\n## Evidence\n\n";
  return finalize(state, out.str(), true, false);
}

RunResult Orchestrator::finalize(PhaseState& state, std::string markdown,
                                 bool failure_report, bool budget_exhausted) {
  state.phase = "done";
  write_checkpoint(state);

  RunResult result;
  result.metrics = metrics_from_session(state.session);
  result.report_markdown = std::move(markdown);
  result.failure_report = failure_report;
  result.budget_exhausted = budget_exhausted;
  auto validated = state.session.get_stage_json("validated");
  result.validated_count =
      validated ? static_cast<int>(validated->size()) : 0;

  result.report_path = output_dir_ + "/report.md";
  result.metrics_path = output_dir_ + "/metrics.json";
  result.checkpoint_path = output_dir_ + "/checkpoint.json";
  {
    std::ofstream out(result.report_path, std::ios::binary);
    out << result.report_markdown;
  }
  {
    std::ofstream out(result.metrics_path, std::ios::binary);
    out << to_json(result.metrics).dump(1) << "\n";
  }

  result.session = std::move(state.session);
  return result;
}

}  // namespace dar::orch
