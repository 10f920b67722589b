#pragma once

#include <memory>
#include <optional>
#include <string>

#include <json.hpp>

#include "dar/agents/initiator.hpp"
#include "dar/agents/report_pipeline.hpp"
#include "dar/agents/sql_pipeline.hpp"
#include "dar/aisql/shim.hpp"
#include "dar/core/session.hpp"
#include "dar/db/backend.hpp"
#include "dar/llm/gateway.hpp"

namespace dar::orch {

struct RunConfig {
  agents::PlannerConfig planner;
  agents::PipelineConfig pipeline;
  agents::EscalationConfig escalation;
  db::QueryLimits limits;
  aisql::ShimOptions shim;
  // Staged runs: stop once this phase's checkpoint is written
  // ("init_done" or "exec_done"); empty = run to completion.
  std::string stop_after;
};

struct RunResult {
  std::string report_markdown;
  RunMetrics metrics;
  SessionState session;
  bool failure_report = false;    // all-fail or budget path
  bool budget_exhausted = false;
  int validated_count = 0;
  std::string report_path;
  std::string metrics_path;
  std::string checkpoint_path;
};

// Initialization -> Execution -> Synthesis, with a checkpoint written after
// each phase. Failed subtasks are skipped with a note in Data Overview; a
// run where everything fails (or the budget dies) still emits a structured
// failure report. Fatal throws happen only before Initialization completes
// (connection/config errors).
class Orchestrator {
 public:
  Orchestrator(llm::Gateway& gateway, db::Connection& connection,
               RunConfig config, std::string output_dir);

  RunResult run(const ResearchBrief& brief);

  // Continue from a checkpoint document written by a previous phase.
  RunResult resume(const nlohmann::json& checkpoint);

  // Initialization only: returns the plan that Execution would run.
  ResearchPlan dry_run(const ResearchBrief& brief);

  static nlohmann::json load_checkpoint(const std::string& path);

 private:
  struct PhaseState {
    SessionState session;
    std::string phase;  // "fresh" -> "init_done" -> "exec_done" -> "done"
  };

  RunResult run_phases(PhaseState state);
  RunResult partial_result(PhaseState& state);
  void phase_initialization(PhaseState& state);
  void phase_execution(PhaseState& state);
  RunResult phase_synthesis(PhaseState& state);
  RunResult emit_failure_report(PhaseState& state, const std::string& reason);
  RunResult finalize(PhaseState& state, std::string markdown,
                     bool failure_report, bool budget_exhausted);

  void write_checkpoint(const PhaseState& state) const;
  int64_t accumulated_analysis_us(const SessionState& session) const;

  llm::Gateway& gateway_;
  db::Connection& conn_;
  RunConfig config_;
  std::string output_dir_;
};

// Metrics accessor mirroring the timing split: analysis covers
// Initialization+Execution, report covers Synthesis, total is their exact
// sum; counters come straight from the session.
RunMetrics metrics_from_session(const SessionState& session);

}  // namespace dar::orch
