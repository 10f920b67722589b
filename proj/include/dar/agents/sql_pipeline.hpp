#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "dar/aisql/shim.hpp"
#include "dar/core/session.hpp"
#include "dar/core/types.hpp"
#include "dar/db/backend.hpp"
#include "dar/llm/gateway.hpp"

namespace dar::agents {

struct PipelineConfig {
  int max_review_iterations = 3;   // the retry loop's upper bound
  int result_summary_row_cap = 50; // rows shown to downstream prompts
};

// Queryable components of one subtask, grounded against the catalog.
struct QuerySpec {
  std::vector<std::string> tables;
  std::vector<std::string> columns;
  std::vector<std::string> filters;
  std::string aggregation = "none";

  std::string to_prompt_text() const;
};

nlohmann::json to_json(const QuerySpec& s);
QuerySpec queryspec_from_json(const nlohmann::json& j);

// A_QU: maps the subtask onto tables/columns/filters that exist in the
// catalog; one repair re-prompt, then DarError("spec_ungrounded").
QuerySpec understand(SessionState& session, llm::Gateway& gateway,
                     const Subtask& subtask, const SchemaCatalog& catalog);

// A_QG: one SELECT in the active dialect; uses_ai_functions is set from the
// shim's scanner, never from the model's say-so.
QueryCandidate generate_sql(SessionState& session, llm::Gateway& gateway,
                            const QuerySpec& spec, const std::string& dialect,
                            const std::string& subtask_id,
                            const SchemaCatalog& catalog);

// The decision node: PASS iff the result is non-empty and error-free.
// An execution error wins over emptiness when both hold.
ValidationVerdict validate(const QueryOutcome& outcome);

// A_QR: revision prompt carries the failing SQL, the error message or the
// empty-result marker, and the original spec. Throws
// DarError("iterations_exhausted") at the bound.
QueryCandidate review_and_revise(SessionState& session, llm::Gateway& gateway,
                                 const QueryCandidate& candidate,
                                 const QueryOutcome& outcome,
                                 const ValidationVerdict& verdict,
                                 const QuerySpec& spec,
                                 const PipelineConfig& config);

struct SubtaskRun {
  bool success = false;
  QueryCandidate final_candidate;
  QueryOutcome final_outcome;
  int executions = 0;
  std::string failure_reason;  // set when success == false
};

// Execute-validate-revise loop: at most 1 + max_review_iterations
// executions, every attempt appended to the session history. Failures come
// back as a record; only budget exhaustion escapes as an exception.
SubtaskRun run_subtask(SessionState& session, llm::Gateway& gateway,
                       db::Connection& conn, const Subtask& subtask,
                       const SchemaCatalog& catalog,
                       const PipelineConfig& config,
                       const db::QueryLimits& limits,
                       const aisql::ShimOptions& shim_options = {});

// Prompt-sized digest of a result: header, first rows, per-column
// min/max/distinct counts.
std::string summarize_outcome(const QueryOutcome& outcome, int row_cap);

}  // namespace dar::agents
