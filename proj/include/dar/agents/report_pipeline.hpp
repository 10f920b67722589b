#pragma once

#include <string>
#include <vector>

#include "dar/core/session.hpp"
#include "dar/core/types.hpp"
#include "dar/llm/gateway.hpp"

namespace dar::agents {

struct EscalationConfig {
  double theta = 0.75;   // quality threshold
  int max_revisions = 3; // the loop bound j
};

// One validated subtask result, the unit of evidence a report may cite.
struct ValidatedResult {
  std::string subtask_id;
  std::string marker;  // evidence marker token, "Q" + subtask id
  int history_index = -1;
  QueryCandidate candidate;
  QueryOutcome outcome;
  std::string summary;  // prompt-sized digest (summarize_outcome)
};

// The five-section default skeleton offered to the structure planner.
extern const std::vector<std::string> kDefaultSections;

// A_SP: outline with >= 3 sections, every evidence id resolvable; one repair
// re-prompt, then DarError("outline_invalid").
ReportOutline plan_structure(SessionState& session, llm::Gateway& gateway,
                             const ResearchPlan& plan,
                             const std::vector<ValidatedResult>& results);

struct LintFinding {
  std::string sentence;
  std::string problem;
};

// Numeral-bearing sentences in body text must carry a resolvable evidence
// marker. Headings and the evidence appendix are exempt.
std::vector<LintFinding> lint_draft(
    const std::string& markdown,
    const std::map<std::string, int>& evidence_index);

// A_SR: drafting prompt is a function of (outline, result summaries, catalog
// metadata) only; lint failures trigger one repair re-prompt, then
// DarError("unevidenced_claim").
ReportDraft draft(SessionState& session, llm::Gateway& gateway,
                  const ReportOutline& outline,
                  const std::vector<ValidatedResult>& results,
                  const SchemaCatalog& catalog);

// Renders the exact drafting prompt; exposed so tests can assert the
// information boundary byte-for-byte.
std::string render_draft_prompt(const llm::TemplateRegistry& templates,
                                const ReportOutline& outline,
                                const std::vector<ValidatedResult>& results,
                                const SchemaCatalog& catalog);

// LLM-judge rubric scoring; sub-scores schema-validated into [0,1], score
// is their mean.
QualityAssessment assess_quality(SessionState& session, llm::Gateway& gateway,
                                 const ReportDraft& draft);

enum class EscalationDecision { Proceed, Revise, ForcedProceed };

// score >= theta: proceed; below with revisions left: revise; bound hit:
// forced_proceed (the report ships flagged rather than not at all).
EscalationDecision escalation_route(const QualityAssessment& assessment,
                                    const EscalationConfig& config,
                                    int revision_index);

// A_RV: revision guided by the evaluator feedback, lint re-applied.
ReportDraft revise(SessionState& session, llm::Gateway& gateway,
                   const ReportDraft& current,
                   const QualityAssessment& assessment,
                   const EscalationConfig& config);

struct ComposedReport {
  std::string markdown;
  bool below_threshold = false;
};

// A_RC: deliverable Markdown. Metadata header (fenced dar-run block),
// sections in outline order, evidence markers rendered as numbered
// footnotes backed by a query appendix. Format pinned in
// docs/report_format.md.
ComposedReport compose(const ReportDraft& draft, const ReportOutline& outline,
                       const std::vector<ValidatedResult>& results,
                       const RunMetrics& metrics, bool below_threshold);

struct ReportRunResult {
  ComposedReport report;
  ReportDraft final_draft;
  std::vector<QualityAssessment> assessments;
  int revisions = 0;
};

// Full synthesis pipeline with the escalation loop.
ReportRunResult run_report_pipeline(SessionState& session,
                                    llm::Gateway& gateway,
                                    const ResearchPlan& plan,
                                    const std::vector<ValidatedResult>& results,
                                    const SchemaCatalog& catalog,
                                    const EscalationConfig& config,
                                    const RunMetrics& metrics_so_far);

}  // namespace dar::agents
