#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dar/errors.hpp"
#include "dar/value.hpp"

namespace dar {

enum class LogicalType { String, Integer, Float, Boolean, Timestamp, GeoPoint };

std::string to_string(LogicalType t);
LogicalType logical_type_from_string(const std::string& s);

// ---------------------------------------------------------------------------
// Research brief: the single human input that starts a run.

struct BriefConstraints {
  double max_query_cost = 1.0e6;
  double max_wall_time_s = 3600.0;
  int64_t max_llm_calls = 1000;
};

struct ResearchBrief {
  std::string objective;
  std::vector<std::string> target_scope;  // empty = all visible datasets
  BriefConstraints constraints;

  // Throws DarError("invalid_brief") on an empty objective or a negative /
  // non-finite constraint.
  void validate() const;
};

// ---------------------------------------------------------------------------
// Schema catalog.

struct ColumnInfo {
  std::string name;
  LogicalType logical_type = LogicalType::String;
  bool nullable = true;
  double null_fraction = 0.0;
};

struct TableInfo {
  std::string id;
  int64_t row_count = 0;
  std::vector<ColumnInfo> columns;

  const ColumnInfo* find_column(const std::string& name) const;
};

struct DatasetInfo {
  std::string id;
  std::string description;
  std::vector<TableInfo> tables;
};

struct SchemaCatalog {
  std::vector<DatasetInfo> datasets;

  void validate() const;  // uniqueness + null_fraction range
  const DatasetInfo* find_dataset(const std::string& id) const;
  const TableInfo* find_table(const std::string& table_id) const;
  bool empty() const { return datasets.empty(); }
  // Compact text rendering used inside prompts.
  std::string to_prompt_text() const;
};

// ---------------------------------------------------------------------------
// Research plan.

enum class ExpectedOutput { Table, Scalar, Classification, Narrative };

std::string to_string(ExpectedOutput o);
ExpectedOutput expected_output_from_string(const std::string& s);

struct Subtask {
  std::string id;
  std::string objective;
  std::vector<std::string> referenced_tables;
  ExpectedOutput expected_output = ExpectedOutput::Table;
};

struct ResearchPlan {
  std::vector<Subtask> subtasks;
  std::map<std::string, double> budget_allocation;  // subtask id -> fraction

  // Returns a list of violations (empty when the plan is valid): missing
  // subtasks, duplicate ids, references to tables absent from the catalog,
  // budget fractions summing above 1.
  std::vector<std::string> violations(const SchemaCatalog& catalog) const;
};

// ---------------------------------------------------------------------------
// One unit of work through the SQL pipeline.

struct QueryCandidate {
  std::string subtask_id;
  std::string sql_text;
  bool uses_ai_functions = false;
  std::string rationale;
  int revision_index = 0;
};

struct ColumnMeta {
  std::string name;
  LogicalType type = LogicalType::String;
};

struct QueryError {
  std::string code;
  std::string message;
};

struct QueryOutcome {
  std::vector<ColumnMeta> columns;
  std::vector<std::vector<Value>> rows;
  std::optional<QueryError> error;
  double elapsed_s = 0.0;
  double cost = 0.0;
  bool truncated = false;
  std::vector<std::string> warnings;

  int column_index(const std::string& name) const;  // -1 if absent
  const Value& cell(size_t row, const std::string& name) const;

  static QueryOutcome failed(std::string code, std::string message);
};

struct ValidationVerdict {
  enum class Status { PASS, FAIL };
  enum class Reason { ok, empty_result, execution_error };
  Status status = Status::FAIL;
  Reason reason = Reason::execution_error;

  bool pass() const { return status == Status::PASS; }
};

std::string to_string(ValidationVerdict::Reason r);

// ---------------------------------------------------------------------------
// Report-side types.

struct OutlineSection {
  std::string title;
  std::string intent;
  std::vector<std::string> evidence_subtasks;
};

struct ReportOutline {
  std::vector<OutlineSection> sections;

  std::vector<std::string> violations(const ResearchPlan& plan) const;
};

struct ReportDraft {
  std::string markdown;
  // Evidence marker token (e.g. "Q2") -> index into session query history.
  std::map<std::string, int> evidence_index;
  int revision_index = 0;
};

struct QualityAssessment {
  double grounding = 0.0;
  double coverage = 0.0;
  double coherence = 0.0;
  double actionability = 0.0;
  std::string feedback;

  // Arithmetic mean of the four sub-scores.
  double score() const {
    return (grounding + coverage + coherence + actionability) / 4.0;
  }
};

// ---------------------------------------------------------------------------
// Run metrics, mirroring the analysis / report-writing / total split.

struct RunMetrics {
  int64_t analysis_time_us = 0;  // initialization + execution phases
  int64_t report_time_us = 0;    // synthesis phase
  int64_t llm_calls = 0;
  int64_t sql_executions = 0;
  int64_t revisions = 0;
  double query_cost = 0.0;

  int64_t total_time_us() const { return analysis_time_us + report_time_us; }
  double analysis_time_s() const { return analysis_time_us / 1e6; }
  double report_time_s() const { return report_time_us / 1e6; }
  double total_time_s() const { return total_time_us() / 1e6; }
};

nlohmann::json to_json(const RunMetrics& m);
RunMetrics metrics_from_json(const nlohmann::json& j);

// ---------------------------------------------------------------------------
// JSON round-trips (checkpoint format + stage variables).

nlohmann::json to_json(const ResearchBrief& b);
ResearchBrief brief_from_json(const nlohmann::json& j);

nlohmann::json to_json(const SchemaCatalog& c);
SchemaCatalog catalog_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ResearchPlan& p);
ResearchPlan plan_from_json(const nlohmann::json& j);

nlohmann::json to_json(const QueryCandidate& c);
QueryCandidate candidate_from_json(const nlohmann::json& j);

nlohmann::json to_json(const QueryOutcome& o);
QueryOutcome outcome_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ValidationVerdict& v);
ValidationVerdict verdict_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ReportOutline& o);
ReportOutline outline_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ReportDraft& d);
ReportDraft draft_from_json(const nlohmann::json& j);

nlohmann::json to_json(const QualityAssessment& q);
QualityAssessment assessment_from_json(const nlohmann::json& j);

}  // namespace dar
