#include "dar/core/types.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace dar {

std::string to_string(LogicalType t) {
  switch (t) {
    case LogicalType::String: return "string";
    case LogicalType::Integer: return "integer";
    case LogicalType::Float: return "float";
    case LogicalType::Boolean: return "boolean";
    case LogicalType::Timestamp: return "timestamp";
    case LogicalType::GeoPoint: return "geo_point";
  }
  return "string";
}

LogicalType logical_type_from_string(const std::string& s) {
  if (s == "string") return LogicalType::String;
  if (s == "integer") return LogicalType::Integer;
  if (s == "float") return LogicalType::Float;
  if (s == "boolean") return LogicalType::Boolean;
  if (s == "timestamp") return LogicalType::Timestamp;
  if (s == "geo_point") return LogicalType::GeoPoint;
  throw DarError("bad_logical_type", "unknown logical type: " + s);
}

namespace {

std::string trim_copy(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

void ResearchBrief::validate() const {
  if (trim_copy(objective).empty()) {
    throw DarError("invalid_brief", "brief objective is empty");
  }
  auto bad = [](double v) { return !std::isfinite(v) || v < 0; };
  if (bad(constraints.max_query_cost) || bad(constraints.max_wall_time_s)) {
    throw DarError("invalid_brief", "constraints must be finite and >= 0");
  }
  if (constraints.max_llm_calls < 1) {
    throw DarError("invalid_brief", "max_llm_calls must be >= 1");
  }
}

const ColumnInfo* TableInfo::find_column(const std::string& name) const {
  for (const auto& c : columns) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

void SchemaCatalog::validate() const {
  std::set<std::string> ds_ids;
  for (const auto& ds : datasets) {
    if (!ds_ids.insert(ds.id).second) {
      throw DarError("invalid_catalog", "duplicate dataset id: " + ds.id);
    }
    std::set<std::string> table_ids;
    for (const auto& t : ds.tables) {
      if (!table_ids.insert(t.id).second) {
        throw DarError("invalid_catalog", "duplicate table id: " + t.id);
      }
      if (t.row_count < 0) {
        throw DarError("invalid_catalog", "negative row_count in " + t.id);
      }
      std::set<std::string> col_names;
      for (const auto& c : t.columns) {
        if (!col_names.insert(c.name).second) {
          throw DarError("invalid_catalog",
                         "duplicate column " + c.name + " in " + t.id);
        }
        if (c.null_fraction < 0.0 || c.null_fraction > 1.0) {
          throw DarError("invalid_catalog",
                         "null_fraction out of [0,1] for " + c.name);
        }
      }
    }
  }
}

const DatasetInfo* SchemaCatalog::find_dataset(const std::string& id) const {
  for (const auto& ds : datasets) {
    if (ds.id == id) return &ds;
  }
  return nullptr;
}

const TableInfo* SchemaCatalog::find_table(const std::string& table_id) const {
  for (const auto& ds : datasets) {
    for (const auto& t : ds.tables) {
      if (t.id == table_id) return &t;
    }
  }
  return nullptr;
}

std::string SchemaCatalog::to_prompt_text() const {
  std::ostringstream out;
  for (const auto& ds : datasets) {
    out << "dataset " << ds.id;
    if (!ds.description.empty()) out << " -- " << ds.description;
    out << "\n";
    for (const auto& t : ds.tables) {
      out << "  table " << t.id << " (" << t.row_count << " rows):";
      for (const auto& c : t.columns) {
        out << " " << c.name << ":" << to_string(c.logical_type);
      }
      out << "\n";
    }
  }
  return out.str();
}

std::string to_string(ExpectedOutput o) {
  switch (o) {
    case ExpectedOutput::Table: return "table";
    case ExpectedOutput::Scalar: return "scalar";
    case ExpectedOutput::Classification: return "classification";
    case ExpectedOutput::Narrative: return "narrative";
  }
  return "table";
}

ExpectedOutput expected_output_from_string(const std::string& s) {
  if (s == "table") return ExpectedOutput::Table;
  if (s == "scalar") return ExpectedOutput::Scalar;
  if (s == "classification") return ExpectedOutput::Classification;
  if (s == "narrative") return ExpectedOutput::Narrative;
  throw DarError("bad_expected_output", "unknown expected_output: " + s);
}

std::vector<std::string> ResearchPlan::violations(
    const SchemaCatalog& catalog) const {
  std::vector<std::string> out;
  if (subtasks.empty()) out.push_back("plan has no subtasks");
  std::set<std::string> ids;
  for (const auto& st : subtasks) {
    if (st.id.empty()) out.push_back("subtask with empty id");
    if (!ids.insert(st.id).second) {
      out.push_back("duplicate subtask id: " + st.id);
    }
    for (const auto& ref : st.referenced_tables) {
      if (catalog.find_table(ref) == nullptr) {
        out.push_back("subtask " + st.id + " references unknown table: " + ref);
      }
    }
  }
  double total = 0;
  for (const auto& [id, frac] : budget_allocation) {
    total += frac;
    if (frac < 0) out.push_back("negative budget fraction for " + id);
  }
  if (total > 1.0 + 1e-9) out.push_back("budget fractions sum above 1");
  return out;
}

int QueryOutcome::column_index(const std::string& name) const {
  for (size_t i = 0; i < columns.size(); ++i) {
    if (columns[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

const Value& QueryOutcome::cell(size_t row, const std::string& name) const {
  static const Value kNull{};
  int idx = column_index(name);
  if (idx < 0 || row >= rows.size()) return kNull;
  return rows[row][static_cast<size_t>(idx)];
}

QueryOutcome QueryOutcome::failed(std::string code, std::string message) {
  QueryOutcome o;
  o.error = QueryError{std::move(code), std::move(message)};
  return o;
}

std::string to_string(ValidationVerdict::Reason r) {
  switch (r) {
    case ValidationVerdict::Reason::ok: return "ok";
    case ValidationVerdict::Reason::empty_result: return "empty_result";
    case ValidationVerdict::Reason::execution_error: return "execution_error";
  }
  return "execution_error";
}

std::vector<std::string> ReportOutline::violations(
    const ResearchPlan& plan) const {
  std::vector<std::string> out;
  if (sections.size() < 3) out.push_back("outline needs at least 3 sections");
  for (const auto& s : sections) {
    if (s.title.empty()) out.push_back("section with empty title");
    for (const auto& id : s.evidence_subtasks) {
      bool found = std::any_of(plan.subtasks.begin(), plan.subtasks.end(),
                               [&](const Subtask& st) { return st.id == id; });
      if (!found) {
        out.push_back("section '" + s.title +
                      "' references unknown subtask: " + id);
      }
    }
  }
  return out;
}

nlohmann::json to_json(const RunMetrics& m) {
  return {{"analysis_time_s", m.analysis_time_s()},
          {"report_time_s", m.report_time_s()},
          {"total_time_s", m.total_time_s()},
          {"analysis_time_us", m.analysis_time_us},
          {"report_time_us", m.report_time_us},
          {"total_time_us", m.total_time_us()},
          {"llm_calls", m.llm_calls},
          {"sql_executions", m.sql_executions},
          {"revisions", m.revisions},
          {"query_cost_units", m.query_cost}};
}

RunMetrics metrics_from_json(const nlohmann::json& j) {
  RunMetrics m;
  m.analysis_time_us = j.value("analysis_time_us", int64_t{0});
  m.report_time_us = j.value("report_time_us", int64_t{0});
  m.llm_calls = j.value("llm_calls", int64_t{0});
  m.sql_executions = j.value("sql_executions", int64_t{0});
  m.revisions = j.value("revisions", int64_t{0});
  m.query_cost = j.value("query_cost_units", 0.0);
  return m;
}

// --------------------------------------------------------------------------
// JSON round-trips.

nlohmann::json to_json(const ResearchBrief& b) {
  return {{"objective", b.objective},
          {"target_scope", b.target_scope},
          {"constraints",
           {{"max_query_cost", b.constraints.max_query_cost},
            {"max_wall_time_s", b.constraints.max_wall_time_s},
            {"max_llm_calls", b.constraints.max_llm_calls}}}};
}

ResearchBrief brief_from_json(const nlohmann::json& j) {
  ResearchBrief b;
  b.objective = j.at("objective").get<std::string>();
  b.target_scope = j.value("target_scope", std::vector<std::string>{});
  if (j.contains("constraints")) {
    const auto& c = j.at("constraints");
    b.constraints.max_query_cost = c.value("max_query_cost", 1.0e6);
    b.constraints.max_wall_time_s = c.value("max_wall_time_s", 3600.0);
    b.constraints.max_llm_calls = c.value("max_llm_calls", int64_t{1000});
  }
  return b;
}

nlohmann::json to_json(const SchemaCatalog& c) {
  nlohmann::json datasets = nlohmann::json::array();
  for (const auto& ds : c.datasets) {
    nlohmann::json tables = nlohmann::json::array();
    for (const auto& t : ds.tables) {
      nlohmann::json cols = nlohmann::json::array();
      for (const auto& col : t.columns) {
        cols.push_back({{"name", col.name},
                        {"logical_type", to_string(col.logical_type)},
                        {"nullable", col.nullable},
                        {"null_fraction", col.null_fraction}});
      }
      tables.push_back(
          {{"id", t.id}, {"row_count", t.row_count}, {"columns", cols}});
    }
    datasets.push_back(
        {{"id", ds.id}, {"description", ds.description}, {"tables", tables}});
  }
  return {{"datasets", datasets}};
}

SchemaCatalog catalog_from_json(const nlohmann::json& j) {
  SchemaCatalog c;
  for (const auto& dj : j.at("datasets")) {
    DatasetInfo ds;
    ds.id = dj.at("id").get<std::string>();
    ds.description = dj.value("description", "");
    for (const auto& tj : dj.at("tables")) {
      TableInfo t;
      t.id = tj.at("id").get<std::string>();
      t.row_count = tj.at("row_count").get<int64_t>();
      for (const auto& cj : tj.at("columns")) {
        ColumnInfo col;
        col.name = cj.at("name").get<std::string>();
        col.logical_type =
            logical_type_from_string(cj.at("logical_type").get<std::string>());
        col.nullable = cj.value("nullable", true);
        col.null_fraction = cj.value("null_fraction", 0.0);
        t.columns.push_back(std::move(col));
      }
      ds.tables.push_back(std::move(t));
    }
    c.datasets.push_back(std::move(ds));
  }
  return c;
}

nlohmann::json to_json(const ResearchPlan& p) {
  nlohmann::json subtasks = nlohmann::json::array();
  for (const auto& st : p.subtasks) {
    subtasks.push_back({{"id", st.id},
                        {"objective", st.objective},
                        {"referenced_tables", st.referenced_tables},
                        {"expected_output", to_string(st.expected_output)}});
  }
  return {{"subtasks", subtasks}, {"budget_allocation", p.budget_allocation}};
}

ResearchPlan plan_from_json(const nlohmann::json& j) {
  ResearchPlan p;
  for (const auto& sj : j.at("subtasks")) {
    Subtask st;
    st.id = sj.at("id").is_string() ? sj.at("id").get<std::string>()
                                    : sj.at("id").dump();
    st.objective = sj.at("objective").get<std::string>();
    st.referenced_tables =
        sj.value("referenced_tables", std::vector<std::string>{});
    st.expected_output =
        expected_output_from_string(sj.value("expected_output", "table"));
    p.subtasks.push_back(std::move(st));
  }
  if (j.contains("budget_allocation")) {
    p.budget_allocation =
        j.at("budget_allocation").get<std::map<std::string, double>>();
  }
  return p;
}

nlohmann::json to_json(const QueryCandidate& c) {
  return {{"subtask_id", c.subtask_id},
          {"sql_text", c.sql_text},
          {"uses_ai_functions", c.uses_ai_functions},
          {"rationale", c.rationale},
          {"revision_index", c.revision_index}};
}

QueryCandidate candidate_from_json(const nlohmann::json& j) {
  QueryCandidate c;
  c.subtask_id = j.at("subtask_id").get<std::string>();
  c.sql_text = j.at("sql_text").get<std::string>();
  c.uses_ai_functions = j.value("uses_ai_functions", false);
  c.rationale = j.value("rationale", "");
  c.revision_index = j.value("revision_index", 0);
  return c;
}

nlohmann::json to_json(const QueryOutcome& o) {
  nlohmann::json cols = nlohmann::json::array();
  for (const auto& c : o.columns) {
    cols.push_back({{"name", c.name}, {"type", to_string(c.type)}});
  }
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : o.rows) {
    nlohmann::json row = nlohmann::json::array();
    for (const auto& v : r) row.push_back(value_to_json(v));
    rows.push_back(std::move(row));
  }
  nlohmann::json j = {{"columns", cols},
                      {"rows", rows},
                      {"elapsed_s", o.elapsed_s},
                      {"cost", o.cost},
                      {"truncated", o.truncated},
                      {"warnings", o.warnings}};
  if (o.error) {
    j["error"] = {{"code", o.error->code}, {"message", o.error->message}};
  }
  return j;
}

QueryOutcome outcome_from_json(const nlohmann::json& j) {
  QueryOutcome o;
  for (const auto& cj : j.at("columns")) {
    o.columns.push_back({cj.at("name").get<std::string>(),
                         logical_type_from_string(cj.at("type"))});
  }
  for (const auto& rj : j.at("rows")) {
    std::vector<Value> row;
    for (const auto& vj : rj) row.push_back(value_from_json(vj));
    o.rows.push_back(std::move(row));
  }
  if (j.contains("error")) {
    o.error = QueryError{j["error"].at("code").get<std::string>(),
                         j["error"].at("message").get<std::string>()};
  }
  o.elapsed_s = j.value("elapsed_s", 0.0);
  o.cost = j.value("cost", 0.0);
  o.truncated = j.value("truncated", false);
  o.warnings = j.value("warnings", std::vector<std::string>{});
  return o;
}

nlohmann::json to_json(const ValidationVerdict& v) {
  return {{"status", v.pass() ? "PASS" : "FAIL"},
          {"reason", to_string(v.reason)}};
}

ValidationVerdict verdict_from_json(const nlohmann::json& j) {
  ValidationVerdict v;
  v.status = j.at("status").get<std::string>() == "PASS"
                 ? ValidationVerdict::Status::PASS
                 : ValidationVerdict::Status::FAIL;
  std::string reason = j.at("reason").get<std::string>();
  if (reason == "ok") {
    v.reason = ValidationVerdict::Reason::ok;
  } else if (reason == "empty_result") {
    v.reason = ValidationVerdict::Reason::empty_result;
  } else {
    v.reason = ValidationVerdict::Reason::execution_error;
  }
  return v;
}

nlohmann::json to_json(const ReportOutline& o) {
  nlohmann::json sections = nlohmann::json::array();
  for (const auto& s : o.sections) {
    sections.push_back({{"title", s.title},
                        {"intent", s.intent},
                        {"evidence_subtasks", s.evidence_subtasks}});
  }
  return {{"sections", sections}};
}

ReportOutline outline_from_json(const nlohmann::json& j) {
  ReportOutline o;
  for (const auto& sj : j.at("sections")) {
    OutlineSection s;
    s.title = sj.at("title").get<std::string>();
    s.intent = sj.value("intent", "");
    s.evidence_subtasks =
        sj.value("evidence_subtasks", std::vector<std::string>{});
    o.sections.push_back(std::move(s));
  }
  return o;
}

nlohmann::json to_json(const ReportDraft& d) {
  return {{"markdown", d.markdown},
          {"evidence_index", d.evidence_index},
          {"revision_index", d.revision_index}};
}

ReportDraft draft_from_json(const nlohmann::json& j) {
  ReportDraft d;
  d.markdown = j.at("markdown").get<std::string>();
  d.evidence_index = j.value("evidence_index", std::map<std::string, int>{});
  d.revision_index = j.value("revision_index", 0);
  return d;
}

nlohmann::json to_json(const QualityAssessment& q) {
  return {{"grounding", q.grounding},
          {"coverage", q.coverage},
          {"coherence", q.coherence},
          {"actionability", q.actionability},
          {"feedback", q.feedback},
          {"score", q.score()}};
}

QualityAssessment assessment_from_json(const nlohmann::json& j) {
  QualityAssessment q;
  q.grounding = j.at("grounding").get<double>();
  q.coverage = j.at("coverage").get<double>();
  q.coherence = j.at("coherence").get<double>();
  q.actionability = j.at("actionability").get<double>();
  q.feedback = j.value("feedback", "");
  return q;
}

}  // namespace dar
