#include "dar/agents/sql_pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

namespace dar::agents {

namespace {

std::string lower(std::string s) {
  for (char& c : s) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return s;
}

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// LLMs habitually wrap SQL in code fences; peel them off.
std::string strip_code_fences(const std::string& reply) {
  std::string t = trim(reply);
  if (t.rfind("```", 0) != 0) return t;
  size_t first_newline = t.find('\n');
  if (first_newline == std::string::npos) return t;
  size_t closing = t.rfind("```");
  if (closing <= first_newline) return t;
  return trim(t.substr(first_newline + 1, closing - first_newline - 1));
}

std::vector<std::string> grounding_errors(const QuerySpec& spec,
                                          const SchemaCatalog& catalog) {
  std::vector<std::string> errs;
  std::vector<const TableInfo*> tables;
  for (const auto& t : spec.tables) {
    const TableInfo* info = catalog.find_table(t);
    if (!info) {
      errs.push_back("unknown table: " + t);
    } else {
      tables.push_back(info);
    }
  }
  for (const auto& c : spec.columns) {
    std::string cl = lower(c);
    bool found = false;
    for (const TableInfo* t : tables) {
      for (const auto& col : t->columns) {
        if (lower(col.name) == cl) {
          found = true;
          break;
        }
      }
      if (found) break;
    }
    if (!found) errs.push_back("column not in the referenced tables: " + c);
  }
  return errs;
}

}  // namespace

std::string QuerySpec::to_prompt_text() const {
  std::ostringstream out;
  out << "tables: ";
  for (size_t i = 0; i < tables.size(); ++i) out << (i ? ", " : "") << tables[i];
  out << "\ncolumns: ";
  for (size_t i = 0; i < columns.size(); ++i) {
    out << (i ? ", " : "") << columns[i];
  }
  out << "\nfilters: ";
  for (size_t i = 0; i < filters.size(); ++i) out << (i ? "; " : "") << filters[i];
  out << "\naggregation: " << aggregation;
  return out.str();
}

nlohmann::json to_json(const QuerySpec& s) {
  return {{"tables", s.tables},
          {"columns", s.columns},
          {"filters", s.filters},
          {"aggregation", s.aggregation}};
}

QuerySpec queryspec_from_json(const nlohmann::json& j) {
  QuerySpec s;
  s.tables = j.value("tables", std::vector<std::string>{});
  s.columns = j.value("columns", std::vector<std::string>{});
  s.filters = j.value("filters", std::vector<std::string>{});
  s.aggregation = j.value("aggregation", "none");
  return s;
}

QuerySpec understand(SessionState& session, llm::Gateway& gateway,
                     const Subtask& subtask, const SchemaCatalog& catalog) {
  llm::LlmRequest req;
  req.template_id = "understand";
  req.variables["subtask"] = subtask.objective;
  req.variables["expected_output"] = to_string(subtask.expected_output);
  req.variables["catalog"] = catalog.to_prompt_text();
  req.shape = llm::LlmRequest::Shape::Structured;
  req.schema_id = "queryspec.v1";

  llm::LlmResponse res = gateway.generate(session, req);
  QuerySpec spec = queryspec_from_json(res.parsed);
  std::vector<std::string> errors = grounding_errors(spec, catalog);
  if (!errors.empty()) {
    std::ostringstream joined;
    for (size_t i = 0; i < errors.size(); ++i) {
      if (i) joined << "; ";
      joined << errors[i];
    }
    llm::LlmRequest repair = req;
    repair.context_suffix =
        "Your previous answer was not grounded in the schema: " +
        joined.str() + "\nUse only tables and columns that exist.";
    res = gateway.generate(session, repair);
    spec = queryspec_from_json(res.parsed);
    errors = grounding_errors(spec, catalog);
    if (!errors.empty()) {
      throw DarError("spec_ungrounded",
                     "query spec still ungrounded after repair: " +
                         joined.str());
    }
  }
  return spec;
}

QueryCandidate generate_sql(SessionState& session, llm::Gateway& gateway,
                            const QuerySpec& spec, const std::string& dialect,
                            const std::string& subtask_id,
                            const SchemaCatalog& catalog) {
  if (spec.tables.empty()) {
    throw DarError("empty_spec", "query spec names no tables");
  }
  llm::LlmRequest req;
  req.template_id = "generate_sql";
  req.variables["spec"] = spec.to_prompt_text();
  req.variables["dialect"] = dialect;
  req.variables["catalog"] = catalog.to_prompt_text();
  llm::LlmResponse res = gateway.generate(session, req);

  QueryCandidate candidate;
  candidate.subtask_id = subtask_id;
  candidate.sql_text = strip_code_fences(res.text);
  if (candidate.sql_text.empty()) {
    throw DarError("llm_error", "query generation returned empty SQL");
  }
  candidate.rationale = "generated from spec: " + spec.to_prompt_text();
  candidate.revision_index = 0;
  try {
    candidate.uses_ai_functions =
        !aisql::scan_ai_calls(candidate.sql_text).empty();
  } catch (const aisql::ParseError&) {
    candidate.uses_ai_functions = false;  // execution will surface the error
  }
  return candidate;
}

ValidationVerdict validate(const QueryOutcome& outcome) {
  ValidationVerdict v;
  if (outcome.error) {
    v.status = ValidationVerdict::Status::FAIL;
    v.reason = ValidationVerdict::Reason::execution_error;
    return v;
  }
  if (outcome.rows.empty()) {
    v.status = ValidationVerdict::Status::FAIL;
    v.reason = ValidationVerdict::Reason::empty_result;
    return v;
  }
  v.status = ValidationVerdict::Status::PASS;
  v.reason = ValidationVerdict::Reason::ok;
  return v;
}

QueryCandidate review_and_revise(SessionState& session, llm::Gateway& gateway,
                                 const QueryCandidate& candidate,
                                 const QueryOutcome& outcome,
                                 const ValidationVerdict& verdict,
                                 const QuerySpec& spec,
                                 const PipelineConfig& config) {
  if (verdict.pass()) {
    throw DarError("invalid_argument", "review called on a passing outcome");
  }
  if (candidate.revision_index >= config.max_review_iterations) {
    throw DarError("iterations_exhausted",
                   "revision bound reached (" +
                       std::to_string(config.max_review_iterations) + ")");
  }
  std::string failure;
  if (outcome.error) {
    failure = "execution error " + outcome.error->code + ": " +
              outcome.error->message;
  } else {
    failure = "empty result (0 rows)";
  }

  llm::LlmRequest req;
  req.template_id = "review";
  req.variables["sql"] = candidate.sql_text;
  req.variables["failure"] = failure;
  req.variables["spec"] = spec.to_prompt_text();
  llm::LlmResponse res = gateway.generate(session, req);

  QueryCandidate revised;
  revised.subtask_id = candidate.subtask_id;
  revised.sql_text = strip_code_fences(res.text);
  if (revised.sql_text.empty()) {
    throw DarError("llm_error", "query review returned empty SQL");
  }
  revised.rationale = "revision of: " + failure;
  revised.revision_index = candidate.revision_index + 1;
  try {
    revised.uses_ai_functions =
        !aisql::scan_ai_calls(revised.sql_text).empty();
  } catch (const aisql::ParseError&) {
    revised.uses_ai_functions = false;
  }
  session.count_review_iteration();
  return revised;
}

SubtaskRun run_subtask(SessionState& session, llm::Gateway& gateway,
                       db::Connection& conn, const Subtask& subtask,
                       const SchemaCatalog& catalog,
                       const PipelineConfig& config,
                       const db::QueryLimits& limits,
                       const aisql::ShimOptions& shim_options) {
  SubtaskRun run;
  QuerySpec spec;
  QueryCandidate candidate;
  try {
    spec = understand(session, gateway, subtask, catalog);
    candidate = generate_sql(session, gateway, spec, conn.dialect(),
                             subtask.id, catalog);
  } catch (const BudgetExhausted&) {
    throw;
  } catch (const DarError& e) {
    run.failure_reason = std::string(e.code()) + ": " + e.what();
    return run;
  }

  while (true) {
    QueryOutcome outcome = aisql::execute_with_ai(
        conn, gateway, session, candidate.sql_text, limits, shim_options);
    session.count_sql_execution(outcome.cost);
    run.executions++;
    ValidationVerdict verdict = validate(outcome);
    session.append_query(QueryAttempt{candidate, outcome, verdict});

    if (verdict.pass()) {
      run.success = true;
      run.final_candidate = candidate;
      run.final_outcome = std::move(outcome);
      return run;
    }
    if (candidate.revision_index >= config.max_review_iterations) {
      run.final_candidate = candidate;
      run.failure_reason =
          outcome.error
              ? "iterations_exhausted: last error " + outcome.error->code
              : "iterations_exhausted: result stayed empty";
      run.final_outcome = std::move(outcome);
      return run;
    }
    try {
      candidate = review_and_revise(session, gateway, candidate, outcome,
                                    verdict, spec, config);
    } catch (const BudgetExhausted&) {
      throw;
    } catch (const DarError& e) {
      run.failure_reason = std::string(e.code()) + ": " + e.what();
      run.final_candidate = candidate;
      run.final_outcome = std::move(outcome);
      return run;
    }
  }
}

std::string summarize_outcome(const QueryOutcome& outcome, int row_cap) {
  std::ostringstream out;
  if (outcome.error) {
    out << "error " << outcome.error->code << ": " << outcome.error->message;
    return out.str();
  }
  out << outcome.rows.size() << " row(s)";
  if (outcome.truncated) out << " (truncated)";
  out << "\ncolumns:";
  for (const auto& c : outcome.columns) {
    out << " " << c.name << ":" << to_string(c.type);
  }
  out << "\n";
  size_t shown = std::min(outcome.rows.size(), static_cast<size_t>(row_cap));
  for (size_t i = 0; i < shown; ++i) {
    out << "| ";
    for (size_t j = 0; j < outcome.rows[i].size(); ++j) {
      if (j) out << " | ";
      out << value_to_display(outcome.rows[i][j]);
    }
    out << " |\n";
  }
  if (outcome.rows.size() > shown) {
    out << "... " << (outcome.rows.size() - shown) << " more row(s)\n";
  }
  // Per-column digest over the full result.
  for (size_t j = 0; j < outcome.columns.size(); ++j) {
    const Value* min_v = nullptr;
    const Value* max_v = nullptr;
    std::set<std::string> distinct;
    for (const auto& row : outcome.rows) {
      const Value& v = row[j];
      if (is_null(v)) continue;
      if (!min_v || value_compare(v, *min_v) < 0) min_v = &v;
      if (!max_v || value_compare(v, *max_v) > 0) max_v = &v;
      distinct.insert(value_to_json(v).dump());
    }
    out << "digest " << outcome.columns[j].name << ": min="
        << (min_v ? value_to_display(*min_v) : "null")
        << " max=" << (max_v ? value_to_display(*max_v) : "null")
        << " distinct=" << distinct.size() << "\n";
  }
  return out.str();
}

}  // namespace dar::agents
