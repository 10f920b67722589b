#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dar/core/types.hpp"

namespace dar {

struct LogEntry {
  std::string role;     // "user", "assistant", "note"
  std::string content;
  int64_t timestamp_ms = 0;  // UTC, milliseconds
};

struct QueryAttempt {
  QueryCandidate candidate;
  QueryOutcome outcome;
  ValidationVerdict verdict;
};

struct Counters {
  int64_t query_review_iterations = 0;
  int64_t revision_iterations = 0;
  int64_t llm_calls = 0;
  int64_t sql_executions = 0;
  double query_cost = 0.0;
};

// Tiered per-run memory: the conversation log and query history are
// append-only; stage variables are the working memory agents hand state
// through. One session is owned by one logical thread at a time; the llm
// gateway serializes counter updates during shim fan-out.
class SessionState {
 public:
  SessionState() = default;

  // new_session: validates the brief and logs it as the opening user entry.
  static SessionState new_session(const ResearchBrief& brief);

  const ResearchBrief& brief() const { return brief_; }

  // Append-only accessors.
  const std::vector<LogEntry>& conversation_log() const { return log_; }
  const std::vector<QueryAttempt>& query_history() const { return history_; }
  void append_log(const std::string& role, const std::string& content);
  void append_query(QueryAttempt attempt);

  // Stage variables hold a self-describing serialized text form; see
  // docs/session_state.md. Absent keys read back as nullopt, not errors.
  void set_stage(const std::string& key, const std::string& serialized);
  std::optional<std::string> get_stage(const std::string& key) const;
  // Convenience wrappers using the documented {"v":1,"data":...} envelope.
  void set_stage_json(const std::string& key, const nlohmann::json& data);
  std::optional<nlohmann::json> get_stage_json(const std::string& key) const;
  const std::map<std::string, std::string>& stage_variables() const {
    return stage_;
  }

  const Counters& counters() const { return counters_; }

  // Budget-guarded increment: throws BudgetExhausted when the call would
  // push llm_calls past the brief limit, before anything is issued.
  void count_llm_call();
  int64_t remaining_llm_budget() const;
  void count_sql_execution(double cost);
  void count_review_iteration() { counters_.query_review_iterations++; }
  void count_revision() { counters_.revision_iterations++; }

  nlohmann::json to_json() const;
  static SessionState from_json(const nlohmann::json& j);

 private:
  ResearchBrief brief_;
  std::vector<LogEntry> log_;
  std::vector<QueryAttempt> history_;
  std::map<std::string, std::string> stage_;
  Counters counters_;
};

int64_t utc_now_ms();

}  // namespace dar
