#include "dar/core/session.hpp"

#include <chrono>

namespace dar {

int64_t utc_now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

SessionState SessionState::new_session(const ResearchBrief& brief) {
  brief.validate();
  SessionState s;
  s.brief_ = brief;
  // The one-shot brief is the opening (and only) user turn.
  s.append_log("user", brief.objective);
  return s;
}

void SessionState::append_log(const std::string& role,
                              const std::string& content) {
  log_.push_back(LogEntry{role, content, utc_now_ms()});
}

void SessionState::append_query(QueryAttempt attempt) {
  history_.push_back(std::move(attempt));
}

void SessionState::set_stage(const std::string& key,
                             const std::string& serialized) {
  if (key.empty()) throw DarError("invalid_stage_key", "stage key is empty");
  stage_[key] = serialized;
}

std::optional<std::string> SessionState::get_stage(
    const std::string& key) const {
  auto it = stage_.find(key);
  if (it == stage_.end()) return std::nullopt;
  return it->second;
}

void SessionState::set_stage_json(const std::string& key,
                                  const nlohmann::json& data) {
  set_stage(key, nlohmann::json{{"v", 1}, {"data", data}}.dump());
}

std::optional<nlohmann::json> SessionState::get_stage_json(
    const std::string& key) const {
  auto raw = get_stage(key);
  if (!raw) return std::nullopt;
  nlohmann::json env = nlohmann::json::parse(*raw);
  if (!env.is_object() || env.value("v", 0) != 1 || !env.contains("data")) {
    throw DarError("bad_stage_value",
                   "stage variable '" + key + "' is not a v1 envelope");
  }
  return env["data"];
}

void SessionState::count_llm_call() {
  if (counters_.llm_calls >= brief_.constraints.max_llm_calls) {
    throw BudgetExhausted("llm call budget exhausted (" +
                          std::to_string(brief_.constraints.max_llm_calls) +
                          " calls)");
  }
  counters_.llm_calls++;
}

int64_t SessionState::remaining_llm_budget() const {
  return brief_.constraints.max_llm_calls - counters_.llm_calls;
}

void SessionState::count_sql_execution(double cost) {
  counters_.sql_executions++;
  counters_.query_cost += cost;
}

nlohmann::json SessionState::to_json() const {
  nlohmann::json log = nlohmann::json::array();
  for (const auto& e : log_) {
    log.push_back({{"role", e.role},
                   {"content", e.content},
                   {"timestamp_ms", e.timestamp_ms}});
  }
  nlohmann::json history = nlohmann::json::array();
  for (const auto& a : history_) {
    history.push_back({{"candidate", dar::to_json(a.candidate)},
                       {"outcome", dar::to_json(a.outcome)},
                       {"verdict", dar::to_json(a.verdict)}});
  }
  return {{"brief", dar::to_json(brief_)},
          {"conversation_log", log},
          {"query_history", history},
          {"stage_variables", stage_},
          {"counters",
           {{"query_review_iterations", counters_.query_review_iterations},
            {"revision_iterations", counters_.revision_iterations},
            {"llm_calls", counters_.llm_calls},
            {"sql_executions", counters_.sql_executions},
            {"query_cost", counters_.query_cost}}}};
}

SessionState SessionState::from_json(const nlohmann::json& j) {
  SessionState s;
  s.brief_ = brief_from_json(j.at("brief"));
  for (const auto& ej : j.at("conversation_log")) {
    s.log_.push_back(LogEntry{ej.at("role").get<std::string>(),
                              ej.at("content").get<std::string>(),
                              ej.value("timestamp_ms", int64_t{0})});
  }
  for (const auto& aj : j.at("query_history")) {
    QueryAttempt a;
    a.candidate = candidate_from_json(aj.at("candidate"));
    a.outcome = outcome_from_json(aj.at("outcome"));
    a.verdict = verdict_from_json(aj.at("verdict"));
    s.history_.push_back(std::move(a));
  }
  s.stage_ = j.value("stage_variables", std::map<std::string, std::string>{});
  const auto& c = j.at("counters");
  s.counters_.query_review_iterations =
      c.value("query_review_iterations", int64_t{0});
  s.counters_.revision_iterations = c.value("revision_iterations", int64_t{0});
  s.counters_.llm_calls = c.value("llm_calls", int64_t{0});
  s.counters_.sql_executions = c.value("sql_executions", int64_t{0});
  s.counters_.query_cost = c.value("query_cost", 0.0);
  return s;
}

}  // namespace dar
