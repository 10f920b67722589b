#include "dar/orch/config.hpp"

#include <cstdlib>
#include <fstream>

namespace dar::orch {

DarConfig DarConfig::from_json(const nlohmann::json& j) {
  DarConfig c;
  if (j.contains("llm")) {
    const auto& l = j.at("llm");
    c.llm.provider = l.value("provider", "scripted");
    if (c.llm.provider != "scripted" && c.llm.provider != "http") {
      throw ConfigError("llm.provider must be scripted or http");
    }
    c.llm.transcript = l.value("transcript", "");
    c.llm.endpoint = l.value("endpoint", "");
    c.llm.model = l.value("model", "");
    c.llm.token_env = l.value("token_env", "DAR_API_TOKEN");
    c.llm.prompts_dir = l.value("prompts_dir", "");
    if (l.contains("temperatures")) {
      c.llm.temperatures =
          l.at("temperatures").get<std::map<std::string, double>>();
    }
  }
  if (j.contains("connection")) {
    c.connection = db::ConnectionConfig::from_json(j.at("connection"));
  } else {
    throw ConfigError("config needs a connection section");
  }
  if (j.contains("planner")) {
    c.run.planner.min_subtasks = j["planner"].value("min_subtasks", 3);
    c.run.planner.max_subtasks = j["planner"].value("max_subtasks", 8);
  }
  if (j.contains("pipeline")) {
    c.run.pipeline.max_review_iterations =
        j["pipeline"].value("max_review_iterations", 3);
    c.run.pipeline.result_summary_row_cap =
        j["pipeline"].value("result_summary_row_cap", 50);
  }
  if (j.contains("report")) {
    c.run.escalation.theta = j["report"].value("theta", 0.75);
    c.run.escalation.max_revisions = j["report"].value("max_revisions", 3);
    if (c.run.escalation.theta < 0.0 || c.run.escalation.theta > 1.0) {
      throw ConfigError("report.theta must be in [0,1]");
    }
  }
  if (j.contains("limits")) {
    c.run.limits.max_rows = j["limits"].value("max_rows", int64_t{1000});
    c.run.limits.timeout_s = j["limits"].value("timeout_s", 120.0);
  }
  if (j.contains("shim")) {
    c.run.shim.fanout_width = j["shim"].value("fanout_width", 4);
  }
  if (j.contains("budget")) {
    c.budget.max_llm_calls =
        j["budget"].value("max_llm_calls", int64_t{1000});
    c.budget.max_query_cost = j["budget"].value("max_query_cost", 1.0e6);
    c.budget.max_wall_time_s = j["budget"].value("max_wall_time_s", 3600.0);
  }
  return c;
}

DarConfig DarConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed config " + path + ": " + e.what());
  }
  return from_json(j);
}

std::shared_ptr<llm::Backend> make_backend(const LlmConfig& config) {
  if (config.provider == "scripted") {
    if (config.transcript.empty()) {
      throw ConfigError("scripted provider needs llm.transcript");
    }
    return llm::ScriptedBackend::from_file(config.transcript);
  }
  if (config.endpoint.empty()) {
    throw ConfigError("http provider needs llm.endpoint");
  }
  const char* token =
      config.token_env.empty() ? nullptr : std::getenv(config.token_env.c_str());
  return std::make_shared<llm::HttpBackend>(config.endpoint, config.model,
                                            token ? token : "");
}

std::unique_ptr<llm::Gateway> make_gateway(const LlmConfig& config) {
  llm::TemplateRegistry templates = llm::TemplateRegistry::builtin();
  if (!config.prompts_dir.empty()) {
    templates.load_directory(config.prompts_dir);
  }
  auto gateway = std::make_unique<llm::Gateway>(
      make_backend(config), std::move(templates),
      llm::SchemaRegistry::builtin());
  for (const auto& [id, t] : config.temperatures) {
    gateway->set_temperature(id, t);
  }
  return gateway;
}

}  // namespace dar::orch
