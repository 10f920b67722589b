#pragma once

#include <map>
#include <memory>
#include <string>

#include <json.hpp>

#include "dar/db/backend.hpp"
#include "dar/llm/gateway.hpp"
#include "dar/orch/orchestrator.hpp"

namespace dar::orch {

struct LlmConfig {
  std::string provider = "scripted";  // scripted | http
  std::string transcript;             // scripted: replay rules file
  std::string endpoint;               // http: base URL
  std::string model;
  std::string token_env = "DAR_API_TOKEN";
  std::string prompts_dir;            // optional template override directory
  std::map<std::string, double> temperatures;  // per-template overrides
};

// One canonical run configuration artifact; schema in docs/config.md.
struct DarConfig {
  LlmConfig llm;
  db::ConnectionConfig connection;
  RunConfig run;
  BriefConstraints budget;

  static DarConfig from_json(const nlohmann::json& j);
  static DarConfig load(const std::string& path);
};

std::shared_ptr<llm::Backend> make_backend(const LlmConfig& config);
std::unique_ptr<llm::Gateway> make_gateway(const LlmConfig& config);

}  // namespace dar::orch
