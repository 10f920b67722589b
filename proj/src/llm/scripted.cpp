#include <fstream>
#include <regex>

#include <json.hpp>

#include "dar/llm/backend.hpp"

namespace dar::llm {

ScriptedBackend::ScriptedBackend(std::vector<ScriptedRule> rules) {
  if (rules.empty()) {
    throw ConfigError("scripted backend needs at least one rule");
  }
  for (auto& r : rules) rules_.push_back(LiveRule{std::move(r), false});
}

std::shared_ptr<ScriptedBackend> ScriptedBackend::from_file(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open transcript: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed transcript " + path + ": " + e.what());
  }
  std::vector<ScriptedRule> rules;
  for (const auto& rj : j.at("rules")) {
    ScriptedRule r;
    r.match = rj.at("match").get<std::string>();
    r.reply = rj.at("reply").get<std::string>();
    r.consume_once = rj.value("consume_once", false);
    r.is_regex = rj.value("regex", false);
    rules.push_back(std::move(r));
  }
  return std::make_shared<ScriptedBackend>(std::move(rules));
}

std::string ScriptedBackend::complete(const ChatRequest& request) {
  std::lock_guard<std::mutex> lock(mu_);
  prompts_.push_back(request.prompt);
  for (auto& lr : rules_) {
    if (lr.rule.consume_once && lr.consumed) continue;
    bool hit;
    if (lr.rule.is_regex) {
      hit = std::regex_search(request.prompt, std::regex(lr.rule.match));
    } else {
      hit = request.prompt.find(lr.rule.match) != std::string::npos;
    }
    if (hit) {
      lr.consumed = true;
      record_invocation();
      return lr.rule.reply;
    }
  }
  std::string head = request.prompt.substr(0, 160);
  throw ScriptedMiss("no scripted rule matches prompt starting: " + head);
}

std::vector<std::string> ScriptedBackend::prompt_log() const {
  std::lock_guard<std::mutex> lock(mu_);
  return prompts_;
}

}  // namespace dar::llm
