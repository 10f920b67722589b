#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include <json.hpp>

#include "dar/core/session.hpp"
#include "dar/llm/backend.hpp"
#include "dar/llm/schema.hpp"
#include "dar/llm/templates.hpp"

namespace dar::llm {

struct LlmRequest {
  std::string template_id;
  std::map<std::string, std::string> variables;
  std::optional<double> temperature;  // defaults to the template's role
  int max_output_tokens = 2048;

  enum class Shape { FreeText, Structured };
  Shape shape = Shape::FreeText;
  std::string schema_id;  // required when shape == Structured

  // Repair feedback appended after the rendered template (agent-level
  // re-prompts carry the validation failures of the previous attempt).
  std::string context_suffix;
};

struct LlmResponse {
  std::string text;
  nlohmann::json parsed;  // present for structured requests
  int64_t tokens_used = 0;
  std::string provider_id;
};

// Provider-agnostic access with prompt templating and budget accounting.
// Every backend invocation is budget-checked against the session before it
// is issued and counted afterwards, so llm_calls always equals the number of
// backend invocations; a structured reply that fails validation gets exactly
// one repair re-prompt (a second counted invocation) before schema_violation
// is raised. Budget accounting is serialized for concurrent fan-out.
class Gateway {
 public:
  Gateway(std::shared_ptr<Backend> backend, TemplateRegistry templates,
          SchemaRegistry schemas);

  LlmResponse generate(SessionState& session, const LlmRequest& request);

  const TemplateRegistry& templates() const { return templates_; }
  Backend& backend() { return *backend_; }

  // Temperature overrides per template id (config: llm.temperatures).
  void set_temperature(const std::string& template_id, double t);

 private:
  std::string invoke(SessionState& session, const std::string& prompt,
                     double temperature, int max_tokens);

  std::shared_ptr<Backend> backend_;
  TemplateRegistry templates_;
  SchemaRegistry schemas_;
  std::map<std::string, double> temperature_overrides_;
  std::mutex session_mu_;
};

}  // namespace dar::llm
