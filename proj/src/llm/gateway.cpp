#include "dar/llm/gateway.hpp"

#include <sstream>

namespace dar::llm {

Gateway::Gateway(std::shared_ptr<Backend> backend, TemplateRegistry templates,
                 SchemaRegistry schemas)
    : backend_(std::move(backend)),
      templates_(std::move(templates)),
      schemas_(std::move(schemas)) {}

void Gateway::set_temperature(const std::string& template_id, double t) {
  temperature_overrides_[template_id] = t;
}

std::string Gateway::invoke(SessionState& session, const std::string& prompt,
                            double temperature, int max_tokens) {
  {
    std::lock_guard<std::mutex> lock(session_mu_);
    session.count_llm_call();  // throws BudgetExhausted before issuing
    session.append_log("user", prompt);
  }
  ChatRequest req;
  req.prompt = prompt;
  req.temperature = temperature;
  req.max_output_tokens = max_tokens;
  std::string reply = backend_->complete(req);
  {
    std::lock_guard<std::mutex> lock(session_mu_);
    session.append_log("assistant", reply);
  }
  return reply;
}

LlmResponse Gateway::generate(SessionState& session,
                              const LlmRequest& request) {
  double temperature = request.temperature.value_or(
      temperature_overrides_.count(request.template_id)
          ? temperature_overrides_.at(request.template_id)
          : templates_.default_temperature(request.template_id));
  if (temperature < 0.0 || temperature > 2.0) {
    throw DarError("invalid_request", "temperature must be in [0,2]");
  }
  if (request.max_output_tokens < 1) {
    throw DarError("invalid_request", "max_output_tokens must be >= 1");
  }
  std::string prompt = templates_.render(request.template_id,
                                         request.variables);
  if (!request.context_suffix.empty()) {
    prompt += "\n\n" + request.context_suffix;
  }

  LlmResponse response;
  response.provider_id = backend_->provider_id();
  response.text =
      invoke(session, prompt, temperature, request.max_output_tokens);
  response.tokens_used =
      static_cast<int64_t>((prompt.size() + response.text.size()) / 4);

  if (request.shape == LlmRequest::Shape::FreeText) return response;

  if (request.schema_id.empty() || !schemas_.has(request.schema_id)) {
    throw DarError("unknown_schema", "structured request names no registered "
                                     "schema: '" + request.schema_id + "'");
  }

  auto try_parse = [&](const std::string& text,
                       std::vector<std::string>& errs) -> nlohmann::json {
    nlohmann::json parsed;
    try {
      parsed = extract_json_object(text);
    } catch (const nlohmann::json::exception& e) {
      errs.push_back(e.what());
      return {};
    }
    auto schema_errs = schemas_.validate(request.schema_id, parsed);
    errs.insert(errs.end(), schema_errs.begin(), schema_errs.end());
    return parsed;
  };

  std::vector<std::string> errors;
  nlohmann::json parsed = try_parse(response.text, errors);
  if (errors.empty()) {
    response.parsed = std::move(parsed);
    return response;
  }

  // One automatic repair re-prompt, then the violation surfaces.
  std::ostringstream joined;
  for (size_t i = 0; i < errors.size(); ++i) {
    if (i) joined << "; ";
    joined << errors[i];
  }
  std::string repair_prompt =
      prompt + "\n\n" +
      templates_.render("repair", {{"errors", joined.str()}});
  response.text =
      invoke(session, repair_prompt, temperature, request.max_output_tokens);
  response.tokens_used += static_cast<int64_t>(
      (repair_prompt.size() + response.text.size()) / 4);

  errors.clear();
  parsed = try_parse(response.text, errors);
  if (!errors.empty()) {
    throw SchemaViolation("structured output failed schema '" +
                          request.schema_id + "' after repair: " +
                          joined.str());
  }
  response.parsed = std::move(parsed);
  return response;
}

}  // namespace dar::llm
