#include <chrono>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "dar/llm/backend.hpp"

namespace dar::llm {

HttpBackend::HttpBackend(std::string base_url, std::string model,
                         std::string token)
    : base_url_(std::move(base_url)),
      model_(std::move(model)),
      token_(std::move(token)) {}

std::string HttpBackend::complete(const ChatRequest& request) {
  nlohmann::json body = {
      {"model", model_},
      {"messages",
       nlohmann::json::array(
           {{{"role", "user"}, {"content", request.prompt}}})},
      {"temperature", request.temperature},
      {"max_tokens", request.max_output_tokens}};

  httplib::Headers headers;
  if (!token_.empty()) headers.emplace("Authorization", "Bearer " + token_);

  std::string last_error;
  for (int attempt = 0; attempt <= 2; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(200 * attempt));
    }
    httplib::Client client(base_url_);
    client.set_connection_timeout(15);
    client.set_read_timeout(120, 0);
    auto res = client.Post("/v1/chat/completions", headers, body.dump(),
                           "application/json");
    if (!res) {
      last_error = httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      throw DarError("provider_error",
                     "provider returned HTTP " + std::to_string(res->status) +
                         ": " + res->body.substr(0, 200));
    }
    try {
      nlohmann::json j = nlohmann::json::parse(res->body);
      record_invocation();
      return j.at("choices").at(0).at("message").at("content")
          .get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw DarError("provider_error",
                     std::string("malformed provider response: ") + e.what());
    }
  }
  throw DarError("provider_error",
                 "provider unreachable after retries: " + last_error);
}

}  // namespace dar::llm
