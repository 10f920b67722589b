#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "dar/errors.hpp"

namespace dar::llm {

struct ChatRequest {
  std::string prompt;
  double temperature = 0.2;
  int max_output_tokens = 2048;
};

// A model provider. Implementations must be safe for concurrent complete()
// calls (the AI-SQL shim fans out row-wise).
class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::string complete(const ChatRequest& request) = 0;
  virtual std::string provider_id() const = 0;

  // Number of completed invocations; the gateway's call accounting is
  // checked against this in tests.
  int64_t invocations() const { return invocations_.load(); }

 protected:
  void record_invocation() { invocations_.fetch_add(1); }
  std::atomic<int64_t> invocations_{0};
};

// One replay rule: first match wins, ordered; consume_once rules fire at
// most once, then fall through to later rules.
struct ScriptedRule {
  std::string match;          // substring, or ECMAScript regex when is_regex
  bool is_regex = false;
  std::string reply;
  bool consume_once = false;
};

// Deterministic test double. A prompt matching no live rule is a loud
// ScriptedMiss, never a silent default.
class ScriptedBackend : public Backend {
 public:
  explicit ScriptedBackend(std::vector<ScriptedRule> rules);

  // Replay transcript file: {"rules": [{"match","reply","consume_once"?,
  // "regex"?}, ...]}; see docs/llm_transcripts.md.
  static std::shared_ptr<ScriptedBackend> from_file(const std::string& path);

  std::string complete(const ChatRequest& request) override;
  std::string provider_id() const override { return "scripted"; }

  // Prompts seen, in arrival order (test oracle surface).
  std::vector<std::string> prompt_log() const;

 private:
  mutable std::mutex mu_;
  struct LiveRule {
    ScriptedRule rule;
    bool consumed = false;
  };
  std::vector<LiveRule> rules_;
  std::vector<std::string> prompts_;
};

// Live chat-completion provider over HTTP+JSON; request/response shape in
// docs/llm_http.md. Transport failures retry up to 2 times with backoff.
class HttpBackend : public Backend {
 public:
  HttpBackend(std::string base_url, std::string model, std::string token);

  std::string complete(const ChatRequest& request) override;
  std::string provider_id() const override { return "http:" + model_; }

 private:
  std::string base_url_;
  std::string model_;
  std::string token_;
};

}  // namespace dar::llm
