#pragma once

#include <stdexcept>
#include <string>

namespace dar {

// Operational failures carry a stable machine-readable code next to the
// human-readable message. SQL execution failures never surface this way;
// they travel as data inside QueryOutcome so the validation loop can route
// them.
class DarError : public std::runtime_error {
 public:
  DarError(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

class ConfigError : public DarError {
 public:
  explicit ConfigError(const std::string& m) : DarError("config_error", m) {}
};

class ConnectionError : public DarError {
 public:
  explicit ConnectionError(const std::string& m)
      : DarError("connection_failed", m) {}
};

class BudgetExhausted : public DarError {
 public:
  explicit BudgetExhausted(const std::string& m)
      : DarError("budget_exhausted", m) {}
};

class SchemaViolation : public DarError {
 public:
  explicit SchemaViolation(const std::string& m)
      : DarError("schema_violation", m) {}
};

class ScriptedMiss : public DarError {
 public:
  explicit ScriptedMiss(const std::string& m) : DarError("scripted_miss", m) {}
};

}  // namespace dar
