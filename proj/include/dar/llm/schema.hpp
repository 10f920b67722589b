#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace dar::llm {

// Returns a list of violations; empty means the value conforms.
using SchemaValidator =
    std::function<std::vector<std::string>(const nlohmann::json&)>;

// Structured-output schemas, one per agent role; see docs/llm_schemas.md.
class SchemaRegistry {
 public:
  static SchemaRegistry builtin();  // intent.v1, plan.v1, queryspec.v1,
                                    // outline.v1, quality.v1

  void add(const std::string& id, SchemaValidator v);
  bool has(const std::string& id) const { return validators_.count(id) > 0; }
  std::vector<std::string> validate(const std::string& id,
                                    const nlohmann::json& value) const;

 private:
  std::map<std::string, SchemaValidator> validators_;
};

// Extracts the first JSON object from an LLM reply, tolerating code fences
// and surrounding prose. Throws nlohmann::json::exception on failure.
nlohmann::json extract_json_object(const std::string& reply);

}  // namespace dar::llm
