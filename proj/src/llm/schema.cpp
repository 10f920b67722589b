#include "dar/llm/schema.hpp"

#include "dar/errors.hpp"

namespace dar::llm {

void SchemaRegistry::add(const std::string& id, SchemaValidator v) {
  validators_[id] = std::move(v);
}

std::vector<std::string> SchemaRegistry::validate(
    const std::string& id, const nlohmann::json& value) const {
  auto it = validators_.find(id);
  if (it == validators_.end()) {
    throw DarError("unknown_schema", "no schema named '" + id + "'");
  }
  return it->second(value);
}

namespace {

void need_string_array(const nlohmann::json& j, const char* field,
                       std::vector<std::string>& errs, bool required) {
  if (!j.contains(field)) {
    if (required) errs.push_back(std::string(field) + " is missing");
    return;
  }
  if (!j[field].is_array()) {
    errs.push_back(std::string(field) + " must be an array");
    return;
  }
  for (const auto& e : j[field]) {
    if (!e.is_string()) {
      errs.push_back(std::string(field) + " must contain strings");
      return;
    }
  }
}

std::vector<std::string> validate_intent(const nlohmann::json& j) {
  std::vector<std::string> errs;
  if (!j.is_object()) return {"reply is not a JSON object"};
  if (!j.contains("analysis_goals") || !j["analysis_goals"].is_array()) {
    errs.push_back("analysis_goals must be an array");
  } else {
    for (const auto& g : j["analysis_goals"]) {
      if (!g.is_object() || !g.contains("goal") || !g["goal"].is_string()) {
        errs.push_back("each analysis goal needs a string 'goal'");
        break;
      }
      need_string_array(g, "entities", errs, true);
    }
  }
  need_string_array(j, "entities_of_interest", errs, false);
  return errs;
}

std::vector<std::string> validate_plan(const nlohmann::json& j) {
  std::vector<std::string> errs;
  if (!j.is_object()) return {"reply is not a JSON object"};
  if (!j.contains("subtasks") || !j["subtasks"].is_array() ||
      j["subtasks"].empty()) {
    errs.push_back("subtasks must be a non-empty array");
    return errs;
  }
  for (const auto& s : j["subtasks"]) {
    if (!s.is_object()) {
      errs.push_back("each subtask must be an object");
      break;
    }
    if (!s.contains("id") || (!s["id"].is_string() && !s["id"].is_number())) {
      errs.push_back("each subtask needs an id");
    }
    if (!s.contains("objective") || !s["objective"].is_string()) {
      errs.push_back("each subtask needs a string objective");
    }
    need_string_array(s, "referenced_tables", errs, true);
    if (s.contains("expected_output")) {
      std::string e = s["expected_output"].is_string()
                          ? s["expected_output"].get<std::string>()
                          : "";
      if (e != "table" && e != "scalar" && e != "classification" &&
          e != "narrative") {
        errs.push_back("expected_output must be one of table, scalar, "
                       "classification, narrative");
      }
    }
  }
  return errs;
}

std::vector<std::string> validate_queryspec(const nlohmann::json& j) {
  std::vector<std::string> errs;
  if (!j.is_object()) return {"reply is not a JSON object"};
  need_string_array(j, "tables", errs, true);
  if (j.contains("tables") && j["tables"].is_array() && j["tables"].empty()) {
    errs.push_back("tables must not be empty");
  }
  need_string_array(j, "columns", errs, true);
  need_string_array(j, "filters", errs, false);
  if (j.contains("aggregation") && !j["aggregation"].is_string()) {
    errs.push_back("aggregation must be a string");
  }
  return errs;
}

std::vector<std::string> validate_outline(const nlohmann::json& j) {
  std::vector<std::string> errs;
  if (!j.is_object()) return {"reply is not a JSON object"};
  if (!j.contains("sections") || !j["sections"].is_array() ||
      j["sections"].empty()) {
    errs.push_back("sections must be a non-empty array");
    return errs;
  }
  for (const auto& s : j["sections"]) {
    if (!s.is_object() || !s.contains("title") || !s["title"].is_string() ||
        s["title"].get<std::string>().empty()) {
      errs.push_back("each section needs a non-empty string title");
      break;
    }
    need_string_array(s, "evidence_subtasks", errs, false);
  }
  return errs;
}

std::vector<std::string> validate_quality(const nlohmann::json& j) {
  std::vector<std::string> errs;
  if (!j.is_object()) return {"reply is not a JSON object"};
  for (const char* f : {"grounding", "coverage", "coherence",
                        "actionability"}) {
    if (!j.contains(f) || !j[f].is_number()) {
      errs.push_back(std::string(f) + " must be a number");
      continue;
    }
    double v = j[f].get<double>();
    if (v < 0.0 || v > 1.0) {
      errs.push_back(std::string(f) + " must be in [0,1], got " +
                     std::to_string(v));
    }
  }
  if (j.contains("feedback") && !j["feedback"].is_string()) {
    errs.push_back("feedback must be a string");
  }
  return errs;
}

}  // namespace

SchemaRegistry SchemaRegistry::builtin() {
  SchemaRegistry reg;
  reg.add("intent.v1", validate_intent);
  reg.add("plan.v1", validate_plan);
  reg.add("queryspec.v1", validate_queryspec);
  reg.add("outline.v1", validate_outline);
  reg.add("quality.v1", validate_quality);
  return reg;
}

nlohmann::json extract_json_object(const std::string& reply) {
  // Scan for the first top-level {...} block outside string literals.
  size_t start = reply.find('{');
  if (start == std::string::npos) {
    throw nlohmann::json::parse_error::create(
        101, 0, "no JSON object found in reply", nullptr);
  }
  int depth = 0;
  bool in_string = false;
  for (size_t i = start; i < reply.size(); ++i) {
    char c = reply[i];
    if (in_string) {
      if (c == '\\') {
        ++i;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{') {
      depth++;
    } else if (c == '}') {
      depth--;
      if (depth == 0) {
        return nlohmann::json::parse(reply.substr(start, i - start + 1));
      }
    }
  }
  throw nlohmann::json::parse_error::create(
      101, 0, "unbalanced JSON object in reply", nullptr);
}

}  // namespace dar::llm
