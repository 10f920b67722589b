#pragma once

// Brute-force oracle machinery for the AI-SQL shim, shared by the unit
// suite and the acceptance suite. Deliberately independent of the shim's
// implementation: its own character-level scanner, its own coercions, a
// plain row loop calling the gateway directly.

#include <cctype>
#include <filesystem>
#include <fstream>
#include <optional>
#include <regex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dar/aisql/shim.hpp"
#include "dar/fixtures/generator.hpp"
#include "support/test_util.hpp"

namespace dar::test {

struct RefSite {
  size_t begin;
  std::string function;
};

inline std::vector<RefSite> reference_scan(const std::string& sql) {
  static const std::vector<std::string> kNames = {
      "ML.GENERATE_TEXT", "AI.GENERATE_BOOL", "AI.GENERATE_TABLE",
      "AI.GENERATE_DOUBLE", "AI.GENERATE"};
  std::vector<RefSite> sites;
  size_t i = 0;
  auto name_at = [&](size_t pos, const std::string& name) {
    if (pos + name.size() > sql.size()) return false;
    for (size_t k = 0; k < name.size(); ++k) {
      if (std::toupper(static_cast<unsigned char>(sql[pos + k])) != name[k]) {
        return false;
      }
    }
    size_t end = pos + name.size();
    if (end < sql.size() &&
        (std::isalnum(static_cast<unsigned char>(sql[end])) ||
         sql[end] == '_')) {
      return false;
    }
    if (pos > 0 && (std::isalnum(static_cast<unsigned char>(sql[pos - 1])) ||
                    sql[pos - 1] == '_' || sql[pos - 1] == '.')) {
      return false;
    }
    return true;
  };
  while (i < sql.size()) {
    char c = sql[i];
    if (c == '\'') {
      ++i;
      while (i < sql.size()) {
        if (sql[i] == '\'' && i + 1 < sql.size() && sql[i + 1] == '\'') {
          i += 2;
          continue;
        }
        if (sql[i] == '\'') break;
        ++i;
      }
      ++i;
      continue;
    }
    if (c == '"') {
      ++i;
      while (i < sql.size() && sql[i] != '"') ++i;
      ++i;
      continue;
    }
    if (c == '-' && i + 1 < sql.size() && sql[i + 1] == '-') {
      while (i < sql.size() && sql[i] != '\n') ++i;
      continue;
    }
    if (c == '/' && i + 1 < sql.size() && sql[i + 1] == '*') {
      i += 2;
      while (i + 1 < sql.size() && !(sql[i] == '*' && sql[i + 1] == '/')) ++i;
      i += 2;
      continue;
    }
    bool matched = false;
    for (const auto& name : kNames) {
      if (!name_at(i, name)) continue;
      size_t j = i + name.size();
      while (j < sql.size() &&
             std::isspace(static_cast<unsigned char>(sql[j]))) {
        ++j;
      }
      if (j < sql.size() && sql[j] == '(') {
        sites.push_back({i, name});
        int depth = 0;
        size_t k = j;
        while (k < sql.size()) {
          if (sql[k] == '\'') {
            ++k;
            while (k < sql.size() && sql[k] != '\'') ++k;
          } else if (sql[k] == '(') {
            depth++;
          } else if (sql[k] == ')') {
            depth--;
            if (depth == 0) break;
          }
          ++k;
        }
        i = k + 1;
        matched = true;
      }
      if (matched) break;
    }
    if (!matched) ++i;
  }
  return sites;
}

inline std::optional<bool> ref_bool(std::string t) {
  size_t b = t.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return std::nullopt;
  size_t e = t.find_last_not_of(" \t\r\n");
  t = t.substr(b, e - b + 1);
  for (char& c : t) c = static_cast<char>(std::tolower(c));
  if (t == "true" || t == "yes") return true;
  if (t == "false" || t == "no") return false;
  return std::nullopt;
}

inline std::optional<double> ref_double(const std::string& t) {
  static const std::regex kNum(R"([-+]?(\d+(\.\d*)?|\.\d+)([eE][-+]?\d+)?)");
  std::smatch m;
  if (std::regex_search(t, m, kNum)) return std::stod(m.str());
  return std::nullopt;
}

inline std::optional<std::string> ref_table(const std::string& t,
                                            const std::string& schema) {
  size_t b = t.find('{');
  size_t e = t.rfind('}');
  if (b == std::string::npos || e == std::string::npos || e < b) {
    return std::nullopt;
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(t.substr(b, e - b + 1));
  } catch (...) {
    return std::nullopt;
  }
  if (!j.is_object()) return std::nullopt;
  std::istringstream fields(schema);
  std::string field;
  while (std::getline(fields, field, ',')) {
    std::istringstream parts(field);
    std::string name, type;
    parts >> name >> type;
    if (name.empty()) continue;
    if (!j.contains(name)) return std::nullopt;
    for (char& c : type) c = static_cast<char>(std::tolower(c));
    const auto& v = j[name];
    if ((type == "string" || type == "text") && !v.is_string()) {
      return std::nullopt;
    }
    if ((type == "integer" || type == "int") && !v.is_number_integer()) {
      return std::nullopt;
    }
    if ((type == "boolean" || type == "bool") && !v.is_boolean()) {
      return std::nullopt;
    }
    if ((type == "float" || type == "double") && !v.is_number()) {
      return std::nullopt;
    }
  }
  return j.dump();
}

// Row-by-row oracle over the rewrite plan's base query.
inline QueryOutcome oracle_execute(db::Connection& conn,
                                   llm::Gateway& gateway,
                                   SessionState& session,
                                   const std::string& sql) {
  using namespace dar::aisql;
  auto sites = scan_ai_calls(sql);
  if (sites.empty()) return conn.execute_sql(sql, {});
  auto plan = rewrite(sql, sites);
  QueryOutcome base = conn.execute_sql(plan.base_sql, {});
  if (base.error) {
    throw std::runtime_error("oracle base query failed: " +
                             base.error->message);
  }

  std::vector<size_t> call_cols;
  for (const auto& prc : plan.per_row_calls) {
    int idx = base.column_index(prc.column);
    if (idx < 0) throw std::runtime_error("oracle lost column " + prc.column);
    call_cols.push_back(static_cast<size_t>(idx));
  }

  QueryOutcome out;
  std::vector<bool> drop(base.columns.size(), false);
  for (size_t c = 0; c < plan.per_row_calls.size(); ++c) {
    const auto& prc = plan.per_row_calls[c];
    if (prc.is_filter) {
      drop[call_cols[c]] = true;
    } else {
      switch (prc.site.output_type) {
        case AiOutputType::Bool:
          base.columns[call_cols[c]].type = LogicalType::Boolean;
          break;
        case AiOutputType::Double:
          base.columns[call_cols[c]].type = LogicalType::Float;
          break;
        default:
          base.columns[call_cols[c]].type = LogicalType::String;
      }
    }
  }
  for (size_t i = 0; i < base.columns.size(); ++i) {
    if (!drop[i]) out.columns.push_back(base.columns[i]);
  }

  for (size_t r = 0; r < base.rows.size(); ++r) {
    std::vector<Value> cells = base.rows[r];
    bool keep = true;
    for (size_t c = 0; c < plan.per_row_calls.size(); ++c) {
      const auto& prc = plan.per_row_calls[c];
      llm::LlmRequest req;
      switch (prc.site.output_type) {
        case AiOutputType::Text: req.template_id = "ai_text"; break;
        case AiOutputType::Bool: req.template_id = "ai_bool"; break;
        case AiOutputType::Double: req.template_id = "ai_double"; break;
        case AiOutputType::Table: req.template_id = "ai_table"; break;
      }
      req.variables["prompt"] = value_to_display(cells[call_cols[c]]);
      if (prc.site.output_type == AiOutputType::Table) {
        req.variables["schema"] = prc.site.table_schema;
      }
      std::string reply = gateway.generate(session, req).text;
      if (prc.is_filter) {
        auto bv = ref_bool(reply);
        keep = keep && bv.has_value() && *bv;
      } else if (prc.site.output_type == AiOutputType::Bool) {
        auto bv = ref_bool(reply);
        cells[call_cols[c]] = bv ? Value{*bv} : Value{};
      } else if (prc.site.output_type == AiOutputType::Double) {
        auto dv = ref_double(reply);
        cells[call_cols[c]] = dv ? Value{*dv} : Value{};
      } else if (prc.site.output_type == AiOutputType::Table) {
        auto tv = ref_table(reply, prc.site.table_schema);
        cells[call_cols[c]] = tv ? Value{*tv} : Value{};
      } else {
        cells[call_cols[c]] = reply;
      }
    }
    if (!keep) continue;
    std::vector<Value> projected;
    for (size_t i = 0; i < cells.size(); ++i) {
      if (!drop[i]) projected.push_back(cells[i]);
    }
    out.rows.push_back(std::move(projected));
  }
  if (plan.post_offset && *plan.post_offset > 0) {
    size_t off = static_cast<size_t>(*plan.post_offset);
    out.rows.erase(out.rows.begin(),
                   out.rows.begin() + std::min(off, out.rows.size()));
  }
  if (plan.post_limit &&
      out.rows.size() > static_cast<size_t>(*plan.post_limit)) {
    out.rows.resize(static_cast<size_t>(*plan.post_limit));
  }
  return out;
}

// Scripted replies covering the AI conformance corpus prompts.
inline std::vector<llm::ScriptedRule> corpus_rules() {
  return {
      rule("is high severity: Fire", "true"),
      rule("is high severity: ", "false"),
      rule("urgent? Protest", "yes"),
      rule("urgent? ", "no"),
      rule("summarize: ", "short summary"),
      rule("score 0-1 for Fire", "0.8"),
      rule("score 0-1 for ", "roughly 0.3 overall"),
      rule("extract: Fire", "{\"kind\":\"fire\",\"urgent\":true}"),
      rule("extract: ", "{\"kind\":\"other\",\"urgent\":false}"),
      rule("headline: ", "PORT CITY UPDATE"),
      rule("keep? Theft", "true"),
      rule("keep? ", "no"),
      rule("severe: Fire", "yes"),
      rule("severe: ", "false"),
      rule("a? Fire", "true"),
      rule("a? ", "false"),
      rule("b? Fire", "Score: 0.9"),
      rule("b? ", "about 0.25"),
      rule("risky region Region_3", "true"),
      rule("risky region ", "false"),
      rule("static prompt no row data", "true"),
      rule("lowercase call ", "yes"),
      rule("describe ", "a facility"),
      rule("flood? Flood", "true"),
      rule("flood? ", "false"),
      rule("fire-check Fire", "true"),
      rule("fire-check ", "no"),
      rule("coastal? Houston", "no"),
      rule("coastal? ", "yes"),
      rule("one ", "text one"),
      rule("x I-", "true"),
      rule("dup Hamburg", "true"),
      rule("dup ", "false"),
      rule("keep-city Valparaiso", "false"),
      rule("keep-city ", "yes"),
      rule("parse ", "{\"city\":\"somewhere\",\"sev\":2}"),
      rule("reported near", "42.5 units"),
      rule("", "gibberish with no usable value"),
  };
}

inline std::vector<std::string> corpus_paths(const std::string& root,
                                             const std::string& subdir) {
  std::vector<std::string> files;
  for (const auto& e :
       std::filesystem::directory_iterator(root + "/corpus/" + subdir)) {
    if (e.path().extension() == ".sql") files.push_back(e.path().string());
  }
  std::sort(files.begin(), files.end());
  return files;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace dar::test
