#include <atomic>
#include <cctype>
#include <chrono>
#include <thread>

#include "dar/aisql/shim.hpp"
#include "dar/engine/parser.hpp"

namespace dar::aisql {

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
  for (char& c : s) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return s;
}

const char* template_for(AiOutputType t) {
  switch (t) {
    case AiOutputType::Text: return "ai_text";
    case AiOutputType::Bool: return "ai_bool";
    case AiOutputType::Double: return "ai_double";
    case AiOutputType::Table: return "ai_table";
  }
  return "ai_text";
}

LogicalType column_type_for(AiOutputType t) {
  switch (t) {
    case AiOutputType::Bool: return LogicalType::Boolean;
    case AiOutputType::Double: return LogicalType::Float;
    default: return LogicalType::String;
  }
}

}  // namespace

std::optional<bool> coerce_bool(const std::string& reply) {
  std::string t = lower(trim(reply));
  if (t == "true" || t == "yes") return true;
  if (t == "false" || t == "no") return false;
  return std::nullopt;
}

std::optional<double> coerce_double(const std::string& reply) {
  // First decimal literal in the reply.
  for (size_t i = 0; i < reply.size(); ++i) {
    char c = reply[i];
    bool starts_digit = std::isdigit(static_cast<unsigned char>(c));
    bool starts_sign = (c == '-' || c == '+') && i + 1 < reply.size() &&
                       (std::isdigit(static_cast<unsigned char>(reply[i + 1])) ||
                        reply[i + 1] == '.');
    bool starts_dot = c == '.' && i + 1 < reply.size() &&
                      std::isdigit(static_cast<unsigned char>(reply[i + 1]));
    if (!starts_digit && !starts_sign && !starts_dot) continue;
    size_t used = 0;
    try {
      double v = std::stod(reply.substr(i), &used);
      if (used > 0) return v;
    } catch (...) {
    }
  }
  return std::nullopt;
}

std::optional<std::string> coerce_table(const std::string& reply,
                                        const std::string& inline_schema) {
  nlohmann::json parsed;
  try {
    parsed = llm::extract_json_object(reply);
  } catch (const nlohmann::json::exception&) {
    return std::nullopt;
  }
  if (!parsed.is_object()) return std::nullopt;

  // inline schema: "name type, name type"
  size_t pos = 0;
  while (pos < inline_schema.size()) {
    size_t comma = inline_schema.find(',', pos);
    std::string field = trim(inline_schema.substr(
        pos, comma == std::string::npos ? std::string::npos : comma - pos));
    pos = comma == std::string::npos ? inline_schema.size() : comma + 1;
    if (field.empty()) continue;
    size_t sp = field.find_first_of(" \t");
    std::string fname = sp == std::string::npos ? field : field.substr(0, sp);
    std::string ftype = sp == std::string::npos ? "string"
                                                : lower(trim(field.substr(sp)));
    if (!parsed.contains(fname)) return std::nullopt;
    const auto& v = parsed[fname];
    bool ok = true;
    if (ftype == "string" || ftype == "text") {
      ok = v.is_string();
    } else if (ftype == "integer" || ftype == "int" || ftype == "int64") {
      ok = v.is_number_integer();
    } else if (ftype == "float" || ftype == "double" || ftype == "float64") {
      ok = v.is_number();
    } else if (ftype == "boolean" || ftype == "bool") {
      ok = v.is_boolean();
    }
    if (!ok) return std::nullopt;
  }
  return parsed.dump();
}

QueryOutcome execute_with_ai(db::Connection& conn, llm::Gateway& gateway,
                             SessionState& session,
                             const std::string& sql_text,
                             const db::QueryLimits& limits,
                             const ShimOptions& options) {
  auto t0 = std::chrono::steady_clock::now();
  auto finish = [&](QueryOutcome out) {
    out.elapsed_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    return out;
  };

  std::vector<AiCallSite> sites;
  try {
    sites = scan_ai_calls(sql_text);
  } catch (const ParseError& e) {
    return finish(QueryOutcome::failed("parse_error", e.what()));
  }

  if (sites.empty() || conn.ai_native()) {
    // Pass-through: the text reaches the engine byte-identical.
    return conn.execute_sql(sql_text, limits);
  }

  RewritePlan plan;
  try {
    plan = rewrite(sql_text, sites);
  } catch (const UnsupportedShape& e) {
    return finish(QueryOutcome::failed("unsupported_shape", e.what()));
  } catch (const engine::SyntaxError& e) {
    return finish(QueryOutcome::failed("syntax_error", e.what()));
  }

  QueryOutcome base = conn.execute_sql(plan.base_sql, limits);
  if (base.error) return finish(base);

  const size_t n_rows = base.rows.size();
  const size_t n_calls = plan.per_row_calls.size();
  const int64_t needed = static_cast<int64_t>(n_rows * n_calls);
  if (needed > session.remaining_llm_budget()) {
    throw BudgetExhausted(
        "AI query needs " + std::to_string(needed) + " LLM calls, " +
        std::to_string(session.remaining_llm_budget()) + " remaining");
  }

  // Column index per call, up front.
  std::vector<int> call_columns(n_calls);
  for (size_t c = 0; c < n_calls; ++c) {
    call_columns[c] = base.column_index(plan.per_row_calls[c].column);
    if (call_columns[c] < 0) {
      return finish(QueryOutcome::failed(
          "internal_error",
          "rewritten query lost column " + plan.per_row_calls[c].column));
    }
  }

  // Row-wise fan-out; replies land in row-indexed slots so assembly order
  // never depends on completion order.
  std::vector<std::string> replies(n_rows * n_calls);
  std::vector<std::exception_ptr> failures(n_rows * n_calls);
  std::atomic<size_t> next_task{0};
  const size_t total_tasks = n_rows * n_calls;
  auto worker = [&]() {
    while (true) {
      size_t task = next_task.fetch_add(1);
      if (task >= total_tasks) return;
      size_t row = task / n_calls;
      size_t call = task % n_calls;
      const PerRowCall& prc = plan.per_row_calls[call];
      const Value& cell =
          base.rows[row][static_cast<size_t>(call_columns[call])];
      llm::LlmRequest req;
      req.template_id = template_for(prc.site.output_type);
      req.variables["prompt"] = value_to_display(cell);
      if (prc.site.output_type == AiOutputType::Table) {
        req.variables["schema"] = prc.site.table_schema;
      }
      try {
        replies[task] = gateway.generate(session, req).text;
      } catch (...) {
        failures[task] = std::current_exception();
        return;
      }
    }
  };

  size_t width = std::min(static_cast<size_t>(
                              std::max(1, options.fanout_width)),
                          std::max<size_t>(1, total_tasks));
  std::vector<std::thread> pool;
  pool.reserve(width);
  for (size_t i = 0; i < width; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }

  // Assemble: coerce select-site cells in place, apply filters, drop the
  // filter input columns.
  QueryOutcome out;
  out.truncated = base.truncated;
  out.cost = base.cost + static_cast<double>(total_tasks);
  out.warnings = base.warnings;

  std::vector<bool> drop_column(base.columns.size(), false);
  for (size_t c = 0; c < n_calls; ++c) {
    const PerRowCall& prc = plan.per_row_calls[c];
    int idx = call_columns[c];
    if (prc.is_filter) {
      drop_column[static_cast<size_t>(idx)] = true;
    } else {
      base.columns[static_cast<size_t>(idx)].type =
          column_type_for(prc.site.output_type);
    }
  }
  for (size_t i = 0; i < base.columns.size(); ++i) {
    if (!drop_column[i]) out.columns.push_back(base.columns[i]);
  }

  for (size_t row = 0; row < n_rows; ++row) {
    bool keep = true;
    std::vector<Value> cells = base.rows[row];
    for (size_t c = 0; c < n_calls; ++c) {
      const PerRowCall& prc = plan.per_row_calls[c];
      const std::string& reply = replies[row * n_calls + c];
      size_t idx = static_cast<size_t>(call_columns[c]);
      switch (prc.site.output_type) {
        case AiOutputType::Bool: {
          auto b = coerce_bool(reply);
          if (prc.is_filter) {
            if (!b) {
              out.warnings.push_back(
                  "row " + std::to_string(row) +
                  ": AI filter reply not boolean, row dropped");
              keep = false;
            } else {
              keep = keep && *b;
            }
          } else if (b) {
            cells[idx] = *b;
          } else {
            cells[idx] = Value{};
            out.warnings.push_back("coercion_error: row " +
                                   std::to_string(row) + ", column " +
                                   prc.column + ": reply is not true/false");
          }
          break;
        }
        case AiOutputType::Double: {
          auto d = coerce_double(reply);
          if (d) {
            cells[idx] = *d;
          } else {
            cells[idx] = Value{};
            out.warnings.push_back("coercion_error: row " +
                                   std::to_string(row) + ", column " +
                                   prc.column + ": no decimal literal in reply");
          }
          break;
        }
        case AiOutputType::Table: {
          auto t = coerce_table(reply, prc.site.table_schema);
          if (t) {
            cells[idx] = *t;
          } else {
            cells[idx] = Value{};
            out.warnings.push_back("coercion_error: row " +
                                   std::to_string(row) + ", column " +
                                   prc.column +
                                   ": reply does not match the inline schema");
          }
          break;
        }
        case AiOutputType::Text:
          cells[idx] = reply;
          break;
      }
    }
    if (!keep) continue;
    std::vector<Value> projected;
    projected.reserve(out.columns.size());
    for (size_t i = 0; i < cells.size(); ++i) {
      if (!drop_column[i]) projected.push_back(std::move(cells[i]));
    }
    out.rows.push_back(std::move(projected));
  }

  if (plan.post_offset && *plan.post_offset > 0) {
    size_t off = static_cast<size_t>(*plan.post_offset);
    if (off >= out.rows.size()) {
      out.rows.clear();
    } else {
      out.rows.erase(out.rows.begin(), out.rows.begin() + off);
    }
  }
  if (plan.post_limit && *plan.post_limit >= 0 &&
      out.rows.size() > static_cast<size_t>(*plan.post_limit)) {
    out.rows.resize(static_cast<size_t>(*plan.post_limit));
  }
  return finish(out);
}

}  // namespace dar::aisql
