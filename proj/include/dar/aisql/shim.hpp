#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dar/core/session.hpp"
#include "dar/core/types.hpp"
#include "dar/db/backend.hpp"
#include "dar/llm/gateway.hpp"

namespace dar::aisql {

class ParseError : public DarError {
 public:
  explicit ParseError(const std::string& m) : DarError("parse_error", m) {}
};

class UnsupportedShape : public DarError {
 public:
  explicit UnsupportedShape(const std::string& m)
      : DarError("unsupported_shape", m) {}
};

enum class AiOutputType { Text, Bool, Double, Table };

// One in-database AI function call found in SQL text.
struct AiCallSite {
  std::string function;     // canonical name, e.g. "AI.GENERATE_BOOL"
  size_t begin = 0;         // byte span of the whole call, including ')'
  size_t end = 0;
  std::string prompt_expr;  // SQL text of the prompt argument
  AiOutputType output_type = AiOutputType::Text;
  std::string table_schema;  // inline "name type, ..." for GENERATE_TABLE
};

// Token-level scan for the AI function family in expression position.
// String literals and comments never match. Throws ParseError on unbalanced
// parentheses inside a matched call (or an untokenizable input).
std::vector<AiCallSite> scan_ai_calls(const std::string& sql_text);

struct PerRowCall {
  AiCallSite site;
  std::string column;     // base_sql column carrying the prompt value; the
                          // coerced reply lands under the same name
  bool is_filter = false; // WHERE-position call: keeps/drops the row instead
};

struct RewritePlan {
  bool identity = false;  // no AI calls; base_sql is the input text
  std::string base_sql;
  std::vector<PerRowCall> per_row_calls;
  // LIMIT/OFFSET are moved after the filter when a WHERE-position call
  // exists (filtering must see every candidate row first).
  std::optional<int64_t> post_limit;
  std::optional<int64_t> post_offset;
};

// Splits an AI-bearing query into an AI-free base query plus row-wise calls.
// v1 supports calls as whole SELECT-list items and as top-level WHERE
// conjuncts; anything else (GROUP BY/HAVING position, nested calls, DISTINCT
// interplay, aggregated queries filtered by AI) raises UnsupportedShape.
RewritePlan rewrite(const std::string& sql_text,
                    const std::vector<AiCallSite>& sites);

struct ShimOptions {
  int fanout_width = 4;  // concurrent row-wise calls; output is row-ordered
};

// Executes SQL that may contain AI functions: pass-through on ai_native
// engines, rewrite + row-wise gateway calls elsewhere. Exactly
// rows(base_sql) x sites LLM calls are issued, budget-checked up front;
// per-row coercion failures degrade to null cells with warnings. SQL-level
// failures come back as QueryOutcome.error.
QueryOutcome execute_with_ai(db::Connection& conn, llm::Gateway& gateway,
                             SessionState& session, const std::string& sql_text,
                             const db::QueryLimits& limits,
                             const ShimOptions& options = {});

// Reply coercion, exposed for the oracle tests.
std::optional<bool> coerce_bool(const std::string& reply);
std::optional<double> coerce_double(const std::string& reply);
std::optional<std::string> coerce_table(const std::string& reply,
                                        const std::string& inline_schema);

}  // namespace dar::aisql
