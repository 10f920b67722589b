#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dar/value.hpp"

namespace dar::engine {

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;

enum class ExprKind {
  Literal,
  ColumnRef,   // [qualifier.]name
  Unary,       // op: "-", "NOT"
  Binary,      // arithmetic / comparison / AND / OR / "||"
  FunctionCall,
  Aggregate,   // COUNT/SUM/AVG/MIN/MAX
  Case,        // searched CASE
  InList,
  Between,
  Like,
  IsNull,
  Cast,
  Star,        // only inside COUNT(*)
};

struct CaseArm {
  ExprPtr when;
  ExprPtr then;
};

struct Expr {
  ExprKind kind = ExprKind::Literal;
  Value literal;

  std::string qualifier;  // ColumnRef table/alias qualifier, may be empty
  std::string name;       // column, function, or aggregate name (uppercased
                          // for functions/aggregates), cast target type

  std::string op;         // Unary/Binary operator, uppercased keywords
  bool negated = false;   // NOT IN / NOT BETWEEN / NOT LIKE / IS NOT NULL
  bool distinct = false;  // COUNT(DISTINCT x)

  std::vector<ExprPtr> args;  // operands / function args / IN list members
  std::vector<CaseArm> arms;  // CASE arms; args[0] = else when present
  std::optional<size_t> else_index;

  // Byte span in the original SQL text (for splicing and diagnostics).
  size_t begin = 0;
  size_t end = 0;
};

struct SelectItem {
  ExprPtr expr;            // null for plain `*` / `t.*`
  std::string alias;
  bool star = false;
  std::string star_qualifier;
  size_t begin = 0;
  size_t end = 0;
};

struct TableRef {
  std::string dataset;  // may be empty (resolved against default dataset)
  std::string table;
  std::string alias;    // may be empty
};

enum class JoinType { Inner, Left, Cross };

struct JoinClause {
  JoinType type = JoinType::Inner;
  TableRef table;
  ExprPtr on;  // null for CROSS
};

struct OrderItem {
  ExprPtr expr;
  bool descending = false;
};

struct SelectStmt {
  bool distinct = false;
  std::vector<SelectItem> items;
  std::optional<TableRef> from;
  std::vector<JoinClause> joins;
  ExprPtr where;
  std::vector<ExprPtr> group_by;
  ExprPtr having;
  std::vector<OrderItem> order_by;
  std::optional<int64_t> limit;
  std::optional<int64_t> offset;

  // Spans used by the AI-SQL rewriter when splicing clauses.
  size_t where_begin = 0, where_end = 0;    // includes the WHERE keyword
  size_t limit_begin = 0, limit_end = 0;    // includes LIMIT..OFFSET tail
  bool has_aggregates = false;
};

// Collects the top-level AND conjuncts of an expression tree.
void collect_conjuncts(const Expr* e, std::vector<const Expr*>& out);

}  // namespace dar::engine
