#include "dar/engine/executor.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "dar/engine/parser.hpp"

namespace dar::engine {

namespace {

bool iequals(const std::string& a, const std::string& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(a[i])) !=
        std::tolower(static_cast<unsigned char>(b[i]))) {
      return false;
    }
  }
  return true;
}

[[noreturn]] void fail(const char* code, const std::string& msg) {
  throw ExecError(code, msg);
}

ExprPtr clone_expr(const Expr& e) {
  auto c = std::make_unique<Expr>();
  c->kind = e.kind;
  c->literal = e.literal;
  c->qualifier = e.qualifier;
  c->name = e.name;
  c->op = e.op;
  c->negated = e.negated;
  c->distinct = e.distinct;
  c->else_index = e.else_index;
  c->begin = e.begin;
  c->end = e.end;
  for (const auto& a : e.args) c->args.push_back(clone_expr(*a));
  for (const auto& arm : e.arms) {
    CaseArm na;
    na.when = clone_expr(*arm.when);
    na.then = clone_expr(*arm.then);
    c->arms.push_back(std::move(na));
  }
  return c;
}

// Canonical token text of a source span: idents uppercased, single spaces.
// Used to match SELECT expressions against GROUP BY expressions.
std::string normalized_span(const std::string& sql, size_t begin, size_t end) {
  std::string slice = sql.substr(begin, end - begin);
  std::vector<Token> toks;
  try {
    toks = tokenize(slice);
  } catch (const TokenError&) {
    return slice;
  }
  std::string out;
  for (const auto& t : toks) {
    if (t.kind == TokenKind::End) break;
    if (!out.empty()) out.push_back(' ');
    if (t.kind == TokenKind::Ident) {
      out += t.upper;
    } else if (t.kind == TokenKind::String) {
      out += "'" + t.text + "'";
    } else if (t.kind == TokenKind::QuotedIdent) {
      std::string up;
      for (char ch : t.text) {
        up.push_back(
            static_cast<char>(std::toupper(static_cast<unsigned char>(ch))));
      }
      out += up;
    } else {
      out += t.text;
    }
  }
  return out;
}

struct BoundTable {
  const Table* table = nullptr;
  std::string name;   // table id
  std::string alias;  // may be empty
  std::shared_ptr<Table> owned;  // backing storage for information_schema
};

using JoinedRow = std::vector<int64_t>;  // row index per table, -1 = null

struct ColumnBinding {
  int table_idx = -1;
  int column_idx = -1;
};

struct Scope {
  const std::string* sql = nullptr;
  std::vector<BoundTable> tables;

  ColumnBinding resolve(const std::string& qualifier,
                        const std::string& name) const {
    ColumnBinding found;
    int hits = 0;
    for (size_t ti = 0; ti < tables.size(); ++ti) {
      const BoundTable& bt = tables[ti];
      if (!qualifier.empty() && !iequals(qualifier, bt.alias) &&
          !iequals(qualifier, bt.name)) {
        continue;
      }
      int ci = bt.table->column_index(name);
      if (ci >= 0) {
        found = {static_cast<int>(ti), ci};
        hits++;
      }
    }
    if (hits == 0) {
      std::string full = qualifier.empty() ? name : qualifier + "." + name;
      fail("unknown_column", "unknown column: " + full);
    }
    if (hits > 1) {
      fail("unknown_column", "ambiguous column reference: " + name);
    }
    return found;
  }
};

struct GroupData {
  const std::vector<JoinedRow>* rows = nullptr;
  // normalized group-by expression text -> key value for this group
  const std::vector<std::pair<std::string, Value>>* keys = nullptr;
};

struct EvalCtx {
  const Scope* scope = nullptr;
  const JoinedRow* row = nullptr;
  const GroupData* group = nullptr;
};

class Evaluator {
 public:
  explicit Evaluator(const Scope& scope) : scope_(scope) {}

  Value eval(const Expr& e, const EvalCtx& ctx) const {
    // Inside a grouped query, any expression equal to a GROUP BY expression
    // evaluates to the group key without descending further.
    if (ctx.group && ctx.group->keys) {
      std::string norm = normalized_span(*scope_.sql, e.begin, e.end);
      for (const auto& [text, v] : *ctx.group->keys) {
        if (text == norm) return v;
      }
    }
    switch (e.kind) {
      case ExprKind::Literal:
        return e.literal;
      case ExprKind::ColumnRef:
        return eval_column(e, ctx);
      case ExprKind::Unary:
        return eval_unary(e, ctx);
      case ExprKind::Binary:
        return eval_binary(e, ctx);
      case ExprKind::FunctionCall:
        return eval_function(e, ctx);
      case ExprKind::Aggregate:
        return eval_aggregate(e, ctx);
      case ExprKind::Case:
        return eval_case(e, ctx);
      case ExprKind::InList:
        return eval_in(e, ctx);
      case ExprKind::Between:
        return eval_between(e, ctx);
      case ExprKind::Like:
        return eval_like(e, ctx);
      case ExprKind::IsNull: {
        Value v = eval(*e.args[0], ctx);
        bool null = is_null(v);
        return e.negated ? !null : null;
      }
      case ExprKind::Cast:
        return eval_cast(e, ctx);
      case ExprKind::Star:
        fail("syntax_error", "'*' is only valid in COUNT(*)");
    }
    return {};
  }

  // WHERE/HAVING/ON/CASE predicates: boolean or null (null = false).
  bool truthy(const Value& v, const char* where) const {
    if (is_null(v)) return false;
    if (std::holds_alternative<bool>(v)) return std::get<bool>(v);
    fail("type_error", std::string(where) + " predicate is not boolean");
  }

 private:
  const Scope& scope_;

  Value eval_column(const Expr& e, const EvalCtx& ctx) const {
    if (!ctx.row) {
      if (ctx.group) {
        fail("type_error", "column '" + e.name +
                               "' must appear in GROUP BY or inside an "
                               "aggregate");
      }
      fail("unknown_column", "column reference without FROM: " + e.name);
    }
    ColumnBinding b = scope_.resolve(e.qualifier, e.name);
    int64_t ri = (*ctx.row)[static_cast<size_t>(b.table_idx)];
    if (ri < 0) return {};  // null side of a LEFT JOIN
    const Table& t = *scope_.tables[static_cast<size_t>(b.table_idx)].table;
    return t.rows[static_cast<size_t>(ri)][static_cast<size_t>(b.column_idx)];
  }

  Value eval_unary(const Expr& e, const EvalCtx& ctx) const {
    Value v = eval(*e.args[0], ctx);
    if (e.op == "NOT") {
      if (is_null(v)) return {};
      if (!std::holds_alternative<bool>(v)) {
        fail("type_error", "NOT expects a boolean");
      }
      return !std::get<bool>(v);
    }
    if (is_null(v)) return {};
    if (std::holds_alternative<int64_t>(v)) return -std::get<int64_t>(v);
    if (std::holds_alternative<double>(v)) return -std::get<double>(v);
    fail("type_error", "unary '-' expects a number");
  }

  Value eval_binary(const Expr& e, const EvalCtx& ctx) const {
    const std::string& op = e.op;
    if (op == "AND" || op == "OR") {
      Value l = eval(*e.args[0], ctx);
      Value r = eval(*e.args[1], ctx);
      auto to3 = [this](const Value& v) -> int {
        if (is_null(v)) return -1;
        if (!std::holds_alternative<bool>(v)) {
          fail("type_error", "AND/OR expects booleans");
        }
        return std::get<bool>(v) ? 1 : 0;
      };
      int a = to3(l), b = to3(r);
      if (op == "AND") {
        if (a == 0 || b == 0) return false;
        if (a == 1 && b == 1) return true;
        return {};
      }
      if (a == 1 || b == 1) return true;
      if (a == 0 && b == 0) return false;
      return {};
    }
    Value l = eval(*e.args[0], ctx);
    Value r = eval(*e.args[1], ctx);
    if (op == "||") {
      if (is_null(l) || is_null(r)) return {};
      return value_to_display(l) + value_to_display(r);
    }
    if (op == "+" || op == "-" || op == "*" || op == "/" || op == "%") {
      if (is_null(l) || is_null(r)) return {};
      if (!value_is_numeric(l) || !value_is_numeric(r)) {
        fail("type_error", "arithmetic on non-numeric value");
      }
      bool ints = std::holds_alternative<int64_t>(l) &&
                  std::holds_alternative<int64_t>(r);
      if (op == "/") {
        double d = value_as_double(r);
        if (d == 0) return {};
        return value_as_double(l) / d;
      }
      if (op == "%") {
        if (!ints) fail("type_error", "'%' expects integers");
        int64_t d = std::get<int64_t>(r);
        if (d == 0) return {};
        return std::get<int64_t>(l) % d;
      }
      if (ints) {
        int64_t a = std::get<int64_t>(l), b = std::get<int64_t>(r);
        if (op == "+") return a + b;
        if (op == "-") return a - b;
        return a * b;
      }
      double a = value_as_double(l), b = value_as_double(r);
      if (op == "+") return a + b;
      if (op == "-") return a - b;
      return a * b;
    }
    // comparisons
    if (is_null(l) || is_null(r)) return {};
    bool both_num = value_is_numeric(l) && value_is_numeric(r);
    bool both_str = std::holds_alternative<std::string>(l) &&
                    std::holds_alternative<std::string>(r);
    bool both_bool =
        std::holds_alternative<bool>(l) && std::holds_alternative<bool>(r);
    if (!(both_num || both_str || both_bool)) {
      fail("type_error", "cannot compare values of different types");
    }
    int c = value_compare(l, r);
    if (op == "=") return c == 0;
    if (op == "!=" || op == "<>") return c != 0;
    if (op == "<") return c < 0;
    if (op == "<=") return c <= 0;
    if (op == ">") return c > 0;
    if (op == ">=") return c >= 0;
    fail("syntax_error", "unknown operator: " + op);
  }

  Value eval_case(const Expr& e, const EvalCtx& ctx) const {
    for (const auto& arm : e.arms) {
      if (truthy(eval(*arm.when, ctx), "CASE WHEN")) {
        return eval(*arm.then, ctx);
      }
    }
    if (e.else_index) return eval(*e.args[*e.else_index], ctx);
    return {};
  }

  Value eval_in(const Expr& e, const EvalCtx& ctx) const {
    Value probe = eval(*e.args[0], ctx);
    if (is_null(probe)) return {};
    for (size_t i = 1; i < e.args.size(); ++i) {
      Value v = eval(*e.args[i], ctx);
      if (is_null(v)) continue;
      bool comparable = (value_is_numeric(probe) && value_is_numeric(v)) ||
                        probe.index() == v.index();
      if (comparable && value_compare(probe, v) == 0) {
        return !e.negated;
      }
    }
    return e.negated;
  }

  Value eval_between(const Expr& e, const EvalCtx& ctx) const {
    Value x = eval(*e.args[0], ctx);
    Value lo = eval(*e.args[1], ctx);
    Value hi = eval(*e.args[2], ctx);
    if (is_null(x) || is_null(lo) || is_null(hi)) return {};
    auto cmp_ok = [](const Value& a, const Value& b) {
      return (value_is_numeric(a) && value_is_numeric(b)) ||
             a.index() == b.index();
    };
    if (!cmp_ok(x, lo) || !cmp_ok(x, hi)) {
      fail("type_error", "BETWEEN operands of different types");
    }
    bool in = value_compare(x, lo) >= 0 && value_compare(x, hi) <= 0;
    return e.negated ? !in : in;
  }

  Value eval_like(const Expr& e, const EvalCtx& ctx) const {
    Value s = eval(*e.args[0], ctx);
    Value p = eval(*e.args[1], ctx);
    if (is_null(s) || is_null(p)) return {};
    if (!std::holds_alternative<std::string>(s) ||
        !std::holds_alternative<std::string>(p)) {
      fail("type_error", "LIKE expects strings");
    }
    bool m = like_match(std::get<std::string>(s), std::get<std::string>(p));
    return e.negated ? !m : m;
  }

  static bool like_match(const std::string& s, const std::string& p) {
    // Iterative %/_ matcher with backtracking on the last %.
    size_t si = 0, pi = 0, star_p = std::string::npos, star_s = 0;
    while (si < s.size()) {
      if (pi < p.size() && (p[pi] == '_' || p[pi] == s[si])) {
        ++si;
        ++pi;
      } else if (pi < p.size() && p[pi] == '%') {
        star_p = pi++;
        star_s = si;
      } else if (star_p != std::string::npos) {
        pi = star_p + 1;
        si = ++star_s;
      } else {
        return false;
      }
    }
    while (pi < p.size() && p[pi] == '%') ++pi;
    return pi == p.size();
  }

  Value eval_cast(const Expr& e, const EvalCtx& ctx) const {
    Value v = eval(*e.args[0], ctx);
    const std::string& ty = e.name;
    if (is_null(v)) return {};
    if (ty == "TEXT" || ty == "STRING" || ty == "VARCHAR") {
      return value_to_display(v);
    }
    if (ty == "INTEGER" || ty == "INT" || ty == "INT64" || ty == "BIGINT") {
      if (std::holds_alternative<int64_t>(v)) return v;
      if (std::holds_alternative<double>(v)) {
        return static_cast<int64_t>(std::get<double>(v));
      }
      if (std::holds_alternative<bool>(v)) {
        return static_cast<int64_t>(std::get<bool>(v) ? 1 : 0);
      }
      try {
        size_t used = 0;
        int64_t r = std::stoll(std::get<std::string>(v), &used);
        if (used == std::get<std::string>(v).size()) return r;
      } catch (...) {
      }
      return {};  // unparseable casts yield NULL
    }
    if (ty == "FLOAT" || ty == "FLOAT64" || ty == "REAL" || ty == "DOUBLE") {
      if (std::holds_alternative<double>(v)) return v;
      if (std::holds_alternative<int64_t>(v)) {
        return static_cast<double>(std::get<int64_t>(v));
      }
      if (std::holds_alternative<bool>(v)) {
        return std::get<bool>(v) ? 1.0 : 0.0;
      }
      try {
        size_t used = 0;
        double r = std::stod(std::get<std::string>(v), &used);
        if (used == std::get<std::string>(v).size()) return r;
      } catch (...) {
      }
      return {};
    }
    if (ty == "BOOLEAN" || ty == "BOOL") {
      if (std::holds_alternative<bool>(v)) return v;
      if (std::holds_alternative<int64_t>(v)) return std::get<int64_t>(v) != 0;
      if (std::holds_alternative<std::string>(v)) {
        const std::string& s = std::get<std::string>(v);
        if (iequals(s, "true")) return true;
        if (iequals(s, "false")) return false;
      }
      return {};
    }
    if (ty == "TIMESTAMP") {
      if (std::holds_alternative<std::string>(v)) return v;
      return {};
    }
    fail("type_error", "unsupported CAST target: " + ty);
  }

  Value eval_function(const Expr& e, const EvalCtx& ctx) const {
    const std::string& f = e.name;
    auto arg = [&](size_t i) { return eval(*e.args[i], ctx); };
    auto need_args = [&](size_t lo, size_t hi) {
      if (e.args.size() < lo || e.args.size() > hi) {
        fail("type_error", f + " got " + std::to_string(e.args.size()) +
                               " argument(s)");
      }
    };
    auto str_arg = [&](size_t i) -> std::optional<std::string> {
      Value v = arg(i);
      if (is_null(v)) return std::nullopt;
      if (!std::holds_alternative<std::string>(v)) {
        fail("type_error", f + " expects a string argument");
      }
      return std::get<std::string>(v);
    };

    if (f == "UPPER" || f == "LOWER") {
      need_args(1, 1);
      auto s = str_arg(0);
      if (!s) return {};
      std::string out = *s;
      for (char& c : out) {
        c = f == "UPPER"
                ? static_cast<char>(std::toupper(static_cast<unsigned char>(c)))
                : static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      }
      return out;
    }
    if (f == "LENGTH") {
      need_args(1, 1);
      auto s = str_arg(0);
      if (!s) return {};
      return static_cast<int64_t>(s->size());
    }
    if (f == "TRIM") {
      need_args(1, 1);
      auto s = str_arg(0);
      if (!s) return {};
      size_t b = s->find_first_not_of(" \t\r\n");
      if (b == std::string::npos) return std::string();
      size_t e2 = s->find_last_not_of(" \t\r\n");
      return s->substr(b, e2 - b + 1);
    }
    if (f == "SUBSTR" || f == "SUBSTRING") {
      need_args(2, 3);
      auto s = str_arg(0);
      Value startv = arg(1);
      if (!s || is_null(startv)) return {};
      if (!std::holds_alternative<int64_t>(startv)) {
        fail("type_error", "SUBSTR start must be an integer");
      }
      int64_t start = std::get<int64_t>(startv);  // 1-based
      int64_t len = -1;
      if (e.args.size() == 3) {
        Value lv = arg(2);
        if (is_null(lv)) return {};
        if (!std::holds_alternative<int64_t>(lv)) {
          fail("type_error", "SUBSTR length must be an integer");
        }
        len = std::get<int64_t>(lv);
      }
      if (start < 1) start = 1;
      size_t from = static_cast<size_t>(start - 1);
      if (from >= s->size()) return std::string();
      size_t count = len < 0 ? std::string::npos : static_cast<size_t>(len);
      return s->substr(from, count);
    }
    if (f == "CONCAT") {
      need_args(1, 64);
      std::string out;
      for (size_t i = 0; i < e.args.size(); ++i) {
        Value v = arg(i);
        if (is_null(v)) return {};
        out += value_to_display(v);
      }
      return out;
    }
    if (f == "COALESCE" || f == "IFNULL") {
      need_args(1, 64);
      for (size_t i = 0; i < e.args.size(); ++i) {
        Value v = arg(i);
        if (!is_null(v)) return v;
      }
      return {};
    }
    if (f == "ABS") {
      need_args(1, 1);
      Value v = arg(0);
      if (is_null(v)) return {};
      if (std::holds_alternative<int64_t>(v)) {
        return std::abs(std::get<int64_t>(v));
      }
      if (std::holds_alternative<double>(v)) {
        return std::fabs(std::get<double>(v));
      }
      fail("type_error", "ABS expects a number");
    }
    if (f == "ROUND") {
      need_args(1, 2);
      Value v = arg(0);
      if (is_null(v)) return {};
      if (!value_is_numeric(v)) fail("type_error", "ROUND expects a number");
      int64_t digits = 0;
      if (e.args.size() == 2) {
        Value dv = arg(1);
        if (is_null(dv)) return {};
        if (!std::holds_alternative<int64_t>(dv)) {
          fail("type_error", "ROUND digits must be an integer");
        }
        digits = std::get<int64_t>(dv);
      }
      double scale = std::pow(10.0, static_cast<double>(digits));
      return std::round(value_as_double(v) * scale) / scale;
    }
    if (f == "DATE") {
      need_args(1, 1);
      auto s = str_arg(0);
      if (!s) return {};
      if (s->size() < 10) return {};
      return s->substr(0, 10);
    }
    if (f == "ISO_WEEK") {
      need_args(1, 1);
      auto s = str_arg(0);
      if (!s) return {};
      return iso_week(*s);
    }
    fail("unknown_function", "unknown function: " + f);
  }

  // "YYYY-Www" per ISO 8601 week numbering; null on malformed input.
  static Value iso_week(const std::string& ts) {
    if (ts.size() < 10 || ts[4] != '-' || ts[7] != '-') return Value{};
    int y, m, d;
    try {
      y = std::stoi(ts.substr(0, 4));
      m = std::stoi(ts.substr(5, 2));
      d = std::stoi(ts.substr(8, 2));
    } catch (...) {
      return Value{};
    }
    if (m < 1 || m > 12 || d < 1 || d > 31) return Value{};
    auto is_leap = [](int yy) {
      return (yy % 4 == 0 && yy % 100 != 0) || yy % 400 == 0;
    };
    static const int mdays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    auto day_of_year = [&](int yy, int mm, int dd) {
      int doy = dd;
      for (int i = 0; i < mm - 1; ++i) doy += mdays[i];
      if (mm > 2 && is_leap(yy)) doy += 1;
      return doy;
    };
    // day of week, 1=Monday..7=Sunday (Tomohiko Sakamoto)
    auto dow = [](int yy, int mm, int dd) {
      static const int t[] = {0, 3, 2, 5, 0, 3, 5, 1, 4, 6, 2, 4};
      if (mm < 3) yy -= 1;
      int w = (yy + yy / 4 - yy / 100 + yy / 400 + t[mm - 1] + dd) % 7;
      return w == 0 ? 7 : w;  // map Sunday(0) -> 7
    };
    int doy = day_of_year(y, m, d);
    int wd = dow(y, m, d);
    int week = (doy - wd + 10) / 7;
    int year = y;
    if (week < 1) {
      year = y - 1;
      int prev_days = is_leap(year) ? 366 : 365;
      week = (doy + prev_days - wd + 10) / 7;
    } else if (week > 52) {
      int days = is_leap(y) ? 366 : 365;
      if (days - doy < 4 - wd) {
        year = y + 1;
        week = 1;
      }
    }
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%04d-W%02d", year, week);
    return std::string(buf);
  }

  Value eval_aggregate(const Expr& e, const EvalCtx& ctx) const {
    if (!ctx.group) {
      fail("type_error", "aggregate " + e.name + " outside a grouped query");
    }
    const auto& rows = *ctx.group->rows;
    EvalCtx inner;
    inner.scope = ctx.scope;

    if (e.name == "COUNT" && e.args[0]->kind == ExprKind::Star) {
      return static_cast<int64_t>(rows.size());
    }
    const Expr& arg = *e.args[0];
    if (arg.kind == ExprKind::Star) {
      fail("syntax_error", "'*' is only valid in COUNT(*)");
    }

    std::vector<Value> vals;
    vals.reserve(rows.size());
    for (const auto& r : rows) {
      inner.row = &r;
      inner.group = nullptr;  // aggregate args evaluate per row
      Value v = eval(arg, inner);
      if (!is_null(v)) vals.push_back(std::move(v));
    }
    if (e.name == "COUNT") {
      if (e.distinct) {
        std::set<std::string> seen;
        for (const auto& v : vals) seen.insert(value_to_json(v).dump());
        return static_cast<int64_t>(seen.size());
      }
      return static_cast<int64_t>(vals.size());
    }
    if (e.name == "MIN" || e.name == "MAX") {
      if (vals.empty()) return {};
      const Value* best = &vals[0];
      for (const auto& v : vals) {
        int c = value_compare(v, *best);
        if ((e.name == "MIN" && c < 0) || (e.name == "MAX" && c > 0)) {
          best = &v;
        }
      }
      return *best;
    }
    if (e.name == "SUM" || e.name == "AVG") {
      if (vals.empty()) return {};
      bool all_int = true;
      for (const auto& v : vals) {
        if (!value_is_numeric(v)) {
          fail("type_error", e.name + " expects numeric values");
        }
        if (!std::holds_alternative<int64_t>(v)) all_int = false;
      }
      if (e.name == "SUM" && all_int) {
        int64_t s = 0;
        for (const auto& v : vals) s += std::get<int64_t>(v);
        return s;
      }
      double s = 0;
      for (const auto& v : vals) s += value_as_double(v);
      if (e.name == "SUM") return s;
      return s / static_cast<double>(vals.size());
    }
    fail("unknown_function", "unknown aggregate: " + e.name);
  }
};

// ---------------------------------------------------------------------------

class SelectRunner {
 public:
  SelectRunner(const Database& db, const SelectStmt& stmt,
               const std::string& sql, const ExecOptions& opts)
      : db_(db), stmt_(stmt), sql_(sql), opts_(opts) {}

  ResultSet run() {
    bind_tables();
    scope_.sql = &sql_;
    Evaluator ev(scope_);

    std::vector<JoinedRow> rows = enumerate_rows(ev);

    if (stmt_.where) {
      std::vector<JoinedRow> kept;
      EvalCtx ctx;
      ctx.scope = &scope_;
      for (const auto& r : rows) {
        ctx.row = &r;
        if (ev.truthy(ev.eval(*stmt_.where, ctx), "WHERE")) {
          kept.push_back(r);
        }
      }
      rows = std::move(kept);
    }

    resolve_output_names();

    std::vector<std::vector<Value>> out_rows;
    std::vector<std::vector<Value>> sort_keys;
    bool grouped = !stmt_.group_by.empty() || stmt_.has_aggregates;
    if (grouped) {
      project_grouped(ev, rows, out_rows, sort_keys);
    } else {
      project_plain(ev, rows, out_rows, sort_keys);
    }

    if (stmt_.distinct) {
      std::set<std::string> seen;
      std::vector<std::vector<Value>> dedup;
      std::vector<std::vector<Value>> dedup_keys;
      for (size_t i = 0; i < out_rows.size(); ++i) {
        std::string key;
        for (const auto& v : out_rows[i]) key += value_to_json(v).dump() + "|";
        if (seen.insert(key).second) {
          dedup.push_back(std::move(out_rows[i]));
          if (!sort_keys.empty()) dedup_keys.push_back(std::move(sort_keys[i]));
        }
      }
      out_rows = std::move(dedup);
      sort_keys = std::move(dedup_keys);
    }

    if (!stmt_.order_by.empty()) {
      std::vector<size_t> idx(out_rows.size());
      for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
      std::stable_sort(idx.begin(), idx.end(), [&](size_t a, size_t b) {
        for (size_t k = 0; k < stmt_.order_by.size(); ++k) {
          int c = value_compare(sort_keys[a][k], sort_keys[b][k]);
          if (c != 0) return stmt_.order_by[k].descending ? c > 0 : c < 0;
        }
        return false;
      });
      std::vector<std::vector<Value>> sorted;
      sorted.reserve(out_rows.size());
      for (size_t i : idx) sorted.push_back(std::move(out_rows[i]));
      out_rows = std::move(sorted);
    }

    if (stmt_.offset && *stmt_.offset > 0) {
      size_t off = static_cast<size_t>(*stmt_.offset);
      if (off >= out_rows.size()) {
        out_rows.clear();
      } else {
        out_rows.erase(out_rows.begin(), out_rows.begin() + off);
      }
    }
    if (stmt_.limit && *stmt_.limit >= 0 &&
        out_rows.size() > static_cast<size_t>(*stmt_.limit)) {
      out_rows.resize(static_cast<size_t>(*stmt_.limit));
    }

    ResultSet rs;
    rs.columns = out_columns_;
    if (opts_.max_rows >= 0 &&
        out_rows.size() > static_cast<size_t>(opts_.max_rows)) {
      out_rows.resize(static_cast<size_t>(opts_.max_rows));
      rs.truncated = true;
    }
    rs.rows = std::move(out_rows);
    rs.rows_scanned = rows_scanned_;
    rs.bytes_scanned = bytes_scanned_;
    return rs;
  }

 private:
  const Database& db_;
  const SelectStmt& stmt_;
  const std::string& sql_;
  const ExecOptions& opts_;
  Scope scope_;
  std::vector<ColumnMeta> out_columns_;
  // Expanded output items: either a bound star column or an expression.
  struct OutItem {
    const Expr* expr = nullptr;
    ExprPtr owned;  // ordinal/alias substitutions
    int star_table = -1;
    int star_column = -1;
  };
  std::vector<OutItem> out_items_;
  std::vector<ExprPtr> order_exprs_;
  std::vector<ExprPtr> group_exprs_;
  int64_t rows_scanned_ = 0;
  double bytes_scanned_ = 0;

  void bind_one_table(const TableRef& ref) {
    BoundTable bt;
    std::string ds_id = ref.dataset.empty() ? opts_.default_dataset
                                            : ref.dataset;
    if (iequals(ds_id, Database::kInfoSchema)) {
      try {
        bt.owned = std::make_shared<Table>(db_.info_schema_table(ref.table));
      } catch (const DarError& e) {
        fail("unknown_table", e.what());
      }
      bt.table = bt.owned.get();
    } else {
      const Dataset* ds = db_.find_dataset(ds_id);
      if (!ds) {
        fail("unknown_dataset", "unknown dataset: " +
                                    (ds_id.empty() ? "(none)" : ds_id));
      }
      const Table* t = ds->find_table(ref.table);
      if (!t) {
        fail("unknown_table",
             "unknown table: " + ds->id + "." + ref.table);
      }
      bt.table = t;
    }
    bt.name = ref.table;
    bt.alias = ref.alias;
    scope_.tables.push_back(std::move(bt));
  }

  void bind_tables() {
    if (!stmt_.from) return;
    bind_one_table(*stmt_.from);
    for (const auto& j : stmt_.joins) bind_one_table(j.table);
  }

  void scan_count(const Table& t) {
    rows_scanned_ += 1;
    bytes_scanned_ += t.avg_row_bytes();
  }

  std::vector<JoinedRow> enumerate_rows(Evaluator& ev) {
    std::vector<JoinedRow> rows;
    if (!stmt_.from) {
      rows.push_back({});  // one pseudo-row, no tables
      return rows;
    }
    const Table& t0 = *scope_.tables[0].table;
    for (size_t i = 0; i < t0.rows.size(); ++i) {
      scan_count(t0);
      rows.push_back({static_cast<int64_t>(i)});
    }
    for (size_t ji = 0; ji < stmt_.joins.size(); ++ji) {
      const JoinClause& jc = stmt_.joins[ji];
      const Table& tn = *scope_.tables[ji + 1].table;
      std::vector<JoinedRow> next;
      EvalCtx ctx;
      ctx.scope = &scope_;
      for (const auto& left : rows) {
        bool matched = false;
        for (size_t ri = 0; ri < tn.rows.size(); ++ri) {
          scan_count(tn);
          JoinedRow cand = left;
          cand.push_back(static_cast<int64_t>(ri));
          if (jc.type == JoinType::Cross) {
            next.push_back(std::move(cand));
            continue;
          }
          ctx.row = &cand;
          if (ev.truthy(ev.eval(*jc.on, ctx), "JOIN ON")) {
            matched = true;
            next.push_back(std::move(cand));
          }
        }
        if (jc.type == JoinType::Left && !matched) {
          JoinedRow cand = left;
          cand.push_back(-1);
          next.push_back(std::move(cand));
        }
      }
      rows = std::move(next);
    }
    return rows;
  }

  std::string span_text(size_t b, size_t e) const {
    std::string s = sql_.substr(b, e - b);
    // collapse whitespace runs for stable output column names
    std::string out;
    bool ws = false;
    for (char c : s) {
      if (std::isspace(static_cast<unsigned char>(c))) {
        ws = true;
        continue;
      }
      if (ws && !out.empty()) out.push_back(' ');
      ws = false;
      out.push_back(c);
    }
    return out;
  }

  // Replaces select-alias references and 1-based ordinals in GROUP BY /
  // ORDER BY with clones of the select expressions.
  ExprPtr resolve_positional(const Expr& e) {
    if (e.kind == ExprKind::Literal &&
        std::holds_alternative<int64_t>(e.literal)) {
      int64_t pos = std::get<int64_t>(e.literal);
      if (pos >= 1 && static_cast<size_t>(pos) <= stmt_.items.size()) {
        const SelectItem& it = stmt_.items[static_cast<size_t>(pos - 1)];
        if (it.expr) return clone_expr(*it.expr);
      }
      fail("syntax_error", "ordinal " + std::to_string(pos) +
                               " out of range of the select list");
    }
    if (e.kind == ExprKind::ColumnRef && e.qualifier.empty()) {
      for (const auto& it : stmt_.items) {
        if (!it.alias.empty() && iequals(it.alias, e.name) && it.expr) {
          return clone_expr(*it.expr);
        }
      }
    }
    return clone_expr(e);
  }

  void resolve_output_names() {
    int unnamed = 0;
    for (const auto& it : stmt_.items) {
      if (it.star) {
        if (scope_.tables.empty()) {
          fail("syntax_error", "SELECT * requires a FROM clause");
        }
        for (size_t ti = 0; ti < scope_.tables.size(); ++ti) {
          const BoundTable& bt = scope_.tables[ti];
          if (!it.star_qualifier.empty() &&
              !iequals(it.star_qualifier, bt.alias) &&
              !iequals(it.star_qualifier, bt.name)) {
            continue;
          }
          for (size_t ci = 0; ci < bt.table->columns.size(); ++ci) {
            OutItem oi;
            oi.star_table = static_cast<int>(ti);
            oi.star_column = static_cast<int>(ci);
            out_items_.push_back(std::move(oi));
            out_columns_.push_back(
                {bt.table->columns[ci].name, bt.table->columns[ci].type});
          }
        }
        continue;
      }
      OutItem oi;
      oi.expr = it.expr.get();
      out_items_.push_back(std::move(oi));
      std::string name;
      if (!it.alias.empty()) {
        name = it.alias;
      } else if (it.expr->kind == ExprKind::ColumnRef) {
        name = it.expr->name;
      } else {
        name = span_text(it.begin, it.end);
        if (name.empty()) name = "col_" + std::to_string(unnamed++);
      }
      out_columns_.push_back({name, infer_type(*it.expr)});
    }
    for (const auto& oi : stmt_.order_by) {
      order_exprs_.push_back(resolve_positional(*oi.expr));
    }
    for (const auto& ge : stmt_.group_by) {
      group_exprs_.push_back(resolve_positional(*ge));
    }
  }

  LogicalType infer_type(const Expr& e) const {
    switch (e.kind) {
      case ExprKind::ColumnRef: {
        ColumnBinding b = scope_.resolve(e.qualifier, e.name);
        return scope_.tables[static_cast<size_t>(b.table_idx)]
            .table->columns[static_cast<size_t>(b.column_idx)]
            .type;
      }
      case ExprKind::Literal:
        if (std::holds_alternative<bool>(e.literal)) return LogicalType::Boolean;
        if (std::holds_alternative<int64_t>(e.literal)) {
          return LogicalType::Integer;
        }
        if (std::holds_alternative<double>(e.literal)) return LogicalType::Float;
        return LogicalType::String;
      case ExprKind::Aggregate:
        if (e.name == "COUNT") return LogicalType::Integer;
        if (e.name == "AVG") return LogicalType::Float;
        if (e.name == "SUM") return LogicalType::Float;
        if (!e.args.empty() && e.args[0]->kind != ExprKind::Star) {
          return infer_type(*e.args[0]);
        }
        return LogicalType::Integer;
      case ExprKind::Binary:
        if (e.op == "||") return LogicalType::String;
        if (e.op == "+" || e.op == "-" || e.op == "*") {
          LogicalType l = infer_type(*e.args[0]);
          LogicalType r = infer_type(*e.args[1]);
          if (l == LogicalType::Integer && r == LogicalType::Integer) {
            return LogicalType::Integer;
          }
          return LogicalType::Float;
        }
        if (e.op == "/") return LogicalType::Float;
        if (e.op == "%") return LogicalType::Integer;
        return LogicalType::Boolean;
      case ExprKind::Unary:
        if (e.op == "-") return infer_type(*e.args[0]);
        return LogicalType::Boolean;
      case ExprKind::FunctionCall: {
        const std::string& f = e.name;
        if (f == "LENGTH") return LogicalType::Integer;
        if (f == "ABS" || f == "ROUND") return LogicalType::Float;
        if (f == "COALESCE" || f == "IFNULL") {
          return e.args.empty() ? LogicalType::String
                                : infer_type(*e.args[0]);
        }
        return LogicalType::String;
      }
      case ExprKind::Cast: {
        const std::string& ty = e.name;
        if (ty == "INTEGER" || ty == "INT" || ty == "INT64" || ty == "BIGINT") {
          return LogicalType::Integer;
        }
        if (ty == "FLOAT" || ty == "FLOAT64" || ty == "REAL" ||
            ty == "DOUBLE") {
          return LogicalType::Float;
        }
        if (ty == "BOOLEAN" || ty == "BOOL") return LogicalType::Boolean;
        if (ty == "TIMESTAMP") return LogicalType::Timestamp;
        return LogicalType::String;
      }
      case ExprKind::Case:
        return e.arms.empty() ? LogicalType::String
                              : infer_type(*e.arms[0].then);
      default:
        return LogicalType::Boolean;  // predicates
    }
  }

  void project_plain(Evaluator& ev, const std::vector<JoinedRow>& rows,
                     std::vector<std::vector<Value>>& out_rows,
                     std::vector<std::vector<Value>>& sort_keys) {
    EvalCtx ctx;
    ctx.scope = &scope_;
    for (const auto& r : rows) {
      ctx.row = &r;
      std::vector<Value> out;
      out.reserve(out_items_.size());
      for (const auto& oi : out_items_) {
        if (oi.star_table >= 0) {
          int64_t ri = r[static_cast<size_t>(oi.star_table)];
          if (ri < 0) {
            out.push_back({});
          } else {
            out.push_back(
                scope_.tables[static_cast<size_t>(oi.star_table)]
                    .table->rows[static_cast<size_t>(ri)]
                             [static_cast<size_t>(oi.star_column)]);
          }
        } else {
          out.push_back(ev.eval(*oi.expr, ctx));
        }
      }
      out_rows.push_back(std::move(out));
      if (!order_exprs_.empty()) {
        std::vector<Value> keys;
        keys.reserve(order_exprs_.size());
        for (const auto& oe : order_exprs_) keys.push_back(ev.eval(*oe, ctx));
        sort_keys.push_back(std::move(keys));
      }
    }
  }

  void project_grouped(Evaluator& ev, const std::vector<JoinedRow>& rows,
                       std::vector<std::vector<Value>>& out_rows,
                       std::vector<std::vector<Value>>& sort_keys) {
    for (const auto& it : stmt_.items) {
      if (it.star) {
        fail("syntax_error", "SELECT * cannot be combined with GROUP BY");
      }
    }
    // Bucket rows by evaluated group-by keys (group-less aggregates form a
    // single bucket, present even when the input is empty).
    std::map<std::string, std::pair<std::vector<Value>, std::vector<JoinedRow>>>
        buckets;
    std::vector<std::string> bucket_order;
    EvalCtx row_ctx;
    row_ctx.scope = &scope_;
    for (const auto& r : rows) {
      row_ctx.row = &r;
      std::vector<Value> keyvals;
      std::string key;
      for (const auto& ge : group_exprs_) {
        Value v = ev.eval(*ge, row_ctx);
        key += value_to_json(v).dump() + "|";
        keyvals.push_back(std::move(v));
      }
      auto [iter, fresh] = buckets.try_emplace(key);
      if (fresh) {
        iter->second.first = std::move(keyvals);
        bucket_order.push_back(key);
      }
      iter->second.second.push_back(r);
    }
    if (group_exprs_.empty() && buckets.empty()) {
      buckets.try_emplace("", std::make_pair(std::vector<Value>{},
                                             std::vector<JoinedRow>{}));
      bucket_order.push_back("");
    }

    for (const auto& bkey : bucket_order) {
      auto& [keyvals, grows] = buckets.at(bkey);
      GroupData gd;
      gd.rows = &grows;
      std::vector<std::pair<std::string, Value>> keys;
      for (size_t i = 0; i < group_exprs_.size(); ++i) {
        keys.emplace_back(normalized_span(sql_, group_exprs_[i]->begin,
                                          group_exprs_[i]->end),
                          keyvals[i]);
      }
      gd.keys = &keys;
      EvalCtx gctx;
      gctx.scope = &scope_;
      gctx.group = &gd;

      if (stmt_.having &&
          !ev.truthy(ev.eval(*stmt_.having, gctx), "HAVING")) {
        continue;
      }
      std::vector<Value> out;
      out.reserve(out_items_.size());
      for (const auto& oi : out_items_) out.push_back(ev.eval(*oi.expr, gctx));
      out_rows.push_back(std::move(out));
      if (!order_exprs_.empty()) {
        std::vector<Value> sk;
        sk.reserve(order_exprs_.size());
        for (const auto& oe : order_exprs_) sk.push_back(ev.eval(*oe, gctx));
        sort_keys.push_back(std::move(sk));
      }
    }
  }
};

}  // namespace

ResultSet execute_select(const Database& db, const std::string& sql,
                         const ExecOptions& opts) {
  SelectStmt stmt = parse_select(sql);
  SelectRunner runner(db, stmt, sql, opts);
  return runner.run();
}

}  // namespace dar::engine
