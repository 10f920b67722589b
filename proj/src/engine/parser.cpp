#include "dar/engine/parser.hpp"

#include <set>

namespace dar::engine {

namespace {

const std::set<std::string> kReserved = {
    "SELECT", "FROM",  "WHERE",   "GROUP", "BY",    "HAVING", "ORDER",
    "LIMIT",  "OFFSET", "AS",     "AND",   "OR",    "NOT",    "IN",
    "BETWEEN", "LIKE", "IS",      "NULL",  "TRUE",  "FALSE",  "CASE",
    "WHEN",   "THEN",  "ELSE",    "END",   "CAST",  "JOIN",   "ON",
    "INNER",  "LEFT",  "OUTER",   "CROSS", "DISTINCT", "ASC", "DESC"};

const std::set<std::string> kAggregates = {"COUNT", "SUM", "AVG", "MIN",
                                           "MAX"};

class Parser {
 public:
  explicit Parser(const std::string& sql)
      : sql_(sql), tokens_(tokenize(sql)) {}

  SelectStmt parse() {
    expect_kw("SELECT");
    SelectStmt stmt;
    if (peek().is_kw("DISTINCT")) {
      next();
      stmt.distinct = true;
    }
    // select list
    while (true) {
      stmt.items.push_back(parse_select_item());
      if (peek().is_punct(",")) {
        next();
        continue;
      }
      break;
    }
    if (peek().is_kw("FROM")) {
      next();
      stmt.from = parse_table_ref();
      while (true) {
        JoinType jt;
        if (peek().is_kw("JOIN") || peek().is_kw("INNER")) {
          if (peek().is_kw("INNER")) next();
          expect_kw("JOIN");
          jt = JoinType::Inner;
        } else if (peek().is_kw("LEFT")) {
          next();
          if (peek().is_kw("OUTER")) next();
          expect_kw("JOIN");
          jt = JoinType::Left;
        } else if (peek().is_kw("CROSS")) {
          next();
          expect_kw("JOIN");
          jt = JoinType::Cross;
        } else {
          break;
        }
        JoinClause jc;
        jc.type = jt;
        jc.table = parse_table_ref();
        if (jt != JoinType::Cross) {
          expect_kw("ON");
          jc.on = parse_expr();
        }
        stmt.joins.push_back(std::move(jc));
      }
    }
    if (peek().is_kw("WHERE")) {
      stmt.where_begin = peek().begin;
      next();
      stmt.where = parse_expr();
      stmt.where_end = prev_end_;
    }
    if (peek().is_kw("GROUP")) {
      next();
      expect_kw("BY");
      while (true) {
        stmt.group_by.push_back(parse_expr());
        if (peek().is_punct(",")) {
          next();
          continue;
        }
        break;
      }
    }
    if (peek().is_kw("HAVING")) {
      next();
      stmt.having = parse_expr();
    }
    if (peek().is_kw("ORDER")) {
      next();
      expect_kw("BY");
      while (true) {
        OrderItem oi;
        oi.expr = parse_expr();
        if (peek().is_kw("ASC")) {
          next();
        } else if (peek().is_kw("DESC")) {
          next();
          oi.descending = true;
        }
        stmt.order_by.push_back(std::move(oi));
        if (peek().is_punct(",")) {
          next();
          continue;
        }
        break;
      }
    }
    if (peek().is_kw("LIMIT")) {
      stmt.limit_begin = peek().begin;
      next();
      stmt.limit = parse_int("LIMIT");
      if (peek().is_kw("OFFSET")) {
        next();
        stmt.offset = parse_int("OFFSET");
      }
      stmt.limit_end = prev_end_;
    }
    if (peek().is_punct(";")) next();
    if (peek().kind != TokenKind::End) {
      throw SyntaxError("unexpected input at offset " +
                        std::to_string(peek().begin) + ": '" + peek().text +
                        "'");
    }
    stmt.has_aggregates = false;
    for (const auto& it : stmt.items) {
      if (it.expr && contains_aggregate(it.expr.get())) {
        stmt.has_aggregates = true;
      }
    }
    if (stmt.having && contains_aggregate(stmt.having.get())) {
      stmt.has_aggregates = true;
    }
    return stmt;
  }

 private:
  const std::string& sql_;
  std::vector<Token> tokens_;
  size_t pos_ = 0;
  size_t prev_end_ = 0;

  const Token& peek(size_t ahead = 0) const {
    size_t i = pos_ + ahead;
    return i < tokens_.size() ? tokens_[i] : tokens_.back();
  }
  const Token& next() {
    const Token& t = peek();
    prev_end_ = t.end;
    if (pos_ < tokens_.size() - 1) pos_++;
    return t;
  }
  void expect_kw(const char* kw) {
    if (!peek().is_kw(kw)) {
      throw SyntaxError(std::string("expected ") + kw + " at offset " +
                        std::to_string(peek().begin));
    }
    next();
  }
  void expect_punct(const char* p) {
    if (!peek().is_punct(p)) {
      throw SyntaxError(std::string("expected '") + p + "' at offset " +
                        std::to_string(peek().begin));
    }
    next();
  }

  int64_t parse_int(const char* what) {
    bool neg = false;
    if (peek().is_punct("-")) {
      neg = true;
      next();
    }
    if (peek().kind != TokenKind::Number) {
      throw SyntaxError(std::string(what) + " expects an integer");
    }
    int64_t v = std::stoll(next().text);
    return neg ? -v : v;
  }

  static bool contains_aggregate(const Expr* e) {
    if (!e) return false;
    if (e->kind == ExprKind::Aggregate) return true;
    for (const auto& a : e->args) {
      if (contains_aggregate(a.get())) return true;
    }
    for (const auto& arm : e->arms) {
      if (contains_aggregate(arm.when.get())) return true;
      if (contains_aggregate(arm.then.get())) return true;
    }
    return false;
  }

  SelectItem parse_select_item() {
    SelectItem item;
    item.begin = peek().begin;
    if (peek().is_punct("*")) {
      next();
      item.star = true;
      item.end = prev_end_;
      return item;
    }
    // t.* form
    if ((peek().kind == TokenKind::Ident && !kReserved.count(peek().upper) &&
         peek(1).is_punct(".") && peek(2).is_punct("*")) ||
        (peek().kind == TokenKind::QuotedIdent && peek(1).is_punct(".") &&
         peek(2).is_punct("*"))) {
      item.star = true;
      item.star_qualifier = next().text;
      next();  // .
      next();  // *
      item.end = prev_end_;
      return item;
    }
    item.expr = parse_expr();
    if (peek().is_kw("AS")) {
      next();
      item.alias = parse_alias_name();
    } else if ((peek().kind == TokenKind::Ident &&
                !kReserved.count(peek().upper)) ||
               peek().kind == TokenKind::QuotedIdent) {
      item.alias = next().text;
    }
    item.end = prev_end_;
    return item;
  }

  std::string parse_alias_name() {
    if (peek().kind == TokenKind::Ident && !kReserved.count(peek().upper)) {
      return next().text;
    }
    if (peek().kind == TokenKind::QuotedIdent) return next().text;
    throw SyntaxError("expected alias name at offset " +
                      std::to_string(peek().begin));
  }

  TableRef parse_table_ref() {
    TableRef ref;
    if (peek().kind != TokenKind::Ident &&
        peek().kind != TokenKind::QuotedIdent) {
      throw SyntaxError("expected table name at offset " +
                        std::to_string(peek().begin));
    }
    ref.table = next().text;
    if (peek().is_punct(".")) {
      next();
      if (peek().kind != TokenKind::Ident &&
          peek().kind != TokenKind::QuotedIdent) {
        throw SyntaxError("expected table name after '.'");
      }
      ref.dataset = ref.table;
      ref.table = next().text;
    }
    if (peek().is_kw("AS")) {
      next();
      ref.alias = parse_alias_name();
    } else if ((peek().kind == TokenKind::Ident &&
                !kReserved.count(peek().upper)) ||
               peek().kind == TokenKind::QuotedIdent) {
      ref.alias = next().text;
    }
    return ref;
  }

  ExprPtr make(ExprKind kind, size_t begin) {
    auto e = std::make_unique<Expr>();
    e->kind = kind;
    e->begin = begin;
    return e;
  }

  ExprPtr parse_expr() { return parse_or(); }

  ExprPtr parse_or() {
    auto left = parse_and();
    while (peek().is_kw("OR")) {
      next();
      auto e = make(ExprKind::Binary, left->begin);
      e->op = "OR";
      e->args.push_back(std::move(left));
      e->args.push_back(parse_and());
      e->end = prev_end_;
      left = std::move(e);
    }
    return left;
  }

  ExprPtr parse_and() {
    auto left = parse_not();
    while (peek().is_kw("AND")) {
      next();
      auto e = make(ExprKind::Binary, left->begin);
      e->op = "AND";
      e->args.push_back(std::move(left));
      e->args.push_back(parse_not());
      e->end = prev_end_;
      left = std::move(e);
    }
    return left;
  }

  ExprPtr parse_not() {
    if (peek().is_kw("NOT")) {
      size_t b = peek().begin;
      next();
      auto e = make(ExprKind::Unary, b);
      e->op = "NOT";
      e->args.push_back(parse_not());
      e->end = prev_end_;
      return e;
    }
    return parse_predicate();
  }

  ExprPtr parse_predicate() {
    auto left = parse_additive();
    // IS [NOT] NULL
    if (peek().is_kw("IS")) {
      next();
      bool negated = false;
      if (peek().is_kw("NOT")) {
        next();
        negated = true;
      }
      expect_kw("NULL");
      auto e = make(ExprKind::IsNull, left->begin);
      e->negated = negated;
      e->args.push_back(std::move(left));
      e->end = prev_end_;
      return e;
    }
    bool negated = false;
    if (peek().is_kw("NOT") &&
        (peek(1).is_kw("IN") || peek(1).is_kw("BETWEEN") ||
         peek(1).is_kw("LIKE"))) {
      next();
      negated = true;
    }
    if (peek().is_kw("IN")) {
      next();
      expect_punct("(");
      auto e = make(ExprKind::InList, left->begin);
      e->negated = negated;
      e->args.push_back(std::move(left));
      while (true) {
        e->args.push_back(parse_expr());
        if (peek().is_punct(",")) {
          next();
          continue;
        }
        break;
      }
      expect_punct(")");
      e->end = prev_end_;
      return e;
    }
    if (peek().is_kw("BETWEEN")) {
      next();
      auto e = make(ExprKind::Between, left->begin);
      e->negated = negated;
      e->args.push_back(std::move(left));
      e->args.push_back(parse_additive());
      expect_kw("AND");
      e->args.push_back(parse_additive());
      e->end = prev_end_;
      return e;
    }
    if (peek().is_kw("LIKE")) {
      next();
      auto e = make(ExprKind::Like, left->begin);
      e->negated = negated;
      e->args.push_back(std::move(left));
      e->args.push_back(parse_additive());
      e->end = prev_end_;
      return e;
    }
    static const char* kCompare[] = {"=", "!=", "<>", "<", "<=", ">", ">="};
    for (const char* op : kCompare) {
      if (peek().is_punct(op)) {
        next();
        auto e = make(ExprKind::Binary, left->begin);
        e->op = op;
        e->args.push_back(std::move(left));
        e->args.push_back(parse_additive());
        e->end = prev_end_;
        return e;
      }
    }
    return left;
  }

  ExprPtr parse_additive() {
    auto left = parse_multiplicative();
    while (peek().is_punct("+") || peek().is_punct("-") ||
           peek().is_punct("||")) {
      std::string op = next().text;
      auto e = make(ExprKind::Binary, left->begin);
      e->op = op;
      e->args.push_back(std::move(left));
      e->args.push_back(parse_multiplicative());
      e->end = prev_end_;
      left = std::move(e);
    }
    return left;
  }

  ExprPtr parse_multiplicative() {
    auto left = parse_unary();
    while (peek().is_punct("*") || peek().is_punct("/") ||
           peek().is_punct("%")) {
      std::string op = next().text;
      auto e = make(ExprKind::Binary, left->begin);
      e->op = op;
      e->args.push_back(std::move(left));
      e->args.push_back(parse_unary());
      e->end = prev_end_;
      left = std::move(e);
    }
    return left;
  }

  ExprPtr parse_unary() {
    if (peek().is_punct("-")) {
      size_t b = peek().begin;
      next();
      auto e = make(ExprKind::Unary, b);
      e->op = "-";
      e->args.push_back(parse_unary());
      e->end = prev_end_;
      return e;
    }
    if (peek().is_punct("+")) {
      next();
      return parse_unary();
    }
    return parse_primary();
  }

  Value parse_number_literal(const std::string& text) {
    if (text.find('.') == std::string::npos &&
        text.find('e') == std::string::npos &&
        text.find('E') == std::string::npos) {
      try {
        return static_cast<int64_t>(std::stoll(text));
      } catch (const std::out_of_range&) {
        return std::stod(text);
      }
    }
    return std::stod(text);
  }

  ExprPtr parse_primary() {
    const Token& t = peek();
    size_t b = t.begin;

    if (t.kind == TokenKind::Number) {
      auto e = make(ExprKind::Literal, b);
      e->literal = parse_number_literal(next().text);
      e->end = prev_end_;
      return e;
    }
    if (t.kind == TokenKind::String) {
      auto e = make(ExprKind::Literal, b);
      e->literal = next().text;
      e->end = prev_end_;
      return e;
    }
    if (t.is_punct("(")) {
      next();
      auto inner = parse_expr();
      expect_punct(")");
      // Keep the parenthesized span so splices stay parenthesized.
      inner->begin = b;
      inner->end = prev_end_;
      return inner;
    }
    if (t.is_kw("TRUE") || t.is_kw("FALSE")) {
      auto e = make(ExprKind::Literal, b);
      e->literal = next().upper == "TRUE";
      e->end = prev_end_;
      return e;
    }
    if (t.is_kw("NULL")) {
      next();
      auto e = make(ExprKind::Literal, b);
      e->end = prev_end_;
      return e;
    }
    if (t.is_kw("CASE")) return parse_case();
    if (t.is_kw("CAST")) {
      next();
      expect_punct("(");
      auto e = make(ExprKind::Cast, b);
      e->args.push_back(parse_expr());
      expect_kw("AS");
      if (peek().kind != TokenKind::Ident) {
        throw SyntaxError("expected type name in CAST");
      }
      e->name = next().upper;
      expect_punct(")");
      e->end = prev_end_;
      return e;
    }

    if (t.kind == TokenKind::Ident || t.kind == TokenKind::QuotedIdent) {
      if (t.kind == TokenKind::Ident && kReserved.count(t.upper)) {
        throw SyntaxError("unexpected keyword '" + t.text + "' at offset " +
                          std::to_string(t.begin));
      }
      // function call: name( or ns.name(
      bool dotted_call = t.kind == TokenKind::Ident && peek(1).is_punct(".") &&
                         peek(2).kind == TokenKind::Ident &&
                         peek(3).is_punct("(");
      bool simple_call = peek(1).is_punct("(") && t.kind == TokenKind::Ident;
      if (dotted_call || simple_call) {
        std::string fname;
        if (dotted_call) {
          fname = next().upper;  // namespace part
          next();                // .
          fname += "." + next().upper;
        } else {
          fname = next().upper;
        }
        expect_punct("(");
        if (kAggregates.count(fname)) {
          auto e = make(ExprKind::Aggregate, b);
          e->name = fname;
          if (fname == "COUNT" && peek().is_punct("*")) {
            next();
            auto star = make(ExprKind::Star, peek().begin);
            star->end = prev_end_;
            e->args.push_back(std::move(star));
          } else {
            if (peek().is_kw("DISTINCT")) {
              next();
              e->distinct = true;
            }
            e->args.push_back(parse_expr());
          }
          expect_punct(")");
          e->end = prev_end_;
          return e;
        }
        auto e = make(ExprKind::FunctionCall, b);
        e->name = fname;
        if (!peek().is_punct(")")) {
          while (true) {
            e->args.push_back(parse_expr());
            if (peek().is_punct(",")) {
              next();
              continue;
            }
            break;
          }
        }
        expect_punct(")");
        e->end = prev_end_;
        return e;
      }
      // column ref, possibly qualified
      auto e = make(ExprKind::ColumnRef, b);
      e->name = next().text;
      if (peek().is_punct(".") && (peek(1).kind == TokenKind::Ident ||
                                   peek(1).kind == TokenKind::QuotedIdent)) {
        next();
        e->qualifier = e->name;
        e->name = next().text;
      }
      e->end = prev_end_;
      return e;
    }
    throw SyntaxError("unexpected token '" + t.text + "' at offset " +
                      std::to_string(t.begin));
  }

  ExprPtr parse_case() {
    size_t b = peek().begin;
    expect_kw("CASE");
    auto e = make(ExprKind::Case, b);
    if (!peek().is_kw("WHEN")) {
      throw SyntaxError("only searched CASE (CASE WHEN ...) is supported");
    }
    while (peek().is_kw("WHEN")) {
      next();
      CaseArm arm;
      arm.when = parse_expr();
      expect_kw("THEN");
      arm.then = parse_expr();
      e->arms.push_back(std::move(arm));
    }
    if (peek().is_kw("ELSE")) {
      next();
      e->args.push_back(parse_expr());
      e->else_index = 0;
    }
    expect_kw("END");
    e->end = prev_end_;
    return e;
  }
};

}  // namespace

void collect_conjuncts(const Expr* e, std::vector<const Expr*>& out) {
  if (!e) return;
  if (e->kind == ExprKind::Binary && e->op == "AND") {
    collect_conjuncts(e->args[0].get(), out);
    collect_conjuncts(e->args[1].get(), out);
    return;
  }
  out.push_back(e);
}

SelectStmt parse_select(const std::string& sql) {
  Parser p(sql);
  return p.parse();
}

}  // namespace dar::engine
