#include <algorithm>
#include <cctype>

#include "dar/aisql/shim.hpp"
#include "dar/engine/parser.hpp"

namespace dar::aisql {

namespace {

using engine::Expr;
using engine::ExprKind;
using engine::SelectStmt;

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

bool expr_references_name(const Expr* e, const std::string& name) {
  if (!e) return false;
  if (e->kind == ExprKind::ColumnRef && iequals(e->name, name)) return true;
  for (const auto& a : e->args) {
    if (expr_references_name(a.get(), name)) return true;
  }
  for (const auto& arm : e->arms) {
    if (expr_references_name(arm.when.get(), name)) return true;
    if (expr_references_name(arm.then.get(), name)) return true;
  }
  return false;
}

struct Splice {
  size_t begin;
  size_t end;
  std::string text;
};

std::string apply_splices(const std::string& sql, std::vector<Splice> splices) {
  std::sort(splices.begin(), splices.end(),
            [](const Splice& a, const Splice& b) { return a.begin > b.begin; });
  std::string out = sql;
  for (const auto& s : splices) {
    out.replace(s.begin, s.end - s.begin, s.text);
  }
  return out;
}

}  // namespace

RewritePlan rewrite(const std::string& sql_text,
                    const std::vector<AiCallSite>& sites) {
  RewritePlan plan;
  if (sites.empty()) {
    plan.identity = true;
    plan.base_sql = sql_text;
    return plan;
  }

  for (const auto& s : sites) {
    if (!scan_ai_calls(s.prompt_expr).empty()) {
      throw UnsupportedShape("nested AI calls are not supported");
    }
  }

  SelectStmt stmt = engine::parse_select(sql_text);
  if (stmt.distinct) {
    throw UnsupportedShape("DISTINCT combined with AI calls is not supported");
  }

  // Classify every site: a whole SELECT-list item, or a top-level WHERE
  // conjunct. Anything else is out of the v1 rewriter's reach.
  struct Classified {
    const AiCallSite* site;
    int select_item = -1;   // index into stmt.items
    bool where_conjunct = false;
  };
  std::vector<Classified> classified;

  std::vector<const Expr*> conjuncts;
  engine::collect_conjuncts(stmt.where.get(), conjuncts);

  for (const auto& site : sites) {
    Classified c;
    c.site = &site;
    for (size_t i = 0; i < stmt.items.size(); ++i) {
      const auto& item = stmt.items[i];
      if (item.expr && item.expr->kind == ExprKind::FunctionCall &&
          item.expr->begin == site.begin && item.expr->end == site.end) {
        c.select_item = static_cast<int>(i);
        break;
      }
    }
    if (c.select_item < 0) {
      for (const Expr* cj : conjuncts) {
        if (cj->kind == ExprKind::FunctionCall && cj->begin == site.begin &&
            cj->end == site.end) {
          c.where_conjunct = true;
          break;
        }
      }
    }
    if (c.select_item < 0 && !c.where_conjunct) {
      // Name the offending clause when we can.
      for (const auto& ge : stmt.group_by) {
        if (site.begin >= ge->begin && site.end <= ge->end) {
          throw UnsupportedShape("AI call inside GROUP BY is not supported");
        }
      }
      if (stmt.having && site.begin >= stmt.having->begin &&
          site.end <= stmt.having->end) {
        throw UnsupportedShape("AI call inside HAVING is not supported");
      }
      throw UnsupportedShape(
          site.function +
          " must be a whole SELECT-list item or a top-level WHERE conjunct");
    }
    if (c.where_conjunct) {
      if (site.output_type != AiOutputType::Bool) {
        throw UnsupportedShape("only AI.GENERATE_BOOL can filter in WHERE");
      }
      if (!stmt.group_by.empty() || stmt.has_aggregates) {
        throw UnsupportedShape(
            "AI filters on aggregated queries are not supported (the filter "
            "must run before grouping)");
      }
    }
    classified.push_back(c);
  }

  // Aliases of AI select items must not feed GROUP BY / HAVING / ORDER BY;
  // those clauses run in the base query, before any call is made.
  for (const auto& c : classified) {
    if (c.select_item < 0) continue;
    const auto& alias = stmt.items[static_cast<size_t>(c.select_item)].alias;
    if (alias.empty()) continue;
    for (const auto& ge : stmt.group_by) {
      if (expr_references_name(ge.get(), alias)) {
        throw UnsupportedShape("GROUP BY references AI output '" + alias + "'");
      }
    }
    if (stmt.having && expr_references_name(stmt.having.get(), alias)) {
      throw UnsupportedShape("HAVING references AI output '" + alias + "'");
    }
    for (const auto& oi : stmt.order_by) {
      if (expr_references_name(oi.expr.get(), alias)) {
        throw UnsupportedShape("ORDER BY references AI output '" + alias +
                               "'");
      }
    }
  }

  std::vector<Splice> splices;
  bool any_filter = false;
  int generated = 0;

  for (const auto& c : classified) {
    const AiCallSite& site = *c.site;
    if (c.select_item >= 0) {
      const auto& item = stmt.items[static_cast<size_t>(c.select_item)];
      std::string column = item.alias.empty()
                               ? "__ai_" + std::to_string(generated++)
                               : item.alias;
      std::string replacement = "(" + site.prompt_expr + ")";
      if (item.alias.empty()) replacement += " AS " + column;
      splices.push_back({site.begin, site.end, replacement});
      PerRowCall call;
      call.site = site;
      call.column = column;
      plan.per_row_calls.push_back(std::move(call));
    } else {
      any_filter = true;
      std::string column = "__ai_f_" + std::to_string(generated++);
      // The prompt value rides along as an extra select item.
      size_t insert_at = stmt.items.back().end;
      splices.push_back(
          {insert_at, insert_at, ", (" + site.prompt_expr + ") AS " + column});
      PerRowCall call;
      call.site = site;
      call.column = column;
      call.is_filter = true;
      plan.per_row_calls.push_back(std::move(call));
    }
  }

  if (any_filter) {
    // Rebuild WHERE from the surviving conjuncts.
    std::string where_text;
    for (const Expr* cj : conjuncts) {
      bool is_site = false;
      for (const auto& c : classified) {
        if (c.where_conjunct && cj->begin == c.site->begin &&
            cj->end == c.site->end) {
          is_site = true;
          break;
        }
      }
      if (is_site) continue;
      std::string text = sql_text.substr(cj->begin, cj->end - cj->begin);
      if (!where_text.empty()) where_text += " AND ";
      where_text += text;
    }
    splices.push_back({stmt.where_begin, stmt.where_end,
                       where_text.empty() ? "" : "WHERE " + where_text});
    if (stmt.limit) {
      plan.post_limit = stmt.limit;
      plan.post_offset = stmt.offset;
      splices.push_back({stmt.limit_begin, stmt.limit_end, ""});
    }
  }

  plan.base_sql = apply_splices(sql_text, std::move(splices));
  return plan;
}

}  // namespace dar::aisql
