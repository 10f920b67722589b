#include "dar/meta/extractor.hpp"

#include <algorithm>
#include <set>

namespace dar::meta {

namespace {

std::string sql_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') out += "''";
    out.push_back(c);
  }
  out += "'";
  return out;
}

std::string quote_ident(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    out.push_back(c);
  }
  out += "\"";
  return out;
}

QueryOutcome run_catalog_query(db::Connection& conn, const std::string& sql) {
  db::QueryLimits limits;
  limits.max_rows = 1000000;  // catalog queries are never truncated
  QueryOutcome out = conn.execute_sql(sql, limits);
  if (out.error) {
    throw ConnectionError("catalog query failed: " + out.error->message);
  }
  return out;
}

}  // namespace

std::vector<std::string> list_dataset_ids(db::Connection& conn) {
  QueryOutcome out = run_catalog_query(
      conn,
      "SELECT dataset_id FROM information_schema.datasets ORDER BY dataset_id");
  std::set<std::string> ids;
  for (size_t i = 0; i < out.rows.size(); ++i) {
    ids.insert(std::get<std::string>(out.cell(i, "dataset_id")));
  }
  return {ids.begin(), ids.end()};
}

std::vector<std::string> list_table_ids(db::Connection& conn,
                                        const std::string& dataset_id) {
  QueryOutcome check = run_catalog_query(
      conn, "SELECT dataset_id FROM information_schema.datasets "
            "WHERE dataset_id = " + sql_quote(dataset_id));
  if (check.rows.empty()) {
    throw DarError("unknown_dataset", "unknown dataset: " + dataset_id);
  }
  QueryOutcome out = run_catalog_query(
      conn, "SELECT table_id FROM information_schema.tables WHERE dataset_id = " +
                sql_quote(dataset_id) + " ORDER BY table_id");
  std::vector<std::string> ids;
  for (size_t i = 0; i < out.rows.size(); ++i) {
    ids.push_back(std::get<std::string>(out.cell(i, "table_id")));
  }
  return ids;
}

TableInfo list_table_info(db::Connection& conn, const std::string& dataset_id,
                          const std::string& table_id,
                          std::vector<std::string>* warnings) {
  QueryOutcome cols = run_catalog_query(
      conn,
      "SELECT column_name, data_type, is_nullable "
      "FROM information_schema.columns WHERE dataset_id = " +
          sql_quote(dataset_id) + " AND table_id = " + sql_quote(table_id) +
          " ORDER BY ordinal_position");
  if (cols.rows.empty()) {
    throw DarError("unknown_table",
                   "unknown table: " + dataset_id + "." + table_id);
  }

  TableInfo info;
  info.id = table_id;
  for (size_t i = 0; i < cols.rows.size(); ++i) {
    ColumnInfo c;
    c.name = std::get<std::string>(cols.cell(i, "column_name"));
    std::string native = std::get<std::string>(cols.cell(i, "data_type"));
    bool known = false;
    c.logical_type = engine::logical_from_native(native, &known);
    if (!known && warnings) {
      warnings->push_back("column " + table_id + "." + c.name +
                          ": unknown native type '" + native +
                          "' mapped to string");
    }
    c.nullable = std::get<bool>(cols.cell(i, "is_nullable"));
    info.columns.push_back(std::move(c));
  }

  // One profiling pass: total row count and per-column non-null counts.
  std::string profile = "SELECT COUNT(*) AS __total";
  for (size_t i = 0; i < info.columns.size(); ++i) {
    profile += ", COUNT(" + quote_ident(info.columns[i].name) + ") AS __c" +
               std::to_string(i);
  }
  profile += " FROM " + quote_ident(dataset_id) + "." + quote_ident(table_id);
  QueryOutcome prof = run_catalog_query(conn, profile);

  int64_t total = std::get<int64_t>(prof.cell(0, "__total"));
  info.row_count = total;
  for (size_t i = 0; i < info.columns.size(); ++i) {
    int64_t non_null =
        std::get<int64_t>(prof.cell(0, "__c" + std::to_string(i)));
    info.columns[i].null_fraction =
        total > 0 ? 1.0 - static_cast<double>(non_null) /
                              static_cast<double>(total)
                  : 0.0;
  }
  return info;
}

DatasetInfo list_dataset_info(db::Connection& conn,
                              const std::string& dataset_id) {
  QueryOutcome ds = run_catalog_query(
      conn, "SELECT description FROM information_schema.datasets "
            "WHERE dataset_id = " + sql_quote(dataset_id));
  if (ds.rows.empty()) {
    throw DarError("unknown_dataset", "unknown dataset: " + dataset_id);
  }
  DatasetInfo info;
  info.id = dataset_id;
  info.description = std::get<std::string>(ds.cell(0, "description"));

  QueryOutcome tables = run_catalog_query(
      conn, "SELECT table_id, row_count FROM information_schema.tables "
            "WHERE dataset_id = " + sql_quote(dataset_id) +
            " ORDER BY table_id");
  for (size_t i = 0; i < tables.rows.size(); ++i) {
    TableInfo t;
    t.id = std::get<std::string>(tables.cell(i, "table_id"));
    t.row_count = std::get<int64_t>(tables.cell(i, "row_count"));
    info.tables.push_back(std::move(t));
  }
  return info;
}

SchemaCatalog build_catalog(
    db::Connection& conn,
    const std::optional<std::vector<std::string>>& scope,
    std::vector<std::string>* warnings) {
  std::vector<std::string> ids = scope ? *scope : list_dataset_ids(conn);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());

  SchemaCatalog catalog;
  for (const auto& ds_id : ids) {
    DatasetInfo ds = list_dataset_info(conn, ds_id);
    DatasetInfo full;
    full.id = ds.id;
    full.description = ds.description;
    for (const auto& shallow : ds.tables) {
      full.tables.push_back(
          list_table_info(conn, ds_id, shallow.id, warnings));
    }
    catalog.datasets.push_back(std::move(full));
  }
  catalog.validate();
  return catalog;
}

}  // namespace dar::meta
