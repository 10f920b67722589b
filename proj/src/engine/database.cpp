#include "dar/engine/database.hpp"

#include <cctype>
#include <fstream>

#include "dar/errors.hpp"

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

}  // namespace

int Table::column_index(const std::string& name) const {
  for (size_t i = 0; i < columns.size(); ++i) {
    if (iequals(columns[i].name, name)) return static_cast<int>(i);
  }
  return -1;
}

double Table::avg_row_bytes() const {
  // Fixed-width estimate per type plus sampled text width; good enough for
  // the bytes-scanned cost model.
  double width = 0;
  for (const auto& c : columns) {
    switch (c.type) {
      case LogicalType::Integer:
      case LogicalType::Float:
        width += 8;
        break;
      case LogicalType::Boolean:
        width += 1;
        break;
      default:
        width += 24;
        break;
    }
  }
  return width;
}

Table* Dataset::find_table(const std::string& id) {
  for (auto& t : tables) {
    if (iequals(t.id, id)) return &t;
  }
  return nullptr;
}

const Table* Dataset::find_table(const std::string& id) const {
  for (const auto& t : tables) {
    if (iequals(t.id, id)) return &t;
  }
  return nullptr;
}

std::string native_type_name(LogicalType t) {
  switch (t) {
    case LogicalType::String: return "TEXT";
    case LogicalType::Integer: return "INTEGER";
    case LogicalType::Float: return "FLOAT";
    case LogicalType::Boolean: return "BOOLEAN";
    case LogicalType::Timestamp: return "TIMESTAMP";
    case LogicalType::GeoPoint: return "GEOPOINT";
  }
  return "TEXT";
}

LogicalType logical_from_native(const std::string& native, bool* known) {
  std::string up;
  up.reserve(native.size());
  for (char c : native) {
    up.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  }
  if (known) *known = true;
  // Embedded engine names plus the common warehouse aliases; see
  // docs/type_mapping.md.
  if (up == "TEXT" || up == "STRING" || up == "VARCHAR" || up == "CHAR") {
    return LogicalType::String;
  }
  if (up == "INTEGER" || up == "INT" || up == "INT64" || up == "BIGINT" ||
      up == "SMALLINT") {
    return LogicalType::Integer;
  }
  if (up == "FLOAT" || up == "FLOAT64" || up == "REAL" || up == "DOUBLE" ||
      up == "NUMERIC" || up == "DECIMAL") {
    return LogicalType::Float;
  }
  if (up == "BOOLEAN" || up == "BOOL") return LogicalType::Boolean;
  if (up == "TIMESTAMP" || up == "DATETIME" || up == "DATE") {
    return LogicalType::Timestamp;
  }
  if (up == "GEOPOINT" || up == "GEOGRAPHY" || up == "GEO_POINT") {
    return LogicalType::GeoPoint;
  }
  if (known) *known = false;
  return LogicalType::String;
}

Dataset& Database::add_dataset(const std::string& id,
                               const std::string& description) {
  if (find_dataset(id)) {
    throw DarError("duplicate_dataset", "dataset already exists: " + id);
  }
  datasets_.push_back(Dataset{id, description, {}});
  return datasets_.back();
}

Dataset* Database::find_dataset(const std::string& id) {
  for (auto& d : datasets_) {
    if (iequals(d.id, id)) return &d;
  }
  return nullptr;
}

const Dataset* Database::find_dataset(const std::string& id) const {
  for (const auto& d : datasets_) {
    if (iequals(d.id, id)) return &d;
  }
  return nullptr;
}

bool Database::drop_table(const std::string& dataset_id,
                          const std::string& table_id) {
  Dataset* ds = find_dataset(dataset_id);
  if (!ds) return false;
  for (auto it = ds->tables.begin(); it != ds->tables.end(); ++it) {
    if (iequals(it->id, table_id)) {
      ds->tables.erase(it);
      return true;
    }
  }
  return false;
}

nlohmann::json Database::to_json() const {
  nlohmann::json datasets = nlohmann::json::array();
  for (const auto& ds : datasets_) {
    nlohmann::json tables = nlohmann::json::array();
    for (const auto& t : ds.tables) {
      nlohmann::json cols = nlohmann::json::array();
      for (const auto& c : t.columns) {
        cols.push_back({{"name", c.name},
                        {"type", native_type_name(c.type)},
                        {"nullable", c.nullable}});
      }
      nlohmann::json rows = nlohmann::json::array();
      for (const auto& r : t.rows) {
        nlohmann::json row = nlohmann::json::array();
        for (const auto& v : r) row.push_back(value_to_json(v));
        rows.push_back(std::move(row));
      }
      tables.push_back({{"id", t.id},
                        {"columns", std::move(cols)},
                        {"rows", std::move(rows)}});
    }
    datasets.push_back({{"id", ds.id},
                        {"description", ds.description},
                        {"tables", std::move(tables)}});
  }
  return {{"dar_db", 1}, {"datasets", std::move(datasets)}};
}

Database Database::from_json(const nlohmann::json& j) {
  if (j.value("dar_db", 0) != 1) {
    throw DarError("bad_database_file", "not a dar database document");
  }
  Database db;
  for (const auto& dj : j.at("datasets")) {
    Dataset ds;
    ds.id = dj.at("id").get<std::string>();
    ds.description = dj.value("description", "");
    for (const auto& tj : dj.at("tables")) {
      Table t;
      t.id = tj.at("id").get<std::string>();
      for (const auto& cj : tj.at("columns")) {
        ColumnDef c;
        c.name = cj.at("name").get<std::string>();
        c.type = logical_from_native(cj.at("type").get<std::string>(), nullptr);
        c.nullable = cj.value("nullable", true);
        t.columns.push_back(std::move(c));
      }
      for (const auto& rj : tj.at("rows")) {
        std::vector<Value> row;
        row.reserve(rj.size());
        for (const auto& vj : rj) row.push_back(value_from_json(vj));
        if (row.size() != t.columns.size()) {
          throw DarError("bad_database_file",
                         "row width mismatch in table " + t.id);
        }
        t.rows.push_back(std::move(row));
      }
      ds.tables.push_back(std::move(t));
    }
    db.datasets_.push_back(std::move(ds));
  }
  return db;
}

void Database::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw DarError("io_error", "cannot write database file: " + path);
  }
  // dump() sorts object keys; combined with array-encoded rows this makes
  // the on-disk form a pure function of content.
  out << to_json().dump(1) << "\n";
}

std::shared_ptr<Database> Database::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ConnectionError("cannot open database file: " + path);
  }
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DarError("bad_database_file",
                   "cannot parse database file " + path + ": " + e.what());
  }
  return std::make_shared<Database>(from_json(j));
}

Table Database::info_schema_table(const std::string& table_id) const {
  Table t;
  t.id = table_id;
  if (iequals(table_id, "datasets")) {
    t.columns = {{"dataset_id", LogicalType::String, false},
                 {"description", LogicalType::String, true},
                 {"table_count", LogicalType::Integer, false}};
    for (const auto& ds : datasets_) {
      t.rows.push_back(std::vector<Value>{
          Value{ds.id}, Value{ds.description},
          Value{static_cast<int64_t>(ds.tables.size())}});
    }
    return t;
  }
  if (iequals(table_id, "tables")) {
    t.columns = {{"dataset_id", LogicalType::String, false},
                 {"table_id", LogicalType::String, false},
                 {"row_count", LogicalType::Integer, false}};
    for (const auto& ds : datasets_) {
      for (const auto& tb : ds.tables) {
        t.rows.push_back(std::vector<Value>{
            Value{ds.id}, Value{tb.id},
            Value{static_cast<int64_t>(tb.rows.size())}});
      }
    }
    return t;
  }
  if (iequals(table_id, "columns")) {
    t.columns = {{"dataset_id", LogicalType::String, false},
                 {"table_id", LogicalType::String, false},
                 {"column_name", LogicalType::String, false},
                 {"ordinal_position", LogicalType::Integer, false},
                 {"data_type", LogicalType::String, false},
                 {"is_nullable", LogicalType::Boolean, false}};
    for (const auto& ds : datasets_) {
      for (const auto& tb : ds.tables) {
        int64_t pos = 1;
        for (const auto& c : tb.columns) {
          t.rows.push_back(std::vector<Value>{
              Value{ds.id}, Value{tb.id}, Value{c.name}, Value{pos++},
              Value{native_type_name(c.type)}, Value{c.nullable}});
        }
      }
    }
    return t;
  }
  throw DarError("unknown_table",
                 "information_schema has no table '" + table_id + "'");
}

}  // namespace dar::engine
