#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dar/core/types.hpp"
#include "dar/value.hpp"

namespace dar::engine {

struct ColumnDef {
  std::string name;
  LogicalType type = LogicalType::String;
  bool nullable = true;
};

struct Table {
  std::string id;
  std::vector<ColumnDef> columns;
  std::vector<std::vector<Value>> rows;

  int column_index(const std::string& name) const;  // case-insensitive, -1
  // Rough per-row byte width used for the bytes-scanned cost estimate.
  double avg_row_bytes() const;
};

struct Dataset {
  std::string id;
  std::string description;
  std::vector<Table> tables;

  Table* find_table(const std::string& id);
  const Table* find_table(const std::string& id) const;
};

// Native engine type names exposed through introspection. The logical-type
// mapping lives in docs/type_mapping.md.
std::string native_type_name(LogicalType t);
LogicalType logical_from_native(const std::string& native, bool* known);

// In-memory column store holding datasets -> tables -> rows. Persisted as a
// canonical JSON document (sorted keys, stable field order), so identical
// content always produces identical bytes on disk.
class Database {
 public:
  std::vector<Dataset>& datasets() { return datasets_; }
  const std::vector<Dataset>& datasets() const { return datasets_; }

  Dataset& add_dataset(const std::string& id, const std::string& description);
  Dataset* find_dataset(const std::string& id);
  const Dataset* find_dataset(const std::string& id) const;
  bool drop_table(const std::string& dataset_id, const std::string& table_id);

  nlohmann::json to_json() const;
  static Database from_json(const nlohmann::json& j);

  void save(const std::string& path) const;
  static std::shared_ptr<Database> load(const std::string& path);

  // information_schema.{datasets,tables,columns} materialized from the
  // current state on every call; never cached.
  Table info_schema_table(const std::string& table_id) const;

  static constexpr const char* kInfoSchema = "information_schema";

 private:
  std::vector<Dataset> datasets_;
};

}  // namespace dar::engine
