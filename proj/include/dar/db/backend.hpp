#pragma once

#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "dar/core/types.hpp"
#include "dar/engine/database.hpp"

namespace dar::db {

struct QueryLimits {
  int64_t max_rows = 1000;
  double timeout_s = 120.0;
};

// One record per column, as reported by the backend catalog.
struct RawColumnRecord {
  std::string dataset_id;
  std::string table_id;
  std::string column_name;
  int64_t ordinal_position = 0;
  std::string native_type;
  bool nullable = true;
};

struct ConnectionConfig {
  enum class Kind { Embedded, Remote };
  Kind kind = Kind::Embedded;
  std::string location;   // database file path, or base URL for remote
  bool in_memory = false;
  std::string default_dataset;
  std::string token_env = "DAR_API_TOKEN";
  bool remote_ai_native = false;  // remote engine evaluates AI functions itself

  void validate() const;
  static ConnectionConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

// Uniform execution/introspection surface over SQL engines. SQL failures are
// data (QueryOutcome.error); only transport/connection failures throw.
// Connections are single-owner; open a second connection for a second thread.
class Connection {
 public:
  virtual ~Connection() = default;

  virtual QueryOutcome execute_sql(const std::string& sql,
                                   const QueryLimits& limits) = 0;
  // Re-reads the live catalog on every call; ordered by dataset, table,
  // ordinal. Throws ConnectionError only.
  virtual std::vector<RawColumnRecord> introspect() = 0;

  virtual bool ai_native() const = 0;
  virtual std::string dialect() const = 0;
  virtual void close() = 0;
};

std::unique_ptr<Connection> connect(const ConnectionConfig& config);

// Embedded adapter over the in-process engine. Exposes the database for
// fixture loading and catalog-freshness tests.
class EmbeddedConnection : public Connection {
 public:
  explicit EmbeddedConnection(std::shared_ptr<engine::Database> database,
                              std::string default_dataset);

  QueryOutcome execute_sql(const std::string& sql,
                           const QueryLimits& limits) override;
  std::vector<RawColumnRecord> introspect() override;
  bool ai_native() const override { return false; }
  std::string dialect() const override { return "dar-sql"; }
  void close() override { open_ = false; }

  engine::Database& database() { return *db_; }
  std::shared_ptr<engine::Database> database_ptr() { return db_; }

 private:
  void require_open() const;
  std::shared_ptr<engine::Database> db_;
  std::string default_dataset_;
  bool open_ = true;
};

// Remote warehouse adapter speaking the HTTP+JSON protocol documented in
// docs/remote_protocol.md.
class RemoteConnection : public Connection {
 public:
  RemoteConnection(std::string base_url, std::string default_dataset,
                   std::string token, bool ai_native);
  ~RemoteConnection() override;

  QueryOutcome execute_sql(const std::string& sql,
                           const QueryLimits& limits) override;
  std::vector<RawColumnRecord> introspect() override;
  bool ai_native() const override { return ai_native_; }
  std::string dialect() const override { return "dar-sql"; }
  void close() override { open_ = false; }

 private:
  void require_open() const;
  std::string base_url_;
  std::string default_dataset_;
  std::string token_;
  bool ai_native_ = false;
  bool open_ = true;
};

}  // namespace dar::db
