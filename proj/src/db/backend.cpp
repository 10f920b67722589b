#include "dar/db/backend.hpp"
#include <algorithm>

#include <chrono>
#include <cstdlib>

#include "dar/engine/executor.hpp"

namespace dar::db {

void ConnectionConfig::validate() const {
  if (kind == Kind::Remote && location.empty()) {
    throw ConfigError("remote connection requires a URL");
  }
  if (kind == Kind::Embedded && location.empty() && !in_memory) {
    throw ConfigError("embedded connection requires a path or in_memory");
  }
}

ConnectionConfig ConnectionConfig::from_json(const nlohmann::json& j) {
  ConnectionConfig c;
  std::string kind = j.value("kind", "embedded");
  if (kind == "embedded") {
    c.kind = Kind::Embedded;
  } else if (kind == "remote") {
    c.kind = Kind::Remote;
  } else {
    throw ConfigError("connection.kind must be embedded or remote");
  }
  c.location = j.value("location", "");
  c.in_memory = j.value("in_memory", false);
  c.default_dataset = j.value("default_dataset", "");
  c.token_env = j.value("token_env", "DAR_API_TOKEN");
  c.remote_ai_native = j.value("ai_native", false);
  c.validate();
  return c;
}

nlohmann::json ConnectionConfig::to_json() const {
  return {{"kind", kind == Kind::Embedded ? "embedded" : "remote"},
          {"location", location},
          {"in_memory", in_memory},
          {"default_dataset", default_dataset},
          {"token_env", token_env},
          {"ai_native", remote_ai_native}};
}

std::unique_ptr<Connection> connect(const ConnectionConfig& config) {
  config.validate();
  if (config.kind == ConnectionConfig::Kind::Embedded) {
    std::shared_ptr<engine::Database> database;
    if (config.in_memory) {
      database = std::make_shared<engine::Database>();
    } else {
      database = engine::Database::load(config.location);
    }
    return std::make_unique<EmbeddedConnection>(std::move(database),
                                                config.default_dataset);
  }
  const char* token = nullptr;
  if (!config.token_env.empty()) token = std::getenv(config.token_env.c_str());
  return std::make_unique<RemoteConnection>(
      config.location, config.default_dataset, token ? token : "",
      config.remote_ai_native);
}

// ---------------------------------------------------------------------------
// Embedded adapter.

EmbeddedConnection::EmbeddedConnection(
    std::shared_ptr<engine::Database> database, std::string default_dataset)
    : db_(std::move(database)), default_dataset_(std::move(default_dataset)) {}

void EmbeddedConnection::require_open() const {
  if (!open_) throw ConnectionError("connection is closed");
}

QueryOutcome EmbeddedConnection::execute_sql(const std::string& sql,
                                             const QueryLimits& limits) {
  require_open();
  if (sql.empty()) {
    return QueryOutcome::failed("syntax_error", "empty SQL text");
  }
  auto t0 = std::chrono::steady_clock::now();
  QueryOutcome out;
  try {
    engine::ExecOptions opts;
    opts.default_dataset = default_dataset_;
    opts.max_rows = limits.max_rows;
    engine::ResultSet rs = engine::execute_select(*db_, sql, opts);
    out.columns = std::move(rs.columns);
    out.rows = std::move(rs.rows);
    out.truncated = rs.truncated;
    // Cost mirrors warehouse bytes-scanned semantics at desk scale.
    out.cost = rs.bytes_scanned / 1e9;
  } catch (const DarError& e) {
    out = QueryOutcome::failed(e.code(), e.what());
  }
  out.elapsed_s = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
  return out;
}

std::vector<RawColumnRecord> EmbeddedConnection::introspect() {
  require_open();
  std::vector<RawColumnRecord> records;
  for (const auto& ds : db_->datasets()) {
    for (const auto& t : ds.tables) {
      int64_t pos = 1;
      for (const auto& c : t.columns) {
        records.push_back({ds.id, t.id, c.name, pos++,
                           engine::native_type_name(c.type), c.nullable});
      }
    }
  }
  std::sort(records.begin(), records.end(),
            [](const RawColumnRecord& a, const RawColumnRecord& b) {
              if (a.dataset_id != b.dataset_id) {
                return a.dataset_id < b.dataset_id;
              }
              if (a.table_id != b.table_id) return a.table_id < b.table_id;
              return a.ordinal_position < b.ordinal_position;
            });
  return records;
}

}  // namespace dar::db
