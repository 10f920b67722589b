#include <chrono>

#include <httplib.h>

#include "dar/db/backend.hpp"

namespace dar::db {

RemoteConnection::RemoteConnection(std::string base_url,
                                   std::string default_dataset,
                                   std::string token, bool ai_native)
    : base_url_(std::move(base_url)),
      default_dataset_(std::move(default_dataset)),
      token_(std::move(token)),
      ai_native_(ai_native) {}

RemoteConnection::~RemoteConnection() = default;

void RemoteConnection::require_open() const {
  if (!open_) throw ConnectionError("connection is closed");
}

QueryOutcome RemoteConnection::execute_sql(const std::string& sql,
                                           const QueryLimits& limits) {
  require_open();
  if (sql.empty()) {
    return QueryOutcome::failed("syntax_error", "empty SQL text");
  }
  httplib::Client client(base_url_);
  client.set_connection_timeout(10);
  client.set_read_timeout(static_cast<time_t>(limits.timeout_s), 0);
  httplib::Headers headers;
  if (!token_.empty()) {
    headers.emplace("Authorization", "Bearer " + token_);
  }

  nlohmann::json request = {
      {"sql", sql},
      {"params", nlohmann::json::object()},
      {"limits",
       {{"max_rows", limits.max_rows}, {"timeout_s", limits.timeout_s}}}};
  if (!default_dataset_.empty()) request["default_dataset"] = default_dataset_;

  auto t0 = std::chrono::steady_clock::now();
  auto res = client.Post("/v1/execute_sql", headers, request.dump(),
                         "application/json");
  if (!res) {
    throw ConnectionError("cannot reach " + base_url_ + ": " +
                          httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw ConnectionError("remote returned HTTP " +
                          std::to_string(res->status));
  }

  nlohmann::json body;
  try {
    body = nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::exception& e) {
    throw ConnectionError(std::string("malformed remote response: ") +
                          e.what());
  }

  QueryOutcome out;
  if (body.contains("error") && !body["error"].is_null()) {
    out.error = QueryError{body["error"].value("code", "remote_error"),
                           body["error"].value("message", "")};
  } else {
    for (const auto& cj : body.at("columns")) {
      bool known = false;
      LogicalType t = engine::logical_from_native(
          cj.at("type").get<std::string>(), &known);
      if (!known) {
        out.warnings.push_back("unknown native type '" +
                               cj.at("type").get<std::string>() +
                               "' mapped to string");
      }
      out.columns.push_back({cj.at("name").get<std::string>(), t});
    }
    for (const auto& rj : body.at("rows")) {
      std::vector<Value> row;
      row.reserve(rj.size());
      for (const auto& vj : rj) row.push_back(value_from_json(vj));
      out.rows.push_back(std::move(row));
    }
  }
  if (body.contains("stats")) {
    const auto& s = body["stats"];
    out.cost = s.value("cost", 0.0);
    out.truncated = s.value("truncated", false);
  }
  out.elapsed_s = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
  return out;
}

std::vector<RawColumnRecord> RemoteConnection::introspect() {
  require_open();
  QueryLimits limits;
  limits.max_rows = 100000;  // catalogs are small; do not truncate them
  QueryOutcome out = execute_sql(
      "SELECT dataset_id, table_id, column_name, ordinal_position, data_type, "
      "is_nullable FROM information_schema.columns "
      "ORDER BY dataset_id, table_id, ordinal_position",
      limits);
  if (out.error) {
    throw ConnectionError("introspection failed: " + out.error->message);
  }
  std::vector<RawColumnRecord> records;
  for (size_t i = 0; i < out.rows.size(); ++i) {
    RawColumnRecord r;
    r.dataset_id = std::get<std::string>(out.cell(i, "dataset_id"));
    r.table_id = std::get<std::string>(out.cell(i, "table_id"));
    r.column_name = std::get<std::string>(out.cell(i, "column_name"));
    r.ordinal_position = std::get<int64_t>(out.cell(i, "ordinal_position"));
    r.native_type = std::get<std::string>(out.cell(i, "data_type"));
    r.nullable = std::get<bool>(out.cell(i, "is_nullable"));
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace dar::db
