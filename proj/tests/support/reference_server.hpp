#pragma once

#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "dar/db/backend.hpp"

namespace dar::test {

// Minimal warehouse stand-in: serves the documented /v1/execute_sql
// protocol over an embedded database, for adapter-equivalence tests.
class ReferenceServer {
 public:
  explicit ReferenceServer(std::shared_ptr<engine::Database> database,
                           std::string default_dataset = "") {
    conn_ = std::make_unique<db::EmbeddedConnection>(std::move(database),
                                                     std::move(default_dataset));
    server_.Post("/v1/execute_sql", [this](const httplib::Request& req,
                                           httplib::Response& res) {
      nlohmann::json body = nlohmann::json::parse(req.body);
      {
        std::lock_guard<std::mutex> lock(mu_);
        received_sql_.push_back(body.at("sql").get<std::string>());
      }
      db::QueryLimits limits;
      if (body.contains("limits")) {
        limits.max_rows = body["limits"].value("max_rows", int64_t{1000});
        limits.timeout_s = body["limits"].value("timeout_s", 120.0);
      }
      QueryOutcome out =
          conn_->execute_sql(body.at("sql").get<std::string>(), limits);
      nlohmann::json resp;
      if (out.error) {
        resp["error"] = {{"code", out.error->code},
                         {"message", out.error->message}};
      } else {
        nlohmann::json cols = nlohmann::json::array();
        for (const auto& c : out.columns) {
          cols.push_back(
              {{"name", c.name}, {"type", engine::native_type_name(c.type)}});
        }
        nlohmann::json rows = nlohmann::json::array();
        for (const auto& r : out.rows) {
          nlohmann::json row = nlohmann::json::array();
          for (const auto& v : r) row.push_back(value_to_json(v));
          rows.push_back(std::move(row));
        }
        resp["columns"] = std::move(cols);
        resp["rows"] = std::move(rows);
      }
      resp["stats"] = {{"elapsed_s", out.elapsed_s},
                       {"cost", out.cost},
                       {"truncated", out.truncated}};
      res.set_content(resp.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~ReferenceServer() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  std::string url() const {
    return "http://127.0.0.1:" + std::to_string(port_);
  }

  std::vector<std::string> received_sql() const {
    std::lock_guard<std::mutex> lock(mu_);
    return received_sql_;
  }

 private:
  std::unique_ptr<db::EmbeddedConnection> conn_;
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  mutable std::mutex mu_;
  std::vector<std::string> received_sql_;
};

}  // namespace dar::test
