#pragma once

#include <memory>
#include <string>
#include <vector>

#include "dar/core/session.hpp"
#include "dar/db/backend.hpp"
#include "dar/engine/database.hpp"
#include "dar/llm/gateway.hpp"

namespace dar::test {

inline ResearchBrief make_brief(int64_t max_llm_calls = 1000) {
  ResearchBrief b;
  b.objective = "explore the data";
  b.constraints.max_llm_calls = max_llm_calls;
  return b;
}

// A small two-table database the SQL tests share.
//   shop.orders(id, item, qty, price, note)   -- note has nulls
//   shop.customers(id, name, country)
inline std::shared_ptr<engine::Database> make_shop_db() {
  auto db = std::make_shared<engine::Database>();
  auto& ds = db->add_dataset("shop", "test dataset");

  engine::Table orders;
  orders.id = "orders";
  orders.columns = {{"id", LogicalType::Integer, false},
                    {"item", LogicalType::String, false},
                    {"qty", LogicalType::Integer, false},
                    {"price", LogicalType::Float, false},
                    {"note", LogicalType::String, true}};
  auto row = [](int64_t id, const char* item, int64_t qty, double price,
                Value note) {
    return std::vector<Value>{Value{id}, Value{std::string(item)}, Value{qty},
                              Value{price}, std::move(note)};
  };
  orders.rows = {
      row(1, "apple", 3, 1.50, Value{std::string("fresh")}),
      row(2, "banana", 5, 0.75, Value{}),
      row(3, "cherry", 2, 4.00, Value{std::string("ripe")}),
      row(4, "apple", 7, 1.40, Value{}),
      row(5, "durian", 1, 9.99, Value{std::string("pungent")}),
  };
  ds.tables.push_back(std::move(orders));

  engine::Table customers;
  customers.id = "customers";
  customers.columns = {{"id", LogicalType::Integer, false},
                       {"name", LogicalType::String, false},
                       {"country", LogicalType::String, false}};
  customers.rows = {
      std::vector<Value>{Value{int64_t{1}}, Value{std::string("Ana")},
                         Value{std::string("PT")}},
      std::vector<Value>{Value{int64_t{2}}, Value{std::string("Bo")},
                         Value{std::string("SE")}},
      std::vector<Value>{Value{int64_t{3}}, Value{std::string("Cy")},
                         Value{std::string("PT")}},
  };
  ds.tables.push_back(std::move(customers));
  return db;
}

inline std::unique_ptr<db::EmbeddedConnection> connect_shop() {
  return std::make_unique<db::EmbeddedConnection>(make_shop_db(), "shop");
}

inline std::shared_ptr<llm::ScriptedBackend> scripted(
    std::vector<llm::ScriptedRule> rules) {
  return std::make_shared<llm::ScriptedBackend>(std::move(rules));
}

inline llm::ScriptedRule rule(const std::string& match,
                              const std::string& reply,
                              bool consume_once = false, bool regex = false) {
  llm::ScriptedRule r;
  r.match = match;
  r.reply = reply;
  r.consume_once = consume_once;
  r.is_regex = regex;
  return r;
}

inline llm::Gateway make_gateway(std::shared_ptr<llm::Backend> backend) {
  return llm::Gateway(std::move(backend), llm::TemplateRegistry::builtin(),
                      llm::SchemaRegistry::builtin());
}

// Canonical text form of an outcome for whole-result comparisons.
inline std::string outcome_fingerprint(const QueryOutcome& o) {
  nlohmann::json j;
  j["columns"] = nlohmann::json::array();
  for (const auto& c : o.columns) {
    j["columns"].push_back({{"name", c.name}, {"type", to_string(c.type)}});
  }
  j["rows"] = nlohmann::json::array();
  for (const auto& r : o.rows) {
    nlohmann::json row = nlohmann::json::array();
    for (const auto& v : r) row.push_back(value_to_json(v));
    j["rows"].push_back(row);
  }
  if (o.error) j["error"] = o.error->code;
  return j.dump();
}

}  // namespace dar::test
