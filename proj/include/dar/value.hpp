#pragma once

#include <cstdint>
#include <string>
#include <variant>

#include <json.hpp>

namespace dar {

// One typed SQL cell. Timestamps and geo points are carried as strings; the
// column metadata says how to read them.
using Value = std::variant<std::monostate, bool, int64_t, double, std::string>;

inline bool is_null(const Value& v) {
  return std::holds_alternative<std::monostate>(v);
}

bool value_is_numeric(const Value& v);
double value_as_double(const Value& v);  // requires numeric

// Total order used for ORDER BY and result comparison:
// null < boolean < numeric < string. Returns <0, 0, >0.
int value_compare(const Value& a, const Value& b);

// Display form used when a cell is spliced into a prompt.
std::string value_to_display(const Value& v);

nlohmann::json value_to_json(const Value& v);
Value value_from_json(const nlohmann::json& j);

}  // namespace dar
