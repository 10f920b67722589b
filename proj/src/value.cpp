#include "dar/value.hpp"

#include <cmath>
#include <cstdio>

namespace dar {

bool value_is_numeric(const Value& v) {
  return std::holds_alternative<int64_t>(v) ||
         std::holds_alternative<double>(v);
}

double value_as_double(const Value& v) {
  if (std::holds_alternative<int64_t>(v)) {
    return static_cast<double>(std::get<int64_t>(v));
  }
  return std::get<double>(v);
}

namespace {

int type_rank(const Value& v) {
  if (std::holds_alternative<std::monostate>(v)) return 0;
  if (std::holds_alternative<bool>(v)) return 1;
  if (value_is_numeric(v)) return 2;
  return 3;
}

}  // namespace

int value_compare(const Value& a, const Value& b) {
  int ra = type_rank(a), rb = type_rank(b);
  if (ra != rb) return ra < rb ? -1 : 1;
  switch (ra) {
    case 0:
      return 0;
    case 1: {
      bool x = std::get<bool>(a), y = std::get<bool>(b);
      return x == y ? 0 : (x < y ? -1 : 1);
    }
    case 2: {
      // Exact comparison when both sides are integers.
      if (std::holds_alternative<int64_t>(a) &&
          std::holds_alternative<int64_t>(b)) {
        int64_t x = std::get<int64_t>(a), y = std::get<int64_t>(b);
        return x == y ? 0 : (x < y ? -1 : 1);
      }
      double x = value_as_double(a), y = value_as_double(b);
      if (x == y) return 0;
      return x < y ? -1 : 1;
    }
    default: {
      const std::string& x = std::get<std::string>(a);
      const std::string& y = std::get<std::string>(b);
      return x.compare(y) < 0 ? -1 : (x == y ? 0 : 1);
    }
  }
}

std::string value_to_display(const Value& v) {
  if (is_null(v)) return "null";
  if (std::holds_alternative<bool>(v)) return std::get<bool>(v) ? "true" : "false";
  if (std::holds_alternative<int64_t>(v)) return std::to_string(std::get<int64_t>(v));
  if (std::holds_alternative<double>(v)) {
    double d = std::get<double>(v);
    if (std::isfinite(d) && d == std::floor(d) && std::fabs(d) < 1e15) {
      // Whole-valued doubles print without a trailing ".0" noise in prompts.
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.1f", d);
      return buf;
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", d);
    return buf;
  }
  return std::get<std::string>(v);
}

nlohmann::json value_to_json(const Value& v) {
  if (is_null(v)) return nullptr;
  if (std::holds_alternative<bool>(v)) return std::get<bool>(v);
  if (std::holds_alternative<int64_t>(v)) return std::get<int64_t>(v);
  if (std::holds_alternative<double>(v)) return std::get<double>(v);
  return std::get<std::string>(v);
}

Value value_from_json(const nlohmann::json& j) {
  if (j.is_null()) return std::monostate{};
  if (j.is_boolean()) return j.get<bool>();
  if (j.is_number_integer()) return j.get<int64_t>();
  if (j.is_number()) return j.get<double>();
  return j.get<std::string>();
}

}  // namespace dar
