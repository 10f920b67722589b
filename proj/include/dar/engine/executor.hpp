#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dar/core/types.hpp"
#include "dar/engine/ast.hpp"
#include "dar/engine/database.hpp"

namespace dar::engine {

class ExecError : public DarError {
 public:
  ExecError(std::string code, const std::string& m)
      : DarError(std::move(code), m) {}
};

struct ExecOptions {
  std::string default_dataset;  // used for unqualified table names
  int64_t max_rows = 1000;      // result cap; excess flagged as truncated
};

struct ResultSet {
  std::vector<ColumnMeta> columns;
  std::vector<std::vector<Value>> rows;
  bool truncated = false;
  int64_t rows_scanned = 0;
  double bytes_scanned = 0.0;
};

// Evaluates one SELECT against the database. Throws ExecError (unknown_*,
// type_error, unsupported) or SyntaxError; callers that need error-as-data
// wrap this (see db::EmbeddedConnection).
ResultSet execute_select(const Database& db, const std::string& sql,
                         const ExecOptions& opts);

}  // namespace dar::engine
