#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dar/core/types.hpp"
#include "dar/db/backend.hpp"

namespace dar::meta {

// The four metadata operations giving the research initiator a structured
// view of the database, plus catalog assembly. All of them work through the
// sql-backend surface (information_schema + one profiling query per table),
// never through engine internals, so they behave identically on embedded
// and remote connections.

std::vector<std::string> list_dataset_ids(db::Connection& conn);

std::vector<std::string> list_table_ids(db::Connection& conn,
                                        const std::string& dataset_id);

// Full column schemas plus row_count and per-column null_fraction, computed
// by a single profiling query. Unknown native types map to string; a note is
// appended to *warnings when provided.
TableInfo list_table_info(db::Connection& conn, const std::string& dataset_id,
                          const std::string& table_id,
                          std::vector<std::string>* warnings = nullptr);

// Dataset-level metadata: description plus shallow table entries (ids and
// row counts; columns are left to list_table_info).
DatasetInfo list_dataset_info(db::Connection& conn,
                              const std::string& dataset_id);

// scope nullopt = every visible dataset; empty list = empty catalog.
SchemaCatalog build_catalog(db::Connection& conn,
                            const std::optional<std::vector<std::string>>& scope,
                            std::vector<std::string>* warnings = nullptr);

}  // namespace dar::meta
