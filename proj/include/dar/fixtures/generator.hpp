#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include <json.hpp>

#include "dar/engine/database.hpp"

namespace dar::fixtures {

struct FixtureScale {
  int64_t n_assets = 26;
  int64_t n_incidents = 11489;
};

struct FixtureResult {
  std::shared_ptr<engine::Database> database;
  nlohmann::json ground_truth;  // planted-pattern sidecar
};

// Deterministic synthetic asset-incident database ("research_poc" dataset):
// assets and incidents with 19 attributes each, SeverityLevel in {1,2,3},
// UTC timestamps. Three planted patterns at sufficient scale — geographic
// clustering around hot assets, a severity-heavy region, and a spike week —
// each with a reference SQL query recorded in the sidecar. Same (seed,
// scale) always produces byte-identical files.
FixtureResult generate_fixture(uint64_t seed, const FixtureScale& scale);

// Writes the database file and the ground-truth JSON sidecar.
void write_fixture(const FixtureResult& fixture, const std::string& db_path,
                   const std::string& sidecar_path);

inline constexpr const char* kDatasetId = "research_poc";

}  // namespace dar::fixtures
