#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "dar/fixtures/generator.hpp"
#include "support/reference_server.hpp"
#include "support/test_util.hpp"

using namespace dar;

namespace {

std::vector<std::string> corpus_files(const std::string& subdir) {
  std::vector<std::string> files;
  for (const auto& e : std::filesystem::directory_iterator(
           std::string(DAR_SOURCE_DIR) + "/corpus/" + subdir)) {
    if (e.path().extension() == ".sql") files.push_back(e.path().string());
  }
  std::sort(files.begin(), files.end());
  return files;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

TEST_SUITE("backend") {

TEST_CASE("select constant comes back as data") {
  auto conn = test::connect_shop();
  auto out = conn->execute_sql("SELECT 1 AS x", {});
  REQUIRE(!out.error);
  REQUIRE(out.rows.size() == 1);
  CHECK(std::get<int64_t>(out.cell(0, "x")) == 1);
  CHECK(out.elapsed_s >= 0);
}

TEST_CASE("sql failures are data, never exceptions") {
  auto conn = test::connect_shop();
  for (const char* bad :
       {"SELEC 1", "", "SELECT nope FROM orders", "SELECT * FROM missing",
        "SELECT 'unterminated", "SELECT UNKNOWN_FUNC(1)"}) {
    QueryOutcome out;
    CHECK_NOTHROW(out = conn->execute_sql(bad, {}));
    REQUIRE_MESSAGE(out.error.has_value(), "expected error for: " << bad);
    CHECK(out.rows.empty());
    CHECK(!out.error->code.empty());
  }
  auto syn = conn->execute_sql("SELEC 1", {});
  CHECK(syn.error->code == "syntax_error");
}

TEST_CASE("closed connection throws connection_failed") {
  auto conn = test::connect_shop();
  conn->close();
  CHECK_THROWS_AS(conn->execute_sql("SELECT 1 AS x", {}), ConnectionError);
  CHECK_THROWS_AS(conn->introspect(), ConnectionError);
}

TEST_CASE("row limit is honored and truncation flagged") {
  auto conn = test::connect_shop();
  db::QueryLimits limits;
  limits.max_rows = 2;
  auto out = conn->execute_sql("SELECT id FROM orders", limits);
  CHECK(out.rows.size() == 2);
  CHECK(out.truncated);
}

TEST_CASE("cost mirrors bytes scanned") {
  auto conn = test::connect_shop();
  auto out = conn->execute_sql("SELECT COUNT(*) AS n FROM orders", {});
  CHECK(out.cost > 0);
  auto bigger = conn->execute_sql(
      "SELECT COUNT(*) AS n FROM orders o CROSS JOIN customers c", {});
  CHECK(bigger.cost > out.cost);
}

TEST_CASE("introspect re-reads the live catalog") {
  auto conn = test::connect_shop();
  auto before = conn->introspect();
  CHECK(before.size() == 8);
  CHECK(before[0].dataset_id == "shop");
  CHECK(!before[0].native_type.empty());
  conn->database().drop_table("shop", "customers");
  auto after = conn->introspect();
  CHECK(after.size() == 5);  // no caching
}

TEST_CASE("connection config validation") {
  db::ConnectionConfig remote;
  remote.kind = db::ConnectionConfig::Kind::Remote;
  CHECK_THROWS_AS(remote.validate(), ConfigError);
  remote.location = "http://x";
  CHECK_NOTHROW(remote.validate());

  db::ConnectionConfig embedded;
  embedded.kind = db::ConnectionConfig::Kind::Embedded;
  CHECK_THROWS_AS(embedded.validate(), ConfigError);
  embedded.in_memory = true;
  CHECK_NOTHROW(embedded.validate());
}

TEST_CASE("database files load through connect") {
  auto tmp = std::filesystem::temp_directory_path() / "dar_backend_test";
  std::filesystem::create_directories(tmp);
  auto path = (tmp / "shop.dardb").string();
  test::make_shop_db()->save(path);

  db::ConnectionConfig cfg;
  cfg.kind = db::ConnectionConfig::Kind::Embedded;
  cfg.location = path;
  cfg.default_dataset = "shop";
  auto conn = db::connect(cfg);
  auto out = conn->execute_sql("SELECT COUNT(*) AS n FROM orders", {});
  CHECK(std::get<int64_t>(out.cell(0, "n")) == 5);

  cfg.location = (tmp / "missing.dardb").string();
  CHECK_THROWS_AS(db::connect(cfg), ConnectionError);
}

TEST_CASE("remote adapter equals embedded on the conformance corpus") {
  fixtures::FixtureScale scale;
  scale.n_assets = 26;
  scale.n_incidents = 120;
  auto fixture = fixtures::generate_fixture(7, scale);

  test::ReferenceServer server(fixture.database);
  db::RemoteConnection remote(server.url(), "", "", false);
  db::EmbeddedConnection embedded(fixture.database, "");

  for (const auto& file : corpus_files("plain")) {
    std::string sql = slurp(file);
    auto a = embedded.execute_sql(sql, {});
    auto b = remote.execute_sql(sql, {});
    CAPTURE(file);
    REQUIRE(!a.error);
    REQUIRE(!b.error);
    CHECK(test::outcome_fingerprint(a) == test::outcome_fingerprint(b));
  }
}

TEST_CASE("remote adapter propagates sql errors as data") {
  test::ReferenceServer server(test::make_shop_db(), "shop");
  db::RemoteConnection remote(server.url(), "shop", "", false);
  auto out = remote.execute_sql("SELEC 1", {});
  REQUIRE(out.error);
  CHECK(out.error->code == "syntax_error");
}

TEST_CASE("remote introspection matches embedded") {
  auto db1 = test::make_shop_db();
  test::ReferenceServer server(db1);
  db::RemoteConnection remote(server.url(), "", "", false);
  db::EmbeddedConnection embedded(db1, "");
  auto a = embedded.introspect();
  auto b = remote.introspect();
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].dataset_id == b[i].dataset_id);
    CHECK(a[i].table_id == b[i].table_id);
    CHECK(a[i].column_name == b[i].column_name);
    CHECK(a[i].ordinal_position == b[i].ordinal_position);
    CHECK(a[i].native_type == b[i].native_type);
    CHECK(a[i].nullable == b[i].nullable);
  }
}

TEST_CASE("unreachable remote throws connection_failed") {
  db::RemoteConnection remote("http://127.0.0.1:1", "", "", false);
  CHECK_THROWS_AS(remote.execute_sql("SELECT 1 AS x", {}), ConnectionError);
}

}  // TEST_SUITE
