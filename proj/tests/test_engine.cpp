#include <doctest.h>

#include "dar/engine/executor.hpp"
#include "dar/engine/parser.hpp"
#include "dar/engine/tokenizer.hpp"
#include "support/test_util.hpp"

using namespace dar;
using namespace dar::engine;

namespace {

ResultSet run(const std::string& sql, int64_t max_rows = 1000) {
  static auto db = test::make_shop_db();
  ExecOptions opts;
  opts.default_dataset = "shop";
  opts.max_rows = max_rows;
  return execute_select(*db, sql, opts);
}

Value cell(const ResultSet& rs, size_t row, size_t col) {
  return rs.rows.at(row).at(col);
}

}  // namespace

TEST_SUITE("engine") {

TEST_CASE("tokenizer skips comments and decodes strings") {
  auto toks = tokenize("SELECT 'it''s' -- comment\n, /* x */ a FROM t");
  REQUIRE(toks.size() >= 6);
  CHECK(toks[0].upper == "SELECT");
  CHECK(toks[1].kind == TokenKind::String);
  CHECK(toks[1].text == "it's");
  CHECK(toks[2].is_punct(","));
  CHECK(toks[3].text == "a");
  // offsets point into the original text
  CHECK(toks[1].begin == 7);
}

TEST_CASE("tokenizer rejects unterminated literals") {
  CHECK_THROWS_AS(tokenize("SELECT 'oops"), TokenError);
  CHECK_THROWS_AS(tokenize("SELECT /* oops"), TokenError);
}

TEST_CASE("select constant with alias") {
  auto rs = run("SELECT 1 AS x");
  REQUIRE(rs.rows.size() == 1);
  CHECK(rs.columns[0].name == "x");
  CHECK(std::get<int64_t>(cell(rs, 0, 0)) == 1);
}

TEST_CASE("malformed SQL throws SyntaxError") {
  CHECK_THROWS_AS(run("SELEC 1"), SyntaxError);
  CHECK_THROWS_AS(run("SELECT FROM t"), SyntaxError);
}

TEST_CASE("projection, arithmetic and precedence") {
  auto rs = run("SELECT 2 + 3 * 4 AS a, (2 + 3) * 4 AS b, 7 / 2 AS c, "
                "7 % 2 AS d");
  CHECK(std::get<int64_t>(cell(rs, 0, 0)) == 14);
  CHECK(std::get<int64_t>(cell(rs, 0, 1)) == 20);
  CHECK(std::get<double>(cell(rs, 0, 2)) == doctest::Approx(3.5));
  CHECK(std::get<int64_t>(cell(rs, 0, 3)) == 1);
}

TEST_CASE("where filters and null three-valued logic") {
  auto rs = run("SELECT id FROM orders WHERE note IS NULL ORDER BY id");
  REQUIRE(rs.rows.size() == 2);
  CHECK(std::get<int64_t>(cell(rs, 0, 0)) == 2);
  CHECK(std::get<int64_t>(cell(rs, 1, 0)) == 4);

  // note = 'fresh' is NULL for null notes, which is not true
  auto rs2 = run("SELECT id FROM orders WHERE note = 'fresh'");
  CHECK(rs2.rows.size() == 1);
}

TEST_CASE("like, in, between") {
  CHECK(run("SELECT id FROM orders WHERE item LIKE '%an%'").rows.size() == 2);
  CHECK(run("SELECT id FROM orders WHERE item LIKE 'a____'").rows.size() == 2);
  CHECK(run("SELECT id FROM orders WHERE id IN (1, 3, 9)").rows.size() == 2);
  CHECK(run("SELECT id FROM orders WHERE id NOT IN (1, 3)").rows.size() == 3);
  CHECK(run("SELECT id FROM orders WHERE qty BETWEEN 2 AND 5").rows.size() ==
        3);
}

TEST_CASE("case expression") {
  auto rs = run("SELECT CASE WHEN qty > 4 THEN 'many' ELSE 'few' END AS k "
                "FROM orders ORDER BY id");
  CHECK(std::get<std::string>(cell(rs, 0, 0)) == "few");
  CHECK(std::get<std::string>(cell(rs, 1, 0)) == "many");
}

TEST_CASE("string helpers") {
  auto rs = run("SELECT UPPER(item) AS u, LENGTH(item) AS l, "
                "SUBSTR(item, 1, 2) AS s, CONCAT(item, '!') AS c, "
                "item || '?' AS p FROM orders WHERE id = 1");
  CHECK(std::get<std::string>(cell(rs, 0, 0)) == "APPLE");
  CHECK(std::get<int64_t>(cell(rs, 0, 1)) == 5);
  CHECK(std::get<std::string>(cell(rs, 0, 2)) == "ap");
  CHECK(std::get<std::string>(cell(rs, 0, 3)) == "apple!");
  CHECK(std::get<std::string>(cell(rs, 0, 4)) == "apple?");
}

TEST_CASE("concat propagates null, coalesce recovers") {
  auto rs = run("SELECT CONCAT(note, '!') AS c, COALESCE(note, 'none') AS n "
                "FROM orders WHERE id = 2");
  CHECK(is_null(cell(rs, 0, 0)));
  CHECK(std::get<std::string>(cell(rs, 0, 1)) == "none");
}

TEST_CASE("cast behavior") {
  auto rs = run("SELECT CAST('12' AS INTEGER) AS a, CAST(3 AS TEXT) AS b, "
                "CAST('x' AS INTEGER) AS c, CAST('2.5' AS FLOAT) AS d");
  CHECK(std::get<int64_t>(cell(rs, 0, 0)) == 12);
  CHECK(std::get<std::string>(cell(rs, 0, 1)) == "3");
  CHECK(is_null(cell(rs, 0, 2)));  // unparseable casts yield null
  CHECK(std::get<double>(cell(rs, 0, 3)) == doctest::Approx(2.5));
}

TEST_CASE("aggregates with and without group by") {
  auto rs = run("SELECT COUNT(*) AS n, SUM(qty) AS s, AVG(price) AS a, "
                "MIN(item) AS lo, MAX(item) AS hi FROM orders");
  REQUIRE(rs.rows.size() == 1);
  CHECK(std::get<int64_t>(cell(rs, 0, 0)) == 5);
  CHECK(std::get<int64_t>(cell(rs, 0, 1)) == 18);
  CHECK(std::get<double>(cell(rs, 0, 2)) == doctest::Approx(3.528));
  CHECK(std::get<std::string>(cell(rs, 0, 3)) == "apple");
  CHECK(std::get<std::string>(cell(rs, 0, 4)) == "durian");

  auto g = run("SELECT item, COUNT(*) AS n, SUM(qty) AS total FROM orders "
               "GROUP BY item ORDER BY n DESC, item ASC");
  REQUIRE(g.rows.size() == 4);
  CHECK(std::get<std::string>(cell(g, 0, 0)) == "apple");
  CHECK(std::get<int64_t>(cell(g, 0, 1)) == 2);
  CHECK(std::get<int64_t>(cell(g, 0, 2)) == 10);
}

TEST_CASE("count of expression skips nulls; count distinct") {
  auto rs = run("SELECT COUNT(note) AS nn, COUNT(DISTINCT item) AS di "
                "FROM orders");
  CHECK(std::get<int64_t>(cell(rs, 0, 0)) == 3);
  CHECK(std::get<int64_t>(cell(rs, 0, 1)) == 4);
}

TEST_CASE("group by aggregate-only over empty input yields one row") {
  auto rs = run("SELECT COUNT(*) AS n FROM orders WHERE id > 100");
  REQUIRE(rs.rows.size() == 1);
  CHECK(std::get<int64_t>(cell(rs, 0, 0)) == 0);
}

TEST_CASE("having filters groups") {
  auto rs = run("SELECT item, COUNT(*) AS n FROM orders GROUP BY item "
                "HAVING COUNT(*) > 1");
  REQUIRE(rs.rows.size() == 1);
  CHECK(std::get<std::string>(cell(rs, 0, 0)) == "apple");
}

TEST_CASE("bare column outside group by is rejected") {
  CHECK_THROWS_WITH_AS(run("SELECT item, qty FROM orders GROUP BY item"),
                       doctest::Contains("GROUP BY"), ExecError);
}

TEST_CASE("group by alias and ordinal") {
  auto rs = run("SELECT UPPER(item) AS u, COUNT(*) AS n FROM orders "
                "GROUP BY u ORDER BY 2 DESC, 1 ASC");
  CHECK(std::get<std::string>(cell(rs, 0, 0)) == "APPLE");
}

TEST_CASE("joins inner and left") {
  auto inner = run("SELECT o.id, c.name FROM orders o "
                   "JOIN customers c ON o.id = c.id ORDER BY o.id");
  CHECK(inner.rows.size() == 3);

  auto left = run("SELECT o.id, c.name FROM orders o "
                  "LEFT JOIN customers c ON o.id = c.id ORDER BY o.id");
  REQUIRE(left.rows.size() == 5);
  CHECK(is_null(cell(left, 4, 1)));

  auto agg = run("SELECT c.country, SUM(o.qty) AS total FROM orders o "
                 "JOIN customers c ON o.id = c.id "
                 "GROUP BY c.country ORDER BY total DESC");
  REQUIRE(agg.rows.size() == 2);
  CHECK(std::get<std::string>(cell(agg, 0, 0)) == "PT");
  CHECK(std::get<int64_t>(cell(agg, 0, 1)) == 5);
}

TEST_CASE("ambiguous unqualified column is an error") {
  CHECK_THROWS_WITH_AS(
      run("SELECT id FROM orders o JOIN customers c ON o.id = c.id"),
      doctest::Contains("ambiguous"), ExecError);
}

TEST_CASE("order by with nulls first ascending, limit and offset") {
  auto rs = run("SELECT note FROM orders ORDER BY note ASC");
  CHECK(is_null(cell(rs, 0, 0)));
  auto lim = run("SELECT id FROM orders ORDER BY id LIMIT 2 OFFSET 1");
  REQUIRE(lim.rows.size() == 2);
  CHECK(std::get<int64_t>(cell(lim, 0, 0)) == 2);
}

TEST_CASE("distinct deduplicates") {
  auto rs = run("SELECT DISTINCT item FROM orders ORDER BY item");
  CHECK(rs.rows.size() == 4);
}

TEST_CASE("max_rows truncation is flagged") {
  auto rs = run("SELECT id FROM orders", 3);
  CHECK(rs.rows.size() == 3);
  CHECK(rs.truncated);
}

TEST_CASE("division by zero yields null") {
  auto rs = run("SELECT 1 / 0 AS a, 1 % 0 AS b");
  CHECK(is_null(cell(rs, 0, 0)));
  CHECK(is_null(cell(rs, 0, 1)));
}

TEST_CASE("unknown identifiers raise typed errors") {
  CHECK_THROWS_AS(run("SELECT nope FROM orders"), ExecError);
  CHECK_THROWS_AS(run("SELECT * FROM missing"), ExecError);
  CHECK_THROWS_AS(run("SELECT * FROM nowhere.orders"), ExecError);
  CHECK_THROWS_AS(run("SELECT NOPE(1)"), ExecError);
}

TEST_CASE("information_schema reflects the catalog") {
  auto tables = run("SELECT dataset_id, table_id, row_count FROM "
                    "information_schema.tables ORDER BY table_id");
  REQUIRE(tables.rows.size() == 2);
  CHECK(std::get<std::string>(cell(tables, 0, 1)) == "customers");
  CHECK(std::get<int64_t>(cell(tables, 0, 2)) == 3);

  auto cols = run("SELECT COUNT(*) AS n FROM information_schema.columns");
  CHECK(std::get<int64_t>(cell(cols, 0, 0)) == 8);

  auto ds = run("SELECT dataset_id, table_count FROM "
                "information_schema.datasets");
  REQUIRE(ds.rows.size() == 1);
  CHECK(std::get<std::string>(cell(ds, 0, 0)) == "shop");
  CHECK(std::get<int64_t>(cell(ds, 0, 1)) == 2);
}

TEST_CASE("iso_week handles year boundaries") {
  auto rs = run("SELECT ISO_WEEK('2023-01-02 00:00:00') AS a, "
                "ISO_WEEK('2023-01-01 10:00:00') AS b, "
                "ISO_WEEK('2021-01-01 00:00:00') AS c, "
                "ISO_WEEK('2020-12-31 00:00:00') AS d, "
                "ISO_WEEK('2024-12-29 23:59:59') AS e, "
                "DATE('2024-06-05 12:00:00') AS f");
  CHECK(std::get<std::string>(cell(rs, 0, 0)) == "2023-W01");
  CHECK(std::get<std::string>(cell(rs, 0, 1)) == "2022-W52");
  CHECK(std::get<std::string>(cell(rs, 0, 2)) == "2020-W53");
  CHECK(std::get<std::string>(cell(rs, 0, 3)) == "2020-W53");
  CHECK(std::get<std::string>(cell(rs, 0, 4)) == "2024-W52");
  CHECK(std::get<std::string>(cell(rs, 0, 5)) == "2024-06-05");
}

TEST_CASE("rows scanned count base table work") {
  auto rs = run("SELECT COUNT(*) AS n FROM orders");
  CHECK(rs.rows_scanned == 5);
  CHECK(rs.bytes_scanned > 0);
}

TEST_CASE("database json round trip preserves content") {
  auto db = test::make_shop_db();
  auto j = db->to_json();
  auto back = Database::from_json(j);
  CHECK(back.to_json().dump() == j.dump());
}

}  // TEST_SUITE
