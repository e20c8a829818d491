#include "doctest.h"

#include "tasql/errors.hpp"
#include "tasql/sql_ast.hpp"
#include "tasql/sql_parser.hpp"

using namespace tasql;

namespace {

std::string rendered(const std::string& text) { return sql::render_sql(sql::parse_sql(text)); }

}  // namespace

TEST_CASE("basic select round-trips") {
  CHECK(rendered("SELECT a FROM t") == "SELECT a FROM t");
  CHECK(rendered("select a, b from t") == "SELECT a, b FROM t");
  CHECK(rendered("SELECT * FROM t") == "SELECT * FROM t");
  CHECK(rendered("SELECT t.* FROM t") == "SELECT t.* FROM t");
  CHECK(rendered("SELECT DISTINCT a FROM t") == "SELECT DISTINCT a FROM t");
  CHECK(rendered("SELECT 1") == "SELECT 1");
  CHECK(rendered("SELECT a FROM t;") == "SELECT a FROM t");
}

TEST_CASE("aliases, implicit and explicit") {
  CHECK(rendered("SELECT x.a FROM t x") == "SELECT x.a FROM t AS x");
  CHECK(rendered("SELECT x.a FROM t AS x") == "SELECT x.a FROM t AS x");
  CHECK(rendered("SELECT a AS b FROM t") == "SELECT a AS b FROM t");
  CHECK(rendered("SELECT a b FROM t") == "SELECT a AS b FROM t");
  CHECK(rendered("SELECT count(*) n FROM t") == "SELECT COUNT(*) AS n FROM t");
}

TEST_CASE("joins") {
  CHECK(rendered("SELECT a FROM t JOIN u ON t.id = u.id") ==
        "SELECT a FROM t INNER JOIN u ON t.id = u.id");
  CHECK(rendered("SELECT a FROM t INNER JOIN u ON t.id = u.id") ==
        "SELECT a FROM t INNER JOIN u ON t.id = u.id");
  CHECK(rendered("SELECT a FROM t LEFT OUTER JOIN u ON t.id = u.id") ==
        "SELECT a FROM t LEFT JOIN u ON t.id = u.id");
  CHECK(rendered("SELECT a FROM t CROSS JOIN u") == "SELECT a FROM t CROSS JOIN u");
  CHECK(rendered("SELECT a FROM t, u WHERE t.id = u.id") ==
        "SELECT a FROM t, u WHERE t.id = u.id");
  CHECK(rendered("SELECT a FROM t JOIN u USING (id)") ==
        "SELECT a FROM t INNER JOIN u USING (id)");
  CHECK(rendered("SELECT a FROM t t1 JOIN t t2 ON t1.id = t2.parent") ==
        "SELECT a FROM t AS t1 INNER JOIN t AS t2 ON t1.id = t2.parent");
}

TEST_CASE("expressions and precedence") {
  CHECK(rendered("SELECT a + b * c FROM t") == "SELECT a + b * c FROM t");
  CHECK(rendered("SELECT (a + b) * c FROM t") == "SELECT (a + b) * c FROM t");
  CHECK(rendered("SELECT a / b / c FROM t") == "SELECT a / b / c FROM t");
  CHECK(rendered("SELECT a - (b - c) FROM t") == "SELECT a - (b - c) FROM t");
  CHECK(rendered("SELECT -a FROM t") == "SELECT -a FROM t");
  CHECK(rendered("SELECT a || b FROM t") == "SELECT a || b FROM t");
  CHECK(rendered("SELECT a FROM t WHERE NOT x = 1 AND y = 2 OR z = 3") ==
        "SELECT a FROM t WHERE NOT x = 1 AND y = 2 OR z = 3");
  CHECK(rendered("SELECT a FROM t WHERE x = 1 AND (y = 2 OR z = 3)") ==
        "SELECT a FROM t WHERE x = 1 AND (y = 2 OR z = 3)");
  CHECK(rendered("SELECT a FROM t WHERE x <> 1") == "SELECT a FROM t WHERE x != 1");
  CHECK(rendered("SELECT a FROM t WHERE x == 1") == "SELECT a FROM t WHERE x = 1");
}

TEST_CASE("literals") {
  CHECK(rendered("SELECT 'it''s' FROM t") == "SELECT 'it''s' FROM t");
  CHECK(rendered("SELECT 1.5, -2, .5, 1e3 FROM t") == "SELECT 1.5, -2, .5, 1e3 FROM t");
  CHECK(rendered("SELECT NULL FROM t") == "SELECT NULL FROM t");
}

TEST_CASE("predicates") {
  CHECK(rendered("SELECT a FROM t WHERE x IS NULL") == "SELECT a FROM t WHERE x IS NULL");
  CHECK(rendered("SELECT a FROM t WHERE x IS NOT NULL") ==
        "SELECT a FROM t WHERE x IS NOT NULL");
  CHECK(rendered("SELECT a FROM t WHERE x BETWEEN 1 AND 5") ==
        "SELECT a FROM t WHERE x BETWEEN 1 AND 5");
  CHECK(rendered("SELECT a FROM t WHERE x NOT BETWEEN 1 AND 5") ==
        "SELECT a FROM t WHERE x NOT BETWEEN 1 AND 5");
  CHECK(rendered("SELECT a FROM t WHERE x IN (1, 2, 3)") ==
        "SELECT a FROM t WHERE x IN (1, 2, 3)");
  CHECK(rendered("SELECT a FROM t WHERE x NOT IN (SELECT y FROM u)") ==
        "SELECT a FROM t WHERE x NOT IN (SELECT y FROM u)");
  CHECK(rendered("SELECT a FROM t WHERE x LIKE '%z%'") ==
        "SELECT a FROM t WHERE x LIKE '%z%'");
  CHECK(rendered("SELECT a FROM t WHERE x NOT LIKE 'z'") ==
        "SELECT a FROM t WHERE x NOT LIKE 'z'");
  CHECK(rendered("SELECT a FROM t WHERE EXISTS (SELECT 1 FROM u)") ==
        "SELECT a FROM t WHERE EXISTS (SELECT 1 FROM u)");
}

TEST_CASE("functions, case, cast") {
  CHECK(rendered("SELECT COUNT(*) FROM t") == "SELECT COUNT(*) FROM t");
  CHECK(rendered("SELECT count(distinct a) FROM t") == "SELECT COUNT(DISTINCT a) FROM t");
  CHECK(rendered("SELECT SUM(a + b) FROM t") == "SELECT SUM(a + b) FROM t");
  CHECK(rendered("SELECT IIF(a = 1, 'y', 'n') FROM t") ==
        "SELECT IIF(a = 1, 'y', 'n') FROM t");
  CHECK(rendered("SELECT CAST(a AS REAL) FROM t") == "SELECT CAST(a AS REAL) FROM t");
  CHECK(rendered("SELECT CASE WHEN a = 1 THEN 'x' ELSE 'y' END FROM t") ==
        "SELECT CASE WHEN a = 1 THEN 'x' ELSE 'y' END FROM t");
  CHECK(rendered("SELECT CASE a WHEN 1 THEN 'x' WHEN 2 THEN 'y' END FROM t") ==
        "SELECT CASE a WHEN 1 THEN 'x' WHEN 2 THEN 'y' END FROM t");
}

TEST_CASE("grouping, ordering, limits") {
  CHECK(rendered("SELECT a, COUNT(*) FROM t GROUP BY a") ==
        "SELECT a, COUNT(*) FROM t GROUP BY a");
  CHECK(rendered("SELECT a FROM t GROUP BY a HAVING COUNT(*) > 1") ==
        "SELECT a FROM t GROUP BY a HAVING COUNT(*) > 1");
  CHECK(rendered("SELECT a FROM t ORDER BY a DESC, b ASC") ==
        "SELECT a FROM t ORDER BY a DESC, b");
  CHECK(rendered("SELECT a FROM t LIMIT 5") == "SELECT a FROM t LIMIT 5");
  CHECK(rendered("SELECT a FROM t LIMIT 5 OFFSET 2") == "SELECT a FROM t LIMIT 5 OFFSET 2");
  CHECK(rendered("SELECT a FROM t LIMIT 2, 5") == "SELECT a FROM t LIMIT 5 OFFSET 2");
}

TEST_CASE("compound selects") {
  CHECK(rendered("SELECT a FROM t UNION SELECT b FROM u") ==
        "SELECT a FROM t UNION SELECT b FROM u");
  CHECK(rendered("SELECT a FROM t UNION ALL SELECT b FROM u ORDER BY 1") ==
        "SELECT a FROM t UNION ALL SELECT b FROM u ORDER BY 1");
  CHECK(rendered("SELECT a FROM t INTERSECT SELECT a FROM u") ==
        "SELECT a FROM t INTERSECT SELECT a FROM u");
  CHECK(rendered("SELECT a FROM t EXCEPT SELECT a FROM u") ==
        "SELECT a FROM t EXCEPT SELECT a FROM u");
}

TEST_CASE("subqueries") {
  CHECK(rendered("SELECT a FROM (SELECT a FROM t) s") ==
        "SELECT a FROM (SELECT a FROM t) AS s");
  CHECK(rendered("SELECT (SELECT MAX(b) FROM u) FROM t") ==
        "SELECT (SELECT MAX(b) FROM u) FROM t");
  CHECK(rendered("SELECT a FROM t WHERE b = (SELECT MAX(b) FROM t)") ==
        "SELECT a FROM t WHERE b = (SELECT MAX(b) FROM t)");
}

TEST_CASE("quoted identifiers") {
  CHECK(rendered("SELECT \"odd name\" FROM \"my table\"") ==
        "SELECT `odd name` FROM `my table`");
  CHECK(rendered("SELECT `a` FROM `t`") == "SELECT a FROM t");
  CHECK(rendered("SELECT [a b] FROM [t u]") == "SELECT `a b` FROM `t u`");
  CHECK(rendered("SELECT t.\"Free Meal Count\" FROM t") ==
        "SELECT t.`Free Meal Count` FROM t");
  CHECK(rendered("SELECT \"order\" FROM t") == "SELECT `order` FROM t");
}

TEST_CASE("comments are skipped") {
  CHECK(rendered("SELECT a -- trailing\nFROM t") == "SELECT a FROM t");
  CHECK(rendered("SELECT /* block */ a FROM t") == "SELECT a FROM t");
}

TEST_CASE("render is a fixed point of parse") {
  const std::vector<std::string> queries = {
      "SELECT schools.District FROM satscores INNER JOIN schools ON satscores.cds = "
      "schools.CDSCode WHERE schools.StatusType = 'Active' ORDER BY satscores.AvgScrRead DESC "
      "LIMIT 1",
      "SELECT CAST(SUM(IIF(T2.Currency = 'EUR', 1, 0)) AS FLOAT) * 100 / COUNT(T1.CustomerID) "
      "FROM transactions_1k AS T1 INNER JOIN customers AS T2 ON T1.CustomerID = T2.CustomerID "
      "WHERE T1.Date = '2012-08-25'",
      "SELECT a, COUNT(*) AS n FROM t WHERE b IN (1, 2) GROUP BY a HAVING n > 2 ORDER BY n "
      "DESC LIMIT 3 OFFSET 1",
      "SELECT x.a, y.b FROM t AS x LEFT JOIN u AS y ON x.id = y.id AND y.kind = 'k'",
      "SELECT CASE WHEN a IS NULL THEN 0 ELSE a END FROM t WHERE NOT EXISTS (SELECT 1 FROM u "
      "WHERE u.id = t.id)",
  };
  for (const std::string& query : queries) {
    CAPTURE(query);
    const std::string once = rendered(query);
    CHECK(rendered(once) == once);
  }
}

TEST_CASE("syntax errors carry a position") {
  CHECK_THROWS_AS(sql::parse_sql("SELECT FROM t"), SqlParseError);
  CHECK_THROWS_AS(sql::parse_sql("SELECT a FROM"), SqlParseError);
  CHECK_THROWS_AS(sql::parse_sql("SELECT a FROM t WHERE"), SqlParseError);
  CHECK_THROWS_AS(sql::parse_sql(""), SqlParseError);
  CHECK_THROWS_AS(sql::parse_sql("SELECT a FROM t extra garbage ,"), SqlParseError);
  try {
    sql::parse_sql("SELECT a FROM t WHERE (b = 1");
    FAIL("expected SqlParseError");
  } catch (const SqlParseError& e) {
    CHECK(std::string(e.what()).find("position") != std::string::npos);
  }
}

TEST_CASE("non-select statements are unsupported") {
  CHECK_THROWS_AS(sql::parse_sql("INSERT INTO t VALUES (1)"), UnsupportedError);
  CHECK_THROWS_AS(sql::parse_sql("UPDATE t SET a = 1"), UnsupportedError);
  CHECK_THROWS_AS(sql::parse_sql("DELETE FROM t"), UnsupportedError);
  CHECK_THROWS_AS(sql::parse_sql("DROP TABLE t"), UnsupportedError);
  CHECK_THROWS_AS(sql::parse_sql("WITH s AS (SELECT 1) SELECT * FROM s"), UnsupportedError);
}
