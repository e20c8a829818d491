#include "doctest.h"

#include <random>

#include "support/alias_mutate.hpp"
#include "support/fixtures.hpp"
#include "tasql/errors.hpp"
#include "tasql/schema_catalog.hpp"
#include "tasql/sql_extract.hpp"
#include "tasql/sql_parser.hpp"

using namespace tasql;

namespace {

const SchemaCatalog& schools_catalog() {
  static const SchemaCatalog catalog = [] {
    const std::string dir = testsupport::scratch_dir("extract_schools");
    const std::string db = dir + "/california_schools.sqlite";
    testsupport::build_california_schools(db);
    return introspect_database(db);
  }();
  return catalog;
}

const SchemaCatalog& mtg_catalog() {
  static const SchemaCatalog catalog = [] {
    const std::string dir = testsupport::scratch_dir("extract_mtg");
    const std::string db = dir + "/mtg.sqlite";
    testsupport::build_mtg(db);
    return introspect_database(db);
  }();
  return catalog;
}

LinkedSchema extract(const std::string& sql_text, const SchemaCatalog& catalog) {
  return extract_schema_entities(sql::parse_sql(sql_text), catalog);
}

std::vector<std::string> canonical_columns(const LinkedSchema& linked) {
  std::vector<std::string> out;
  for (const ColumnRef& ref : linked.columns) out.push_back(ref.canonical());
  return out;
}

}  // namespace

TEST_CASE("worked example yields the five-entity set") {
  const LinkedSchema linked = extract(
      "SELECT schools.District FROM satscores INNER JOIN schools ON satscores.cds = "
      "schools.CDSCode WHERE schools.StatusType = 'Active' ORDER BY satscores.AvgScrRead DESC "
      "LIMIT 1",
      schools_catalog());
  CHECK(canonical_columns(linked) ==
        std::vector<std::string>{"satscores.avgscrread", "satscores.cds", "schools.cdscode",
                                 "schools.district", "schools.statustype"});
  CHECK(linked.tables == std::vector<std::string>{"satscores", "schools"});
  CHECK(linked.unresolved.empty());
}

TEST_CASE("alias resolution maps back to base tables") {
  const LinkedSchema linked = extract(
      "SELECT T1.School FROM schools AS T1 INNER JOIN satscores AS T2 ON T2.cds = T1.CDSCode "
      "WHERE T2.NumTstTakr > 100",
      schools_catalog());
  CHECK(canonical_columns(linked) ==
        std::vector<std::string>{"satscores.cds", "satscores.numtsttakr", "schools.cdscode",
                                 "schools.school"});
}

TEST_CASE("self-join entities deduplicate") {
  const LinkedSchema linked = extract(
      "SELECT a.School FROM schools a, schools b WHERE a.County = b.County AND a.CDSCode != "
      "b.CDSCode",
      schools_catalog());
  CHECK(canonical_columns(linked) ==
        std::vector<std::string>{"schools.cdscode", "schools.county", "schools.school"});
  CHECK(linked.tables == std::vector<std::string>{"schools"});
}

TEST_CASE("unqualified columns resolve through the FROM tables") {
  const LinkedSchema linked =
      extract("SELECT School, AvgScrRead FROM schools INNER JOIN satscores ON cds = CDSCode",
              schools_catalog());
  CHECK(canonical_columns(linked) ==
        std::vector<std::string>{"satscores.avgscrread", "satscores.cds", "schools.cdscode",
                                 "schools.school"});
  CHECK(linked.unresolved.empty());
}

TEST_CASE("unknown column on a known table is unresolved") {
  const LinkedSchema linked = extract(
      "SELECT language FROM sets WHERE baseSetSize = 180 AND block = 'Ravnica'", mtg_catalog());
  REQUIRE(linked.unresolved.size() == 1);
  CHECK(linked.unresolved[0] == "sets.language");
  CHECK(canonical_columns(linked) ==
        std::vector<std::string>{"sets.basesetsize", "sets.block"});
}

TEST_CASE("unknown table is unresolved") {
  const LinkedSchema linked = extract("SELECT x FROM nowhere", schools_catalog());
  CHECK(!linked.unresolved.empty());
}

TEST_CASE("star expands to the catalog columns of base tables") {
  const LinkedSchema linked = extract("SELECT * FROM frpm", schools_catalog());
  CHECK(canonical_columns(linked) ==
        std::vector<std::string>{"frpm.cdscode", "frpm.enrollment", "frpm.frpmcount"});
}

TEST_CASE("condition values capture equality, LIKE and IN literals") {
  const LinkedSchema linked = extract(
      "SELECT School FROM schools WHERE County = 'Fresno' AND District LIKE 'Uni%' AND "
      "StatusType IN ('Active', 'Closed') AND Charter != 1",
      schools_catalog());
  REQUIRE(linked.condition_values.size() == 4);
  CHECK(linked.condition_values[0].column.canonical() == "schools.county");
  CHECK(linked.condition_values[0].op == "=");
  CHECK(linked.condition_values[0].value == "Fresno");
  CHECK(linked.condition_values[1].op == "LIKE");
  CHECK(linked.condition_values[2].op == "IN");
  CHECK(linked.condition_values[3].op == "IN");
}

TEST_CASE("subquery entities are collected") {
  const LinkedSchema linked = extract(
      "SELECT School FROM schools WHERE CDSCode IN (SELECT cds FROM satscores WHERE "
      "AvgScrMath > 500)",
      schools_catalog());
  CHECK(canonical_columns(linked) ==
        std::vector<std::string>{"satscores.avgscrmath", "satscores.cds", "schools.cdscode",
                                 "schools.school"});
}

TEST_CASE("derived table outputs resolve to their source columns") {
  const LinkedSchema linked = extract(
      "SELECT s.School FROM (SELECT School, County FROM schools) AS s WHERE s.County = "
      "'Alameda'",
      schools_catalog());
  CHECK(canonical_columns(linked) ==
        std::vector<std::string>{"schools.county", "schools.school"});
}

TEST_CASE("ground truth schema") {
  SUBCASE("resolvable gold parses") {
    const LinkedSchema linked =
        ground_truth_schema("SELECT School FROM schools", schools_catalog());
    CHECK(canonical_columns(linked) == std::vector<std::string>{"schools.school"});
  }
  SUBCASE("unparsable gold throws") {
    CHECK_THROWS_AS(ground_truth_schema("SELECT FROM WHERE", schools_catalog()),
                    GoldSchemaError);
  }
  SUBCASE("gold with unknown entities throws") {
    CHECK_THROWS_AS(ground_truth_schema("SELECT language FROM sets", mtg_catalog()),
                    GoldSchemaError);
  }
}

TEST_CASE("projection columns see only the top-level result list") {
  const sql::SqlAst ast = sql::parse_sql(
      "SELECT player_name, height FROM Player WHERE weight > (SELECT AVG(weight) FROM Player) "
      "ORDER BY height DESC LIMIT 1");
  const std::string dir = testsupport::scratch_dir("extract_player");
  const std::string db = dir + "/player.sqlite";
  testsupport::build_player(db);
  const SchemaCatalog catalog = introspect_database(db);
  const std::vector<ColumnRef> projection = projection_columns(ast, catalog);
  std::vector<std::string> keys;
  for (const ColumnRef& ref : projection) keys.push_back(ref.canonical());
  CHECK(keys == std::vector<std::string>{"player.height", "player.player_name"});
}

TEST_CASE("clause presence helpers") {
  const sql::SqlAst grouped = sql::parse_sql("SELECT a, COUNT(*) FROM t GROUP BY a");
  CHECK(has_group_by(grouped));
  CHECK_FALSE(has_order_by(grouped));
  CHECK_FALSE(has_limit(grouped));

  const sql::SqlAst ordered = sql::parse_sql("SELECT a FROM t ORDER BY a LIMIT 3");
  CHECK_FALSE(has_group_by(ordered));
  CHECK(has_order_by(ordered));
  CHECK(has_limit(ordered));

  // clauses inside subqueries do not count as top-level
  const sql::SqlAst nested =
      sql::parse_sql("SELECT a FROM t WHERE b IN (SELECT c FROM u GROUP BY c)");
  CHECK_FALSE(has_group_by(nested));
}

TEST_CASE("extraction is invariant under alias renaming") {
  const std::vector<std::string> base_queries = {
      "SELECT School FROM schools WHERE County = 'Fresno'",
      "SELECT schools.School FROM schools INNER JOIN satscores ON satscores.cds = "
      "schools.CDSCode WHERE satscores.AvgScrRead > 450",
      "SELECT T1.School, T2.AvgScrMath FROM schools T1 INNER JOIN satscores T2 ON T2.cds = "
      "T1.CDSCode WHERE T1.StatusType = 'Active' ORDER BY T2.AvgScrMath DESC LIMIT 2",
      "SELECT COUNT(*) FROM schools WHERE StatusType = 'Active'",
      "SELECT a.School FROM schools a, schools b WHERE a.County = b.County AND a.CDSCode != "
      "b.CDSCode",
      "SELECT AVG(satscores.AvgScrRead) FROM satscores INNER JOIN frpm ON frpm.CDSCode = "
      "satscores.cds WHERE frpm.Enrollment > 200",
  };
  std::mt19937 rng(20240817);
  for (int round = 0; round < 40; ++round) {
    for (const std::string& query : base_queries) {
      const std::string mutated = testsupport::mutate_aliases(query, rng);
      CAPTURE(query);
      CAPTURE(mutated);
      const LinkedSchema original = extract(query, schools_catalog());
      const LinkedSchema renamed = extract(mutated, schools_catalog());
      CHECK(canonical_columns(original) == canonical_columns(renamed));
      CHECK(original.tables == renamed.tables);
      CHECK(original.unresolved == renamed.unresolved);
      CHECK(original.condition_values == renamed.condition_values);
    }
  }
}
