#pragma once

#include <string>
#include <vector>

#include "tasql/schema_catalog.hpp"
#include "tasql/sql_ast.hpp"

namespace tasql {

// One literal compared against a column somewhere in a query.
// op is "=", "IN", or "LIKE"; value holds the literal verbatim (text
// literals unescaped, numeric literals as written).
struct ConditionValue {
  ColumnRef column;
  std::string value;
  std::string op;

  bool operator==(const ConditionValue& other) const {
    return column == other.column && value == other.value && op == other.op;
  }
  bool operator<(const ConditionValue& other) const {
    if (!(column == other.column)) return column < other.column;
    if (value != other.value) return value < other.value;
    return op < other.op;
  }
};

// Schema entities referenced by one SQL statement. Aliases are resolved to
// base tables; the sets are deduplicated and sorted by canonical key.
// References that match no catalog entity land in `unresolved` ("table.column"
// for column-level misses, a bare name for unknown tables) instead of being
// dropped.
struct LinkedSchema {
  std::vector<ColumnRef> columns;
  std::vector<std::string> tables;
  std::vector<ConditionValue> condition_values;
  std::vector<std::string> unresolved;

  bool contains(const ColumnRef& ref) const;
  bool contains_table(const std::string& table) const;
};

// Walks every clause of the statement (projection, joins, predicates,
// grouping, ordering, subqueries) and resolves the referenced entities
// against the catalog. `SELECT *` expands to the FROM-scope columns;
// COUNT(*) contributes nothing. Unqualified columns are attributed to the
// unique owning table in scope, or the first FROM table owning them.
LinkedSchema extract_schema_entities(const sql::SqlAst& ast, const SchemaCatalog& catalog);

// Parses and extracts the gold query. Throws GoldSchemaError when the SQL
// does not parse or references entities missing from the catalog.
LinkedSchema ground_truth_schema(const std::string& gold_sql, const SchemaCatalog& catalog);

// Resolved columns appearing in the outermost select list, including inside
// expressions; stars expand. Sorted unique.
std::vector<ColumnRef> projection_columns(const sql::SqlAst& ast, const SchemaCatalog& catalog);

// True when any top-level select core (including compound arms) carries the
// clause; subqueries are not inspected.
bool has_group_by(const sql::SqlAst& ast);
bool has_order_by(const sql::SqlAst& ast);
bool has_limit(const sql::SqlAst& ast);

}  // namespace tasql
