#pragma once

#include <string>

#include "tasql/sql_ast.hpp"

namespace tasql::sql {

/// Parses one statement of the SQLite-compatible SELECT subset (joins,
/// subqueries, CASE/IIF, CAST, aggregates, set operations). A trailing
/// semicolon is tolerated. Syntax errors throw SqlParseError with the byte
/// position; non-SELECT statements throw UnsupportedError.
SqlAst parse_sql(const std::string& text);

}  // namespace tasql::sql
