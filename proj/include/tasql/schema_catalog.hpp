#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "tasql/strings.hpp"

namespace tasql::llm {
class Gateway;
}

namespace tasql::schema {

/// A table.column reference. Display case is preserved; identity is the
/// lowercased `table.column` canonical key.
struct ColumnRef {
  std::string table;
  std::string column;

  std::string canonical() const { return ascii_lower(table) + "." + ascii_lower(column); }
  std::string display() const { return table + "." + column; }

  friend bool operator==(const ColumnRef& a, const ColumnRef& b) {
    return a.canonical() == b.canonical();
  }
  friend bool operator<(const ColumnRef& a, const ColumnRef& b) {
    return a.canonical() < b.canonical();
  }
};

struct SampleValue {
  std::string value;
  long long count = 0;
};

struct ColumnDef {
  std::string name;
  std::string declared_type;
  std::string original_description;
  std::string value_description;
  std::optional<std::string> succinct_description;
  std::vector<SampleValue> sample_values;  // at most 20 distinct values
};

struct TableDef {
  std::string name;
  std::vector<ColumnDef> columns;
  std::vector<std::string> primary_key;

  const ColumnDef* find_column(std::string_view column_name) const;
};

struct FkLink {
  ColumnRef from;
  ColumnRef to;
};

struct SchemaCatalog {
  std::string db_id;
  std::vector<TableDef> tables;
  std::vector<FkLink> foreign_keys;
  std::vector<std::string> warnings;

  const TableDef* find_table(std::string_view table_name) const;
  const ColumnDef* find_column(const ColumnRef& ref) const;
  bool has_column(std::string_view table_name, std::string_view column_name) const;

  std::size_t column_count() const;
  std::vector<ColumnRef> all_columns() const;  // catalog order

  /// Checks name uniqueness, primary-key membership and FK endpoint
  /// resolution; throws PreconditionError on the first violation.
  void validate() const;

  nlohmann::ordered_json to_json() const;
  static SchemaCatalog from_json(const nlohmann::ordered_json& doc);
};

/// Ordered canonical-key -> description map mirroring the catalog's column
/// order, rendered as a python-style dictionary inside prompts.
struct SchemaDictionary {
  std::vector<std::pair<std::string, std::string>> entries;
  bool uses_succinct = false;

  std::string render() const;
};

/// FK graph over tables. Node and adjacency order is deterministic
/// (alphabetical by table, then by column).
struct JoinGraph {
  std::vector<std::string> tables;  // display names, sorted case-insensitively
  std::vector<FkLink> links;

  struct Neighbor {
    std::string table;       // other endpoint, display name
    std::size_t link_index;  // into links
  };
  std::map<std::string, std::vector<Neighbor>, CiLess> adjacency;

  bool has_table(std::string_view name) const;
};

/// Loads tables, columns, primary keys, declared FKs and up to 20 sample
/// values per column from a SQLite file. `description_dir` points at a
/// directory of per-table CSVs (original_column_name, column_description,
/// value_description); when unset, a `database_description` directory next
/// to the database file is picked up automatically. Missing metadata is not
/// an error; malformed rows are skipped with a warning on the catalog.
SchemaCatalog introspect_database(const std::string& db_file_path,
                                  const std::optional<std::string>& description_dir = std::nullopt);

/// "type: {declared_type}; description: {original}; values: {value_description}"
/// with empty segments omitted (the type segment is always present).
std::string compose_full_description(const ColumnDef& column);

/// Asks the gateway for a one-line description per column. Responses are
/// truncated at the first newline and at 200 characters. On gateway failure
/// the truncated full description is used and a warning is appended to the
/// returned catalog.
SchemaCatalog generate_succinct_descriptions(const SchemaCatalog& catalog, llm::Gateway& gateway);

SchemaDictionary build_schema_dictionary(const SchemaCatalog& catalog, bool use_succinct);

JoinGraph fk_join_graph(const SchemaCatalog& catalog);

}  // namespace tasql::schema

namespace tasql {
using schema::build_schema_dictionary;
using schema::ColumnDef;
using schema::ColumnRef;
using schema::compose_full_description;
using schema::fk_join_graph;
using schema::FkLink;
using schema::generate_succinct_descriptions;
using schema::introspect_database;
using schema::JoinGraph;
using schema::SampleValue;
using schema::SchemaCatalog;
using schema::SchemaDictionary;
using schema::TableDef;
}  // namespace tasql
