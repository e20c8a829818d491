#include "tasql/schema_catalog.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

#include "tasql/errors.hpp"
#include "tasql/llm_gateway.hpp"
#include "tasql/resources.hpp"
#include "sqlite_util.hpp"

namespace tasql::schema {

namespace fs = std::filesystem;

const ColumnDef* TableDef::find_column(std::string_view column_name) const {
  for (const auto& column : columns) {
    if (iequals(column.name, column_name)) return &column;
  }
  return nullptr;
}

const TableDef* SchemaCatalog::find_table(std::string_view table_name) const {
  for (const auto& table : tables) {
    if (iequals(table.name, table_name)) return &table;
  }
  return nullptr;
}

const ColumnDef* SchemaCatalog::find_column(const ColumnRef& ref) const {
  const TableDef* table = find_table(ref.table);
  return table ? table->find_column(ref.column) : nullptr;
}

bool SchemaCatalog::has_column(std::string_view table_name, std::string_view column_name) const {
  const TableDef* table = find_table(table_name);
  return table && table->find_column(column_name);
}

std::size_t SchemaCatalog::column_count() const {
  std::size_t n = 0;
  for (const auto& table : tables) n += table.columns.size();
  return n;
}

std::vector<ColumnRef> SchemaCatalog::all_columns() const {
  std::vector<ColumnRef> refs;
  refs.reserve(column_count());
  for (const auto& table : tables) {
    for (const auto& column : table.columns) {
      refs.push_back({table.name, column.name});
    }
  }
  return refs;
}

void SchemaCatalog::validate() const {
  std::set<std::string> table_names;
  for (const auto& table : tables) {
    if (!table_names.insert(ascii_lower(table.name)).second) {
      throw PreconditionError("duplicate table name '" + table.name + "' in " + db_id);
    }
    std::set<std::string> column_names;
    for (const auto& column : table.columns) {
      if (!column_names.insert(ascii_lower(column.name)).second) {
        throw PreconditionError("duplicate column '" + column.name + "' in table " + table.name);
      }
    }
    for (const auto& pk : table.primary_key) {
      if (!table.find_column(pk)) {
        throw PreconditionError("primary key column '" + pk + "' missing from table " + table.name);
      }
    }
  }
  for (const auto& fk : foreign_keys) {
    if (fk.from == fk.to) {
      throw PreconditionError("degenerate foreign key on " + fk.from.display());
    }
    if (iequals(fk.from.table, fk.to.table)) {
      throw PreconditionError("foreign key within one table: " + fk.from.display());
    }
    for (const auto* endpoint : {&fk.from, &fk.to}) {
      if (!find_column(*endpoint)) {
        throw PreconditionError("foreign key endpoint " + endpoint->display() + " does not resolve");
      }
    }
  }
}

nlohmann::ordered_json SchemaCatalog::to_json() const {
  nlohmann::ordered_json doc;
  doc["db_id"] = db_id;
  doc["tables"] = nlohmann::ordered_json::array();
  for (const auto& table : tables) {
    nlohmann::ordered_json t;
    t["name"] = table.name;
    t["columns"] = nlohmann::ordered_json::array();
    for (const auto& column : table.columns) {
      nlohmann::ordered_json c;
      c["name"] = column.name;
      c["declared_type"] = column.declared_type;
      c["original_description"] = column.original_description;
      c["value_description"] = column.value_description;
      if (column.succinct_description) c["succinct_description"] = *column.succinct_description;
      c["sample_values"] = nlohmann::ordered_json::array();
      for (const auto& sample : column.sample_values) {
        c["sample_values"].push_back({{"value", sample.value}, {"count", sample.count}});
      }
      t["columns"].push_back(std::move(c));
    }
    t["primary_key"] = table.primary_key;
    doc["tables"].push_back(std::move(t));
  }
  doc["foreign_keys"] = nlohmann::ordered_json::array();
  for (const auto& fk : foreign_keys) {
    doc["foreign_keys"].push_back({{"from", fk.from.display()}, {"to", fk.to.display()}});
  }
  return doc;
}

namespace {

ColumnRef parse_column_ref(const std::string& text) {
  const auto dot = text.find('.');
  if (dot == std::string::npos || text.find('.', dot + 1) != std::string::npos) {
    throw PreconditionError("column reference '" + text + "' must contain exactly one dot");
  }
  return ColumnRef{text.substr(0, dot), text.substr(dot + 1)};
}

}  // namespace

SchemaCatalog SchemaCatalog::from_json(const nlohmann::ordered_json& doc) {
  SchemaCatalog catalog;
  catalog.db_id = doc.at("db_id").get<std::string>();
  for (const auto& t : doc.at("tables")) {
    TableDef table;
    table.name = t.at("name").get<std::string>();
    for (const auto& c : t.at("columns")) {
      ColumnDef column;
      column.name = c.at("name").get<std::string>();
      column.declared_type = c.value("declared_type", "");
      column.original_description = c.value("original_description", "");
      column.value_description = c.value("value_description", "");
      if (c.contains("succinct_description")) {
        column.succinct_description = c.at("succinct_description").get<std::string>();
      }
      if (c.contains("sample_values")) {
        for (const auto& sample : c.at("sample_values")) {
          column.sample_values.push_back(
              {sample.at("value").get<std::string>(), sample.at("count").get<long long>()});
        }
      }
      table.columns.push_back(std::move(column));
    }
    if (t.contains("primary_key")) {
      table.primary_key = t.at("primary_key").get<std::vector<std::string>>();
    }
    catalog.tables.push_back(std::move(table));
  }
  if (doc.contains("foreign_keys")) {
    for (const auto& fk : doc.at("foreign_keys")) {
      catalog.foreign_keys.push_back({parse_column_ref(fk.at("from").get<std::string>()),
                                      parse_column_ref(fk.at("to").get<std::string>())});
    }
  }
  catalog.validate();
  return catalog;
}

namespace {

/// Minimal RFC 4180 reader: quoted fields, doubled quotes, CRLF rows.
std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false;
  for (std::size_t i = 0; i < content.size(); ++i) {
    const char c = content[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < content.size() && content[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
    } else if (c == '\n') {
      if (!field.empty() && field.back() == '\r') field.pop_back();
      row.push_back(std::move(field));
      field.clear();
      rows.push_back(std::move(row));
      row.clear();
    } else {
      field += c;
    }
  }
  if (!field.empty() || !row.empty()) {
    if (!field.empty() && field.back() == '\r') field.pop_back();
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

void apply_description_csv(TableDef& table, const fs::path& csv_path,
                           std::vector<std::string>& warnings) {
  std::vector<std::vector<std::string>> rows;
  try {
    rows = read_csv(csv_path);
  } catch (const Error& e) {
    warnings.push_back("metadata: " + std::string(e.what()));
    return;
  }
  if (rows.empty()) return;

  const auto& header = rows.front();
  auto find_field = [&](std::string_view name) -> int {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (iequals(trim(header[i]), name)) return static_cast<int>(i);
    }
    return -1;
  };
  const int name_idx = find_field("original_column_name");
  const int desc_idx = find_field("column_description");
  const int value_idx = find_field("value_description");
  if (name_idx < 0) {
    warnings.push_back("metadata: " + csv_path.filename().string() +
                       " has no original_column_name header; ignored");
    return;
  }

  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (static_cast<int>(row.size()) <= name_idx || trim(row[name_idx]).empty()) {
      warnings.push_back("metadata: " + csv_path.filename().string() + " row " +
                         std::to_string(r + 1) + " malformed; skipped");
      continue;
    }
    const std::string column_name = trim(row[name_idx]);
    ColumnDef* column = nullptr;
    for (auto& candidate : table.columns) {
      if (iequals(candidate.name, column_name)) {
        column = &candidate;
        break;
      }
    }
    if (!column) {
      warnings.push_back("metadata: " + csv_path.filename().string() + " names unknown column '" +
                         column_name + "'; skipped");
      continue;
    }
    if (desc_idx >= 0 && static_cast<int>(row.size()) > desc_idx) {
      column->original_description = trim(row[desc_idx]);
    }
    if (value_idx >= 0 && static_cast<int>(row.size()) > value_idx) {
      column->value_description = trim(row[value_idx]);
    }
  }
}

constexpr int kSampleValueCap = 20;

void load_sample_values(sqlite::Db& db, TableDef& table) {
  for (auto& column : table.columns) {
    const std::string sql = "SELECT " + sqlite::quote_identifier(column.name) +
                            " AS v, COUNT(*) AS n FROM " + sqlite::quote_identifier(table.name) +
                            " WHERE " + sqlite::quote_identifier(column.name) +
                            " IS NOT NULL GROUP BY v ORDER BY n DESC, v LIMIT " +
                            std::to_string(kSampleValueCap);
    sqlite::Statement stmt(db, sql);
    while (stmt.step()) {
      column.sample_values.push_back({stmt.column_text(0), stmt.column_int(1)});
    }
  }
}

}  // namespace

SchemaCatalog introspect_database(const std::string& db_file_path,
                                  const std::optional<std::string>& description_dir) {
  if (!fs::exists(db_file_path)) {
    throw IoError("database file not found: " + db_file_path);
  }
  sqlite::Db db(db_file_path);

  SchemaCatalog catalog;
  catalog.db_id = fs::path(db_file_path).stem().string();

  // sqlite_master rowid order follows DDL order.
  std::vector<std::string> table_names;
  {
    sqlite::Statement stmt(db,
                           "SELECT name FROM sqlite_master WHERE type='table' "
                           "AND name NOT LIKE 'sqlite_%' ORDER BY rowid");
    while (stmt.step()) table_names.push_back(stmt.column_text(0));
  }

  for (const auto& table_name : table_names) {
    TableDef table;
    table.name = table_name;
    {
      sqlite::Statement stmt(db, "PRAGMA table_info(" + sqlite::quote_identifier(table_name) + ")");
      std::vector<std::pair<int, std::string>> pk_parts;
      while (stmt.step()) {
        ColumnDef column;
        column.name = stmt.column_text(1);
        column.declared_type = stmt.column_text(2);
        const int pk_rank = static_cast<int>(stmt.column_int(5));
        if (pk_rank > 0) pk_parts.emplace_back(pk_rank, column.name);
        table.columns.push_back(std::move(column));
      }
      std::sort(pk_parts.begin(), pk_parts.end());
      for (auto& [rank, name] : pk_parts) table.primary_key.push_back(std::move(name));
    }
    load_sample_values(db, table);
    catalog.tables.push_back(std::move(table));
  }

  for (const auto& table_name : table_names) {
    sqlite::Statement stmt(db,
                           "PRAGMA foreign_key_list(" + sqlite::quote_identifier(table_name) + ")");
    while (stmt.step()) {
      const std::string to_table = stmt.column_text(2);
      const std::string from_column = stmt.column_text(3);
      std::string to_column = stmt.column_text(4);
      const TableDef* target = catalog.find_table(to_table);
      if (!target) {
        catalog.warnings.push_back("foreign key from " + table_name + "." + from_column +
                                   " targets unknown table " + to_table + "; dropped");
        continue;
      }
      if (to_column.empty()) {
        // Implicit reference to the target's primary key.
        if (target->primary_key.size() == 1) {
          to_column = target->primary_key.front();
        } else {
          catalog.warnings.push_back("foreign key from " + table_name + "." + from_column +
                                     " has no resolvable target column; dropped");
          continue;
        }
      }
      if (iequals(table_name, to_table)) continue;  // self-links carry no join information here
      catalog.foreign_keys.push_back(
          {ColumnRef{table_name, from_column}, ColumnRef{to_table, to_column}});
    }
  }

  std::optional<fs::path> meta_dir;
  if (description_dir) {
    meta_dir = fs::path(*description_dir);
  } else {
    const auto sibling = fs::path(db_file_path).parent_path() / "database_description";
    if (fs::is_directory(sibling)) meta_dir = sibling;
  }
  if (meta_dir && fs::is_directory(*meta_dir)) {
    for (auto& table : catalog.tables) {
      const auto csv_path = *meta_dir / (table.name + ".csv");
      if (fs::exists(csv_path)) apply_description_csv(table, csv_path, catalog.warnings);
    }
  }

  catalog.validate();
  return catalog;
}

std::string compose_full_description(const ColumnDef& column) {
  std::string out = "type: " + column.declared_type;
  if (!column.original_description.empty()) {
    out += "; description: " + column.original_description;
  }
  if (!column.value_description.empty()) {
    out += "; values: " + column.value_description;
  }
  return out;
}

namespace {

constexpr std::size_t kSuccinctLimit = 200;

std::string clamp_single_line(const std::string& text) {
  std::string line = text.substr(0, text.find('\n'));
  line = trim(line);
  if (line.size() > kSuccinctLimit) line.resize(kSuccinctLimit);
  return line;
}

}  // namespace

SchemaCatalog generate_succinct_descriptions(const SchemaCatalog& catalog, llm::Gateway& gateway) {
  const std::string template_text = resources::load_text("prompts/succinct_description.txt");
  SchemaCatalog out = catalog;
  for (auto& table : out.tables) {
    for (auto& column : table.columns) {
      std::vector<std::string> samples;
      for (const auto& sample : column.sample_values) samples.push_back(sample.value);
      const std::string prompt = resources::render_template(
          template_text, {{"table", table.name},
                          {"column", column.name},
                          {"full_description", compose_full_description(column)},
                          {"sample_values", join(samples, ", ")}});
      try {
        column.succinct_description = clamp_single_line(gateway.complete(prompt));
      } catch (const Error& e) {
        column.succinct_description = clamp_single_line(compose_full_description(column));
        out.warnings.push_back("succinct description fallback for " + table.name + "." +
                               column.name + ": " + e.what());
      }
      if (column.succinct_description->empty()) {
        column.succinct_description = clamp_single_line(compose_full_description(column));
      }
    }
  }
  return out;
}

SchemaDictionary build_schema_dictionary(const SchemaCatalog& catalog, bool use_succinct) {
  if (use_succinct) {
    std::vector<std::string> missing;
    for (const auto& table : catalog.tables) {
      for (const auto& column : table.columns) {
        if (!column.succinct_description) missing.push_back(table.name + "." + column.name);
      }
    }
    if (!missing.empty()) {
      throw PreconditionError("columns lack succinct descriptions: " + join(missing, ", "));
    }
  }
  SchemaDictionary dict;
  dict.uses_succinct = use_succinct;
  for (const auto& table : catalog.tables) {
    for (const auto& column : table.columns) {
      const ColumnRef ref{table.name, column.name};
      dict.entries.emplace_back(ref.canonical(), use_succinct ? *column.succinct_description
                                                              : compose_full_description(column));
    }
  }
  return dict;
}

std::string SchemaDictionary::render() const {
  std::string out = "{\n";
  for (const auto& [key, value] : entries) {
    std::string escaped;
    for (char c : value) {
      if (c == '"' || c == '\\') escaped += '\\';
      if (c == '\n') {
        escaped += "\\n";
        continue;
      }
      escaped += c;
    }
    out += "  \"" + key + "\": \"" + escaped + "\",\n";
  }
  out += "}";
  return out;
}

bool JoinGraph::has_table(std::string_view name) const {
  for (const auto& table : tables) {
    if (iequals(table, name)) return true;
  }
  return false;
}

JoinGraph fk_join_graph(const SchemaCatalog& catalog) {
  JoinGraph graph;
  for (const auto& table : catalog.tables) graph.tables.push_back(table.name);
  std::sort(graph.tables.begin(), graph.tables.end(),
            [](const std::string& a, const std::string& b) { return ascii_lower(a) < ascii_lower(b); });

  graph.links = catalog.foreign_keys;
  std::sort(graph.links.begin(), graph.links.end(), [](const FkLink& a, const FkLink& b) {
    return std::make_tuple(ascii_lower(a.from.table), ascii_lower(a.to.table),
                           ascii_lower(a.from.column), ascii_lower(a.to.column)) <
           std::make_tuple(ascii_lower(b.from.table), ascii_lower(b.to.table),
                           ascii_lower(b.from.column), ascii_lower(b.to.column));
  });

  for (const auto& table : graph.tables) graph.adjacency[table] = {};
  for (std::size_t i = 0; i < graph.links.size(); ++i) {
    const auto& link = graph.links[i];
    graph.adjacency[link.from.table].push_back({link.to.table, i});
    graph.adjacency[link.to.table].push_back({link.from.table, i});
  }
  for (auto& [table, neighbors] : graph.adjacency) {
    std::sort(neighbors.begin(), neighbors.end(),
              [&](const JoinGraph::Neighbor& a, const JoinGraph::Neighbor& b) {
                const auto key = [&](const JoinGraph::Neighbor& n) {
                  const auto& link = graph.links[n.link_index];
                  return std::make_tuple(ascii_lower(n.table), ascii_lower(link.from.column),
                                         ascii_lower(link.to.column), n.link_index);
                };
                return key(a) < key(b);
              });
  }
  return graph;
}

}  // namespace tasql::schema
