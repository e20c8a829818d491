#include "tasql/sql_extract.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <set>

#include "tasql/errors.hpp"
#include "tasql/sql_parser.hpp"
#include "tasql/strings.hpp"

namespace tasql {

namespace {

using sql::BetweenExpr;
using sql::BinaryExpr;
using sql::CaseExpr;
using sql::CastExpr;
using sql::ColumnExpr;
using sql::ExistsExpr;
using sql::Expr;
using sql::FromItem;
using sql::FunctionCall;
using sql::InExpr;
using sql::IsNullExpr;
using sql::Literal;
using sql::ResultColumn;
using sql::SelectCore;
using sql::SelectStmt;
using sql::StarExpr;
using sql::SubqueryExpr;
using sql::UnaryExpr;

struct ScopeEntry {
  std::string alias_lower;  // empty for unnamed derived tables
  bool is_base = true;
  bool known = false;               // base table exists in the catalog
  std::string table;                // catalog casing when known
  // derived-table outputs: lowered output name -> underlying column, when the
  // output is a plain column reference
  std::map<std::string, std::optional<ColumnRef>> outputs;
};

struct Scope {
  std::vector<ScopeEntry> entries;
  std::set<std::string> projection_aliases;  // lowered
};

class Extractor {
public:
  explicit Extractor(const SchemaCatalog& catalog) : catalog_(catalog) {}

  LinkedSchema run(const SelectStmt& stmt) {
    process_select(stmt);
    LinkedSchema result;
    result.columns.assign(columns_.begin(), columns_.end());
    result.tables.assign(tables_.begin(), tables_.end());
    result.condition_values.assign(condition_values_.begin(), condition_values_.end());
    result.unresolved.assign(unresolved_.begin(), unresolved_.end());
    return result;
  }

  std::vector<ColumnRef> projection_only(const SelectStmt& stmt) {
    projection_mode_ = true;
    process_select(stmt);
    std::vector<ColumnRef> result(projection_columns_.begin(), projection_columns_.end());
    return result;
  }

private:
  const SchemaCatalog& catalog_;
  std::set<ColumnRef> columns_;
  std::set<std::string, CiLess> tables_;
  std::set<ConditionValue> condition_values_;
  std::set<std::string> unresolved_;
  std::vector<Scope> stack_;
  bool projection_mode_ = false;
  std::set<ColumnRef> projection_columns_;
  int select_depth_ = 0;

  // Returns the derived-table output map for use by an enclosing scope.
  std::map<std::string, std::optional<ColumnRef>> process_select(const SelectStmt& stmt) {
    ++select_depth_;
    auto outputs = process_core(stmt.core, &stmt);
    for (const auto& [op, core] : stmt.compounds) {
      (void)op;
      process_core(core, nullptr);
    }
    --select_depth_;
    return outputs;
  }

  std::map<std::string, std::optional<ColumnRef>> process_core(const SelectCore& core,
                                                               const SelectStmt* stmt) {
    Scope scope;
    for (const FromItem& item : core.from) {
      ScopeEntry entry;
      entry.alias_lower = ascii_lower(item.ref.alias);
      if (item.ref.subquery) {
        entry.is_base = false;
        entry.outputs = process_select(*item.ref.subquery);
      } else {
        entry.is_base = true;
        if (const TableDef* table = catalog_.find_table(item.ref.table)) {
          entry.known = true;
          entry.table = table->name;
          tables_.insert(table->name);
        } else {
          entry.table = item.ref.table;
          unresolved_.insert(item.ref.table);
        }
        if (entry.alias_lower.empty()) entry.alias_lower = ascii_lower(item.ref.table);
      }
      scope.entries.push_back(std::move(entry));
    }
    stack_.push_back(std::move(scope));

    // join conditions
    for (const FromItem& item : core.from) {
      if (item.on) walk(*item.on, false);
      for (const std::string& column : item.using_columns) {
        resolve_unqualified(column, false);
      }
    }

    std::map<std::string, std::optional<ColumnRef>> outputs;
    const bool at_top = select_depth_ == 1;
    for (const ResultColumn& column : core.columns) {
      if (const auto* star = std::get_if<StarExpr>(&column.expr->node)) {
        expand_star(*star, at_top);
      } else {
        walk(*column.expr, at_top);
      }
      std::string name = column.alias;
      std::optional<ColumnRef> source;
      if (const auto* col = std::get_if<ColumnExpr>(&column.expr->node)) {
        if (name.empty()) name = col->column;
        source = resolve_column(*col, false, false);
      }
      if (!name.empty()) {
        outputs.emplace(ascii_lower(name), source);
        stack_.back().projection_aliases.insert(ascii_lower(name));
      }
    }

    if (core.where) walk(*core.where, false);
    for (const auto& expr : core.group_by) walk(*expr, false);
    if (core.having) walk(*core.having, false);

    if (stmt) {
      for (const auto& term : stmt->order_by) walk(*term.expr, false);
      if (stmt->limit) walk(*stmt->limit, false);
      if (stmt->offset) walk(*stmt->offset, false);
    }

    stack_.pop_back();
    return outputs;
  }

  void expand_star(const StarExpr& star, bool in_projection) {
    if (stack_.empty()) return;
    const Scope& scope = stack_.back();
    const std::string wanted = ascii_lower(star.table);
    for (const ScopeEntry& entry : scope.entries) {
      if (!wanted.empty() && entry.alias_lower != wanted) continue;
      if (entry.is_base) {
        if (!entry.known) continue;
        const TableDef* table = catalog_.find_table(entry.table);
        for (const ColumnDef& column : table->columns) {
          record(ColumnRef{table->name, column.name}, in_projection);
        }
      } else {
        for (const auto& [name, source] : entry.outputs) {
          (void)name;
          if (source) record(*source, in_projection);
        }
      }
    }
    if (!wanted.empty()) {
      bool found = std::any_of(scope.entries.begin(), scope.entries.end(),
                               [&](const ScopeEntry& e) { return e.alias_lower == wanted; });
      if (!found) unresolved_.insert(star.table);
    }
  }

  void record(const ColumnRef& ref, bool in_projection) {
    columns_.insert(ref);
    tables_.insert(ref.table);
    if (in_projection) projection_columns_.insert(ref);
  }

  std::optional<ColumnRef> resolve_column(const ColumnExpr& col, bool in_projection,
                                          bool report = true) {
    if (!col.table.empty()) {
      return resolve_qualified(col.table, col.column, report, in_projection);
    }
    return resolve_unqualified(col.column, in_projection, report);
  }

  std::optional<ColumnRef> resolve_qualified(const std::string& table, const std::string& column,
                                             bool report, bool in_projection) {
    const std::string wanted = ascii_lower(table);
    for (auto it = stack_.rbegin(); it != stack_.rend(); ++it) {
      for (const ScopeEntry& entry : it->entries) {
        if (entry.alias_lower != wanted) continue;
        if (entry.is_base) {
          if (!entry.known) {
            if (report) unresolved_.insert(entry.table + "." + column);
            return std::nullopt;
          }
          return resolve_in_table(entry.table, column, report, in_projection);
        }
        auto output = entry.outputs.find(ascii_lower(column));
        if (output == entry.outputs.end()) {
          if (report) unresolved_.insert(table + "." + column);
          return std::nullopt;
        }
        if (output->second && report) record(*output->second, in_projection);
        return output->second;
      }
    }
    // not an alias in scope; maybe a direct table name
    if (catalog_.find_table(table)) {
      return resolve_in_table(table, column, report, in_projection);
    }
    if (report) unresolved_.insert(table + "." + column);
    return std::nullopt;
  }

  std::optional<ColumnRef> resolve_in_table(const std::string& table, const std::string& column,
                                            bool report, bool in_projection) {
    const TableDef* def = catalog_.find_table(table);
    if (const ColumnDef* col = def->find_column(column)) {
      ColumnRef ref{def->name, col->name};
      if (report) {
        record(ref, in_projection);
        tables_.insert(def->name);
      }
      return ref;
    }
    if (report) unresolved_.insert(def->name + "." + column);
    return std::nullopt;
  }

  std::optional<ColumnRef> resolve_unqualified(const std::string& column, bool in_projection,
                                               bool report = true) {
    for (auto it = stack_.rbegin(); it != stack_.rend(); ++it) {
      std::vector<ColumnRef> owners;
      for (const ScopeEntry& entry : it->entries) {
        if (entry.is_base) {
          if (!entry.known) continue;
          const TableDef* def = catalog_.find_table(entry.table);
          if (const ColumnDef* col = def->find_column(column)) {
            owners.push_back(ColumnRef{def->name, col->name});
          }
        } else {
          auto output = entry.outputs.find(ascii_lower(column));
          if (output != entry.outputs.end() && output->second) {
            owners.push_back(*output->second);
          }
        }
      }
      if (!owners.empty()) {
        if (report) record(owners.front(), in_projection);
        return owners.front();
      }
      if (it->projection_aliases.count(ascii_lower(column))) {
        return std::nullopt;  // reference to a result alias, not a schema entity
      }
    }
    if (report) unresolved_.insert(column);
    return std::nullopt;
  }

  void note_condition(const Expr& column_side, const Expr& literal_side, const std::string& op) {
    const auto* col = std::get_if<ColumnExpr>(&column_side.node);
    const auto* lit = std::get_if<Literal>(&literal_side.node);
    if (!col || !lit || lit->kind == Literal::Kind::null_) return;
    if (auto resolved = resolve_column(*col, false, false)) {
      condition_values_.insert(ConditionValue{*resolved, lit->lexeme, op});
    }
  }

  void walk(const Expr& e, bool in_projection) {
    std::visit(
        [&](const auto& node) {
          using T = std::decay_t<decltype(node)>;
          if constexpr (std::is_same_v<T, Literal>) {
            // nothing
          } else if constexpr (std::is_same_v<T, ColumnExpr>) {
            resolve_column(node, in_projection);
          } else if constexpr (std::is_same_v<T, StarExpr>) {
            // a bare star outside the select list carries no column info
          } else if constexpr (std::is_same_v<T, UnaryExpr>) {
            walk(*node.operand, in_projection);
          } else if constexpr (std::is_same_v<T, BinaryExpr>) {
            if (node.op == "=" || node.op == "==") {
              note_condition(*node.lhs, *node.rhs, "=");
              note_condition(*node.rhs, *node.lhs, "=");
            } else if (iequals(node.op, "LIKE")) {
              note_condition(*node.lhs, *node.rhs, "LIKE");
            }
            walk(*node.lhs, in_projection);
            walk(*node.rhs, in_projection);
          } else if constexpr (std::is_same_v<T, InExpr>) {
            if (!node.negated) {
              for (const auto& element : node.list) note_condition(*node.lhs, *element, "IN");
            }
            walk(*node.lhs, in_projection);
            for (const auto& element : node.list) walk(*element, in_projection);
            if (node.subquery) process_select(*node.subquery);
          } else if constexpr (std::is_same_v<T, BetweenExpr>) {
            walk(*node.operand, in_projection);
            walk(*node.low, in_projection);
            walk(*node.high, in_projection);
          } else if constexpr (std::is_same_v<T, IsNullExpr>) {
            walk(*node.operand, in_projection);
          } else if constexpr (std::is_same_v<T, FunctionCall>) {
            for (const auto& arg : node.args) walk(*arg, in_projection);
          } else if constexpr (std::is_same_v<T, CastExpr>) {
            walk(*node.operand, in_projection);
          } else if constexpr (std::is_same_v<T, CaseExpr>) {
            if (node.base) walk(*node.base, in_projection);
            for (const auto& [condition, value] : node.whens) {
              walk(*condition, in_projection);
              walk(*value, in_projection);
            }
            if (node.else_expr) walk(*node.else_expr, in_projection);
          } else if constexpr (std::is_same_v<T, SubqueryExpr>) {
            process_select(*node.select);
          } else if constexpr (std::is_same_v<T, ExistsExpr>) {
            process_select(*node.select);
          }
        },
        e.node);
  }
};

}  // namespace

bool LinkedSchema::contains(const ColumnRef& ref) const {
  return std::binary_search(columns.begin(), columns.end(), ref);
}

bool LinkedSchema::contains_table(const std::string& table) const {
  return std::any_of(tables.begin(), tables.end(),
                     [&](const std::string& t) { return iequals(t, table); });
}

LinkedSchema extract_schema_entities(const sql::SqlAst& ast, const SchemaCatalog& catalog) {
  Extractor extractor(catalog);
  return extractor.run(*ast.stmt);
}

LinkedSchema ground_truth_schema(const std::string& gold_sql, const SchemaCatalog& catalog) {
  sql::SqlAst ast;
  try {
    ast = sql::parse_sql(gold_sql);
  } catch (const Error& e) {
    throw GoldSchemaError("gold SQL does not parse: " + std::string(e.what()));
  }
  LinkedSchema linked = extract_schema_entities(ast, catalog);
  if (!linked.unresolved.empty()) {
    throw GoldSchemaError("gold SQL references unknown entities: " +
                          join(linked.unresolved, ", "));
  }
  return linked;
}

std::vector<ColumnRef> projection_columns(const sql::SqlAst& ast, const SchemaCatalog& catalog) {
  Extractor extractor(catalog);
  return extractor.projection_only(*ast.stmt);
}

bool has_group_by(const sql::SqlAst& ast) {
  const sql::SelectStmt& stmt = *ast.stmt;
  if (!stmt.core.group_by.empty()) return true;
  return std::any_of(stmt.compounds.begin(), stmt.compounds.end(),
                     [](const auto& arm) { return !arm.second.group_by.empty(); });
}

bool has_order_by(const sql::SqlAst& ast) { return !ast.stmt->order_by.empty(); }

bool has_limit(const sql::SqlAst& ast) { return ast.stmt->limit != nullptr; }

}  // namespace tasql
