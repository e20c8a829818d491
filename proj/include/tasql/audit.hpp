#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "tasql/schema_catalog.hpp"
#include "tasql/sql_ast.hpp"

namespace tasql::audit {

enum class Category {
  schema_contradiction,
  attribute_overanalysis,
  value_misrepresentation,
  join_redundancy,
  clause_abuse,
  mathematical_delusion,
};

const char* to_string(Category category);

// schema_based: contradiction/overanalysis/misrepresentation;
// logic_based: redundancy/abuse/delusion
enum class Family { schema_based, logic_based };
Family family_of(Category category);

struct Finding {
  Category category = Category::schema_contradiction;
  std::string evidence;  // human-readable justification, never empty
};

struct PairAudit {
  std::vector<Finding> findings;
  std::vector<std::string> notes;  // probe warnings, parse problems
};

// Known-function inventory for the target engine, one identifier per line
// in the data file; '#' starts a comment.
class FunctionWhitelist {
 public:
  static FunctionWhitelist load();  // resources/sqlite_functions.txt
  static FunctionWhitelist from_text(const std::string& text);

  bool contains(const std::string& name) const;
  std::size_t size() const { return names_.size(); }

 private:
  std::set<std::string> names_;  // lowercased
};

std::optional<std::string> detect_schema_contradiction(const sql::SqlAst& pred,
                                                       const SchemaCatalog& catalog);

std::optional<std::string> detect_attribute_overanalysis(const sql::SqlAst& pred,
                                                         const sql::SqlAst& gold,
                                                         const SchemaCatalog& catalog);

// Probes the column's distinct values (cap 10000, then per-literal membership
// queries). Probe failures append to warnings and skip the category.
std::optional<std::string> detect_value_misrepresentation(const sql::SqlAst& pred,
                                                          const sql::SqlAst& gold,
                                                          const SchemaCatalog& catalog,
                                                          const std::string& db_file,
                                                          std::vector<std::string>* warnings);

std::optional<std::string> detect_join_redundancy(const sql::SqlAst& pred, const sql::SqlAst& gold,
                                                  const SchemaCatalog& catalog);

// Default clause list is {"group by"}: fires when the predicted query groups,
// the gold does not, and ORDER BY or LIMIT appears in either. "order by" and
// "limit" entries check plain presence differences.
std::optional<std::string> detect_clause_abuse(
    const sql::SqlAst& pred, const sql::SqlAst& gold,
    const std::vector<std::string>& clauses = {"group by"});

// Works on raw text because delusions often break parsing.
std::optional<std::string> detect_mathematical_delusion(const std::string& pred_sql_text,
                                                        const FunctionWhitelist& whitelist);

// Runs all six detectors on one (predicted, gold) pair. An unparsable
// predicted query still gets the raw-text detector; an unparsable gold
// query disables the comparative detectors with a note.
PairAudit audit_pair(const std::string& pred_sql, const std::string& gold_sql,
                     const SchemaCatalog& catalog, const std::string& db_file,
                     const FunctionWhitelist& whitelist);

struct AuditInput {
  std::string pred_sql;
  std::string gold_sql;
  std::string db_id;
};

struct AuditReport {
  std::size_t n_pairs = 0;
  std::size_t n_labeled = 0;  // pairs with at least one label
  std::map<Category, std::size_t> counts;
  std::vector<PairAudit> per_example;
  std::vector<std::string> failures;

  // share denominators differ deliberately: global over all labeled pairs,
  // family over pairs labeled within that family
  nlohmann::ordered_json to_json() const;
  std::string render_table() const;
};

AuditReport audit_corpus(const std::vector<AuditInput>& pairs,
                         const std::map<std::string, SchemaCatalog>& catalogs,
                         const std::map<std::string, std::string>& db_files);

// Per-category count deltas, other minus baseline.
nlohmann::ordered_json compare_reports(const AuditReport& baseline, const AuditReport& other);

}  // namespace tasql::audit
