#include "tasql/audit.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "sqlite_util.hpp"
#include "tasql/errors.hpp"
#include "tasql/resources.hpp"
#include "tasql/sql_extract.hpp"
#include "tasql/sql_parser.hpp"
#include "tasql/strings.hpp"

namespace tasql::audit {

const char* to_string(Category category) {
  switch (category) {
    case Category::schema_contradiction: return "schema_contradiction";
    case Category::attribute_overanalysis: return "attribute_overanalysis";
    case Category::value_misrepresentation: return "value_misrepresentation";
    case Category::join_redundancy: return "join_redundancy";
    case Category::clause_abuse: return "clause_abuse";
    case Category::mathematical_delusion: return "mathematical_delusion";
  }
  return "unknown";
}

Family family_of(Category category) {
  switch (category) {
    case Category::schema_contradiction:
    case Category::attribute_overanalysis:
    case Category::value_misrepresentation:
      return Family::schema_based;
    default:
      return Family::logic_based;
  }
}

FunctionWhitelist FunctionWhitelist::load() {
  return from_text(resources::load_text("sqlite_functions.txt"));
}

FunctionWhitelist FunctionWhitelist::from_text(const std::string& text) {
  FunctionWhitelist list;
  for (const std::string& line : split_lines(text)) {
    const std::string trimmed = trim(line);
    if (trimmed.empty() || trimmed[0] == '#') continue;
    list.names_.insert(ascii_lower(trimmed));
  }
  return list;
}

bool FunctionWhitelist::contains(const std::string& name) const {
  return names_.count(ascii_lower(name)) > 0;
}

std::optional<std::string> detect_schema_contradiction(const sql::SqlAst& pred,
                                                       const SchemaCatalog& catalog) {
  const LinkedSchema linked = extract_schema_entities(pred, catalog);
  if (linked.unresolved.empty()) return std::nullopt;
  return "references entities missing from the schema: " + join(linked.unresolved, ", ");
}

std::optional<std::string> detect_attribute_overanalysis(const sql::SqlAst& pred,
                                                         const sql::SqlAst& gold,
                                                         const SchemaCatalog& catalog) {
  const std::vector<ColumnRef> pred_cols = projection_columns(pred, catalog);
  const std::vector<ColumnRef> gold_cols = projection_columns(gold, catalog);
  std::set<std::string> pred_keys;
  std::set<std::string> gold_keys;
  for (const ColumnRef& ref : pred_cols) pred_keys.insert(ref.canonical());
  for (const ColumnRef& ref : gold_cols) gold_keys.insert(ref.canonical());
  if (pred_keys.size() <= gold_keys.size()) return std::nullopt;
  std::vector<std::string> extra;
  for (const std::string& key : pred_keys) {
    if (!gold_keys.count(key)) extra.push_back(key);
  }
  const bool superset = extra.size() == pred_keys.size() - gold_keys.size();
  if (!superset || extra.empty()) return std::nullopt;
  return "projects attributes beyond the gold query: " + join(extra, ", ");
}

namespace {

// (exists, probe_ok)
std::pair<bool, bool> value_in_column(sqlite::Db& db, const ColumnRef& column,
                                      const std::string& literal, bool numeric) {
  const std::string sql = "SELECT EXISTS(SELECT 1 FROM " + sqlite::quote_identifier(column.table) +
                          " WHERE " + sqlite::quote_identifier(column.column) + " = ?1)";
  sqlite3_stmt* stmt = nullptr;
  if (sqlite3_prepare_v2(db.handle(), sql.c_str(), -1, &stmt, nullptr) != SQLITE_OK) {
    return {false, false};
  }
  if (numeric) {
    sqlite3_bind_double(stmt, 1, std::stod(literal));
  } else {
    sqlite3_bind_text(stmt, 1, literal.c_str(), -1, SQLITE_TRANSIENT);
  }
  bool exists = false;
  bool ok = false;
  if (sqlite3_step(stmt) == SQLITE_ROW) {
    exists = sqlite3_column_int(stmt, 0) != 0;
    ok = true;
  }
  sqlite3_finalize(stmt);
  return {exists, ok};
}

struct ColumnValues {
  bool usable = false;
  bool overflow = false;           // more than the distinct cap
  std::set<std::string> values;    // text values, exact bytes
};

constexpr int kDistinctCap = 10000;

ColumnValues distinct_values(sqlite::Db& db, const ColumnRef& column) {
  ColumnValues out;
  const std::string sql = "SELECT DISTINCT " + sqlite::quote_identifier(column.column) + " FROM " +
                          sqlite::quote_identifier(column.table) + " LIMIT " +
                          std::to_string(kDistinctCap + 1);
  sqlite3_stmt* stmt = nullptr;
  if (sqlite3_prepare_v2(db.handle(), sql.c_str(), -1, &stmt, nullptr) != SQLITE_OK) {
    return out;
  }
  int rows = 0;
  while (sqlite3_step(stmt) == SQLITE_ROW) {
    ++rows;
    if (rows > kDistinctCap) {
      out.overflow = true;
      break;
    }
    if (sqlite3_column_type(stmt, 0) != SQLITE_NULL) {
      const unsigned char* text = sqlite3_column_text(stmt, 0);
      out.values.insert(text ? reinterpret_cast<const char*>(text) : "");
    }
  }
  sqlite3_finalize(stmt);
  out.usable = true;
  return out;
}

}  // namespace

std::optional<std::string> detect_value_misrepresentation(const sql::SqlAst& pred,
                                                          const sql::SqlAst& gold,
                                                          const SchemaCatalog& catalog,
                                                          const std::string& db_file,
                                                          std::vector<std::string>* warnings) {
  const LinkedSchema pred_linked = extract_schema_entities(pred, catalog);
  const LinkedSchema gold_linked = extract_schema_entities(gold, catalog);

  std::vector<std::pair<ConditionValue, ConditionValue>> candidates;
  for (const ConditionValue& pred_cv : pred_linked.condition_values) {
    if (pred_cv.op != "=") continue;
    for (const ConditionValue& gold_cv : gold_linked.condition_values) {
      if (gold_cv.op != "=") continue;
      if (gold_cv.column.canonical() != pred_cv.column.canonical()) continue;
      if (gold_cv.value == pred_cv.value) continue;
      candidates.emplace_back(pred_cv, gold_cv);
    }
  }
  if (candidates.empty()) return std::nullopt;

  try {
    sqlite::Db db(db_file);
    for (const auto& [pred_cv, gold_cv] : candidates) {
      const bool numeric = !pred_cv.value.empty() &&
                           pred_cv.value.find_first_not_of("0123456789+-.eE") == std::string::npos;
      bool pred_present = false;
      bool gold_present = false;
      const ColumnValues values = numeric ? ColumnValues{} : distinct_values(db, pred_cv.column);
      if (values.usable && !values.overflow) {
        pred_present = values.values.count(pred_cv.value) > 0;
        gold_present = values.values.count(gold_cv.value) > 0;
      } else {
        auto [p_exists, p_ok] = value_in_column(db, pred_cv.column, pred_cv.value, numeric);
        auto [g_exists, g_ok] = value_in_column(db, gold_cv.column, gold_cv.value, numeric);
        if (!p_ok || !g_ok) {
          if (warnings) {
            warnings->push_back("value probe failed for " + pred_cv.column.display() +
                                "; category skipped");
          }
          continue;
        }
        pred_present = p_exists;
        gold_present = g_exists;
      }
      if (!pred_present && gold_present) {
        return "literal '" + pred_cv.value + "' does not occur in " + pred_cv.column.display() +
               " while the gold literal '" + gold_cv.value + "' does";
      }
    }
  } catch (const Error& e) {
    if (warnings) {
      warnings->push_back("value probe unavailable (" + std::string(e.what()) +
                          "); category skipped");
    }
  }
  return std::nullopt;
}

std::optional<std::string> detect_join_redundancy(const sql::SqlAst& pred, const sql::SqlAst& gold,
                                                  const SchemaCatalog& catalog) {
  const LinkedSchema pred_linked = extract_schema_entities(pred, catalog);
  const LinkedSchema gold_linked = extract_schema_entities(gold, catalog);
  std::set<std::string> pred_tables;
  std::set<std::string> gold_tables;
  for (const std::string& table : pred_linked.tables) pred_tables.insert(ascii_lower(table));
  for (const std::string& table : gold_linked.tables) gold_tables.insert(ascii_lower(table));
  if (pred_tables.size() <= gold_tables.size()) return std::nullopt;
  std::vector<std::string> extra;
  for (const std::string& table : pred_tables) {
    if (!gold_tables.count(table)) extra.push_back(table);
  }
  if (extra.size() != pred_tables.size() - gold_tables.size() || extra.empty()) {
    return std::nullopt;
  }
  return "joins tables the gold query does not need: " + join(extra, ", ");
}

std::optional<std::string> detect_clause_abuse(const sql::SqlAst& pred, const sql::SqlAst& gold,
                                               const std::vector<std::string>& clauses) {
  for (const std::string& clause : clauses) {
    const std::string name = ascii_lower(trim(clause));
    if (name == "group by") {
      if (has_group_by(pred) && !has_group_by(gold) &&
          (has_order_by(pred) || has_limit(pred) || has_order_by(gold) || has_limit(gold))) {
        return "adds GROUP BY absent from the gold query next to ORDER BY/LIMIT";
      }
    } else if (name == "order by") {
      if (has_order_by(pred) && !has_order_by(gold)) {
        return "adds ORDER BY absent from the gold query";
      }
    } else if (name == "limit") {
      if (has_limit(pred) && !has_limit(gold)) {
        return "adds LIMIT absent from the gold query";
      }
    }
  }
  return std::nullopt;
}

std::optional<std::string> detect_mathematical_delusion(const std::string& pred_sql_text,
                                                        const FunctionWhitelist& whitelist) {
  static const std::set<std::string> structural_keywords = {
      "select", "from",   "where", "group",  "order", "by",    "having",   "limit",  "offset",
      "join",   "inner",  "left",  "right",  "cross", "outer", "on",       "using",  "as",
      "and",    "or",     "not",   "in",     "between", "like", "glob",    "is",     "null",
      "case",   "when",   "then",  "else",   "end",   "cast",  "exists",   "union",  "intersect",
      "except", "all",    "any",   "distinct", "asc", "desc",  "values",   "with",   "over",
      "partition", "filter"};

  const std::string& text = pred_sql_text;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    const char c = text[i];
    if (c == '\'' || c == '"' || c == '`') {
      const char quote = c;
      ++i;
      while (i < n && text[i] != quote) ++i;
      if (i < n) ++i;
      continue;
    }
    if (c == '[') {
      while (i < n && text[i] != ']') ++i;
      if (i < n) ++i;
      continue;
    }
    if (c == '-' && i + 1 < n && text[i + 1] == '-') {
      while (i < n && text[i] != '\n') ++i;
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = i;
      while (i < n && (std::isalnum(static_cast<unsigned char>(text[i])) || text[i] == '_')) ++i;
      std::string word = text.substr(start, i - start);
      // a dotted name is a column access, not a function identifier
      const bool after_dot = start > 0 && text[start - 1] == '.';
      std::size_t j = i;
      while (j < n && std::isspace(static_cast<unsigned char>(text[j]))) ++j;
      if (j < n && text[j] == '(' && !after_dot) {
        const std::string lowered = ascii_lower(word);
        if (!structural_keywords.count(lowered) && !whitelist.contains(lowered)) {
          return "calls " + ascii_upper(word) + ", which is not a function of the target engine";
        }
      }
      continue;
    }
    ++i;
  }
  return std::nullopt;
}

PairAudit audit_pair(const std::string& pred_sql, const std::string& gold_sql,
                     const SchemaCatalog& catalog, const std::string& db_file,
                     const FunctionWhitelist& whitelist) {
  PairAudit audit;
  auto add = [&](Category category, const std::optional<std::string>& evidence) {
    if (evidence) audit.findings.push_back({category, *evidence});
  };

  add(Category::mathematical_delusion, detect_mathematical_delusion(pred_sql, whitelist));

  std::optional<sql::SqlAst> pred;
  try {
    pred = sql::parse_sql(pred_sql);
  } catch (const Error& e) {
    audit.notes.push_back("predicted SQL does not parse: " + std::string(e.what()));
  }
  std::optional<sql::SqlAst> gold;
  try {
    gold = sql::parse_sql(gold_sql);
  } catch (const Error& e) {
    audit.notes.push_back("gold SQL does not parse: " + std::string(e.what()));
  }

  if (pred) {
    add(Category::schema_contradiction, detect_schema_contradiction(*pred, catalog));
    if (gold) {
      add(Category::attribute_overanalysis,
          detect_attribute_overanalysis(*pred, *gold, catalog));
      add(Category::value_misrepresentation,
          detect_value_misrepresentation(*pred, *gold, catalog, db_file, &audit.notes));
      add(Category::join_redundancy, detect_join_redundancy(*pred, *gold, catalog));
      add(Category::clause_abuse, detect_clause_abuse(*pred, *gold));
    }
  }
  return audit;
}

AuditReport audit_corpus(const std::vector<AuditInput>& pairs,
                         const std::map<std::string, SchemaCatalog>& catalogs,
                         const std::map<std::string, std::string>& db_files) {
  AuditReport report;
  const FunctionWhitelist whitelist = FunctionWhitelist::load();
  report.n_pairs = pairs.size();
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const AuditInput& input = pairs[i];
    auto catalog = catalogs.find(input.db_id);
    if (catalog == catalogs.end()) {
      report.failures.push_back("pair " + std::to_string(i) + ": no catalog for database '" +
                                input.db_id + "'");
      report.per_example.emplace_back();
      continue;
    }
    auto db_file = db_files.find(input.db_id);
    const std::string db_path = db_file == db_files.end() ? std::string() : db_file->second;
    PairAudit audit =
        audit_pair(input.pred_sql, input.gold_sql, catalog->second, db_path, whitelist);
    for (const Finding& finding : audit.findings) ++report.counts[finding.category];
    if (!audit.findings.empty()) ++report.n_labeled;
    report.per_example.push_back(std::move(audit));
  }
  return report;
}

namespace {

double share(std::size_t count, std::size_t denominator) {
  if (denominator == 0) return 0.0;
  return std::round(1000.0 * static_cast<double>(count) / static_cast<double>(denominator)) /
         10.0;
}

constexpr Category kAllCategories[] = {
    Category::schema_contradiction, Category::attribute_overanalysis,
    Category::value_misrepresentation, Category::join_redundancy,
    Category::clause_abuse, Category::mathematical_delusion};

}  // namespace

nlohmann::ordered_json AuditReport::to_json() const {
  std::size_t schema_labeled = 0;
  std::size_t logic_labeled = 0;
  for (const PairAudit& audit : per_example) {
    bool schema = false;
    bool logic = false;
    for (const Finding& finding : audit.findings) {
      (family_of(finding.category) == Family::schema_based ? schema : logic) = true;
    }
    if (schema) ++schema_labeled;
    if (logic) ++logic_labeled;
  }

  nlohmann::ordered_json doc;
  doc["pairs"] = n_pairs;
  doc["pairs_with_labels"] = n_labeled;
  nlohmann::ordered_json categories = nlohmann::ordered_json::object();
  for (Category category : kAllCategories) {
    auto it = counts.find(category);
    const std::size_t count = it == counts.end() ? 0 : it->second;
    const std::size_t family_denominator =
        family_of(category) == Family::schema_based ? schema_labeled : logic_labeled;
    nlohmann::ordered_json entry;
    entry["count"] = count;
    entry["share_of_labeled_pairs"] = share(count, n_labeled);
    entry["share_within_family"] = share(count, family_denominator);
    categories[to_string(category)] = std::move(entry);
  }
  doc["categories"] = std::move(categories);
  doc["schema_based_labeled_pairs"] = schema_labeled;
  doc["logic_based_labeled_pairs"] = logic_labeled;
  doc["failures"] = failures;
  return doc;
}

std::string AuditReport::render_table() const {
  const nlohmann::ordered_json doc = to_json();
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof line, "%-26s %6s %18s %18s\n", "category", "count",
                "% of labeled pairs", "% within family");
  out << line;
  for (Category category : kAllCategories) {
    const auto& entry = doc["categories"][to_string(category)];
    std::snprintf(line, sizeof line, "%-26s %6zu %17.1f%% %17.1f%%\n", to_string(category),
                  entry["count"].get<std::size_t>(),
                  entry["share_of_labeled_pairs"].get<double>(),
                  entry["share_within_family"].get<double>());
    out << line;
  }
  out << "pairs: " << n_pairs << ", with labels: " << n_labeled << "\n";
  for (const std::string& failure : failures) out << "failure: " << failure << "\n";
  return out.str();
}

nlohmann::ordered_json compare_reports(const AuditReport& baseline, const AuditReport& other) {
  nlohmann::ordered_json doc;
  doc["baseline_pairs"] = baseline.n_pairs;
  doc["other_pairs"] = other.n_pairs;
  nlohmann::ordered_json deltas = nlohmann::ordered_json::object();
  for (Category category : kAllCategories) {
    auto count_in = [&](const AuditReport& report) -> long long {
      auto it = report.counts.find(category);
      return it == report.counts.end() ? 0 : static_cast<long long>(it->second);
    };
    deltas[to_string(category)] = count_in(other) - count_in(baseline);
  }
  doc["count_delta"] = std::move(deltas);
  return doc;
}

}  // namespace tasql::audit
