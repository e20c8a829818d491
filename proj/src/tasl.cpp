#include "tasql/tasl.hpp"

#include <algorithm>
#include <cctype>

#include "tasql/errors.hpp"
#include "tasql/resources.hpp"
#include "tasql/sql_parser.hpp"
#include "tasql/strings.hpp"

namespace tasql::tasl {

llm::PromptBundle build_dummy_sql_prompt(const std::string& question, const std::string& evidence,
                                         const SchemaDictionary& schema_dict) {
  if (schema_dict.entries.empty()) {
    throw PreconditionError("schema dictionary is empty; the database has no columns");
  }
  llm::PromptBundle bundle;
  const std::string template_text = resources::load_text("prompts/dummy_sql.txt");
  bundle.instruction = resources::render_template(
      template_text, {{"question", question},
                      {"evidence", evidence},
                      {"schema_dictionary", schema_dict.render()}});
  return bundle;
}

namespace {

std::string strip_code_fences(const std::string& raw) {
  std::vector<std::string> kept;
  for (const std::string& line : split_lines(raw)) {
    const std::string trimmed = trim(line);
    if (trimmed.rfind("```", 0) == 0) continue;
    kept.push_back(line);
  }
  return join(kept, "\n");
}

bool starts_statement(const std::string& text, std::size_t pos, std::string_view keyword) {
  if (pos + keyword.size() > text.size()) return false;
  for (std::size_t i = 0; i < keyword.size(); ++i) {
    if (std::toupper(static_cast<unsigned char>(text[pos + i])) != keyword[i]) return false;
  }
  const std::size_t end = pos + keyword.size();
  if (end < text.size() &&
      (std::isalnum(static_cast<unsigned char>(text[end])) || text[end] == '_')) {
    return false;  // identifier that merely begins with the keyword
  }
  if (pos > 0) {
    const char before = text[pos - 1];
    if (std::isalnum(static_cast<unsigned char>(before)) || before == '_') return false;
  }
  return true;
}

}  // namespace

std::string extract_sql_from_response(const std::string& raw) {
  const std::string text = strip_code_fences(raw);
  std::size_t start = std::string::npos;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (starts_statement(text, i, "SELECT") || starts_statement(text, i, "WITH")) {
      start = i;
      break;
    }
  }
  if (start == std::string::npos) return trim(raw);

  bool in_string = false;
  char quote = 0;
  std::size_t end = text.size();
  for (std::size_t i = start; i < text.size(); ++i) {
    const char c = text[i];
    if (in_string) {
      if (c == quote) in_string = false;
      continue;
    }
    if (c == '\'' || c == '"' || c == '`') {
      in_string = true;
      quote = c;
    } else if (c == ';') {
      end = i + 1;
      break;
    }
  }
  return trim(text.substr(start, end - start));
}

DummySqlResult link_schema(const TaskExample& example, const SchemaCatalog& catalog,
                           llm::Gateway& gateway, KnowledgeMode mode, bool use_succinct) {
  const SchemaDictionary dict = build_schema_dictionary(catalog, use_succinct);
  const std::string evidence =
      mode == KnowledgeMode::with_knowledge ? example.evidence : std::string();
  const llm::PromptBundle bundle = build_dummy_sql_prompt(example.question, evidence, dict);

  DummySqlResult result;
  result.raw_response = gateway.complete(llm::assemble_prompt(bundle));
  result.extracted_sql = extract_sql_from_response(result.raw_response);

  try {
    const sql::SqlAst ast = sql::parse_sql(result.extracted_sql);
    result.parse_ok = true;
    result.linked = extract_schema_entities(ast, catalog);
  } catch (const SqlParseError&) {
    result.parse_ok = false;
  } catch (const UnsupportedError&) {
    result.parse_ok = false;
  }

  if (!result.parse_ok || result.linked.columns.empty()) {
    LinkedSchema fallback;
    fallback.columns = catalog.all_columns();
    std::sort(fallback.columns.begin(), fallback.columns.end());
    for (const TableDef& table : catalog.tables) fallback.tables.push_back(table.name);
    std::sort(fallback.tables.begin(), fallback.tables.end(), CiLess{});
    fallback.unresolved = result.linked.unresolved;  // keep diagnostics
    result.linked = std::move(fallback);
    result.used_fallback = true;
  }
  return result;
}

}  // namespace tasql::tasl
