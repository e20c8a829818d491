#include <map>
#include <set>

#include "json.hpp"

#include "tasql/errors.hpp"
#include "tasql/resources.hpp"
#include "tasql/strings.hpp"
#include "tasql/talog.hpp"

namespace tasql::talog {

namespace {

std::string py_quote(const std::string& text) {
  std::string out = "\"";
  for (char c : text) {
    if (c == '"' || c == '\\') out += '\\';
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out += c;
  }
  out += "\"";
  return out;
}

std::string compose_block(const std::string& schema_text, const std::string& question,
                          const std::string& evidence) {
  std::string block = schema_text;
  if (!block.empty() && block.back() != '\n') block += "\n";
  block += "question = " + py_quote(question) + "\n";
  if (!evidence.empty()) block += "evidence = " + py_quote(evidence) + "\n";
  block += "plan:";
  return block;
}

}  // namespace

std::vector<llm::Demonstration> load_synthesis_demos() {
  const std::string text = resources::load_text("prompts/synthesis_demos.json");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("prompts/synthesis_demos.json: " + std::string(e.what()), e.byte);
  }
  if (!doc.is_array()) {
    throw ParseError("prompts/synthesis_demos.json: expected a JSON array", 0);
  }
  std::vector<llm::Demonstration> demos;
  for (const auto& entry : doc) {
    llm::Demonstration demo;
    demo.input = compose_block(entry.at("schema_snippet").get<std::string>(),
                               entry.at("question").get<std::string>(),
                               entry.value("evidence", std::string()));
    demo.output = entry.at("symbolic_plan").get<std::string>();
    demos.push_back(std::move(demo));
  }
  return demos;
}

namespace {

// Linked columns grouped per table, augmented with the key columns joins
// need: primary keys plus FK endpoints on the inferred join path.
std::string schema_section(const LinkedSchema& linked, const SchemaCatalog& catalog) {
  std::set<std::string, CiLess> include_tables(linked.tables.begin(), linked.tables.end());
  JoinGraph graph = fk_join_graph(catalog);

  std::vector<FkLink> links;
  bool used_path = false;
  if (linked.tables.size() > 1) {
    try {
      JoinPath path = infer_join_path(linked.tables, graph);
      for (const std::string& table : path.tables()) include_tables.insert(table);
      for (const JoinEdge& edge : path.edges) links.push_back(edge.link);
      used_path = true;
    } catch (const Error&) {
      // fall through to direct links among the linked tables
    }
  }
  if (!used_path) {
    for (const FkLink& link : graph.links) {
      if (include_tables.count(link.from.table) && include_tables.count(link.to.table)) {
        links.push_back(link);
      }
    }
  }

  std::set<std::string> key_columns;  // canonical
  for (const FkLink& link : links) {
    key_columns.insert(link.from.canonical());
    key_columns.insert(link.to.canonical());
  }
  for (const std::string& name : include_tables) {
    const TableDef* table = catalog.find_table(name);
    if (!table) continue;
    for (const std::string& pk : table->primary_key) {
      key_columns.insert(ColumnRef{table->name, pk}.canonical());
    }
  }

  std::string out = "tables = {\n";
  bool first_table = true;
  for (const std::string& name : include_tables) {
    const TableDef* table = catalog.find_table(name);
    if (!table) continue;
    std::vector<std::string> names;
    for (const ColumnDef& column : table->columns) {
      ColumnRef ref{table->name, column.name};
      const bool is_linked = linked.contains(ref);
      if (is_linked || key_columns.count(ref.canonical())) {
        names.push_back(py_quote(column.name));
      }
    }
    if (names.empty()) continue;
    if (!first_table) out += ",\n";
    first_table = false;
    out += "    " + py_quote(table->name) + ": [" + join(names, ", ") + "]";
  }
  out += "\n}\n";

  if (!links.empty()) {
    std::vector<std::string> rendered;
    for (const FkLink& link : links) {
      rendered.push_back(py_quote(link.from.display() + " = " + link.to.display()));
    }
    out += "foreign_keys = [" + join(rendered, ", ") + "]\n";
  }
  return out;
}

}  // namespace

llm::PromptBundle build_synthesis_prompt(const std::string& question, const std::string& evidence,
                                         const LinkedSchema& linked, const SchemaCatalog& catalog,
                                         const std::vector<llm::Demonstration>& demos) {
  if (linked.columns.empty()) {
    throw PreconditionError("linked schema has no columns; nothing to synthesize over");
  }
  llm::PromptBundle bundle;
  bundle.instruction = resources::load_text("prompts/symbolic_synthesis.txt");
  bundle.demonstrations = demos;
  bundle.input = compose_block(schema_section(linked, catalog), question, evidence);
  return bundle;
}

SynthesisResult synthesize(const TaskExample& example, const LinkedSchema& linked,
                           const SchemaCatalog& catalog, const JoinGraph& graph,
                           llm::Gateway& gateway) {
  const std::vector<llm::Demonstration> demos = load_synthesis_demos();
  const llm::PromptBundle bundle =
      build_synthesis_prompt(example.question, example.evidence, linked, catalog, demos);
  const std::string prompt = llm::assemble_prompt(bundle);

  SynthesisResult result;
  result.raw_response = gateway.complete(prompt);

  SymbolicPlan plan;
  std::string retry_response;
  try {
    plan = parse_symbolic(result.raw_response);
  } catch (const Error& first_error) {
    if (first_error.kind() != ErrorKind::SymbolicParse &&
        first_error.kind() != ErrorKind::UnknownFunction) {
      throw;
    }
    const std::string retry_prompt =
        prompt +
        "\n\nYour previous answer could not be parsed. Reply with only the symbolic plan "
        "lines, one per line, ending with the res line. No prose, no SQL.";
    result.retried = true;
    retry_response = gateway.complete(retry_prompt);
    try {
      plan = parse_symbolic(retry_response);
    } catch (const Error& second_error) {
      throw SynthesisError(
          "symbolic plan unparsable after retry: " + std::string(second_error.what()),
          {prompt, result.raw_response, retry_response, first_error.what()});
    }
  }

  result.warnings = plan.warnings;
  const std::vector<ValidationIssue> issues = validate_plan(plan, linked, catalog);
  std::vector<std::string> error_messages;
  for (const ValidationIssue& issue : issues) {
    if (issue.severity == ValidationIssue::Severity::error) {
      error_messages.push_back(issue.message);
    } else {
      result.warnings.push_back(issue.message);
    }
  }
  if (!error_messages.empty()) {
    throw SynthesisError("plan failed validation: " + join(error_messages, "; "),
                         {prompt, result.raw_response, retry_response,
                          render_symbolic(plan)});
  }

  try {
    result.query = compile_plan(plan, catalog, graph);
  } catch (const Error& e) {
    throw SynthesisError("plan failed to compile: " + std::string(e.what()),
                         {prompt, result.raw_response, retry_response, render_symbolic(plan)});
  }
  result.plan = std::move(plan);
  return result;
}

}  // namespace tasql::talog
