#pragma once

#include <string>

#include "tasql/dataset.hpp"
#include "tasql/llm_gateway.hpp"
#include "tasql/schema_catalog.hpp"
#include "tasql/sql_extract.hpp"

namespace tasql::tasl {

// Outcome of one schema-linking pass. The dummy SQL is a scratch artifact:
// it is never executed and never returned as an answer; only the entity set
// extracted from it matters.
struct DummySqlResult {
  std::string raw_response;
  std::string extracted_sql;
  LinkedSchema linked;
  bool parse_ok = false;
  bool used_fallback = false;  // linked fell back to the full catalog
};

// Zero-shot bundle: instruction template with the question, optional
// evidence, and the schema dictionary substituted in. Pass empty evidence
// under without_knowledge mode; the evidence line disappears from the
// rendered prompt. Throws PreconditionError when the dictionary is empty.
llm::PromptBundle build_dummy_sql_prompt(const std::string& question, const std::string& evidence,
                                         const SchemaDictionary& schema_dict);

// Pulls the first SQL statement out of a model response: code fences are
// stripped, prose before the first SELECT (or WITH) is dropped, and the
// statement ends at the first semicolon outside quotes. Returns the whole
// response when no statement is found, so the caller sees the parse failure.
std::string extract_sql_from_response(const std::string& raw);

// Prompt, complete, extract, parse, extract entities. When the dummy SQL
// does not parse, or parses but references no columns, the result falls
// back to the full catalog as the linked schema (recall preserved at the
// cost of precision) with used_fallback set.
DummySqlResult link_schema(const TaskExample& example, const SchemaCatalog& catalog,
                           llm::Gateway& gateway,
                           KnowledgeMode mode = KnowledgeMode::with_knowledge,
                           bool use_succinct = false);

}  // namespace tasql::tasl
