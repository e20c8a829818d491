#pragma once

#include <string>
#include <vector>

#include "tasql/dataset.hpp"
#include "tasql/join_infer.hpp"
#include "tasql/llm_gateway.hpp"
#include "tasql/schema_catalog.hpp"
#include "tasql/sql_extract.hpp"
#include "tasql/symbolic_plan.hpp"

namespace tasql::talog {

struct ValidationIssue {
  enum class Severity { error, warning };
  Severity severity = Severity::error;
  std::string message;
};

// Errors: undefined frames, columns missing from the catalog. Warnings:
// columns outside the linked schema (which may simply be incomplete).
std::vector<ValidationIssue> validate_plan(const SymbolicPlan& plan, const LinkedSchema& linked,
                                           const SchemaCatalog& catalog);

bool has_errors(const std::vector<ValidationIssue>& issues);

struct CompiledQuery {
  std::string sql;
  std::vector<std::string> tables;  // FROM tables in join order
};

// Lowers a plan to one SQLite SELECT. Where filters conjoin into WHERE;
// groupby/orderby/limit map onto their clauses; aggregates over a frame
// other than the final one become scalar subqueries replicating that frame's
// FROM and WHERE. The FROM clause joins every table the plan references via
// infer_join_path. The emitted SQL is re-parsed as a self-check before it is
// returned. Throws CompileError on undefined frames, unknown columns, or
// constructs without a sound SQL rendering.
CompiledQuery compile_plan(const SymbolicPlan& plan, const SchemaCatalog& catalog,
                           const JoinGraph& graph);

// The six fixed demonstrations shipped with the repo
// (prompts/synthesis_demos.json).
std::vector<llm::Demonstration> load_synthesis_demos();

// Few-shot bundle whose schema section lists only the linked columns plus
// the key columns their tables need for joining (primary keys and FK
// endpoints on the inferred join path). Throws PreconditionError when the
// linked schema has no columns.
llm::PromptBundle build_synthesis_prompt(const std::string& question, const std::string& evidence,
                                         const LinkedSchema& linked, const SchemaCatalog& catalog,
                                         const std::vector<llm::Demonstration>& demos);

struct SynthesisResult {
  SymbolicPlan plan;
  CompiledQuery query;
  std::string raw_response;
  bool retried = false;
  std::vector<std::string> warnings;
};

// Full synthesis pass: prompt, complete, parse, validate, compile. A parse
// failure triggers one retry with an appended plain-lines reminder. The
// compiled plan is authoritative even when the response carries its own SQL
// trailer (kept in plan.trailing_text for diagnostics). Unrecoverable
// failures throw SynthesisError carrying the prompt and both responses.
SynthesisResult synthesize(const TaskExample& example, const LinkedSchema& linked,
                           const SchemaCatalog& catalog, const JoinGraph& graph,
                           llm::Gateway& gateway);

}  // namespace tasql::talog
