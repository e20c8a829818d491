#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <chrono>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "tasql/audit.hpp"
#include "tasql/errors.hpp"
#include "tasql/eval.hpp"
#include "tasql/join_infer.hpp"
#include "tasql/resources.hpp"
#include "tasql/schema_catalog.hpp"
#include "tasql/sql_extract.hpp"
#include "tasql/sql_parser.hpp"
#include "tasql/symbolic_plan.hpp"
#include "tasql/talog.hpp"

namespace py = pybind11;

namespace {

using namespace tasql;

LinkedSchema schema_from_keys(const std::vector<std::string>& keys) {
  LinkedSchema linked;
  for (const std::string& key : keys) {
    const auto dot = key.find('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 == key.size()) {
      throw PreconditionError("column key must look like table.column, got '" + key + "'");
    }
    linked.columns.push_back(ColumnRef{key.substr(0, dot), key.substr(dot + 1)});
  }
  std::sort(linked.columns.begin(), linked.columns.end());
  linked.columns.erase(std::unique(linked.columns.begin(), linked.columns.end()),
                       linked.columns.end());
  return linked;
}

std::string extract_entities_json(const std::string& sql_text, const std::string& db_file) {
  const SchemaCatalog catalog = introspect_database(db_file);
  const sql::SqlAst ast = sql::parse_sql(sql_text);
  const LinkedSchema linked = extract_schema_entities(ast, catalog);
  nlohmann::ordered_json doc;
  nlohmann::ordered_json columns = nlohmann::ordered_json::array();
  for (const ColumnRef& ref : linked.columns) columns.push_back(ref.canonical());
  doc["columns"] = std::move(columns);
  doc["tables"] = linked.tables;
  doc["unresolved"] = linked.unresolved;
  nlohmann::ordered_json conditions = nlohmann::ordered_json::array();
  for (const ConditionValue& cv : linked.condition_values) {
    conditions.push_back({{"column", cv.column.canonical()}, {"op", cv.op}, {"value", cv.value}});
  }
  doc["condition_values"] = std::move(conditions);
  return doc.dump();
}

std::string compile_plan_to_sql(const std::string& plan_text, const std::string& db_file) {
  const SchemaCatalog catalog = introspect_database(db_file);
  const talog::SymbolicPlan plan = talog::parse_symbolic(plan_text);
  const JoinGraph graph = fk_join_graph(catalog);
  return talog::compile_plan(plan, catalog, graph).sql;
}

py::dict linking_scores(const std::vector<std::pair<std::vector<std::string>,
                                                    std::vector<std::string>>>& pairs) {
  std::vector<std::pair<LinkedSchema, LinkedSchema>> linked;
  for (const auto& [pred, gold] : pairs) {
    linked.emplace_back(schema_from_keys(pred), schema_from_keys(gold));
  }
  const eval::SchemaLinkingScore score = eval::schema_linking_scores(linked);
  py::dict out;
  out["recall"] = score.recall;
  out["precision"] = score.precision;
  out["f1"] = score.f1;
  out["n_examples"] = score.n_examples;
  return out;
}

bool run_execution_accuracy(const std::string& pred_sql, const std::string& gold_sql,
                            const std::string& db_file, long long timeout_ms) {
  return eval::execution_accuracy(pred_sql, gold_sql, db_file,
                                  std::chrono::milliseconds(timeout_ms));
}

std::string audit_pair_json(const std::string& pred_sql, const std::string& gold_sql,
                            const std::string& db_file) {
  const SchemaCatalog catalog = introspect_database(db_file);
  const audit::FunctionWhitelist whitelist = audit::FunctionWhitelist::load();
  const audit::PairAudit result =
      audit::audit_pair(pred_sql, gold_sql, catalog, db_file, whitelist);
  nlohmann::ordered_json doc;
  nlohmann::ordered_json findings = nlohmann::ordered_json::array();
  for (const audit::Finding& finding : result.findings) {
    findings.push_back(
        {{"category", audit::to_string(finding.category)}, {"evidence", finding.evidence}});
  }
  doc["findings"] = std::move(findings);
  doc["notes"] = result.notes;
  return doc.dump();
}

std::vector<std::string> join_path_edges(const std::vector<std::string>& tables,
                                         const std::string& db_file) {
  const SchemaCatalog catalog = introspect_database(db_file);
  const JoinGraph graph = fk_join_graph(catalog);
  const JoinPath path = infer_join_path(tables, graph);
  std::vector<std::string> out;
  out.push_back(path.anchor);
  for (const JoinEdge& edge : path.edges) {
    out.push_back(edge.table + " on " + edge.link.from.display() + " = " +
                  edge.link.to.display());
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_tasql, m) {
  m.doc() = "two-stage text-to-SQL core: schema linking, symbolic plan compilation, "
            "evaluation metrics, hallucination auditing";

  py::register_exception<Error>(m, "TasqlError");

  m.def("set_resource_root", [](const std::string& path) { resources::set_root(path); },
        py::arg("path"), "point prompt templates and data files at a directory");

  m.def("introspect", [](const std::string& db_file) {
          return introspect_database(db_file).to_json().dump();
        },
        py::arg("db_file"), "schema catalog of a SQLite file as a JSON string");

  m.def("parse_sql", [](const std::string& sql_text) {
          return sql::render_sql(sql::parse_sql(sql_text));
        },
        py::arg("sql"), "parse and re-render a SELECT statement");

  m.def("extract_entities", &extract_entities_json, py::arg("sql"), py::arg("db_file"),
        "schema entities referenced by a SQL statement, as a JSON string");

  m.def("parse_plan", [](const std::string& text) {
          return talog::render_symbolic(talog::parse_symbolic(text));
        },
        py::arg("text"), "parse a symbolic plan and return its canonical form");

  m.def("compile_plan", &compile_plan_to_sql, py::arg("plan"), py::arg("db_file"),
        "compile a symbolic plan against a database schema into SQL");

  m.def("schema_linking_scores", &linking_scores, py::arg("pairs"),
        "recall/precision/f1 over (predicted, gold) column-key lists");

  m.def("execution_accuracy", &run_execution_accuracy, py::arg("pred_sql"), py::arg("gold_sql"),
        py::arg("db_file"), py::arg("timeout_ms") = 30000,
        "row-set equality of predicted vs gold execution");

  m.def("audit_pair", &audit_pair_json, py::arg("pred_sql"), py::arg("gold_sql"),
        py::arg("db_file"), "hallucination findings for one predicted/gold pair");

  m.def("infer_join_path", &join_path_edges, py::arg("tables"), py::arg("db_file"),
        "anchor plus join edges connecting the given tables through foreign keys");
}
