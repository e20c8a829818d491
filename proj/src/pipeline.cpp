#include "tasql/pipeline.hpp"

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "tasql/audit.hpp"
#include "tasql/errors.hpp"
#include "tasql/eval.hpp"
#include "tasql/sql_extract.hpp"
#include "tasql/strings.hpp"
#include "tasql/talog.hpp"
#include "tasql/tasl.hpp"

namespace tasql::pipeline {

namespace fs = std::filesystem;

std::string database_file(const RunConfig& config, const std::string& db_id) {
  const fs::path root(config.databases_root);
  const fs::path nested = root / db_id / (db_id + ".sqlite");
  if (fs::exists(nested)) return nested.string();
  const fs::path flat = root / (db_id + ".sqlite");
  if (fs::exists(flat)) return flat.string();
  return nested.string();  // let the open fail with the canonical path
}

void prepare_run(const RunConfig& config) {
  if (config.concurrency == 0) {
    throw ConfigError("concurrency must be positive");
  }
  if (config.gateway_mode == llm::GatewayMode::replay) {
    if (config.cache_path.empty() || !fs::exists(config.cache_path)) {
      throw ConfigError("replay mode requires an existing cache file, got '" +
                        config.cache_path + "'");
    }
  }
  if (config.gateway_mode == llm::GatewayMode::record && config.cache_path.empty()) {
    throw ConfigError("record mode requires a cache path");
  }
  if (!config.output_dir.empty()) {
    std::error_code ec;
    fs::create_directories(config.output_dir, ec);
    if (ec) {
      throw ConfigError("cannot create output directory '" + config.output_dir +
                        "': " + ec.message());
    }
  }
}

std::unique_ptr<llm::Gateway> make_gateway(const RunConfig& config) {
  llm::GatewayOptions options;
  options.mode = config.gateway_mode;
  options.model_id = config.model_id;
  options.cache_path = config.cache_path;
  options.backend_url = config.backend_url;
  std::unique_ptr<llm::CompletionBackend> backend;
  if (config.gateway_mode != llm::GatewayMode::replay && !config.backend_url.empty()) {
    backend = llm::make_http_backend(config.backend_url);
  }
  return std::make_unique<llm::Gateway>(std::move(options), std::move(backend));
}

struct CatalogCache::Impl {
  RunConfig config;
  std::mutex mutex;
  std::map<std::string, std::unique_ptr<SchemaCatalog>> catalogs;
};

CatalogCache::CatalogCache(const RunConfig& config) : impl_(std::make_unique<Impl>()) {
  impl_->config = config;
}

CatalogCache::~CatalogCache() = default;

const SchemaCatalog& CatalogCache::get(const std::string& db_id) {
  std::lock_guard<std::mutex> lock(impl_->mutex);
  auto it = impl_->catalogs.find(db_id);
  if (it == impl_->catalogs.end()) {
    auto catalog = std::make_unique<SchemaCatalog>(
        introspect_database(database_file(impl_->config, db_id)));
    it = impl_->catalogs.emplace(db_id, std::move(catalog)).first;
  }
  return *it->second;
}

namespace {

// Runs fn(i) for i in [0, n) on a pool. Exceptions are collected per index;
// a replay miss anywhere aborts the whole run once workers drain.
void parallel_for(std::size_t n, std::size_t concurrency,
                  const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  const std::size_t workers = std::min(concurrency, n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr fatal;
  std::mutex fatal_mutex;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(fatal_mutex);
          if (!fatal) fatal = std::current_exception();
        }
      }
    });
  }
  for (auto& thread : pool) thread.join();
  if (fatal) std::rethrow_exception(fatal);
}

std::string difficulty_name(Difficulty difficulty) { return to_string(difficulty); }

nlohmann::ordered_json schema_to_json(const LinkedSchema& linked) {
  nlohmann::ordered_json doc;
  nlohmann::ordered_json columns = nlohmann::ordered_json::array();
  for (const ColumnRef& ref : linked.columns) columns.push_back(ref.canonical());
  doc["columns"] = std::move(columns);
  doc["tables"] = linked.tables;
  return doc;
}

void write_jsonl(const std::string& path, const std::vector<nlohmann::ordered_json>& records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  for (const auto& record : records) {
    out << record.dump() << "\n";
  }
}

void write_json(const std::string& path, const nlohmann::ordered_json& doc) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out << doc.dump(2) << "\n";
}

std::vector<nlohmann::json> read_jsonl(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::vector<nlohmann::json> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      records.push_back(nlohmann::json::parse(line));
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what(), e.byte);
    }
  }
  return records;
}

struct LinkOutcome {
  nlohmann::ordered_json record;
  std::optional<LinkedSchema> predicted;
  std::optional<LinkedSchema> gold;
  bool failed = false;
};

LinkOutcome link_one(const TaskExample& example, std::size_t index, const RunConfig& config,
                     CatalogCache& catalogs, llm::Gateway& gateway) {
  LinkOutcome outcome;
  nlohmann::ordered_json& record = outcome.record;
  record["example_id"] = example.question_id ? nlohmann::ordered_json(*example.question_id)
                                             : nlohmann::ordered_json(index);
  record["db_id"] = example.db_id;
  record["question"] = example.question;
  try {
    const SchemaCatalog& catalog = catalogs.get(example.db_id);
    tasl::DummySqlResult result =
        tasl::link_schema(example, catalog, gateway, config.knowledge_mode, config.use_succinct);
    record["dummy_sql"] = result.extracted_sql;
    record["predicted"] = schema_to_json(result.linked);
    record["used_fallback"] = result.used_fallback;
    outcome.predicted = std::move(result.linked);
    try {
      outcome.gold = ground_truth_schema(example.gold_sql, catalog);
      record["gold"] = schema_to_json(*outcome.gold);
    } catch (const GoldSchemaError& e) {
      record["gold_error"] = e.what();
    }
  } catch (const ReplayMissError&) {
    throw;
  } catch (const Error& e) {
    record["error"] = e.what();
    outcome.failed = true;
  }
  return outcome;
}

struct RunOutcome {
  nlohmann::ordered_json record;
  bool failed = false;
};

RunOutcome run_one(const TaskExample& example, std::size_t index, const RunConfig& config,
                   CatalogCache& catalogs, llm::Gateway& gateway) {
  RunOutcome outcome;
  nlohmann::ordered_json& record = outcome.record;
  record["example_id"] = example.question_id ? nlohmann::ordered_json(*example.question_id)
                                             : nlohmann::ordered_json(index);
  record["db_id"] = example.db_id;
  record["question"] = example.question;
  record["difficulty"] = difficulty_name(example.difficulty);
  record["gold_sql"] = example.gold_sql;
  std::vector<std::string> diagnostics;
  try {
    const SchemaCatalog& catalog = catalogs.get(example.db_id);
    tasl::DummySqlResult linked =
        tasl::link_schema(example, catalog, gateway, config.knowledge_mode, config.use_succinct);
    record["dummy_sql"] = linked.extracted_sql;
    record["linked"] = schema_to_json(linked.linked);
    record["used_fallback"] = linked.used_fallback;

    TaskExample effective = example;
    if (config.knowledge_mode == KnowledgeMode::without_knowledge) effective.evidence.clear();
    const JoinGraph graph = fk_join_graph(catalog);
    try {
      talog::SynthesisResult synthesis =
          talog::synthesize(effective, linked.linked, catalog, graph, gateway);
      record["symbolic_plan"] = talog::render_symbolic(synthesis.plan);
      record["final_sql"] = synthesis.query.sql;
      for (const std::string& warning : synthesis.warnings) diagnostics.push_back(warning);
      if (synthesis.retried) diagnostics.push_back("symbolic parse needed one retry");
    } catch (const ReplayMissError&) {
      throw;
    } catch (const SynthesisError& e) {
      record["symbolic_plan"] = nullptr;
      record["final_sql"] = nullptr;
      diagnostics.push_back(e.what());
      outcome.failed = true;
    }
  } catch (const ReplayMissError&) {
    throw;
  } catch (const Error& e) {
    record["final_sql"] = nullptr;
    diagnostics.push_back(e.what());
    outcome.failed = true;
  }
  record["diagnostics"] = diagnostics;
  return outcome;
}

int guard_command(std::ostream& out, const std::function<int()>& body) {
  try {
    return body();
  } catch (const ReplayMissError& e) {
    out << "error: " << e.what() << "\n";
    return 2;
  } catch (const ConfigError& e) {
    out << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    out << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace

int cmd_link(const RunConfig& config, std::ostream& out) {
  return guard_command(out, [&]() -> int {
    prepare_run(config);
    const Corpus corpus = load_corpus(config.dataset_path, config.source, config.knowledge_mode);
    auto gateway = make_gateway(config);
    CatalogCache catalogs(config);

    std::vector<LinkOutcome> outcomes(corpus.examples.size());
    parallel_for(corpus.examples.size(), config.concurrency, [&](std::size_t i) {
      outcomes[i] = link_one(corpus.examples[i], i, config, catalogs, *gateway);
    });

    std::vector<nlohmann::ordered_json> records;
    std::vector<std::pair<LinkedSchema, LinkedSchema>> scored;
    std::size_t failed = 0;
    for (auto& outcome : outcomes) {
      records.push_back(std::move(outcome.record));
      if (outcome.failed) ++failed;
      if (outcome.predicted && outcome.gold) {
        scored.emplace_back(*outcome.predicted, *outcome.gold);
      }
    }
    write_jsonl((fs::path(config.output_dir) / "linked.jsonl").string(), records);

    out << "examples: " << corpus.examples.size() << ", failed: " << failed << "\n";
    if (!scored.empty()) {
      const eval::SchemaLinkingScore score = eval::schema_linking_scores(scored);
      char line[128];
      std::snprintf(line, sizeof line,
                    "schema linking over %zu examples: recall %.4f, precision %.4f, f1 %.4f\n",
                    score.n_examples, score.recall, score.precision, score.f1);
      out << line;
    }
    if (!corpus.examples.empty() && failed == corpus.examples.size()) return 1;
    return 0;
  });
}

int cmd_run(const RunConfig& config, std::ostream& out) {
  return guard_command(out, [&]() -> int {
    prepare_run(config);
    const Corpus corpus = load_corpus(config.dataset_path, config.source, config.knowledge_mode);
    auto gateway = make_gateway(config);
    CatalogCache catalogs(config);

    std::vector<RunOutcome> outcomes(corpus.examples.size());
    parallel_for(corpus.examples.size(), config.concurrency, [&](std::size_t i) {
      outcomes[i] = run_one(corpus.examples[i], i, config, catalogs, *gateway);
    });

    std::vector<nlohmann::ordered_json> records;
    std::size_t failed = 0;
    for (auto& outcome : outcomes) {
      records.push_back(std::move(outcome.record));
      if (outcome.failed) ++failed;
    }
    write_jsonl((fs::path(config.output_dir) / "predictions.jsonl").string(), records);
    out << "examples: " << corpus.examples.size() << ", failed: " << failed << "\n";
    return failed == 0 ? 0 : 1;
  });
}

int cmd_eval(const RunConfig& config, std::ostream& out) {
  return guard_command(out, [&]() -> int {
    prepare_run(config);
    const std::string predictions_path =
        (fs::path(config.output_dir) / "predictions.jsonl").string();
    const std::vector<nlohmann::json> records = read_jsonl(predictions_path);
    const std::chrono::milliseconds timeout{static_cast<long long>(config.timeout_seconds) *
                                            1000};

    std::vector<eval::ExampleResult> results(records.size());
    parallel_for(records.size(), config.concurrency, [&](std::size_t i) {
      const nlohmann::json& record = records[i];
      eval::ExampleResult result;
      result.index = i;
      result.difficulty = data::difficulty_from_string(record.value("difficulty", ""));
      result.used_fallback = record.value("used_fallback", false);
      const std::string gold = record.value("gold_sql", "");
      const std::string db_file = database_file(config, record.value("db_id", ""));
      if (gold.empty()) {
        result.verdict = eval::ExVerdict::gold_invalid;
        result.error = "record has no gold_sql";
      } else if (!record.contains("final_sql") || record["final_sql"].is_null()) {
        result.verdict = eval::execution_verdict("", gold, db_file, timeout) ==
                                 eval::ExVerdict::gold_invalid
                             ? eval::ExVerdict::gold_invalid
                             : eval::ExVerdict::wrong;
        result.error = "no final SQL";
      } else {
        result.verdict = eval::execution_verdict(record["final_sql"].get<std::string>(), gold,
                                                 db_file, timeout);
      }
      results[i] = std::move(result);
    });

    const eval::EvalReport report = eval::corpus_report(results, std::nullopt);
    write_json((fs::path(config.output_dir) / "eval.json").string(), report.to_json());
    out << report.render_table();
    return 0;
  });
}

int cmd_audit(const RunConfig& config, const std::optional<std::string>& baseline_predictions,
              std::ostream& out) {
  return guard_command(out, [&]() -> int {
    prepare_run(config);

    auto load_inputs = [&](const std::string& path) {
      std::vector<audit::AuditInput> inputs;
      for (const nlohmann::json& record : read_jsonl(path)) {
        audit::AuditInput input;
        if (record.contains("final_sql") && !record["final_sql"].is_null()) {
          input.pred_sql = record["final_sql"].get<std::string>();
        }
        input.gold_sql = record.value("gold_sql", "");
        input.db_id = record.value("db_id", "");
        inputs.push_back(std::move(input));
      }
      return inputs;
    };

    const std::string predictions_path =
        (fs::path(config.output_dir) / "predictions.jsonl").string();
    const std::vector<audit::AuditInput> inputs = load_inputs(predictions_path);

    std::map<std::string, SchemaCatalog> catalogs;
    std::map<std::string, std::string> db_files;
    for (const audit::AuditInput& input : inputs) {
      if (input.db_id.empty() || catalogs.count(input.db_id)) continue;
      const std::string db_file = database_file(config, input.db_id);
      try {
        catalogs.emplace(input.db_id, introspect_database(db_file));
        db_files.emplace(input.db_id, db_file);
      } catch (const Error&) {
        // left out of the map; audit_corpus records the failure per pair
      }
    }

    audit::AuditReport report = audit::audit_corpus(inputs, catalogs, db_files);
    nlohmann::ordered_json doc = report.to_json();
    if (baseline_predictions) {
      const std::vector<audit::AuditInput> baseline_inputs = load_inputs(*baseline_predictions);
      for (const audit::AuditInput& input : baseline_inputs) {
        if (input.db_id.empty() || catalogs.count(input.db_id)) continue;
        const std::string db_file = database_file(config, input.db_id);
        try {
          catalogs.emplace(input.db_id, introspect_database(db_file));
          db_files.emplace(input.db_id, db_file);
        } catch (const Error&) {
        }
      }
      const audit::AuditReport baseline = audit::audit_corpus(baseline_inputs, catalogs, db_files);
      doc["comparison_to_baseline"] = audit::compare_reports(baseline, report);
    }
    write_json((fs::path(config.output_dir) / "audit.json").string(), doc);
    out << report.render_table();
    return report.failures.empty() ? 0 : 1;
  });
}

}  // namespace tasql::pipeline
