#pragma once

#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "tasql/dataset.hpp"
#include "tasql/llm_gateway.hpp"
#include "tasql/schema_catalog.hpp"

namespace tasql::pipeline {

struct RunConfig {
  std::string dataset_path;
  std::string databases_root;
  Source source = Source::bird;
  KnowledgeMode knowledge_mode = KnowledgeMode::with_knowledge;
  std::string model_id = "gpt-4";
  llm::GatewayMode gateway_mode = llm::GatewayMode::replay;
  std::string cache_path;
  std::string backend_url;
  std::string output_dir;
  std::size_t concurrency = 1;
  int timeout_seconds = 30;
  bool use_succinct = false;
};

// databases_root/db_id/db_id.sqlite, with databases_root/db_id.sqlite as a
// fallback for flat layouts.
std::string database_file(const RunConfig& config, const std::string& db_id);

// Validates the config (replay cache must exist, concurrency positive),
// creates output_dir. Throws ConfigError.
void prepare_run(const RunConfig& config);

std::unique_ptr<llm::Gateway> make_gateway(const RunConfig& config);

// Thread-safe db_id -> catalog introspection, one load per database.
class CatalogCache {
 public:
  explicit CatalogCache(const RunConfig& config);
  ~CatalogCache();

  const SchemaCatalog& get(const std::string& db_id);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Exit codes across all commands: 0 success, 1 partial per-example
// failures, 2 configuration or replay errors. cmd_link stays at 0 with
// partial failures and reports 1 only when every example failed.
int cmd_link(const RunConfig& config, std::ostream& out);
int cmd_run(const RunConfig& config, std::ostream& out);
int cmd_eval(const RunConfig& config, std::ostream& out);
int cmd_audit(const RunConfig& config, const std::optional<std::string>& baseline_predictions,
              std::ostream& out);

}  // namespace tasql::pipeline
