#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "tasql/dataset.hpp"
#include "tasql/errors.hpp"
#include "tasql/llm_gateway.hpp"
#include "tasql/pipeline.hpp"
#include "tasql/resources.hpp"

namespace {

using tasql::pipeline::RunConfig;

struct CliOptions {
  RunConfig config;
  std::string source = "bird";
  std::string knowledge = "with_knowledge";
  std::string mode = "replay";
  std::string resources_dir;
};

void add_common_flags(CLI::App* cmd, CliOptions& options) {
  cmd->add_option("--dataset", options.config.dataset_path, "benchmark JSON file");
  cmd->add_option("--databases", options.config.databases_root, "directory of SQLite databases");
  cmd->add_option("--source", options.source, "bird or spider")->capture_default_str();
  cmd->add_option("--knowledge", options.knowledge, "with_knowledge or without_knowledge")
      ->capture_default_str();
  cmd->add_option("--model", options.config.model_id, "model identifier")->capture_default_str();
  cmd->add_option("--mode", options.mode, "live, record, or replay")->capture_default_str();
  cmd->add_option("--cache", options.config.cache_path, "prompt/response cache (JSONL)");
  cmd->add_option("--backend-url", options.config.backend_url,
                  "chat-completions endpoint for live/record mode");
  cmd->add_option("--output", options.config.output_dir, "output directory")->required();
  cmd->add_option("--concurrency", options.config.concurrency, "worker threads")
      ->capture_default_str();
  cmd->add_option("--timeout", options.config.timeout_seconds, "per-query timeout in seconds")
      ->capture_default_str();
  cmd->add_flag("--use-succinct", options.config.use_succinct,
                "generate succinct column descriptions for the schema dictionary");
  cmd->add_option("--resources", options.resources_dir, "override the resource directory");
}

int finish_config(CliOptions& options) {
  try {
    options.config.source = tasql::data::source_from_string(options.source);
    options.config.knowledge_mode = tasql::data::knowledge_mode_from_string(options.knowledge);
    options.config.gateway_mode = tasql::llm::gateway_mode_from_string(options.mode);
  } catch (const tasql::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  if (!options.resources_dir.empty()) {
    tasql::resources::set_root(options.resources_dir);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"two-stage text-to-SQL pipeline: schema linking, symbolic synthesis, "
               "evaluation, and hallucination auditing"};
  app.require_subcommand(1);

  CliOptions link_options;
  CLI::App* link = app.add_subcommand("link", "run schema linking and score it against gold");
  add_common_flags(link, link_options);

  CliOptions run_options;
  CLI::App* run = app.add_subcommand("run", "run the full two-stage pipeline");
  add_common_flags(run, run_options);

  CliOptions eval_options;
  CLI::App* eval = app.add_subcommand("eval", "score predictions.jsonl by execution accuracy");
  add_common_flags(eval, eval_options);

  CliOptions audit_options;
  std::string baseline;
  CLI::App* audit = app.add_subcommand("audit", "audit predictions.jsonl for hallucinations");
  add_common_flags(audit, audit_options);
  audit->add_option("--baseline", baseline, "baseline predictions.jsonl for a delta report");

  CLI11_PARSE(app, argc, argv);

  if (link->parsed()) {
    if (int rc = finish_config(link_options)) return rc;
    return tasql::pipeline::cmd_link(link_options.config, std::cout);
  }
  if (run->parsed()) {
    if (int rc = finish_config(run_options)) return rc;
    return tasql::pipeline::cmd_run(run_options.config, std::cout);
  }
  if (eval->parsed()) {
    if (int rc = finish_config(eval_options)) return rc;
    return tasql::pipeline::cmd_eval(eval_options.config, std::cout);
  }
  if (audit->parsed()) {
    if (int rc = finish_config(audit_options)) return rc;
    std::optional<std::string> baseline_path;
    if (!baseline.empty()) baseline_path = baseline;
    return tasql::pipeline::cmd_audit(audit_options.config, baseline_path, std::cout);
  }
  return 2;
}
