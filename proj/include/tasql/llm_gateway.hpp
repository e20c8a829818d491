#pragma once

#include <memory>
#include <string>
#include <vector>

namespace tasql::llm {

struct DecodingConfig {
  double temperature = 0.0;
  double top_p = 1.0;
  int max_tokens = 800;
};

struct Demonstration {
  std::string input;
  std::string output;
};

struct PromptBundle {
  std::string instruction;
  std::vector<Demonstration> demonstrations;
  std::string input;
};

/// Deterministic concatenation: instruction, demonstrations in order, input.
/// Zero demonstrations degenerates to instruction + input.
std::string assemble_prompt(const PromptBundle& bundle);

enum class Stage { schema_linking, logical_synthesis };

/// Each pipeline stage is rephrased as one fixed, already-familiar task:
/// schema linking runs as SQL generation, logical synthesis as
/// dataframe-style data analysis.
struct PromptStrategy {
  Stage stage;
  std::string aligned_task_template;
};

PromptStrategy strategy_for(Stage stage);

enum class GatewayMode { live, record, replay };

GatewayMode gateway_mode_from_string(const std::string& text);
const char* to_string(GatewayMode mode);

/// Transport abstraction; the replay path never touches it.
class CompletionBackend {
public:
  virtual ~CompletionBackend() = default;
  virtual std::string complete(const std::string& prompt, const DecodingConfig& config,
                               const std::string& model_id) = 0;
};

/// Chat-completions style HTTP backend. Expects `backend_url` like
/// http://host:port/v1/chat/completions; sends the assembled prompt as a
/// single user message. Retries 3 times with exponential backoff, then
/// throws BackendError. API key comes from the TASQL_API_KEY env var.
std::unique_ptr<CompletionBackend> make_http_backend(const std::string& backend_url);

/// Content hash over (model id, decoding config, prompt bytes).
std::string cache_key(const std::string& prompt, const DecodingConfig& config,
                      const std::string& model_id);

struct GatewayOptions {
  GatewayMode mode = GatewayMode::replay;
  std::string model_id = "gpt-4";
  std::string cache_path;    // required for record/replay
  std::string backend_url;   // required for live/record when no backend injected
  DecodingConfig decoding;
};

/// Completion front door with an append-only JSONL record/replay cache.
/// Concurrent callers are safe; duplicate in-flight prompts are coalesced so
/// the backend sees each prompt once.
class Gateway {
public:
  explicit Gateway(GatewayOptions options, std::unique_ptr<CompletionBackend> backend = nullptr);
  ~Gateway();

  Gateway(const Gateway&) = delete;
  Gateway& operator=(const Gateway&) = delete;

  std::string complete(const std::string& prompt);
  std::string complete(const std::string& prompt, const DecodingConfig& config);

  const GatewayOptions& options() const;

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace tasql::llm
