#include "tasql/llm_gateway.hpp"

#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>
#include <unordered_map>

#include "json.hpp"

#include "tasql/errors.hpp"
#include "tasql/strings.hpp"

namespace tasql::llm {

std::string assemble_prompt(const PromptBundle& bundle) {
  std::string out = bundle.instruction;
  for (const auto& demo : bundle.demonstrations) {
    out += "\n\n";
    out += demo.input;
    out += "\n";
    out += demo.output;
  }
  if (!bundle.input.empty()) {
    out += "\n\n";
    out += bundle.input;
  }
  return out;
}

PromptStrategy strategy_for(Stage stage) {
  switch (stage) {
    case Stage::schema_linking:
      return {stage, "dummy_sql"};
    case Stage::logical_synthesis:
      return {stage, "dataframe_analysis"};
  }
  throw ConfigError("unknown stage");
}

GatewayMode gateway_mode_from_string(const std::string& text) {
  if (text == "live") return GatewayMode::live;
  if (text == "record") return GatewayMode::record;
  if (text == "replay") return GatewayMode::replay;
  throw ConfigError("unknown gateway mode '" + text + "' (expected live|record|replay)");
}

const char* to_string(GatewayMode mode) {
  switch (mode) {
    case GatewayMode::live: return "live";
    case GatewayMode::record: return "record";
    case GatewayMode::replay: return "replay";
  }
  return "?";
}

std::string cache_key(const std::string& prompt, const DecodingConfig& config,
                      const std::string& model_id) {
  std::ostringstream canonical;
  canonical << model_id << '\x1f' << config.temperature << '\x1f' << config.top_p << '\x1f'
            << config.max_tokens << '\x1f' << prompt;
  return fnv1a64_hex(canonical.str());
}

namespace {

struct CacheRecord {
  std::string prompt;
  std::string response;
};

struct InFlight {
  std::mutex mutex;
  std::condition_variable cv;
  bool done = false;
  bool failed = false;
  std::string response;
  std::string error;
};

}  // namespace

struct Gateway::Impl {
  GatewayOptions options;
  std::unique_ptr<CompletionBackend> backend;

  std::mutex cache_mutex;  // guards store and the append stream
  std::unordered_map<std::string, CacheRecord> store;
  std::ofstream append_stream;

  std::mutex inflight_mutex;
  std::unordered_map<std::string, std::shared_ptr<InFlight>> inflight;

  void load_cache() {
    std::ifstream in(options.cache_path, std::ios::binary);
    if (!in) {
      if (options.mode == GatewayMode::replay) {
        throw ConfigError("replay cache not readable: " + options.cache_path);
      }
      return;
    }
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (trim(line).empty()) continue;
      nlohmann::json record;
      try {
        record = nlohmann::json::parse(line);
      } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("cache " + options.cache_path + " line " + std::to_string(line_no) +
                             ": " + e.what(),
                         static_cast<std::size_t>(e.byte));
      }
      store[record.at("key").get<std::string>()] = {record.value("prompt", ""),
                                                    record.at("response").get<std::string>()};
    }
  }

  void append_record(const std::string& key, const std::string& prompt,
                     const std::string& response) {
    nlohmann::ordered_json record;
    record["key"] = key;
    record["model"] = options.model_id;
    record["config"] = {{"temperature", options.decoding.temperature},
                        {"top_p", options.decoding.top_p},
                        {"max_tokens", options.decoding.max_tokens}};
    record["prompt"] = prompt;
    record["response"] = response;
    record["timestamp"] = static_cast<long long>(
        std::chrono::duration_cast<std::chrono::seconds>(
            std::chrono::system_clock::now().time_since_epoch())
            .count());
    if (!append_stream.is_open()) {
      append_stream.open(options.cache_path, std::ios::app | std::ios::binary);
      if (!append_stream) throw IoError("cannot append to cache " + options.cache_path);
    }
    append_stream << record.dump() << "\n";
    append_stream.flush();
  }
};

Gateway::Gateway(GatewayOptions options, std::unique_ptr<CompletionBackend> backend)
    : impl_(std::make_unique<Impl>()) {
  impl_->options = std::move(options);
  impl_->backend = std::move(backend);

  const auto mode = impl_->options.mode;
  if (mode != GatewayMode::live && impl_->options.cache_path.empty()) {
    throw ConfigError("cache_path is required in record/replay mode");
  }
  if (!impl_->options.cache_path.empty()) impl_->load_cache();
  if (mode != GatewayMode::replay && !impl_->backend) {
    if (impl_->options.backend_url.empty()) {
      throw ConfigError("backend_url is required in live/record mode");
    }
    impl_->backend = make_http_backend(impl_->options.backend_url);
  }
}

Gateway::~Gateway() = default;

const GatewayOptions& Gateway::options() const { return impl_->options; }

std::string Gateway::complete(const std::string& prompt) {
  return complete(prompt, impl_->options.decoding);
}

std::string Gateway::complete(const std::string& prompt, const DecodingConfig& config) {
  const std::string key = cache_key(prompt, config, impl_->options.model_id);

  {
    std::lock_guard<std::mutex> lock(impl_->cache_mutex);
    auto it = impl_->store.find(key);
    if (it != impl_->store.end() && (it->second.prompt.empty() || it->second.prompt == prompt)) {
      return it->second.response;
    }
  }
  if (impl_->options.mode == GatewayMode::replay) {
    throw ReplayMissError(key);
  }

  // Coalesce concurrent identical prompts onto one backend call.
  std::shared_ptr<InFlight> flight;
  bool leader = false;
  {
    std::lock_guard<std::mutex> lock(impl_->inflight_mutex);
    auto it = impl_->inflight.find(key);
    if (it == impl_->inflight.end()) {
      flight = std::make_shared<InFlight>();
      impl_->inflight[key] = flight;
      leader = true;
    } else {
      flight = it->second;
    }
  }

  if (!leader) {
    std::unique_lock<std::mutex> lock(flight->mutex);
    flight->cv.wait(lock, [&] { return flight->done; });
    if (flight->failed) throw BackendError(flight->error);
    return flight->response;
  }

  std::string response;
  std::string error;
  bool failed = false;
  try {
    response = impl_->backend->complete(prompt, config, impl_->options.model_id);
    if (!impl_->options.cache_path.empty()) {
      std::lock_guard<std::mutex> lock(impl_->cache_mutex);
      impl_->store[key] = {prompt, response};
      impl_->append_record(key, prompt, response);
    }
  } catch (const std::exception& e) {
    failed = true;
    error = e.what();
  }

  {
    std::lock_guard<std::mutex> lock(impl_->inflight_mutex);
    impl_->inflight.erase(key);
  }
  {
    std::lock_guard<std::mutex> lock(flight->mutex);
    flight->done = true;
    flight->failed = failed;
    flight->response = response;
    flight->error = error;
  }
  flight->cv.notify_all();

  if (failed) throw BackendError(error);
  return response;
}

}  // namespace tasql::llm
