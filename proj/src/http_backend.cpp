#include <chrono>
#include <cstdlib>
#include <thread>

#include "httplib.h"
#include "json.hpp"

#include "tasql/errors.hpp"
#include "tasql/llm_gateway.hpp"

namespace tasql::llm {

namespace {

struct UrlParts {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

UrlParts split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw ConfigError("backend_url must include a scheme: " + url);
  }
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

class HttpBackend : public CompletionBackend {
public:
  explicit HttpBackend(std::string backend_url) : url_(split_url(backend_url)) {
    if (const char* key = std::getenv("TASQL_API_KEY"); key && *key) api_key_ = key;
  }

  std::string complete(const std::string& prompt, const DecodingConfig& config,
                       const std::string& model_id) override {
    nlohmann::json body;
    body["model"] = model_id;
    body["messages"] = nlohmann::json::array({{{"role", "user"}, {"content", prompt}}});
    body["temperature"] = config.temperature;
    body["top_p"] = config.top_p;
    body["max_tokens"] = config.max_tokens;
    const std::string payload = body.dump();

    std::string last_error;
    for (int attempt = 0; attempt < 3; ++attempt) {
      if (attempt > 0) {
        std::this_thread::sleep_for(std::chrono::milliseconds(200 << attempt));
      }
      httplib::Client client(url_.origin);
      client.set_read_timeout(120, 0);
      httplib::Headers headers;
      if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
      auto result = client.Post(url_.path, headers, payload, "application/json");
      if (!result) {
        last_error = "transport error: " + httplib::to_string(result.error());
        continue;
      }
      if (result->status != 200) {
        last_error = "http status " + std::to_string(result->status) + ": " + result->body;
        continue;
      }
      try {
        auto doc = nlohmann::json::parse(result->body);
        return doc.at("choices").at(0).at("message").at("content").get<std::string>();
      } catch (const std::exception& e) {
        last_error = std::string("malformed completion response: ") + e.what();
      }
    }
    throw BackendError(last_error);
  }

private:
  UrlParts url_;
  std::string api_key_;
};

}  // namespace

std::unique_ptr<CompletionBackend> make_http_backend(const std::string& backend_url) {
  return std::make_unique<HttpBackend>(backend_url);
}

}  // namespace tasql::llm
