#include "tasql/resources.hpp"

#include <cstdlib>
#include <fstream>
#include <mutex>
#include <sstream>

#include "tasql/errors.hpp"
#include "tasql/strings.hpp"

#ifndef TASQL_DEFAULT_RESOURCE_DIR
#define TASQL_DEFAULT_RESOURCE_DIR ""
#endif

namespace tasql::resources {

namespace {
std::mutex g_mutex;
std::filesystem::path g_root;
}  // namespace

std::filesystem::path root() {
  std::lock_guard<std::mutex> lock(g_mutex);
  if (!g_root.empty()) return g_root;
  if (const char* env = std::getenv("TASQL_RESOURCES"); env && *env) {
    return std::filesystem::path(env);
  }
  return std::filesystem::path(TASQL_DEFAULT_RESOURCE_DIR);
}

void set_root(const std::filesystem::path& path) {
  std::lock_guard<std::mutex> lock(g_mutex);
  g_root = path;
}

std::string load_text(std::string_view relative_path) {
  const auto path = root() / relative_path;
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot read resource file " + path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::string render_template(const std::string& template_text,
                            const std::vector<std::pair<std::string, std::string>>& values) {
  std::vector<std::string> out_lines;
  for (const auto& line : split_lines(template_text)) {
    std::string rendered = line;
    bool drop = false;
    for (const auto& [name, value] : values) {
      const std::string placeholder = "{" + name + "}";
      auto pos = rendered.find(placeholder);
      if (pos == std::string::npos) continue;
      if (value.empty()) {
        drop = true;
        break;
      }
      while (pos != std::string::npos) {
        rendered.replace(pos, placeholder.size(), value);
        pos = rendered.find(placeholder, pos + value.size());
      }
    }
    if (!drop) out_lines.push_back(rendered);
  }
  return join(out_lines, "\n");
}

}  // namespace tasql::resources
