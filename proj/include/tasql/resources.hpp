#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace tasql::resources {

/// Resolution order: explicit set_root(), TASQL_RESOURCES env var, the
/// resource directory baked in at build time.
std::filesystem::path root();
void set_root(const std::filesystem::path& path);

/// Reads a file relative to root(). Throws IoError when missing.
std::string load_text(std::string_view relative_path);

/// Substitutes {name} placeholders. A placeholder whose value is empty drops
/// every line that mentions it, so optional sections disappear cleanly.
std::string render_template(const std::string& template_text,
                            const std::vector<std::pair<std::string, std::string>>& values);

}  // namespace tasql::resources
