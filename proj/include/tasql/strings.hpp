#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace tasql {

std::string ascii_lower(std::string_view text);
std::string ascii_upper(std::string_view text);
bool iequals(std::string_view a, std::string_view b);
std::string trim(std::string_view text);
std::vector<std::string> split_lines(std::string_view text);
std::string join(const std::vector<std::string>& parts, std::string_view separator);

/// Case-insensitive ordering for identifier sets/maps.
struct CiLess {
  bool operator()(const std::string& a, const std::string& b) const {
    return ascii_lower(a) < ascii_lower(b);
  }
};

/// FNV-1a over the canonical byte serialization; hex-encoded. Cache lookups
/// re-verify the stored prompt bytes, so the hash only has to disambiguate.
std::string fnv1a64_hex(std::string_view bytes);

}  // namespace tasql
