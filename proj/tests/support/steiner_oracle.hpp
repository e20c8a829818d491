#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tasql/join_infer.hpp"
#include "tasql/schema_catalog.hpp"

namespace testsupport {

// Brute-force reference for join inference: enumerates every superset of the
// required tables, keeps the connected ones, and picks the smallest by
// (size, sorted lowered name sequence). nullopt when nothing connects.
std::optional<std::vector<std::string>> steiner_best_set(
    const tasql::JoinGraph& graph, const std::vector<std::string>& required);

// Validates an inferred path against the documented policy: table set equals
// steiner_best_set, anchor is the smallest required table, each expansion
// attaches the smallest eligible table through its smallest eligible link.
// Returns an empty string on success, else a description of the violation.
std::string check_join_policy(const tasql::JoinPath& path, const tasql::JoinGraph& graph,
                              const std::vector<std::string>& required);

}  // namespace testsupport
