#pragma once

#include <string>
#include <vector>

#include "tasql/schema_catalog.hpp"

namespace tasql {

// One expansion of the join tree: `table` is attached via `link` (one of the
// graph's FK links; `table` matches the link's from or to side).
struct JoinEdge {
  std::string table;
  FkLink link;
};

struct JoinPath {
  std::string anchor;
  std::vector<JoinEdge> edges;

  // anchor followed by edge tables, join order
  std::vector<std::string> tables() const;
};

// Minimal connected subtree of the FK graph covering required_tables
// (exact Steiner search; graphs here are small). Ties break toward the
// lexicographically smallest sorted table sequence; the anchor is the
// lexicographically smallest required table and edges are added smallest
// table first. Throws JoinInferenceError listing the disconnected components
// when no connecting subtree exists.
JoinPath infer_join_path(const std::vector<std::string>& required_tables, const JoinGraph& graph);

}  // namespace tasql
