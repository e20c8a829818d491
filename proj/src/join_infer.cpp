#include "tasql/join_infer.hpp"

#include <algorithm>
#include <map>
#include <queue>
#include <set>

#include "tasql/errors.hpp"
#include "tasql/strings.hpp"

namespace tasql {

namespace {

// working copy with lowered names for ordering and set logic
struct Workspace {
  std::vector<std::string> tables;        // graph casing
  std::vector<std::string> lowered;       // parallel
  std::map<std::string, int> index;       // lowered -> index
  std::vector<std::vector<std::pair<int, int>>> adjacency;  // (neighbor, link index)
};

Workspace build_workspace(const JoinGraph& graph) {
  Workspace ws;
  ws.tables = graph.tables;
  for (int i = 0; i < static_cast<int>(ws.tables.size()); ++i) {
    ws.lowered.push_back(ascii_lower(ws.tables[i]));
    ws.index[ws.lowered.back()] = i;
  }
  ws.adjacency.resize(ws.tables.size());
  for (int l = 0; l < static_cast<int>(graph.links.size()); ++l) {
    const FkLink& link = graph.links[l];
    auto from = ws.index.find(ascii_lower(link.from.table));
    auto to = ws.index.find(ascii_lower(link.to.table));
    if (from == ws.index.end() || to == ws.index.end()) continue;
    ws.adjacency[from->second].emplace_back(to->second, l);
    ws.adjacency[to->second].emplace_back(from->second, l);
  }
  return ws;
}

bool connected(const Workspace& ws, const std::vector<int>& chosen) {
  if (chosen.empty()) return true;
  std::set<int> allowed(chosen.begin(), chosen.end());
  std::set<int> seen;
  std::queue<int> frontier;
  frontier.push(chosen.front());
  seen.insert(chosen.front());
  while (!frontier.empty()) {
    int node = frontier.front();
    frontier.pop();
    for (const auto& [neighbor, link] : ws.adjacency[node]) {
      (void)link;
      if (allowed.count(neighbor) && !seen.count(neighbor)) {
        seen.insert(neighbor);
        frontier.push(neighbor);
      }
    }
  }
  return seen.size() == allowed.size();
}

std::vector<std::string> sequence_of(const Workspace& ws, const std::vector<int>& chosen) {
  std::vector<std::string> seq;
  for (int i : chosen) seq.push_back(ws.lowered[i]);
  std::sort(seq.begin(), seq.end());
  return seq;
}

}  // namespace

std::vector<std::string> JoinPath::tables() const {
  std::vector<std::string> out{anchor};
  for (const JoinEdge& edge : edges) out.push_back(edge.table);
  return out;
}

JoinPath infer_join_path(const std::vector<std::string>& required_tables, const JoinGraph& graph) {
  if (required_tables.empty()) {
    throw PreconditionError("infer_join_path requires at least one table");
  }
  Workspace ws = build_workspace(graph);

  std::set<int> required_set;
  for (const std::string& name : required_tables) {
    auto it = ws.index.find(ascii_lower(name));
    if (it == ws.index.end()) {
      throw PreconditionError("table '" + name + "' is not in the join graph");
    }
    required_set.insert(it->second);
  }
  std::vector<int> required(required_set.begin(), required_set.end());

  std::vector<int> extras;
  for (int i = 0; i < static_cast<int>(ws.tables.size()); ++i) {
    if (!required_set.count(i)) extras.push_back(i);
  }

  // exact search: smallest superset of the required tables that induces a
  // connected subgraph, sizes tried in increasing order
  std::vector<int> best;
  for (std::size_t extra_count = 0; extra_count <= extras.size() && best.empty(); ++extra_count) {
    std::vector<std::string> best_seq;
    std::vector<bool> mask(extras.size(), false);
    std::fill(mask.begin(), mask.begin() + static_cast<long>(extra_count), true);
    // iterate combinations via prev_permutation over the selection mask
    do {
      std::vector<int> chosen = required;
      for (std::size_t i = 0; i < extras.size(); ++i) {
        if (mask[i]) chosen.push_back(extras[i]);
      }
      if (!connected(ws, chosen)) continue;
      std::vector<std::string> seq = sequence_of(ws, chosen);
      if (best.empty() || seq < best_seq) {
        best = chosen;
        best_seq = seq;
      }
    } while (std::prev_permutation(mask.begin(), mask.end()));
  }

  if (best.empty()) {
    // report the connected components the required tables fall into
    std::map<int, int> component;
    int next_component = 0;
    for (int i = 0; i < static_cast<int>(ws.tables.size()); ++i) {
      if (component.count(i)) continue;
      std::queue<int> frontier;
      frontier.push(i);
      component[i] = next_component;
      while (!frontier.empty()) {
        int node = frontier.front();
        frontier.pop();
        for (const auto& [neighbor, link] : ws.adjacency[node]) {
          (void)link;
          if (!component.count(neighbor)) {
            component[neighbor] = next_component;
            frontier.push(neighbor);
          }
        }
      }
      ++next_component;
    }
    std::map<int, std::vector<std::string>> grouped;
    for (int node : required) grouped[component[node]].push_back(ws.tables[node]);
    std::vector<std::vector<std::string>> components;
    std::vector<std::string> described;
    for (auto& [id, names] : grouped) {
      (void)id;
      std::sort(names.begin(), names.end(), CiLess{});
      described.push_back("{" + join(names, ", ") + "}");
      components.push_back(names);
    }
    throw JoinInferenceError(
        "required tables are not connected by foreign keys: " + join(described, " vs "),
        components);
  }

  // anchor: lexicographically smallest required table
  int anchor = *std::min_element(required.begin(), required.end(), [&](int a, int b) {
    return ws.lowered[a] < ws.lowered[b];
  });

  JoinPath path;
  path.anchor = ws.tables[anchor];
  std::set<int> joined{anchor};
  std::set<int> remaining(best.begin(), best.end());
  remaining.erase(anchor);
  while (!remaining.empty()) {
    int next = -1;
    int via_link = -1;
    for (int candidate : remaining) {
      int link_found = -1;
      for (const auto& [neighbor, link] : ws.adjacency[candidate]) {
        if (!joined.count(neighbor)) continue;
        if (link_found == -1 || link < link_found) link_found = link;
      }
      if (link_found == -1) continue;
      if (next == -1 || ws.lowered[candidate] < ws.lowered[next]) {
        next = candidate;
        via_link = link_found;
      }
    }
    if (next == -1) break;  // unreachable: best is connected
    path.edges.push_back(JoinEdge{ws.tables[next], graph.links[via_link]});
    joined.insert(next);
    remaining.erase(next);
  }
  return path;
}

}  // namespace tasql
