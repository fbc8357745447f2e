#include <algorithm>
#include <deque>
#include <functional>
#include <limits>
#include <set>

#include "lumion/error.h"
#include "lumion/rack_routing.h"

namespace lumion {
namespace {

bool ShorterThenLex(const NodePath& a, const NodePath& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  return a < b;
}

void CheckNode(const FiberGraph& graph, int node) {
  if (node < 0 || static_cast<std::size_t>(node) >= graph.node_count()) {
    throw DomainError("node index out of range");
  }
}

// Lexicographically smallest shortest path avoiding the blocked nodes and
// edges, or nullopt.
std::optional<NodePath> LexShortestPath(const FiberGraph& graph, int src, int dst,
                                        const std::vector<char>& blocked_node,
                                        const std::vector<char>& blocked_edge) {
  constexpr int kUnreached = std::numeric_limits<int>::max();
  std::vector<int> dist(graph.node_count(), kUnreached);
  std::deque<int> queue;
  dist[static_cast<std::size_t>(dst)] = 0;
  queue.push_back(dst);
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    for (const FiberGraph::Arc& arc : graph.adjacency(u)) {
      const auto w = static_cast<std::size_t>(arc.neighbor);
      if (blocked_edge[static_cast<std::size_t>(arc.edge)] || blocked_node[w]) continue;
      if (dist[w] != kUnreached) continue;
      dist[w] = dist[static_cast<std::size_t>(u)] + 1;
      queue.push_back(arc.neighbor);
    }
  }
  if (dist[static_cast<std::size_t>(src)] == kUnreached) return std::nullopt;
  NodePath path = {src};
  int u = src;
  while (u != dst) {
    // Adjacency is sorted by neighbour index: the first admissible step is
    // the lexicographically smallest.
    for (const FiberGraph::Arc& arc : graph.adjacency(u)) {
      const auto w = static_cast<std::size_t>(arc.neighbor);
      if (blocked_edge[static_cast<std::size_t>(arc.edge)] || blocked_node[w]) continue;
      if (dist[w] == dist[static_cast<std::size_t>(u)] - 1) {
        u = arc.neighbor;
        break;
      }
    }
    path.push_back(u);
  }
  return path;
}

}  // namespace

std::vector<NodePath> SimplePaths(const FiberGraph& graph, int src, int dst, int max_hops) {
  CheckNode(graph, src);
  CheckNode(graph, dst);
  std::vector<NodePath> out;
  if (src == dst) {
    out.push_back({src});
    return out;
  }
  std::vector<char> on_path(graph.node_count(), 0);
  NodePath path = {src};
  on_path[static_cast<std::size_t>(src)] = 1;
  std::function<void(int)> extend = [&](int u) {
    if (u == dst) {
      out.push_back(path);
      return;
    }
    if (static_cast<int>(path.size()) - 1 >= max_hops) return;
    for (const FiberGraph::Arc& arc : graph.adjacency(u)) {
      const auto w = static_cast<std::size_t>(arc.neighbor);
      if (on_path[w]) continue;
      on_path[w] = 1;
      path.push_back(arc.neighbor);
      extend(arc.neighbor);
      path.pop_back();
      on_path[w] = 0;
    }
  };
  extend(src);
  std::sort(out.begin(), out.end(), ShorterThenLex);
  return out;
}

std::vector<NodePath> KShortestPaths(const FiberGraph& graph, int src, int dst, int k) {
  CheckNode(graph, src);
  CheckNode(graph, dst);
  if (k < 1) throw DomainError("k must be at least 1");
  std::vector<NodePath> found;
  if (src == dst) {
    found.push_back({src});
    return found;
  }
  std::vector<char> blocked_node(graph.node_count(), 0);
  std::vector<char> blocked_edge(graph.edge_count(), 0);
  auto first = LexShortestPath(graph, src, dst, blocked_node, blocked_edge);
  if (!first) return found;
  found.push_back(*first);

  std::set<NodePath, decltype(&ShorterThenLex)> candidates(&ShorterThenLex);
  while (static_cast<int>(found.size()) < k) {
    const NodePath& last = found.back();
    for (std::size_t i = 0; i + 1 < last.size(); ++i) {
      const int spur = last[i];
      const NodePath root(last.begin(), last.begin() + static_cast<std::ptrdiff_t>(i) + 1);
      std::fill(blocked_node.begin(), blocked_node.end(), 0);
      std::fill(blocked_edge.begin(), blocked_edge.end(), 0);
      for (const NodePath& p : found) {
        if (p.size() > i + 1 && std::equal(root.begin(), root.end(), p.begin())) {
          blocked_edge[static_cast<std::size_t>(*graph.EdgeIndex(p[i], p[i + 1]))] = 1;
        }
      }
      for (std::size_t j = 0; j < i; ++j) blocked_node[static_cast<std::size_t>(root[j])] = 1;
      auto spur_path = LexShortestPath(graph, spur, dst, blocked_node, blocked_edge);
      if (!spur_path) continue;
      NodePath total = root;
      total.insert(total.end(), spur_path->begin() + 1, spur_path->end());
      if (std::find(found.begin(), found.end(), total) == found.end()) candidates.insert(total);
    }
    if (candidates.empty()) break;
    found.push_back(*candidates.begin());
    candidates.erase(candidates.begin());
  }
  return found;
}

}  // namespace lumion
