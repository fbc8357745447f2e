#include "lumion/mzi_mesh.h"

#include <algorithm>
#include <functional>
#include <limits>
#include <queue>
#include <unordered_set>

#include "lumion/error.h"

namespace lumion {

MziMesh::MziMesh(int rows, int cols) : rows_(rows), cols_(cols) {
  if (rows < 1 || cols < 1) throw DomainError("mesh dimensions must be at least 1");
  waveguides_.reserve(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols) * 2);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (c + 1 < cols) waveguides_.push_back({NodeId(r, c), NodeId(r, c + 1)});
      if (r + 1 < rows) waveguides_.push_back({NodeId(r, c), NodeId(r + 1, c)});
    }
  }
}

bool MziMesh::IsPort(int node) const {
  if (node < 0 || static_cast<std::size_t>(node) >= node_count()) return false;
  const int r = RowOf(node);
  const int c = ColOf(node);
  return r == 0 || c == 0 || r == rows_ - 1 || c == cols_ - 1;
}

std::vector<int> MziMesh::ports() const {
  std::vector<int> out;
  for (int n = 0; n < static_cast<int>(node_count()); ++n)
    if (IsPort(n)) out.push_back(n);
  return out;
}

MziMesh BuildMesh(int rows, int cols) { return MziMesh(rows, cols); }

MergedMesh::MergedMesh(const MziMesh& mesh) : mesh_(mesh) {
  const int width = (mesh.cols() + 1) / 2;
  supernode_count_ = static_cast<std::size_t>(mesh.rows()) * static_cast<std::size_t>(width);
  merge_map_.resize(mesh.node_count());
  for (int n = 0; n < static_cast<int>(mesh.node_count()); ++n) {
    merge_map_[static_cast<std::size_t>(n)] = mesh.RowOf(n) * width + mesh.ColOf(n) / 2;
  }
  adjacency_.assign(supernode_count_, {});
  const auto& guides = mesh.waveguides();
  for (std::size_t w = 0; w < guides.size(); ++w) {
    int a = SupernodeOf(guides[w].a);
    int b = SupernodeOf(guides[w].b);
    if (a == b) {
      internal_.push_back(static_cast<int>(w));
      continue;
    }
    if (a > b) std::swap(a, b);
    const int id = static_cast<int>(edges_.size());
    edges_.push_back({a, b, static_cast<int>(w)});
    adjacency_[static_cast<std::size_t>(a)].push_back({b, id});
    adjacency_[static_cast<std::size_t>(b)].push_back({a, id});
  }
  for (auto& arcs : adjacency_) {
    std::sort(arcs.begin(), arcs.end(), [](const Arc& x, const Arc& y) {
      return std::pair(x.neighbor, x.edge) < std::pair(y.neighbor, y.edge);
    });
  }
}

MergedMesh MergeAdjacent(const MziMesh& mesh) { return MergedMesh(mesh); }

MeshRouter::MeshRouter(MergedMesh mesh)
    : mesh_(std::move(mesh)),
      occupied_(mesh_.edge_count(), 0),
      dist_(mesh_.supernode_count()),
      parent_edge_(mesh_.supernode_count()) {}

std::vector<int> MeshRouter::occupied_edges() const {
  std::vector<int> out;
  for (std::size_t e = 0; e < occupied_.size(); ++e)
    if (occupied_[e]) out.push_back(static_cast<int>(e));
  return out;
}

void MeshRouter::CheckRequest(const MeshRequest& request) const {
  const MziMesh& m = mesh_.mesh();
  if (!m.IsPort(request.src_port) || !m.IsPort(request.dst_port)) {
    throw DomainError("request endpoints must be perimeter ports");
  }
  if (request.src_port == request.dst_port) throw DomainError("request ports must differ");
}

std::optional<MeshRoute> MeshRouter::FindRoute(const MeshRequest& request) const {
  CheckRequest(request);
  const int src = mesh_.SupernodeOf(request.src_port);
  const int dst = mesh_.SupernodeOf(request.dst_port);
  MeshRoute route;
  route.request = request;
  if (src == dst) {
    route.supernodes = {src};
    return route;
  }
  constexpr int kUnreached = std::numeric_limits<int>::max();
  std::fill(dist_.begin(), dist_.end(), kUnreached);
  std::fill(parent_edge_.begin(), parent_edge_.end(), -1);
  using Entry = std::pair<int, int>;  // (distance, supernode)
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
  dist_[static_cast<std::size_t>(src)] = 0;
  heap.push({0, src});
  while (!heap.empty()) {
    const auto [d, u] = heap.top();
    heap.pop();
    if (d != dist_[static_cast<std::size_t>(u)]) continue;
    if (u == dst) break;
    for (const MergedMesh::Arc& arc : mesh_.adjacency(u)) {
      if (occupied_[static_cast<std::size_t>(arc.edge)]) continue;
      const int nd = d + 1;
      if (nd < dist_[static_cast<std::size_t>(arc.neighbor)]) {
        dist_[static_cast<std::size_t>(arc.neighbor)] = nd;
        parent_edge_[static_cast<std::size_t>(arc.neighbor)] = arc.edge;
        heap.push({nd, arc.neighbor});
      }
    }
  }
  if (dist_[static_cast<std::size_t>(dst)] == kUnreached) return std::nullopt;
  for (int v = dst; v != src;) {
    const int e = parent_edge_[static_cast<std::size_t>(v)];
    route.edges.push_back(e);
    route.supernodes.push_back(v);
    const MergedMesh::Edge& edge = mesh_.edges()[static_cast<std::size_t>(e)];
    v = edge.a == v ? edge.b : edge.a;
  }
  route.supernodes.push_back(src);
  std::reverse(route.edges.begin(), route.edges.end());
  std::reverse(route.supernodes.begin(), route.supernodes.end());
  return route;
}

MeshRoute MeshRouter::Commit(const MeshRequest& request) {
  std::optional<MeshRoute> route = FindRoute(request);
  if (!route) {
    throw RouteUnavailable(0, "no edge-disjoint route from port " +
                                  std::to_string(request.src_port) + " to port " +
                                  std::to_string(request.dst_port));
  }
  route->id = static_cast<int>(committed_.size());
  for (int e : route->edges) occupied_[static_cast<std::size_t>(e)] = 1;
  occupied_count_ += route->edges.size();
  committed_.push_back(route->edges);
  live_.push_back(1);
  return *route;
}

std::vector<MeshRoute> MeshRouter::RouteAll(std::span<const MeshRequest> requests) {
  std::vector<MeshRoute> out;
  out.reserve(requests.size());
  for (std::size_t i = 0; i < requests.size(); ++i) {
    try {
      out.push_back(Commit(requests[i]));
    } catch (const RouteUnavailable& e) {
      throw RouteUnavailable(i, "request " + std::to_string(i) + ": " + e.what());
    }
  }
  return out;
}

bool MeshRouter::IsCommitted(int route_id) const {
  return route_id >= 0 && static_cast<std::size_t>(route_id) < live_.size() &&
         live_[static_cast<std::size_t>(route_id)];
}

void MeshRouter::Release(const MeshRoute& route) {
  if (!IsCommitted(route.id) || committed_[static_cast<std::size_t>(route.id)] != route.edges) {
    throw DomainError("route " + std::to_string(route.id) + " is not committed");
  }
  for (int e : route.edges) occupied_[static_cast<std::size_t>(e)] = 0;
  occupied_count_ -= route.edges.size();
  live_[static_cast<std::size_t>(route.id)] = 0;
  committed_[static_cast<std::size_t>(route.id)].clear();
}

std::vector<MeshRoute> RouteDisjoint(MeshRouter& router, std::span<const MeshRequest> requests) {
  return router.RouteAll(requests);
}

bool RoutesEdgeDisjoint(std::span<const MeshRoute> routes) {
  std::unordered_set<int> seen;
  for (const MeshRoute& r : routes)
    for (int e : r.edges)
      if (!seen.insert(e).second) return false;
  return true;
}

}  // namespace lumion
