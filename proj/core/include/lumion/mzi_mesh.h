#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace lumion {

// Rectangular grid of MZI switches; waveguides join 4-neighbours. Node ids
// are row-major (id = row * cols + col). Perimeter nodes are ports.
class MziMesh {
 public:
  struct Waveguide {
    int a;  // a < b
    int b;
  };

  // Throws DomainError if rows or cols is below 1.
  MziMesh(int rows, int cols);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t node_count() const { return static_cast<std::size_t>(rows_) * static_cast<std::size_t>(cols_); }
  std::size_t edge_count() const { return waveguides_.size(); }
  const std::vector<Waveguide>& waveguides() const { return waveguides_; }

  int NodeId(int row, int col) const { return row * cols_ + col; }
  int RowOf(int node) const { return node / cols_; }
  int ColOf(int node) const { return node % cols_; }
  bool IsPort(int node) const;
  // Perimeter nodes in increasing id order.
  std::vector<int> ports() const;

 private:
  int rows_;
  int cols_;
  std::vector<Waveguide> waveguides_;
};

MziMesh BuildMesh(int rows, int cols);

// The mesh with horizontally adjacent pairs (r, 2c) and (r, 2c + 1) merged
// into one vertex; an odd final column stays unpaired. Every waveguide between
// different supernodes survives as its own edge, so vertical neighbours of
// two merged pairs are joined by two parallel edges.
class MergedMesh {
 public:
  struct Edge {
    int a;  // supernode ids, a < b
    int b;
    int waveguide;  // index into the source mesh's waveguides()
  };
  struct Arc {
    int neighbor;
    int edge;
  };

  explicit MergedMesh(const MziMesh& mesh);

  const MziMesh& mesh() const { return mesh_; }
  std::size_t supernode_count() const { return supernode_count_; }
  std::size_t edge_count() const { return edges_.size(); }
  const std::vector<Edge>& edges() const { return edges_; }
  // Waveguides absorbed inside a supernode.
  const std::vector<int>& internal_waveguides() const { return internal_; }
  int SupernodeOf(int node) const { return merge_map_[static_cast<std::size_t>(node)]; }
  const std::vector<int>& merge_map() const { return merge_map_; }
  // Sorted by (neighbor, edge).
  const std::vector<Arc>& adjacency(int supernode) const {
    return adjacency_[static_cast<std::size_t>(supernode)];
  }

 private:
  MziMesh mesh_;
  std::size_t supernode_count_ = 0;
  std::vector<int> merge_map_;
  std::vector<Edge> edges_;
  std::vector<int> internal_;
  std::vector<std::vector<Arc>> adjacency_;
};

MergedMesh MergeAdjacent(const MziMesh& mesh);

struct MeshRequest {
  int src_port;
  int dst_port;
};

struct MeshRoute {
  int id = -1;
  MeshRequest request{};
  std::vector<int> supernodes;  // src supernode ... dst supernode
  std::vector<int> edges;       // merged-edge ids, one per hop
};

// Edge-disjoint router over a merged mesh. Each route is a shortest path in
// the residual graph (committed edges removed) found with Dijkstra on unit
// weights; ties resolve toward smaller supernode, then smaller edge id.
// One writer at a time; const queries are safe concurrently.
class MeshRouter {
 public:
  explicit MeshRouter(MergedMesh mesh);

  const MergedMesh& mesh() const { return mesh_; }
  bool occupied(int edge) const { return occupied_[static_cast<std::size_t>(edge)] != 0; }
  std::size_t occupied_count() const { return occupied_count_; }
  std::vector<int> occupied_edges() const;

  // Shortest residual path without committing; nullopt when none exists.
  // Throws DomainError for bad ports or src == dst.
  std::optional<MeshRoute> FindRoute(const MeshRequest& request) const;

  // Routes and commits. Throws RouteUnavailable(0) when no path exists.
  MeshRoute Commit(const MeshRequest& request);

  // Routes the batch in order; on failure throws RouteUnavailable(i) with
  // routes 0..i-1 left committed.
  std::vector<MeshRoute> RouteAll(std::span<const MeshRequest> requests);

  // Returns the route's edges to the free pool. Throws DomainError if the
  // route is not currently committed.
  void Release(const MeshRoute& route);

  bool IsCommitted(int route_id) const;

 private:
  void CheckRequest(const MeshRequest& request) const;

  MergedMesh mesh_;
  std::vector<char> occupied_;
  std::size_t occupied_count_ = 0;
  std::vector<std::vector<int>> committed_;  // by route id; empty once released
  std::vector<char> live_;
  mutable std::vector<int> dist_;
  mutable std::vector<int> parent_edge_;
};

// Convenience wrapper for a fresh router over `mesh`.
std::vector<MeshRoute> RouteDisjoint(MeshRouter& router, std::span<const MeshRequest> requests);

// True if no merged edge appears in two routes.
bool RoutesEdgeDisjoint(std::span<const MeshRoute> routes);

}  // namespace lumion
