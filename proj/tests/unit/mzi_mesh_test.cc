#include <algorithm>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "lumion/error.h"
#include "lumion/mzi_mesh.h"
#include "lumion/rng.h"
#include "oracles.h"

namespace lumion {
namespace {

using oracle::PairId;

using oracle::MeshBfsDistance;

void ExpectWellFormed(const MergedMesh& m, const MeshRoute& r) {
  ASSERT_EQ(r.supernodes.size(), r.edges.size() + 1);
  EXPECT_EQ(r.supernodes.front(), m.SupernodeOf(r.request.src_port));
  EXPECT_EQ(r.supernodes.back(), m.SupernodeOf(r.request.dst_port));
  std::set<int> seen(r.supernodes.begin(), r.supernodes.end());
  EXPECT_EQ(seen.size(), r.supernodes.size()) << "route revisits a supernode";
  for (std::size_t i = 0; i < r.edges.size(); ++i) {
    const auto& e = m.edges()[static_cast<std::size_t>(r.edges[i])];
    const int a = r.supernodes[i], b = r.supernodes[i + 1];
    EXPECT_EQ(std::min(a, b), e.a);
    EXPECT_EQ(std::max(a, b), e.b);
  }
}

std::set<int> Waveguides(const MergedMesh& m, const std::vector<MeshRoute>& routes) {
  std::set<int> out;
  for (const MeshRoute& r : routes)
    for (int e : r.edges) out.insert(m.edges()[static_cast<std::size_t>(e)].waveguide);
  return out;
}

TEST(MziMesh, Sizes) {
  const MziMesh one(1, 1);
  EXPECT_EQ(one.node_count(), 1u);
  EXPECT_EQ(one.edge_count(), 0u);
  const MziMesh two(2, 2);
  EXPECT_EQ(two.node_count(), 4u);
  EXPECT_EQ(two.edge_count(), 4u);
  const MziMesh big = BuildMesh(256, 256);
  EXPECT_EQ(big.node_count(), 65536u);
  EXPECT_EQ(big.edge_count(), 2u * 256 * 255);
  EXPECT_EQ(big.ports().size(), 4u * 255);
  EXPECT_THROW(MziMesh(0, 3), DomainError);
  EXPECT_THROW(MziMesh(3, 0), DomainError);
}

TEST(MziMesh, Ports) {
  const MziMesh m(3, 4);
  const std::vector<int> ports = m.ports();
  EXPECT_EQ(ports.size(), 10u);
  EXPECT_FALSE(m.IsPort(m.NodeId(1, 1)));
  EXPECT_FALSE(m.IsPort(m.NodeId(1, 2)));
  EXPECT_TRUE(std::is_sorted(ports.begin(), ports.end()));
}

TEST(MergedMesh, Halving) {
  EXPECT_EQ(MergeAdjacent(MziMesh(2, 2)).supernode_count(), 2u);
  EXPECT_EQ(MergeAdjacent(MziMesh(2, 3)).supernode_count(), 4u);
  EXPECT_EQ(MergeAdjacent(BuildMesh(256, 256)).supernode_count(), 32768u);
}

TEST(MergedMesh, PreservesEveryWaveguide) {
  for (int rows = 1; rows <= 5; ++rows)
    for (int cols = 1; cols <= 5; ++cols) {
      const MziMesh mesh(rows, cols);
      const MergedMesh m(mesh);
      EXPECT_EQ(m.edge_count() + m.internal_waveguides().size(), mesh.edge_count());
      for (const auto& e : m.edges()) {
        const auto& w = mesh.waveguides()[static_cast<std::size_t>(e.waveguide)];
        EXPECT_EQ(std::min(m.SupernodeOf(w.a), m.SupernodeOf(w.b)), e.a);
        EXPECT_EQ(std::max(m.SupernodeOf(w.a), m.SupernodeOf(w.b)), e.b);
      }
      for (int w : m.internal_waveguides()) {
        const auto& g = mesh.waveguides()[static_cast<std::size_t>(w)];
        EXPECT_EQ(m.SupernodeOf(g.a), m.SupernodeOf(g.b));
      }
      for (int node = 0; node < rows * cols; ++node) {
        EXPECT_EQ(m.SupernodeOf(node), PairId(node / cols, node % cols, cols));
      }
    }
}

TEST(MergedMesh, PreservesReachability) {
  Rng rng(51);
  for (int rows = 1; rows <= 5; ++rows)
    for (int cols = 1; cols <= 5; ++cols) {
      const MziMesh mesh(rows, cols);
      MeshRouter router{MergedMesh(mesh)};
      // Block a random subset of waveguides through committed routes, then
      // compare residual reachability with the raw-grid oracle.
      const auto ports = mesh.ports();
      std::vector<MeshRoute> routes;
      for (int i = 0; i < 3 && ports.size() >= 2; ++i) {
        const int a = ports[rng.UniformIndex(ports.size())];
        const int b = ports[rng.UniformIndex(ports.size())];
        if (a == b) continue;
        if (auto r = router.FindRoute({a, b})) routes.push_back(router.Commit({a, b}));
      }
      const std::set<int> blocked = Waveguides(router.mesh(), routes);
      for (int a : ports)
        for (int b : ports) {
          if (a == b) continue;
          const int d = MeshBfsDistance(mesh, a, b, blocked);
          const auto r = router.FindRoute({a, b});
          EXPECT_EQ(r.has_value(), d >= 0);
        }
    }
}

TEST(MeshRouter, OppositeCorners) {
  MeshRouter router{MergedMesh(MziMesh(4, 4))};
  const auto r = router.FindRoute({0, 15});
  ASSERT_TRUE(r.has_value());
  EXPECT_EQ(r->edges.size(), 4u);
  ExpectWellFormed(router.mesh(), *r);
}

TEST(MeshRouter, SameSupernode) {
  MeshRouter router{MergedMesh(MziMesh(4, 4))};
  const MeshRoute r = router.Commit({0, 1});
  EXPECT_TRUE(r.edges.empty());
  EXPECT_EQ(r.supernodes.size(), 1u);
}

TEST(MeshRouter, BadRequests) {
  MeshRouter router{MergedMesh(MziMesh(4, 4))};
  EXPECT_THROW(router.FindRoute({5, 0}), DomainError);
  EXPECT_THROW(router.FindRoute({0, 0}), DomainError);
  EXPECT_THROW(router.FindRoute({0, 99}), DomainError);
}

TEST(MeshRouter, CrossingRequestsDisjoint) {
  MeshRouter router{MergedMesh(MziMesh(4, 4))};
  const std::vector<MeshRequest> req{{0, 15}, {3, 12}};
  const auto routes = RouteDisjoint(router, req);
  ASSERT_EQ(routes.size(), 2u);
  EXPECT_TRUE(RoutesEdgeDisjoint(routes));
  std::set<int> a(routes[0].edges.begin(), routes[0].edges.end());
  for (int e : routes[1].edges) EXPECT_FALSE(a.count(e));
}

TEST(MeshRouter, SaturatedCorridor) {
  // The cut between the two supernode columns of a 4x4 mesh is four
  // waveguides wide.
  MeshRouter router{MergedMesh(MziMesh(4, 4))};
  std::vector<MeshRequest> req;
  for (int r = 0; r < 4; ++r) req.push_back({r * 4, r * 4 + 3});
  req.push_back({1, 14});
  try {
    router.RouteAll(req);
    FAIL() << "expected RouteUnavailable";
  } catch (const RouteUnavailable& e) {
    EXPECT_EQ(e.index(), 4u);
  }
  EXPECT_EQ(router.occupied_count(), 4u);
}

TEST(MeshRouter, ReleaseRestoresState) {
  MeshRouter router{MergedMesh(MziMesh(5, 5))};
  const MeshRoute a = router.Commit({0, 24});
  const auto before = router.occupied_edges();
  const MeshRoute b = router.Commit({10, 22});
  router.Release(b);
  EXPECT_EQ(router.occupied_edges(), before);
  EXPECT_FALSE(router.IsCommitted(b.id));
  EXPECT_THROW(router.Release(b), DomainError);
  EXPECT_TRUE(router.IsCommitted(a.id));
}

TEST(MeshRouter, ReleasedEdgesReusable) {
  MeshRouter router{MergedMesh(MziMesh(4, 4))};
  const MeshRoute a = router.Commit({0, 3});
  const MeshRoute b = router.Commit({4, 7});
  ASSERT_EQ(a.edges.size(), 1u);
  router.Release(a);
  const MeshRoute again = router.Commit({0, 3});
  EXPECT_EQ(again.edges, a.edges);
  EXPECT_NE(again.id, a.id);
  EXPECT_TRUE(router.IsCommitted(b.id));
}

TEST(MeshRouter, ShortestAgainstBfsEmpty) {
  for (int rows = 1; rows <= 5; ++rows)
    for (int cols = 1; cols <= 5; ++cols) {
      const MziMesh mesh(rows, cols);
      const MeshRouter router{MergedMesh(mesh)};
      for (int a : mesh.ports())
        for (int b : mesh.ports()) {
          if (a == b) continue;
          const auto r = router.FindRoute({a, b});
          ASSERT_TRUE(r.has_value());
          ExpectWellFormed(router.mesh(), *r);
          ASSERT_EQ(static_cast<int>(r->edges.size()), MeshBfsDistance(mesh, a, b, {}))
              << rows << "x" << cols << " " << a << "->" << b;
        }
    }
}

TEST(MeshRouter, ShortestAgainstBfsResidual) {
  Rng rng(52);
  for (int rows = 2; rows <= 5; ++rows)
    for (int cols = 2; cols <= 5; ++cols)
      for (int trial = 0; trial < 20; ++trial) {
        const MziMesh mesh(rows, cols);
        MeshRouter router{MergedMesh(mesh)};
        const auto ports = mesh.ports();
        std::vector<MeshRoute> routes;
        for (int i = 0; i < 4; ++i) {
          const int a = ports[rng.UniformIndex(ports.size())];
          const int b = ports[rng.UniformIndex(ports.size())];
          if (a == b) continue;
          const int d = MeshBfsDistance(mesh, a, b, Waveguides(router.mesh(), routes));
          const auto r = router.FindRoute({a, b});
          ASSERT_EQ(r.has_value(), d >= 0);
          if (!r) continue;
          ASSERT_EQ(static_cast<int>(r->edges.size()), d);
          routes.push_back(router.Commit({a, b}));
          ASSERT_EQ(routes.back().edges, r->edges);
        }
        EXPECT_TRUE(RoutesEdgeDisjoint(routes));
      }
}

TEST(MeshRouter, Deterministic) {
  const std::vector<MeshRequest> req{{0, 63}, {7, 56}, {8, 15}, {16, 23}};
  MeshRouter a{MergedMesh(MziMesh(8, 8))};
  MeshRouter b{MergedMesh(MziMesh(8, 8))};
  const auto ra = a.RouteAll(req);
  const auto rb = b.RouteAll(req);
  for (std::size_t i = 0; i < ra.size(); ++i) {
    EXPECT_EQ(ra[i].edges, rb[i].edges);
    EXPECT_EQ(ra[i].supernodes, rb[i].supernodes);
  }
}

TEST(RoutesEdgeDisjoint, DetectsSharing) {
  MeshRoute a, b;
  a.edges = {1, 2, 3};
  b.edges = {4, 3};
  const std::vector<MeshRoute> shared{a, b};
  EXPECT_FALSE(RoutesEdgeDisjoint(shared));
  b.edges = {4, 5};
  const std::vector<MeshRoute> apart{a, b};
  EXPECT_TRUE(RoutesEdgeDisjoint(apart));
}

}  // namespace
}  // namespace lumion
