#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "lumion/coord.h"
#include "lumion/torus.h"

namespace lumion {

struct FiberEdge {
  int u = 0;  // node index, u < v
  int v = 0;
  int capacity = kDefaultFibersPerServerPair;
  int base_load = 0;
};

// Servers joined by fiber bundles. Node indices follow lexicographic order of
// the server coordinates; adjacency lists are sorted by neighbour index.
class FiberGraph {
 public:
  // Throws DomainError on duplicate nodes/edges, self-loops, negative
  // capacity or load, or a disconnected graph.
  FiberGraph(std::vector<Coord> nodes, std::vector<FiberEdge> edges);

  // Servers and fiber budgets of `rack`, with no base load.
  static FiberGraph FromRack(const RackTopology& rack);

  const std::vector<Coord>& nodes() const { return nodes_; }
  const std::vector<FiberEdge>& edges() const { return edges_; }
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }

  std::optional<int> NodeIndex(Coord server) const;
  int RequireNode(Coord server) const;
  std::optional<int> EdgeIndex(int u, int v) const;

  struct Arc {
    int neighbor;
    int edge;
  };
  const std::vector<Arc>& adjacency(int node) const { return adjacency_[static_cast<std::size_t>(node)]; }

  void AddBaseLoad(int edge, int fibers);

 private:
  std::vector<Coord> nodes_;
  std::vector<FiberEdge> edges_;
  std::vector<std::vector<Arc>> adjacency_;
};

// Fiber graph of `rack` with base load from the ring links of the given
// slices: every ring link between physically adjacent TPUs on different,
// fiber-joined servers uses one fiber. Links touching a failed TPU are torn
// down and do not count. Each unordered TPU pair is counted once per slice.
FiberGraph BuildLoadedFiberGraph(const RackTopology& rack,
                                 std::span<const SliceAllocation> slices,
                                 std::span<const Coord> failed = {});

// A circuit to be routed between two servers. Circuits in the same
// wavelength class may not share a fiber. src == dst needs no fiber.
struct CircuitRequest {
  Coord src;
  Coord dst;
  int wavelength_class = 0;
  Coord src_tpu;
  Coord dst_tpu;

  bool fiber_free() const { return src == dst; }
};

// One request per distinct in-slice ring neighbour of `failed`, from that
// neighbour's server to the server of `spare`. Throws DomainError if `failed`
// is not in `slice`, NoSpareAvailable if `spare` is not a free, healthy TPU
// of the rack (not allocated in `allocations`, not in `failed_tpus`).
std::vector<CircuitRequest> ReplacementRequests(const RackTopology& rack,
                                                const SliceAllocation& slice, Coord failed,
                                                Coord spare,
                                                std::span<const SliceAllocation> allocations = {},
                                                std::span<const Coord> failed_tpus = {});

// Replacement assignment for several simultaneous failures.
struct PatchPlan {
  std::vector<std::pair<Coord, Coord>> assignment;  // failed -> spare, failed sorted
  std::vector<CircuitRequest> requests;
};

// Matches failed TPUs (sorted) to free spare TPUs (sorted) and emits the
// replacement circuits. A link between two failed TPUs becomes a link between
// their replacements and is emitted once. Throws NoSpareAvailable when there
// are fewer free spares than failures, DomainError if a failed TPU is not
// allocated.
PatchPlan PlanPatch(const RackTopology& rack, std::span<const SliceAllocation> allocations,
                    std::span<const Coord> failed);

using NodePath = std::vector<int>;

struct CircuitPlan {
  std::vector<NodePath> routes;  // per request; fiber-free requests get {src}
  std::vector<int> load;         // per edge: base + fibers used by circuits
  std::vector<int> extra_fibers; // per edge: max(0, load - capacity)
  int total_extra = 0;
  int total_hops = 0;
  bool proven_optimal = true;
  int lower_bound = 0;  // equals total_extra when proven optimal
  std::uint64_t nodes_explored = 0;
};

// Per-edge fibers in use: base load plus, per edge, the largest number of
// circuits of any single wavelength class crossing it.
std::vector<int> EdgeLoad(const FiberGraph& graph, std::span<const CircuitRequest> requests,
                          std::span<const NodePath> routes);

// Sum over edges of max(0, load - capacity), recomputed from routes.
int TotalExtraFibers(const FiberGraph& graph, std::span<const CircuitRequest> requests,
                     std::span<const NodePath> routes);

// Throws DomainError unless every route is a simple path over graph edges
// from its request's src to dst.
void ValidateRoutes(const FiberGraph& graph, std::span<const CircuitRequest> requests,
                    std::span<const NodePath> routes);

// All simple paths from src to dst with at most max_hops edges, ordered by
// hop count then lexicographically by node index.
std::vector<NodePath> SimplePaths(const FiberGraph& graph, int src, int dst, int max_hops);

// Yen's loop-free k shortest paths by hop count, ties broken
// lexicographically; agrees with the first k entries of SimplePaths.
std::vector<NodePath> KShortestPaths(const FiberGraph& graph, int src, int dst, int k);

struct ExactOptions {
  int max_hops = 6;          // candidate paths per request
  double budget_ms = 500.0;  // wall-clock limit; <= 0 disables
  std::uint64_t max_nodes = 0;  // search-node limit; 0 disables
};

// Node-limited settings for ensemble runs, whose output must not depend on
// machine speed.
inline constexpr ExactOptions kEnsembleRouting{6, 0.0, 20'000};

// Minimises total extra fibers by branch-and-bound over each request's
// candidate simple paths (SimplePaths order); among optimal plans, fewest
// total hops. Requests are branched on in order of increasing candidate count
// (stable), and remaining ties go to the lexicographically smallest vector of
// candidate indices in that order. If a limit is hit the best plan found is
// returned with proven_optimal = false and lower_bound taken from the root
// relaxation. The incumbent is seeded from the KSP heuristics whose routes
// stay within max_hops, so the result never needs more fibers than such a
// RouteKsp plan with k in {5, 10}.
// Throws RouteUnavailable(i) if request i has no candidate path within
// max_hops, DomainError if max_hops < 1.
CircuitPlan RouteExact(const FiberGraph& graph, std::span<const CircuitRequest> requests,
                       const ExactOptions& options = {});

// Greedy baseline: requests in input order, each takes the one of its k
// shortest paths that adds the fewest extra fibers (ties: fewer hops, then
// rank).
CircuitPlan RouteKsp(const FiberGraph& graph, std::span<const CircuitRequest> requests, int k);

// ---------------------------------------------------------------------------
// Randomised rack states and ensembles.

struct FailureCountRange {
  int min = 1;
  int max = 4;
};

// A fully allocated rack with some failed TPUs.
struct RackState {
  std::vector<SliceAllocation> allocations;
  std::vector<Coord> failed;  // sorted, all allocated
  std::uint64_t seed = 0;
};

// Fills the rack from `distribution`, then fails a uniformly drawn number of
// TPUs in [failures.min, failures.max] sampled without replacement from the
// allocated TPUs (capped by the number allocated).
RackState GenerateRackState(const RackTopology& rack, const SliceDistribution& distribution,
                            FailureCountRange failures, std::uint64_t seed);

// Replacement circuits and the loaded fiber graph for patching `failed`
// in place with spare-server TPUs.
struct PatchInstance {
  PatchPlan patch;
  FiberGraph graph;
};
PatchInstance MakePatchInstance(const RackTopology& rack,
                                std::span<const SliceAllocation> allocations,
                                std::span<const Coord> failed);

// Worker count for ensemble runs: `requested` if non-zero, else the
// LUMION_BENCH_THREADS environment variable, else the hardware concurrency.
unsigned ResolveThreadCount(unsigned requested = 0);

struct PlacementStats {
  SparePlacement placement;
  double mean_extra = 0.0;
  double stddev_extra = 0.0;  // population standard deviation
  double mean_lower_bound = 0.0;  // equals mean_extra when all_optimal
  std::vector<int> per_trial;
  std::vector<int> per_trial_lower_bound;
  bool all_optimal = true;
};

struct PlacementSweepResult {
  std::vector<PlacementStats> ranking;  // ascending mean, ties by offset
  bool default_ranked_first = false;    // whether (0,-1,1) leads
  bool default_has_least_mean = false;  // (0,-1,1) ties for or holds the lowest mean
};

inline constexpr int kMinPlacementTrials = 100;

// For every candidate spare position, solves RouteExact on the same
// `trials` random rack states (common random numbers across positions).
// Throws DomainError if trials < kMinPlacementTrials.
PlacementSweepResult PlacementSweep(const SliceDistribution& distribution, int trials,
                                    std::uint64_t seed, FailureCountRange failures = {},
                                    const ExactOptions& options = kEnsembleRouting,
                                    unsigned threads = 0);

struct RoutingTrial {
  std::uint64_t seed = 0;
  int failed = 0;
  int requests = 0;
  int exact = 0;
  int exact_lower_bound = 0;
  bool exact_optimal = true;
  double exact_ms = 0.0;
  std::vector<std::pair<int, int>> ksp;  // (k, total_extra)
};

// Exact versus KSP(k) on `trials` random rack states with the given spare.
std::vector<RoutingTrial> CompareRouting(const SliceDistribution& distribution, int trials,
                                         std::uint64_t seed, SparePlacement placement,
                                         FailureCountRange failures, std::span<const int> ks,
                                         const ExactOptions& options = kEnsembleRouting,
                                         unsigned threads = 0);

}  // namespace lumion
