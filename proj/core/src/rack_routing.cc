#include "lumion/rack_routing.h"

#include <algorithm>
#include <chrono>
#include <deque>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <unordered_map>

#include "lumion/error.h"

namespace lumion {

// ---------------------------------------------------------------------------
// FiberGraph

FiberGraph::FiberGraph(std::vector<Coord> nodes, std::vector<FiberEdge> edges)
    : nodes_(std::move(nodes)), edges_(std::move(edges)) {
  if (!std::is_sorted(nodes_.begin(), nodes_.end())) {
    // Renumber so node order is lexicographic by coordinate.
    std::vector<Coord> sorted = nodes_;
    std::sort(sorted.begin(), sorted.end());
    std::vector<int> remap(nodes_.size());
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      remap[i] = static_cast<int>(std::lower_bound(sorted.begin(), sorted.end(), nodes_[i]) -
                                  sorted.begin());
    }
    for (FiberEdge& e : edges_) {
      if (e.u < 0 || e.v < 0 || static_cast<std::size_t>(e.u) >= nodes_.size() ||
          static_cast<std::size_t>(e.v) >= nodes_.size()) {
        throw DomainError("edge endpoint out of range");
      }
      e.u = remap[static_cast<std::size_t>(e.u)];
      e.v = remap[static_cast<std::size_t>(e.v)];
    }
    nodes_ = std::move(sorted);
  }
  if (std::adjacent_find(nodes_.begin(), nodes_.end()) != nodes_.end()) {
    throw DomainError("duplicate fiber-graph node");
  }
  for (FiberEdge& e : edges_) {
    if (e.u < 0 || e.v < 0 || static_cast<std::size_t>(e.u) >= nodes_.size() ||
        static_cast<std::size_t>(e.v) >= nodes_.size()) {
      throw DomainError("edge endpoint out of range");
    }
    if (e.u == e.v) throw DomainError("self-loop in fiber graph");
    if (e.u > e.v) std::swap(e.u, e.v);
    if (e.capacity < 0 || e.base_load < 0) throw DomainError("negative capacity or load");
  }
  std::sort(edges_.begin(), edges_.end(), [](const FiberEdge& a, const FiberEdge& b) {
    return std::pair(a.u, a.v) < std::pair(b.u, b.v);
  });
  for (std::size_t i = 1; i < edges_.size(); ++i) {
    if (edges_[i].u == edges_[i - 1].u && edges_[i].v == edges_[i - 1].v) {
      throw DomainError("duplicate fiber-graph edge");
    }
  }
  adjacency_.assign(nodes_.size(), {});
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    adjacency_[static_cast<std::size_t>(edges_[i].u)].push_back({edges_[i].v, static_cast<int>(i)});
    adjacency_[static_cast<std::size_t>(edges_[i].v)].push_back({edges_[i].u, static_cast<int>(i)});
  }
  for (auto& arcs : adjacency_) {
    std::sort(arcs.begin(), arcs.end(),
              [](const Arc& a, const Arc& b) { return a.neighbor < b.neighbor; });
  }
  if (!nodes_.empty()) {
    std::vector<char> seen(nodes_.size(), 0);
    std::deque<int> queue = {0};
    seen[0] = 1;
    std::size_t reached = 1;
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop_front();
      for (const Arc& arc : adjacency(u)) {
        if (!seen[static_cast<std::size_t>(arc.neighbor)]) {
          seen[static_cast<std::size_t>(arc.neighbor)] = 1;
          ++reached;
          queue.push_back(arc.neighbor);
        }
      }
    }
    if (reached != nodes_.size()) throw DomainError("fiber graph is not connected");
  }
}

FiberGraph FiberGraph::FromRack(const RackTopology& rack) {
  const std::vector<Coord>& servers = rack.servers();
  auto index = [&](Coord s) {
    return static_cast<int>(std::lower_bound(servers.begin(), servers.end(), s) - servers.begin());
  };
  std::vector<FiberEdge> edges;
  for (const ServerLink& link : rack.server_links()) {
    edges.push_back({index(link.a), index(link.b), link.fibers, 0});
  }
  return FiberGraph(servers, std::move(edges));
}

std::optional<int> FiberGraph::NodeIndex(Coord server) const {
  auto it = std::lower_bound(nodes_.begin(), nodes_.end(), server);
  if (it == nodes_.end() || *it != server) return std::nullopt;
  return static_cast<int>(it - nodes_.begin());
}

int FiberGraph::RequireNode(Coord server) const {
  auto index = NodeIndex(server);
  if (!index) throw DomainError("server " + ToString(server) + " not in fiber graph");
  return *index;
}

std::optional<int> FiberGraph::EdgeIndex(int u, int v) const {
  if (u < 0 || static_cast<std::size_t>(u) >= nodes_.size()) return std::nullopt;
  const auto& arcs = adjacency(u);
  auto it = std::lower_bound(arcs.begin(), arcs.end(), v,
                             [](const Arc& a, int n) { return a.neighbor < n; });
  if (it == arcs.end() || it->neighbor != v) return std::nullopt;
  return it->edge;
}

void FiberGraph::AddBaseLoad(int edge, int fibers) {
  FiberEdge& e = edges_.at(static_cast<std::size_t>(edge));
  if (e.base_load + fibers < 0) throw DomainError("negative base load");
  e.base_load += fibers;
}

FiberGraph BuildLoadedFiberGraph(const RackTopology& rack, std::span<const SliceAllocation> slices,
                                 std::span<const Coord> failed) {
  FiberGraph graph = FiberGraph::FromRack(rack);
  const std::set<Coord> down(failed.begin(), failed.end());
  for (const SliceAllocation& slice : slices) {
    std::set<std::pair<Coord, Coord>> pairs;
    for (Axis axis : kAllAxes) {
      for (auto [a, b] : RingLinks(slice, axis)) {
        if (a == b) continue;
        if (b < a) std::swap(a, b);
        pairs.insert({a, b});
      }
    }
    for (const auto& [a, b] : pairs) {
      if (down.count(a) || down.count(b)) continue;
      if (!RackTopology::IsPhysicalNeighbor(a, b)) continue;
      const Coord sa = rack.ServerOf(a);
      const Coord sb = rack.ServerOf(b);
      if (sa == sb) continue;
      auto u = graph.NodeIndex(sa);
      auto v = graph.NodeIndex(sb);
      if (!u || !v) continue;
      if (auto e = graph.EdgeIndex(*u, *v)) graph.AddBaseLoad(*e, 1);
    }
  }
  return graph;
}

// ---------------------------------------------------------------------------
// Replacement circuits

namespace {

bool IsAllocated(std::span<const SliceAllocation> allocations, Coord tpu) {
  for (const SliceAllocation& s : allocations)
    if (s.FindMember(tpu)) return true;
  return false;
}

const SliceAllocation* SliceOf(std::span<const SliceAllocation> allocations, Coord tpu) {
  for (const SliceAllocation& s : allocations)
    if (s.FindMember(tpu)) return &s;
  return nullptr;
}

}  // namespace

std::vector<CircuitRequest> ReplacementRequests(const RackTopology& rack,
                                                const SliceAllocation& slice, Coord failed,
                                                Coord spare,
                                                std::span<const SliceAllocation> allocations,
                                                std::span<const Coord> failed_tpus) {
  if (!slice.FindMember(failed)) {
    throw DomainError("failed TPU " + ToString(failed) + " is not in the slice");
  }
  const bool spare_failed =
      std::find(failed_tpus.begin(), failed_tpus.end(), spare) != failed_tpus.end();
  if (!rack.Contains(spare) || spare == failed || spare_failed || slice.FindMember(spare) ||
      IsAllocated(allocations, spare)) {
    throw NoSpareAvailable("TPU " + ToString(spare) + " is not a free, healthy spare");
  }
  std::vector<CircuitRequest> out;
  const Coord dst = rack.ServerOf(spare);
  for (Coord n : slice.RingNeighbors(failed)) {
    out.push_back({rack.ServerOf(n), dst, 0, n, spare});
  }
  return out;
}

PatchPlan PlanPatch(const RackTopology& rack, std::span<const SliceAllocation> allocations,
                    std::span<const Coord> failed) {
  std::vector<Coord> down(failed.begin(), failed.end());
  std::sort(down.begin(), down.end());
  down.erase(std::unique(down.begin(), down.end()), down.end());

  std::vector<Coord> free_spares;
  for (Coord t : rack.spare_tpus()) {
    if (!IsAllocated(allocations, t) && !std::binary_search(down.begin(), down.end(), t)) {
      free_spares.push_back(t);
    }
  }
  if (free_spares.size() < down.size()) {
    throw NoSpareAvailable(std::to_string(down.size()) + " failures but only " +
                           std::to_string(free_spares.size()) + " free spares");
  }

  PatchPlan plan;
  std::map<Coord, Coord> replacement;
  for (std::size_t i = 0; i < down.size(); ++i) {
    plan.assignment.emplace_back(down[i], free_spares[i]);
    replacement[down[i]] = free_spares[i];
  }
  for (const auto& [dead, spare] : plan.assignment) {
    const SliceAllocation* slice = SliceOf(allocations, dead);
    if (!slice) throw DomainError("failed TPU " + ToString(dead) + " is not allocated");
    for (Coord n : slice->RingNeighbors(dead)) {
      auto it = replacement.find(n);
      if (it != replacement.end()) {
        if (n < dead) continue;  // emitted from the other end
        plan.requests.push_back({rack.ServerOf(it->second), rack.ServerOf(spare), 0, it->second,
                                 spare});
      } else {
        plan.requests.push_back({rack.ServerOf(n), rack.ServerOf(spare), 0, n, spare});
      }
    }
  }
  return plan;
}

// ---------------------------------------------------------------------------
// Plan accounting

namespace {

std::vector<int> PathEdges(const FiberGraph& graph, const NodePath& path) {
  std::vector<int> edges;
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    auto e = graph.EdgeIndex(path[i], path[i + 1]);
    if (!e) throw DomainError("route uses a non-existent edge");
    edges.push_back(*e);
  }
  return edges;
}

std::vector<int> DenseClasses(std::span<const CircuitRequest> requests, int* count) {
  std::map<int, int> ids;
  std::vector<int> out;
  for (const CircuitRequest& r : requests) {
    auto [it, inserted] = ids.emplace(r.wavelength_class, static_cast<int>(ids.size()));
    out.push_back(it->second);
  }
  *count = std::max<int>(1, static_cast<int>(ids.size()));
  return out;
}

// Fibers in use per edge with per-class circuit counts; supports incremental
// add/remove of paths.
class LoadState {
 public:
  LoadState(const FiberGraph& graph, int classes)
      : graph_(graph),
        classes_(classes),
        counts_(graph.edge_count() * static_cast<std::size_t>(classes), 0),
        peak_(graph.edge_count(), 0) {
    for (std::size_t e = 0; e < graph.edge_count(); ++e) overflow_ += Over(e, 0);
  }

  int overflow() const { return overflow_; }
  const std::vector<int>& peaks() const { return peak_; }
  int load(std::size_t e) const { return graph_.edges()[e].base_load + peak_[e]; }
  int free(std::size_t e) const { return std::max(0, graph_.edges()[e].capacity - load(e)); }

  int DeltaIfAdded(std::span<const int> edges, int cls) const {
    int delta = 0;
    for (int e : edges) {
      const auto i = static_cast<std::size_t>(e);
      if (counts_[Slot(i, cls)] + 1 > peak_[i]) delta += Over(i, peak_[i] + 1) - Over(i, peak_[i]);
    }
    return delta;
  }

  void Add(std::span<const int> edges, int cls) {
    for (int e : edges) {
      const auto i = static_cast<std::size_t>(e);
      const int before = Over(i, peak_[i]);
      peak_[i] = std::max(peak_[i], ++counts_[Slot(i, cls)]);
      overflow_ += Over(i, peak_[i]) - before;
    }
  }

  void Remove(std::span<const int> edges, int cls) {
    for (int e : edges) {
      const auto i = static_cast<std::size_t>(e);
      const int before = Over(i, peak_[i]);
      --counts_[Slot(i, cls)];
      int peak = 0;
      for (int c = 0; c < classes_; ++c) peak = std::max(peak, counts_[Slot(i, c)]);
      peak_[i] = peak;
      overflow_ += Over(i, peak_[i]) - before;
    }
  }

 private:
  std::size_t Slot(std::size_t e, int cls) const {
    return e * static_cast<std::size_t>(classes_) + static_cast<std::size_t>(cls);
  }
  int Over(std::size_t e, int peak) const {
    const FiberEdge& edge = graph_.edges()[e];
    return std::max(0, edge.base_load + peak - edge.capacity);
  }

  const FiberGraph& graph_;
  int classes_;
  std::vector<int> counts_;
  std::vector<int> peak_;
  int overflow_ = 0;
};

CircuitPlan FinishPlan(const FiberGraph& graph, std::span<const CircuitRequest> requests,
                       std::vector<NodePath> routes) {
  CircuitPlan plan;
  plan.routes = std::move(routes);
  plan.load = EdgeLoad(graph, requests, plan.routes);
  plan.extra_fibers.resize(plan.load.size());
  for (std::size_t e = 0; e < plan.load.size(); ++e) {
    plan.extra_fibers[e] = std::max(0, plan.load[e] - graph.edges()[e].capacity);
    plan.total_extra += plan.extra_fibers[e];
  }
  for (const NodePath& r : plan.routes) plan.total_hops += static_cast<int>(r.size()) - 1;
  return plan;
}

}  // namespace

std::vector<int> EdgeLoad(const FiberGraph& graph, std::span<const CircuitRequest> requests,
                          std::span<const NodePath> routes) {
  if (routes.size() != requests.size()) throw DomainError("one route per request required");
  std::map<std::pair<int, int>, int> per_class;  // (edge, class) -> circuits
  for (std::size_t r = 0; r < requests.size(); ++r) {
    for (int e : PathEdges(graph, routes[r])) ++per_class[{e, requests[r].wavelength_class}];
  }
  std::vector<int> load(graph.edge_count(), 0);
  std::vector<int> peak(graph.edge_count(), 0);
  for (const auto& [key, n] : per_class) {
    auto e = static_cast<std::size_t>(key.first);
    peak[e] = std::max(peak[e], n);
  }
  for (std::size_t e = 0; e < graph.edge_count(); ++e) load[e] = graph.edges()[e].base_load + peak[e];
  return load;
}

int TotalExtraFibers(const FiberGraph& graph, std::span<const CircuitRequest> requests,
                     std::span<const NodePath> routes) {
  const std::vector<int> load = EdgeLoad(graph, requests, routes);
  int total = 0;
  for (std::size_t e = 0; e < load.size(); ++e) total += std::max(0, load[e] - graph.edges()[e].capacity);
  return total;
}

void ValidateRoutes(const FiberGraph& graph, std::span<const CircuitRequest> requests,
                    std::span<const NodePath> routes) {
  if (routes.size() != requests.size()) throw DomainError("one route per request required");
  for (std::size_t r = 0; r < requests.size(); ++r) {
    const NodePath& path = routes[r];
    if (path.empty()) throw DomainError("empty route");
    if (path.front() != graph.RequireNode(requests[r].src) ||
        path.back() != graph.RequireNode(requests[r].dst)) {
      throw DomainError("route endpoints do not match request");
    }
    std::set<int> seen(path.begin(), path.end());
    if (seen.size() != path.size()) throw DomainError("route is not a simple path");
    PathEdges(graph, path);
  }
}

// ---------------------------------------------------------------------------
// KSP baseline

CircuitPlan RouteKsp(const FiberGraph& graph, std::span<const CircuitRequest> requests, int k) {
  if (k < 1) throw DomainError("k must be at least 1");
  int classes = 1;
  const std::vector<int> cls = DenseClasses(requests, &classes);
  LoadState state(graph, classes);
  std::vector<NodePath> routes;
  routes.reserve(requests.size());
  for (std::size_t r = 0; r < requests.size(); ++r) {
    const int src = graph.RequireNode(requests[r].src);
    const int dst = graph.RequireNode(requests[r].dst);
    std::vector<NodePath> paths = KShortestPaths(graph, src, dst, k);
    if (paths.empty()) throw DomainError("no route between request endpoints");
    std::size_t best = 0;
    std::vector<int> best_edges = PathEdges(graph, paths[0]);
    int best_delta = state.DeltaIfAdded(best_edges, cls[r]);
    for (std::size_t i = 1; i < paths.size(); ++i) {
      std::vector<int> edges = PathEdges(graph, paths[i]);
      const int delta = state.DeltaIfAdded(edges, cls[r]);
      if (delta < best_delta ||
          (delta == best_delta && paths[i].size() < paths[best].size())) {
        best = i;
        best_delta = delta;
        best_edges = std::move(edges);
      }
    }
    state.Add(best_edges, cls[r]);
    routes.push_back(paths[best]);
  }
  return FinishPlan(graph, requests, std::move(routes));
}

// ---------------------------------------------------------------------------
// Exact branch-and-bound

namespace {

struct Candidate {
  NodePath nodes;
  std::vector<int> edges;
  int hops = 0;
};

struct ActiveRequest {
  std::size_t request = 0;
  int src = 0;
  int dst = 0;
  int cls = 0;
  int previous_twin = -1;  // earlier active request with equal (src, dst, class)
  std::vector<Candidate> candidates;
};

// Min-cost flow from the given sources to `sink` on the undirected fiber
// graph: each direction of an edge carries its free units at cost 1 and any
// further units at cost overflow_cost + 1. Each direction gets the full free
// allowance, which only loosens the bound.
class FlowBound {
 public:
  FlowBound(const FiberGraph& graph, std::int64_t overflow_cost)
      : graph_(graph), overflow_cost_(overflow_cost) {}

  std::int64_t Solve(const LoadState& state, std::span<const std::pair<int, int>> supplies,
                     int sink) {
    const int n = static_cast<int>(graph_.node_count());
    const int source = n;
    arcs_.clear();
    head_.assign(static_cast<std::size_t>(n) + 1, -1);
    int demand = 0;
    for (auto [node, count] : supplies) demand += count;
    if (demand == 0) return 0;
    for (std::size_t e = 0; e < graph_.edge_count(); ++e) {
      const FiberEdge& edge = graph_.edges()[e];
      const int free = state.free(e);
      for (auto [a, b] : {std::pair(edge.u, edge.v), std::pair(edge.v, edge.u)}) {
        if (free > 0) AddArc(a, b, free, 1);
        AddArc(a, b, demand, overflow_cost_ + 1);
      }
    }
    for (auto [node, count] : supplies) AddArc(source, node, count, 0);

    std::int64_t cost = 0;
    int routed = 0;
    std::vector<std::int64_t> dist;
    std::vector<int> via;
    std::vector<char> queued;
    while (routed < demand) {
      // Bellman-Ford / SPFA on the residual graph.
      dist.assign(static_cast<std::size_t>(n) + 1, kInf);
      via.assign(static_cast<std::size_t>(n) + 1, -1);
      queued.assign(static_cast<std::size_t>(n) + 1, 0);
      std::deque<int> queue = {source};
      dist[static_cast<std::size_t>(source)] = 0;
      while (!queue.empty()) {
        const int u = queue.front();
        queue.pop_front();
        queued[static_cast<std::size_t>(u)] = 0;
        for (int a = head_[static_cast<std::size_t>(u)]; a != -1; a = arcs_[static_cast<std::size_t>(a)].next) {
          const FlowArc& arc = arcs_[static_cast<std::size_t>(a)];
          if (arc.cap <= 0) continue;
          const std::int64_t nd = dist[static_cast<std::size_t>(u)] + arc.cost;
          if (nd < dist[static_cast<std::size_t>(arc.to)]) {
            dist[static_cast<std::size_t>(arc.to)] = nd;
            via[static_cast<std::size_t>(arc.to)] = a;
            if (!queued[static_cast<std::size_t>(arc.to)]) {
              queued[static_cast<std::size_t>(arc.to)] = 1;
              queue.push_back(arc.to);
            }
          }
        }
      }
      if (dist[static_cast<std::size_t>(sink)] == kInf) return kInf;
      int push = demand - routed;
      for (int v = sink; v != source;) {
        const FlowArc& arc = arcs_[static_cast<std::size_t>(via[static_cast<std::size_t>(v)])];
        push = std::min(push, arc.cap);
        v = arcs_[static_cast<std::size_t>(via[static_cast<std::size_t>(v)] ^ 1)].to;
      }
      for (int v = sink; v != source;) {
        const int a = via[static_cast<std::size_t>(v)];
        arcs_[static_cast<std::size_t>(a)].cap -= push;
        arcs_[static_cast<std::size_t>(a ^ 1)].cap += push;
        v = arcs_[static_cast<std::size_t>(a ^ 1)].to;
      }
      cost += static_cast<std::int64_t>(push) * dist[static_cast<std::size_t>(sink)];
      routed += push;
    }
    return cost;
  }

  static constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max() / 4;

 private:
  struct FlowArc {
    int to;
    int cap;
    std::int64_t cost;
    int next;
  };

  void AddArc(int from, int to, int cap, std::int64_t cost) {
    arcs_.push_back({to, cap, cost, head_[static_cast<std::size_t>(from)]});
    head_[static_cast<std::size_t>(from)] = static_cast<int>(arcs_.size()) - 1;
    arcs_.push_back({from, 0, -cost, head_[static_cast<std::size_t>(to)]});
    head_[static_cast<std::size_t>(to)] = static_cast<int>(arcs_.size()) - 1;
  }

  const FiberGraph& graph_;
  std::int64_t overflow_cost_;
  std::vector<FlowArc> arcs_;
  std::vector<int> head_;
};

// Depth-first over candidate indices in branching order, so the first leaf
// reaching the optimum cost (overflow, then hops) is the lexicographically
// smallest optimal choice.
class BranchAndBound {
 public:
  BranchAndBound(const FiberGraph& graph, std::vector<ActiveRequest> active, int classes,
                 const ExactOptions& options)
      : active_(std::move(active)),
        options_(options),
        state_(graph, classes),
        single_class_(classes == 1),
        overflow_cost_(1 + static_cast<std::int64_t>(active_.size()) *
                               static_cast<std::int64_t>(std::max<std::size_t>(1, graph.node_count()))),
        flow_(graph, overflow_cost_),
        chosen_(active_.size(), 0),
        start_(std::chrono::steady_clock::now()) {
    suffix_groups_.resize(active_.size() + 1);
    for (std::size_t d = 0; d < active_.size(); ++d) {
      std::map<int, std::map<int, int>> groups;  // sink -> source -> count
      std::map<int, int> group_hops;
      for (std::size_t i = d; i < active_.size(); ++i) {
        ++groups[active_[i].dst][active_[i].src];
        group_hops[active_[i].dst] += active_[i].candidates.front().hops;
      }
      for (const auto& [sink, sources] : groups) {
        suffix_groups_[d].push_back({sink, group_hops[sink], {sources.begin(), sources.end()}});
      }
    }
    for (std::size_t i = 0; i < active_.size(); ++i) {
      if (active_[i].previous_twin >= 0) twin_sources_.push_back(active_[i].previous_twin);
    }
    min_hops_suffix_.assign(active_.size() + 1, 0);
    for (std::size_t i = active_.size(); i-- > 0;) {
      min_hops_suffix_[i] = min_hops_suffix_[i + 1] + active_[i].candidates.front().hops;
    }
  }

  std::int64_t Cost(int overflow, int hops) const { return overflow_cost_ * overflow + hops; }
  int OverflowOf(std::int64_t cost) const { return static_cast<int>(cost / overflow_cost_); }

  // Offers a complete heuristic plan as the initial incumbent.
  void SeedIncumbent(int overflow, int hops, std::vector<NodePath> routes) {
    const std::int64_t cost = Cost(overflow, hops);
    if (cost < best_) {
      best_ = cost;
      seeded_routes_ = std::move(routes);
      best_from_search_ = false;
    }
  }

  void Run() {
    root_bound_ = LowerBound(0, 0, std::numeric_limits<std::int64_t>::max());
    Search(0, 0);
  }

  std::int64_t root_bound() const { return root_bound_; }
  bool limit_hit() const { return limit_hit_; }
  std::uint64_t nodes() const { return nodes_; }
  bool best_from_search() const { return best_from_search_; }
  const std::vector<std::size_t>& best_choice() const { return best_choice_; }
  const std::vector<NodePath>& seeded_routes() const { return seeded_routes_; }

 private:
  // Lower bound on the final cost given the requests placed so far, which
  // used `hops` hops. Stops refining once the bound exceeds `cutoff`.
  std::int64_t LowerBound(std::size_t depth, int hops, std::int64_t cutoff) {
    const std::int64_t placed = Cost(state_.overflow(), hops);
    const std::int64_t trivial = placed + min_hops_suffix_[depth];
    if (!single_class_ || depth == active_.size() || trivial > cutoff) return trivial;

    // Cheapest continuation of each remaining request on its own.
    std::int64_t independent = placed;
    for (std::size_t i = depth; i < active_.size(); ++i) {
      std::int64_t best = std::numeric_limits<std::int64_t>::max();
      for (const Candidate& c : active_[i].candidates) {
        const int delta = state_.DeltaIfAdded(c.edges, 0);
        best = std::min(best, Cost(delta, c.hops));
        if (delta == 0) break;  // ordered by hops
      }
      independent += best;
    }
    if (independent > cutoff) return independent;

    // Flow relaxation, one sink group at a time.
    std::int64_t flow = 0;
    for (const SinkGroup& g : suffix_groups_[depth]) {
      const std::int64_t v = flow_.Solve(state_, g.supplies, g.sink);
      if (v >= FlowBound::kInf) return v;
      flow = std::max(flow, v + min_hops_suffix_[depth] - g.min_hops);
    }
    return std::max(independent, placed + flow);
  }

  bool OutOfBudget() {
    if (options_.max_nodes != 0 && nodes_ >= options_.max_nodes) return true;
    if (options_.budget_ms > 0.0 && (nodes_ & 255u) == 0) {
      const double elapsed =
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
      if (elapsed > options_.budget_ms) return true;
    }
    return false;
  }

  // Until the search itself reaches a leaf, ties with a seeded incumbent are
  // still explored so the canonical plan is found.
  bool Prunable(std::int64_t bound) const {
    return best_from_search_ ? bound >= best_ : bound > best_;
  }

  // The subtree below `depth` depends only on the loads and on the choices
  // later twins are constrained by; a revisit with no fewer hops is dominated.
  bool Dominated(std::size_t depth, int hops) {
    std::string key;
    key.reserve(state_.peaks().size() + twin_sources_.size() * 2 + 2);
    auto put = [&key](std::size_t v) {
      key.push_back(static_cast<char>(v & 0xff));
      key.push_back(static_cast<char>(v >> 8));
    };
    for (int p : state_.peaks()) key.push_back(static_cast<char>(std::min(p, 255)));
    put(depth);
    for (int t : twin_sources_) {
      put(static_cast<std::size_t>(t) < depth ? chosen_[static_cast<std::size_t>(t)] : 0xffff);
    }
    const auto it = seen_.find(key);
    if (it != seen_.end()) {
      if (it->second <= hops) return true;
      it->second = hops;
      return false;
    }
    if (seen_.size() < kMaxSeen) seen_.emplace(std::move(key), hops);
    return false;
  }

  // Returns true when the search should stop.
  bool Search(std::size_t depth, int hops) {
    ++nodes_;
    if (OutOfBudget()) {
      limit_hit_ = true;
      return true;
    }
    if (depth == active_.size()) {
      const std::int64_t cost = Cost(state_.overflow(), hops);
      if (cost < best_ || (cost == best_ && !best_from_search_)) {
        best_ = cost;
        best_choice_ = chosen_;
        best_from_search_ = true;
      }
      return best_ <= root_bound_;
    }
    ActiveRequest& req = active_[depth];
    const std::size_t first =
        req.previous_twin >= 0 ? chosen_[static_cast<std::size_t>(req.previous_twin)] : 0;
    for (std::size_t c = first; c < req.candidates.size(); ++c) {
      const Candidate& cand = req.candidates[c];
      const int next = hops + cand.hops;
      state_.Add(cand.edges, req.cls);
      chosen_[depth] = c;
      const std::int64_t cutoff = best_from_search_ ? best_ - 1 : best_;
      bool stop = false;
      if (!Prunable(LowerBound(depth + 1, next, cutoff)) && !Dominated(depth + 1, next)) {
        stop = Search(depth + 1, next);
      }
      state_.Remove(cand.edges, req.cls);
      if (stop) return true;
    }
    return false;
  }

  struct SinkGroup {
    int sink;
    int min_hops;                               // sum of shortest-path hops
    std::vector<std::pair<int, int>> supplies;  // (source, count)
  };
  static constexpr std::size_t kMaxSeen = 1u << 18;

  std::vector<ActiveRequest> active_;
  std::vector<std::vector<SinkGroup>> suffix_groups_;
  std::vector<int> twin_sources_;
  std::vector<int> min_hops_suffix_;
  std::unordered_map<std::string, int> seen_;
  ExactOptions options_;
  LoadState state_;
  bool single_class_;
  std::int64_t overflow_cost_;
  FlowBound flow_;
  std::vector<std::size_t> chosen_;
  std::vector<std::size_t> best_choice_;
  std::vector<NodePath> seeded_routes_;
  std::int64_t best_ = std::numeric_limits<std::int64_t>::max();
  std::int64_t root_bound_ = 0;
  bool best_from_search_ = false;
  bool limit_hit_ = false;
  std::uint64_t nodes_ = 0;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace

CircuitPlan RouteExact(const FiberGraph& graph, std::span<const CircuitRequest> requests,
                       const ExactOptions& options) {
  if (options.max_hops < 1) throw DomainError("max_hops must be at least 1");
  int classes = 1;
  const std::vector<int> cls = DenseClasses(requests, &classes);

  std::vector<NodePath> routes(requests.size());
  std::vector<ActiveRequest> active;
  std::set<int> active_classes;
  for (std::size_t r = 0; r < requests.size(); ++r) {
    const int src = graph.RequireNode(requests[r].src);
    const int dst = graph.RequireNode(requests[r].dst);
    if (src == dst) {
      routes[r] = {src};
      continue;
    }
    ActiveRequest a;
    a.request = r;
    a.src = src;
    a.dst = dst;
    a.cls = cls[r];
    for (NodePath& p : SimplePaths(graph, src, dst, options.max_hops)) {
      Candidate c;
      c.edges = PathEdges(graph, p);
      c.hops = static_cast<int>(c.edges.size());
      c.nodes = std::move(p);
      a.candidates.push_back(std::move(c));
    }
    if (a.candidates.empty()) {
      throw RouteUnavailable(r, "request " + std::to_string(r) + ": no path within " +
                                    std::to_string(options.max_hops) + " hops from " +
                                    ToString(requests[r].src) + " to " + ToString(requests[r].dst));
    }
    active_classes.insert(a.cls);
    active.push_back(std::move(a));
  }
  // Branch on the requests with the fewest alternatives first.
  std::stable_sort(active.begin(), active.end(), [](const ActiveRequest& x, const ActiveRequest& y) {
    return x.candidates.size() < y.candidates.size();
  });
  for (std::size_t i = 0; i < active.size(); ++i) {
    for (std::size_t j = i; j-- > 0;) {
      if (active[j].src == active[i].src && active[j].dst == active[i].dst &&
          active[j].cls == active[i].cls) {
        active[i].previous_twin = static_cast<int>(j);
        break;
      }
    }
  }
  // Fiber-free requests never load an edge, so only active classes matter.
  std::map<int, int> compact;
  for (int c : active_classes) compact.emplace(c, static_cast<int>(compact.size()));
  for (ActiveRequest& a : active) a.cls = compact[a.cls];
  const int active_class_count = std::max<int>(1, static_cast<int>(compact.size()));

  if (active.empty()) {
    CircuitPlan plan = FinishPlan(graph, requests, std::move(routes));
    plan.lower_bound = plan.total_extra;
    plan.nodes_explored = 1;
    return plan;
  }

  BranchAndBound search(graph, active, active_class_count, options);
  for (int k : {5, 10}) {
    CircuitPlan heuristic = RouteKsp(graph, requests, k);
    const bool in_domain = std::all_of(heuristic.routes.begin(), heuristic.routes.end(),
                                       [&](const NodePath& r) {
                                         return static_cast<int>(r.size()) - 1 <= options.max_hops;
                                       });
    if (!in_domain) continue;
    search.SeedIncumbent(heuristic.total_extra, heuristic.total_hops, std::move(heuristic.routes));
  }
  search.Run();

  if (search.best_from_search()) {
    for (std::size_t i = 0; i < active.size(); ++i) {
      routes[active[i].request] = active[i].candidates[search.best_choice()[i]].nodes;
    }
  } else {
    routes = search.seeded_routes();
  }
  CircuitPlan plan = FinishPlan(graph, requests, std::move(routes));
  plan.proven_optimal = !search.limit_hit();
  plan.lower_bound =
      plan.proven_optimal ? plan.total_extra : search.OverflowOf(search.root_bound());
  plan.nodes_explored = search.nodes();
  return plan;
}

}  // namespace lumion
