#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "lumion/coord.h"
#include "lumion/rng.h"

namespace lumion {

inline constexpr Coord kRackTpuDims = {4, 4, 4};
inline constexpr Coord kRackServerDims = {2, 2, 4};
inline constexpr int kDefaultFibersPerServerPair = 4;
inline constexpr double kNoCommunication = std::numeric_limits<double>::infinity();

// The five symmetry-unique positions for an added server, in server-grid
// coordinates relative to the base rack's (0, 0, 0) server.
inline constexpr std::array<Coord, 5> kSparePlacementCandidates = {{
    {-1, 0, 0},
    {0, -1, 0},
    {0, 0, -1},
    {0, -1, 1},
    {-1, 0, 1},
}};

inline constexpr Coord kDefaultSpareOffset = {0, -1, 1};

class SparePlacement {
 public:
  // Throws DomainError unless offset is one of kSparePlacementCandidates.
  explicit SparePlacement(Coord offset);
  Coord offset() const { return offset_; }
  friend auto operator<=>(const SparePlacement&, const SparePlacement&) = default;

 private:
  Coord offset_;
};

// Inter-server fiber bundle between two servers that are physically adjacent.
struct ServerLink {
  Coord a;  // a < b
  Coord b;
  int fibers = kDefaultFibersPerServerPair;
};

struct RackOptions {
  Coord tpu_dims = kRackTpuDims;
  Coord server_dims = kRackServerDims;
  std::optional<SparePlacement> spare;
  int fibers_per_server_pair = kDefaultFibersPerServerPair;
  double nominal_bandwidth = 1.0;
};

// A rack of accelerators wired as a 3D torus, grouped into servers that form
// a coarser grid. An optional spare server sits outside the base grid and is
// wired only to the base servers it touches face-to-face.
//
// Wrap-around links of the torus leave the rack through its faces (they are
// carried by the inter-rack optical layer) and do not use inter-server
// fibers; physically adjacent servers are joined by a fiber bundle.
class RackTopology {
 public:
  explicit RackTopology(const RackOptions& options = {});

  Coord tpu_dims() const { return tpu_dims_; }
  Coord server_dims() const { return server_dims_; }
  // TPU extent of one server along each axis.
  Coord server_extent() const { return server_extent_; }
  int tpus_per_server() const { return Volume(server_extent_); }
  int base_tpu_count() const { return Volume(tpu_dims_); }
  int tpu_count() const;
  int server_count() const { return static_cast<int>(servers_.size()); }

  const std::optional<SparePlacement>& spare() const { return spare_; }
  std::optional<Coord> spare_server() const;
  std::vector<Coord> spare_tpus() const;

  bool InBaseRack(Coord tpu) const;
  bool IsSpareTpu(Coord tpu) const;
  bool Contains(Coord tpu) const { return InBaseRack(tpu) || IsSpareTpu(tpu); }

  Coord ServerOf(Coord tpu) const;
  std::vector<Coord> TpusOfServer(Coord server) const;
  // Servers in lexicographic order, spare included.
  const std::vector<Coord>& servers() const { return servers_; }

  // Wrap-around torus neighbours of a base-rack TPU, one per direction
  // (+x, -x, +y, -y, +z, -z). Spare TPUs are not part of the torus.
  std::array<Coord, 6> TorusNeighbors(Coord tpu) const;

  // Neighbouring TPUs sitting at distance one on the same axis, i.e. not a
  // wrap-around link.
  static bool IsPhysicalNeighbor(Coord a, Coord b) { return ManhattanDistance(a, b) == 1; }

  const std::vector<ServerLink>& server_links() const { return server_links_; }
  std::optional<int> FiberBudget(Coord server_a, Coord server_b) const;

  double nominal_bandwidth() const { return nominal_bandwidth_; }
  double LinkBandwidth(Coord from, Coord to) const;
  RackTopology WithLinkBandwidth(Coord from, Coord to, double bandwidth) const;
  RackTopology WithScaledBandwidth(double factor) const;

  std::size_t BaseIndex(Coord tpu) const {
    return static_cast<std::size_t>(tpu.x + tpu_dims_.x * (tpu.y + tpu_dims_.y * tpu.z));
  }

 private:
  Coord tpu_dims_;
  Coord server_dims_;
  Coord server_extent_;
  std::optional<SparePlacement> spare_;
  double nominal_bandwidth_;
  std::vector<Coord> servers_;
  std::vector<ServerLink> server_links_;
  std::map<std::pair<Coord, Coord>, double> link_bandwidth_;
};

// Canonical 4x4x4 rack, optionally extended with a spare server.
RackTopology BuildRack(std::optional<SparePlacement> spare = std::nullopt);

struct SliceRequest {
  Coord shape;
};

// Throws DomainError unless every dimension is positive and fits the rack.
void Validate(const SliceRequest& request, const RackTopology& rack);

// A tenant slice. members[i] is the physical TPU holding logical position i
// (row-major over extent, x fastest). For a contiguous slice member i sits at
// origin + local(i); after in-place patching some members live elsewhere.
struct SliceAllocation {
  int id = 0;
  SliceRequest request;
  Coord origin;
  Coord extent;  // request.shape after orientation
  std::vector<Coord> members;

  int size() const { return static_cast<int>(members.size()); }
  bool contiguous() const;
  Coord LocalCoord(std::size_t index) const;
  std::size_t IndexOf(Coord local) const;
  std::optional<std::size_t> FindMember(Coord tpu) const;
  // Members sorted lexicographically.
  std::vector<Coord> tpus() const;
  // Distinct ring neighbours of a member within the slice's own torus.
  std::vector<Coord> RingNeighbors(Coord tpu) const;
  // Replaces member `failed` with `replacement`; the logical layout is kept.
  void Patch(Coord failed, Coord replacement);
};

struct AllocationResult {
  std::vector<SliceAllocation> allocations;
  std::vector<std::size_t> skipped;  // indices of requests that did not fit
};

// First-fit packing of axis-aligned blocks in lexicographic origin order. At
// each origin the request's distinct orientations are tried in an order
// shuffled under `seed`. Spare-server TPUs are never allocated.
AllocationResult AllocateSlices(const RackTopology& rack,
                                std::span<const SliceRequest> requests,
                                std::uint64_t seed);

struct WeightedShape {
  Coord shape;
  double weight = 1.0;
};

class SliceDistribution {
 public:
  explicit SliceDistribution(std::vector<WeightedShape> shapes);
  // Uniform over {1x1x1, 2x2x1, 2x2x2, 4x2x2, 4x4x2, 4x4x4}.
  static SliceDistribution Default();

  const std::vector<WeightedShape>& shapes() const { return shapes_; }
  SliceRequest Sample(Rng& rng) const;

 private:
  std::vector<WeightedShape> shapes_;
  double total_weight_ = 0.0;
};

struct FillResult {
  std::vector<SliceAllocation> allocations;
  std::vector<SliceRequest> requests;  // every sampled request, in order
  std::vector<std::size_t> skipped;
};

// Samples requests from `distribution` and packs them until no shape with
// positive weight fits anywhere in the rack.
FillResult FillRack(const RackTopology& rack, const SliceDistribution& distribution,
                    std::uint64_t seed);

// Bottleneck bandwidth of the logical rings along `axis`: the minimum over
// every directed link member[i] -> member[i+1 mod L] of every ring. Returns
// kNoCommunication when the slice has extent 1 along the axis. Throws
// DomainError if a member is not on this rack.
double RingBandwidth(const RackTopology& rack, const SliceAllocation& slice, Axis axis);

// All directed links of the rings along `axis`.
std::vector<std::pair<Coord, Coord>> RingLinks(const SliceAllocation& slice, Axis axis);

}  // namespace lumion
