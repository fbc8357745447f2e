#include "lumion/torus.h"

#include <algorithm>
#include <cmath>

#include "lumion/error.h"

namespace lumion {
namespace {

std::vector<Coord> DistinctOrientations(Coord shape) {
  std::array<int, 3> dims = {shape.x, shape.y, shape.z};
  std::sort(dims.begin(), dims.end());
  std::vector<Coord> out;
  do {
    out.push_back({dims[0], dims[1], dims[2]});
  } while (std::next_permutation(dims.begin(), dims.end()));
  return out;
}

class Occupancy {
 public:
  explicit Occupancy(const RackTopology& rack)
      : rack_(rack), used_(static_cast<std::size_t>(rack.base_tpu_count()), false) {}

  bool Fits(Coord origin, Coord extent) const {
    const Coord dims = rack_.tpu_dims();
    for (Axis a : kAllAxes) {
      if (origin[a] < 0 || origin[a] + extent[a] > dims[a]) return false;
    }
    for (int z = 0; z < extent.z; ++z)
      for (int y = 0; y < extent.y; ++y)
        for (int x = 0; x < extent.x; ++x)
          if (used_[rack_.BaseIndex(origin + Coord{x, y, z})]) return false;
    return true;
  }

  void Mark(const SliceAllocation& slice) {
    for (Coord t : slice.members) used_[rack_.BaseIndex(t)] = true;
  }

  // First origin in lexicographic (x, y, z) order where some orientation
  // fits, trying orientations in the given order at each origin.
  std::optional<std::pair<Coord, Coord>> FirstFit(std::span<const Coord> orientations) const {
    const Coord dims = rack_.tpu_dims();
    for (int x = 0; x < dims.x; ++x)
      for (int y = 0; y < dims.y; ++y)
        for (int z = 0; z < dims.z; ++z)
          for (Coord extent : orientations)
            if (Fits({x, y, z}, extent)) return std::pair{Coord{x, y, z}, extent};
    return std::nullopt;
  }

  bool AnyFit(Coord shape) const {
    const std::vector<Coord> orientations = DistinctOrientations(shape);
    return FirstFit(orientations).has_value();
  }

 private:
  const RackTopology& rack_;
  std::vector<bool> used_;
};

SliceAllocation MakeAllocation(int id, SliceRequest request, Coord origin, Coord extent) {
  SliceAllocation slice;
  slice.id = id;
  slice.request = request;
  slice.origin = origin;
  slice.extent = extent;
  slice.members.reserve(static_cast<std::size_t>(Volume(extent)));
  for (int z = 0; z < extent.z; ++z)
    for (int y = 0; y < extent.y; ++y)
      for (int x = 0; x < extent.x; ++x) slice.members.push_back(origin + Coord{x, y, z});
  return slice;
}

// Attempts one request; returns true and appends on success.
bool PlaceOne(const SliceRequest& request, Rng& rng, Occupancy& occupancy,
              std::vector<SliceAllocation>& out) {
  std::vector<Coord> orientations = DistinctOrientations(request.shape);
  rng.Shuffle(std::span<Coord>(orientations));
  auto fit = occupancy.FirstFit(orientations);
  if (!fit) return false;
  out.push_back(MakeAllocation(static_cast<int>(out.size()), request, fit->first, fit->second));
  occupancy.Mark(out.back());
  return true;
}

}  // namespace

SparePlacement::SparePlacement(Coord offset) : offset_(offset) {
  if (std::find(kSparePlacementCandidates.begin(), kSparePlacementCandidates.end(), offset) ==
      kSparePlacementCandidates.end()) {
    throw DomainError("invalid spare placement " + ToString(offset));
  }
}

RackTopology::RackTopology(const RackOptions& options)
    : tpu_dims_(options.tpu_dims),
      server_dims_(options.server_dims),
      spare_(options.spare),
      nominal_bandwidth_(options.nominal_bandwidth) {
  for (Axis a : kAllAxes) {
    if (tpu_dims_[a] <= 0 || server_dims_[a] <= 0 || tpu_dims_[a] % server_dims_[a] != 0) {
      throw DomainError("TPU dims must be positive multiples of server dims");
    }
    server_extent_[a] = tpu_dims_[a] / server_dims_[a];
  }
  if (options.fibers_per_server_pair < 0) throw DomainError("negative fiber budget");
  if (!(nominal_bandwidth_ > 0.0)) throw DomainError("bandwidth must be positive");

  for (int x = 0; x < server_dims_.x; ++x)
    for (int y = 0; y < server_dims_.y; ++y)
      for (int z = 0; z < server_dims_.z; ++z) servers_.push_back({x, y, z});
  if (spare_) servers_.push_back(spare_->offset());
  std::sort(servers_.begin(), servers_.end());

  for (std::size_t i = 0; i < servers_.size(); ++i) {
    for (std::size_t j = i + 1; j < servers_.size(); ++j) {
      if (ManhattanDistance(servers_[i], servers_[j]) == 1) {
        server_links_.push_back({servers_[i], servers_[j], options.fibers_per_server_pair});
      }
    }
  }
}

RackTopology BuildRack(std::optional<SparePlacement> spare) {
  RackOptions options;
  options.spare = spare;
  return RackTopology(options);
}

int RackTopology::tpu_count() const {
  return base_tpu_count() + (spare_ ? tpus_per_server() : 0);
}

std::optional<Coord> RackTopology::spare_server() const {
  if (!spare_) return std::nullopt;
  return spare_->offset();
}

std::vector<Coord> RackTopology::spare_tpus() const {
  if (!spare_) return {};
  return TpusOfServer(spare_->offset());
}

bool RackTopology::InBaseRack(Coord tpu) const {
  for (Axis a : kAllAxes)
    if (tpu[a] < 0 || tpu[a] >= tpu_dims_[a]) return false;
  return true;
}

bool RackTopology::IsSpareTpu(Coord tpu) const {
  return spare_ && ServerOf(tpu) == spare_->offset();
}

Coord RackTopology::ServerOf(Coord tpu) const {
  return {FloorDiv(tpu.x, server_extent_.x), FloorDiv(tpu.y, server_extent_.y),
          FloorDiv(tpu.z, server_extent_.z)};
}

std::vector<Coord> RackTopology::TpusOfServer(Coord server) const {
  std::vector<Coord> out;
  for (int x = 0; x < server_extent_.x; ++x)
    for (int y = 0; y < server_extent_.y; ++y)
      for (int z = 0; z < server_extent_.z; ++z)
        out.push_back({server.x * server_extent_.x + x, server.y * server_extent_.y + y,
                       server.z * server_extent_.z + z});
  std::sort(out.begin(), out.end());
  return out;
}

std::array<Coord, 6> RackTopology::TorusNeighbors(Coord tpu) const {
  if (!InBaseRack(tpu)) throw DomainError("TPU " + ToString(tpu) + " is not in the torus");
  std::array<Coord, 6> out;
  std::size_t i = 0;
  for (Axis a : kAllAxes) {
    for (int step : {+1, -1}) {
      Coord n = tpu;
      n[a] = Mod(n[a] + step, tpu_dims_[a]);
      out[i++] = n;
    }
  }
  return out;
}

std::optional<int> RackTopology::FiberBudget(Coord server_a, Coord server_b) const {
  if (server_b < server_a) std::swap(server_a, server_b);
  for (const ServerLink& link : server_links_)
    if (link.a == server_a && link.b == server_b) return link.fibers;
  return std::nullopt;
}

double RackTopology::LinkBandwidth(Coord from, Coord to) const {
  auto it = link_bandwidth_.find({from, to});
  return it == link_bandwidth_.end() ? nominal_bandwidth_ : it->second;
}

RackTopology RackTopology::WithLinkBandwidth(Coord from, Coord to, double bandwidth) const {
  if (!(bandwidth >= 0.0)) throw DomainError("negative link bandwidth");
  RackTopology copy = *this;
  copy.link_bandwidth_[{from, to}] = bandwidth;
  return copy;
}

RackTopology RackTopology::WithScaledBandwidth(double factor) const {
  if (!(factor > 0.0)) throw DomainError("bandwidth scale must be positive");
  RackTopology copy = *this;
  copy.nominal_bandwidth_ *= factor;
  for (auto& [link, bw] : copy.link_bandwidth_) bw *= factor;
  return copy;
}

void Validate(const SliceRequest& request, const RackTopology& rack) {
  for (Axis a : kAllAxes) {
    if (request.shape[a] <= 0) throw DomainError("slice dimensions must be positive");
  }
  if (Volume(request.shape) > rack.base_tpu_count()) {
    throw DomainError("slice " + ToString(request.shape) + " larger than the rack");
  }
  // Some orientation must fit the rack's dimensions.
  for (Coord extent : DistinctOrientations(request.shape)) {
    bool ok = true;
    for (Axis a : kAllAxes) ok = ok && extent[a] <= rack.tpu_dims()[a];
    if (ok) return;
  }
  throw DomainError("slice " + ToString(request.shape) + " does not fit the rack");
}

bool SliceAllocation::contiguous() const {
  for (std::size_t i = 0; i < members.size(); ++i)
    if (members[i] != origin + LocalCoord(i)) return false;
  return true;
}

Coord SliceAllocation::LocalCoord(std::size_t index) const {
  const int i = static_cast<int>(index);
  return {i % extent.x, (i / extent.x) % extent.y, i / (extent.x * extent.y)};
}

std::size_t SliceAllocation::IndexOf(Coord local) const {
  return static_cast<std::size_t>(local.x + extent.x * (local.y + extent.y * local.z));
}

std::optional<std::size_t> SliceAllocation::FindMember(Coord tpu) const {
  auto it = std::find(members.begin(), members.end(), tpu);
  if (it == members.end()) return std::nullopt;
  return static_cast<std::size_t>(it - members.begin());
}

std::vector<Coord> SliceAllocation::tpus() const {
  std::vector<Coord> out = members;
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Coord> SliceAllocation::RingNeighbors(Coord tpu) const {
  auto index = FindMember(tpu);
  if (!index) throw DomainError("TPU " + ToString(tpu) + " is not in slice");
  const Coord local = LocalCoord(*index);
  std::vector<Coord> out;
  for (Axis a : kAllAxes) {
    if (extent[a] < 2) continue;
    for (int step : {+1, -1}) {
      Coord n = local;
      n[a] = Mod(n[a] + step, extent[a]);
      const Coord member = members[IndexOf(n)];
      if (std::find(out.begin(), out.end(), member) == out.end()) out.push_back(member);
    }
  }
  return out;
}

void SliceAllocation::Patch(Coord failed, Coord replacement) {
  auto index = FindMember(failed);
  if (!index) throw DomainError("TPU " + ToString(failed) + " is not in slice");
  members[*index] = replacement;
}

AllocationResult AllocateSlices(const RackTopology& rack, std::span<const SliceRequest> requests,
                                std::uint64_t seed) {
  Rng rng(seed);
  Occupancy occupancy(rack);
  AllocationResult result;
  for (std::size_t i = 0; i < requests.size(); ++i) {
    Validate(requests[i], rack);
    if (!PlaceOne(requests[i], rng, occupancy, result.allocations)) result.skipped.push_back(i);
  }
  return result;
}

SliceDistribution::SliceDistribution(std::vector<WeightedShape> shapes)
    : shapes_(std::move(shapes)) {
  for (const WeightedShape& s : shapes_) {
    if (!(s.weight >= 0.0)) throw DomainError("negative slice weight");
    for (Axis a : kAllAxes)
      if (s.shape[a] <= 0) throw DomainError("slice dimensions must be positive");
    total_weight_ += s.weight;
  }
  if (!(total_weight_ > 0.0)) throw DomainError("slice distribution has no mass");
}

SliceDistribution SliceDistribution::Default() {
  return SliceDistribution({{{1, 1, 1}, 1.0},
                            {{2, 2, 1}, 1.0},
                            {{2, 2, 2}, 1.0},
                            {{4, 2, 2}, 1.0},
                            {{4, 4, 2}, 1.0},
                            {{4, 4, 4}, 1.0}});
}

SliceRequest SliceDistribution::Sample(Rng& rng) const {
  double u = rng.UniformUnit() * total_weight_;
  for (const WeightedShape& s : shapes_) {
    if (u < s.weight) return {s.shape};
    u -= s.weight;
  }
  // Rounding at the top end; return the last shape with positive weight.
  for (auto it = shapes_.rbegin(); it != shapes_.rend(); ++it)
    if (it->weight > 0.0) return {it->shape};
  return {shapes_.back().shape};
}

FillResult FillRack(const RackTopology& rack, const SliceDistribution& distribution,
                    std::uint64_t seed) {
  for (const WeightedShape& s : distribution.shapes()) Validate(SliceRequest{s.shape}, rack);
  Rng rng(seed);
  Occupancy occupancy(rack);
  FillResult result;
  auto any_fits = [&] {
    for (const WeightedShape& s : distribution.shapes())
      if (s.weight > 0.0 && occupancy.AnyFit(s.shape)) return true;
    return false;
  };
  while (any_fits()) {
    const SliceRequest request = distribution.Sample(rng);
    result.requests.push_back(request);
    if (!PlaceOne(request, rng, occupancy, result.allocations)) {
      result.skipped.push_back(result.requests.size() - 1);
    }
  }
  return result;
}

std::vector<std::pair<Coord, Coord>> RingLinks(const SliceAllocation& slice, Axis axis) {
  std::vector<std::pair<Coord, Coord>> links;
  const int length = slice.extent[axis];
  if (length < 2) return links;
  for (std::size_t i = 0; i < slice.members.size(); ++i) {
    Coord local = slice.LocalCoord(i);
    Coord next = local;
    next[axis] = Mod(local[axis] + 1, length);
    links.emplace_back(slice.members[i], slice.members[slice.IndexOf(next)]);
  }
  return links;
}

double RingBandwidth(const RackTopology& rack, const SliceAllocation& slice, Axis axis) {
  for (Coord t : slice.members) {
    if (!rack.Contains(t)) throw DomainError("slice member " + ToString(t) + " not on rack");
  }
  double bottleneck = kNoCommunication;
  for (const auto& [from, to] : RingLinks(slice, axis)) {
    bottleneck = std::min(bottleneck, rack.LinkBandwidth(from, to));
  }
  return bottleneck;
}

}  // namespace lumion
