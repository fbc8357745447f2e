#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <string>
#include <thread>

#include "lumion/error.h"
#include "lumion/rack_routing.h"
#include "lumion/rng.h"
#include "parallel.h"

namespace lumion {
namespace {

constexpr std::uint64_t kFailureStream = 0x6661696cull;  // "fail"

double Mean(std::span<const int> values) {
  if (values.empty()) return 0.0;
  double sum = 0.0;
  for (int v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

double StdDev(std::span<const int> values, double mean) {
  if (values.empty()) return 0.0;
  double sq = 0.0;
  for (int v : values) sq += (v - mean) * (v - mean);
  return std::sqrt(sq / static_cast<double>(values.size()));
}

}  // namespace

RackState GenerateRackState(const RackTopology& rack, const SliceDistribution& distribution,
                            FailureCountRange failures, std::uint64_t seed) {
  if (failures.min < 0 || failures.max < failures.min) {
    throw DomainError("invalid failure count range");
  }
  RackState state;
  state.seed = seed;
  state.allocations = FillRack(rack, distribution, seed).allocations;

  std::vector<Coord> allocated;
  for (const SliceAllocation& s : state.allocations)
    allocated.insert(allocated.end(), s.members.begin(), s.members.end());
  std::sort(allocated.begin(), allocated.end());

  Rng rng(MixSeed(seed, kFailureStream));
  const int count =
      std::min(rng.UniformInt(failures.min, failures.max), static_cast<int>(allocated.size()));
  // Partial Fisher-Yates: the first `count` entries are the sample.
  for (int i = 0; i < count; ++i) {
    const auto j = static_cast<std::size_t>(i) +
                   static_cast<std::size_t>(rng.UniformIndex(allocated.size() - static_cast<std::size_t>(i)));
    std::swap(allocated[static_cast<std::size_t>(i)], allocated[j]);
  }
  state.failed.assign(allocated.begin(), allocated.begin() + count);
  std::sort(state.failed.begin(), state.failed.end());
  return state;
}

PatchInstance MakePatchInstance(const RackTopology& rack,
                                std::span<const SliceAllocation> allocations,
                                std::span<const Coord> failed) {
  return {PlanPatch(rack, allocations, failed), BuildLoadedFiberGraph(rack, allocations, failed)};
}

unsigned ResolveThreadCount(unsigned requested) {
  if (requested != 0) return requested;
  if (const char* env = std::getenv("LUMION_BENCH_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
      // Unparseable values fall through to the hardware default.
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

PlacementSweepResult PlacementSweep(const SliceDistribution& distribution, int trials,
                                    std::uint64_t seed, FailureCountRange failures,
                                    const ExactOptions& options, unsigned threads) {
  if (trials < kMinPlacementTrials) {
    throw DomainError("placement sweep needs at least " + std::to_string(kMinPlacementTrials) +
                      " trials");
  }
  const RackTopology base = BuildRack();
  std::vector<RackTopology> racks;
  for (Coord offset : kSparePlacementCandidates) racks.push_back(BuildRack(SparePlacement(offset)));

  const std::size_t n = static_cast<std::size_t>(trials);
  const std::size_t positions = racks.size();
  std::vector<int> extra(n * positions, 0);
  std::vector<int> bound(n * positions, 0);
  std::vector<char> optimal(n * positions, 1);
  internal::ParallelFor(n, ResolveThreadCount(threads), [&](std::size_t t) {
    // Spare TPUs are never allocated, so one state serves every position.
    const RackState state = GenerateRackState(base, distribution, failures, MixSeed(seed, t));
    for (std::size_t p = 0; p < positions; ++p) {
      const PatchInstance inst = MakePatchInstance(racks[p], state.allocations, state.failed);
      const CircuitPlan plan = RouteExact(inst.graph, inst.patch.requests, options);
      extra[t * positions + p] = plan.total_extra;
      bound[t * positions + p] = plan.lower_bound;
      optimal[t * positions + p] = plan.proven_optimal ? 1 : 0;
    }
  });

  PlacementSweepResult result;
  for (std::size_t p = 0; p < positions; ++p) {
    PlacementStats stats{SparePlacement(kSparePlacementCandidates[p]), 0.0, 0.0, 0.0, {}, {}, true};
    for (std::size_t t = 0; t < n; ++t) {
      stats.per_trial.push_back(extra[t * positions + p]);
      stats.per_trial_lower_bound.push_back(bound[t * positions + p]);
      stats.all_optimal = stats.all_optimal && optimal[t * positions + p];
    }
    stats.mean_extra = Mean(stats.per_trial);
    stats.stddev_extra = StdDev(stats.per_trial, stats.mean_extra);
    stats.mean_lower_bound = Mean(stats.per_trial_lower_bound);
    result.ranking.push_back(std::move(stats));
  }
  std::sort(result.ranking.begin(), result.ranking.end(),
            [](const PlacementStats& a, const PlacementStats& b) {
              if (a.mean_extra != b.mean_extra) return a.mean_extra < b.mean_extra;
              return a.placement.offset() < b.placement.offset();
            });
  result.default_ranked_first = result.ranking.front().placement.offset() == kDefaultSpareOffset;
  for (const PlacementStats& s : result.ranking) {
    if (s.placement.offset() == kDefaultSpareOffset) {
      result.default_has_least_mean = s.mean_extra == result.ranking.front().mean_extra;
    }
  }
  return result;
}

std::vector<RoutingTrial> CompareRouting(const SliceDistribution& distribution, int trials,
                                         std::uint64_t seed, SparePlacement placement,
                                         FailureCountRange failures, std::span<const int> ks,
                                         const ExactOptions& options, unsigned threads) {
  if (trials < 0) throw DomainError("negative trial count");
  const RackTopology rack = BuildRack(placement);
  std::vector<RoutingTrial> out(static_cast<std::size_t>(trials));
  internal::ParallelFor(out.size(), ResolveThreadCount(threads), [&](std::size_t t) {
    const RackState state = GenerateRackState(rack, distribution, failures, MixSeed(seed, t));
    const PatchInstance inst = MakePatchInstance(rack, state.allocations, state.failed);
    RoutingTrial& trial = out[t];
    trial.seed = state.seed;
    trial.failed = static_cast<int>(state.failed.size());
    trial.requests = static_cast<int>(inst.patch.requests.size());
    const auto start = std::chrono::steady_clock::now();
    const CircuitPlan exact = RouteExact(inst.graph, inst.patch.requests, options);
    trial.exact_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    trial.exact = exact.total_extra;
    trial.exact_lower_bound = exact.lower_bound;
    trial.exact_optimal = exact.proven_optimal;
    for (int k : ks) trial.ksp.emplace_back(k, RouteKsp(inst.graph, inst.patch.requests, k).total_extra);
  });
  return out;
}

}  // namespace lumion
