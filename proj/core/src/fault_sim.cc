#include "lumion/fault_sim.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include "lumion/error.h"
#include "parallel.h"

namespace lumion {
namespace {

// Index of the slice owning each failed TPU; DomainError for unallocated ones.
std::vector<std::size_t> OwningSlices(std::span<const SliceAllocation> allocations,
                                      std::span<const Coord> failed) {
  std::vector<std::size_t> owners;
  owners.reserve(failed.size());
  for (Coord f : failed) {
    std::size_t i = 0;
    while (i < allocations.size() && !allocations[i].FindMember(f)) ++i;
    if (i == allocations.size()) throw DomainError("failed TPU " + ToString(f) + " is not allocated");
    owners.push_back(i);
  }
  return owners;
}

void CheckDistinct(std::span<const Coord> failed) {
  std::set<Coord> seen(failed.begin(), failed.end());
  if (seen.size() != failed.size()) throw DomainError("failed TPUs must be distinct");
}

void Finish(PolicyOutcome& o) { o.overprovisioning = o.replacements - o.failed; }

}  // namespace

std::string ToString(Policy p) {
  switch (p) {
    case Policy::kLumion:
      return "lumion";
    case Policy::kTpuMigration:
      return "tpu_migration";
    case Policy::kKubernetes:
      return "kubernetes";
  }
  return "unknown";
}

Policy ParsePolicy(const std::string& s) {
  std::string key;
  for (char c : s) {
    if (c == '-') c = '_';
    key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  for (Policy p : kAllPolicies)
    if (key == ToString(p)) return p;
  if (key == "k8s") return Policy::kKubernetes;
  throw ConfigError("unknown policy '" + s + "'");
}

std::vector<Policy> ParsePolicyList(const std::string& s) {
  std::vector<Policy> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const std::size_t comma = std::min(s.find(',', start), s.size());
    std::string item = s.substr(start, comma - start);
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (item.empty()) throw ConfigError("empty entry in policy list '" + s + "'");
    const Policy p = ParsePolicy(item);
    if (std::find(out.begin(), out.end(), p) == out.end()) out.push_back(p);
    start = comma + 1;
  }
  return out;
}

PolicyOutcome ApplyLumion(const RackTopology& rack, std::span<const SliceAllocation> allocations,
                          const FailureEvent& event, const ExactOptions& routing) {
  CheckDistinct(event.failed_tpus);
  const std::vector<std::size_t> owners = OwningSlices(allocations, event.failed_tpus);
  PolicyOutcome o;
  o.policy = Policy::kLumion;
  o.failed = static_cast<int>(event.failed_tpus.size());
  o.affected_slices = static_cast<int>(std::set<std::size_t>(owners.begin(), owners.end()).size());
  if (o.failed == 0) return o;
  PatchPlan patch;
  try {
    patch = PlanPatch(rack, allocations, event.failed_tpus);
  } catch (const NoSpareAvailable&) {
    o.feasible = false;
    o.failed = static_cast<int>(event.failed_tpus.size());
    return o;
  }
  const FiberGraph graph = BuildLoadedFiberGraph(rack, allocations, event.failed_tpus);
  const CircuitPlan plan = RouteExact(graph, patch.requests, routing);
  o.replacements = static_cast<int>(patch.assignment.size());
  o.extra_fibers = plan.total_extra;
  o.routing_optimal = plan.proven_optimal;
  Finish(o);
  return o;
}

PolicyOutcome ApplyTpuMigration(std::span<const SliceAllocation> allocations,
                                const FailureEvent& event) {
  CheckDistinct(event.failed_tpus);
  const std::vector<std::size_t> owners = OwningSlices(allocations, event.failed_tpus);
  const std::set<std::size_t> affected(owners.begin(), owners.end());
  PolicyOutcome o;
  o.policy = Policy::kTpuMigration;
  o.failed = static_cast<int>(event.failed_tpus.size());
  o.affected_slices = static_cast<int>(affected.size());
  o.spare_racks_touched = o.affected_slices;
  for (std::size_t i : affected) o.replacements += allocations[i].size();
  Finish(o);
  return o;
}

PolicyOutcome ApplyKubernetes(const RackTopology& rack,
                              std::span<const SliceAllocation> allocations,
                              const FailureEvent& event) {
  CheckDistinct(event.failed_tpus);
  const std::vector<std::size_t> owners = OwningSlices(allocations, event.failed_tpus);
  std::set<Coord> evicted;
  for (Coord f : event.failed_tpus) evicted.insert(rack.ServerOf(f));
  PolicyOutcome o;
  o.policy = Policy::kKubernetes;
  o.failed = static_cast<int>(event.failed_tpus.size());
  o.affected_slices = static_cast<int>(std::set<std::size_t>(owners.begin(), owners.end()).size());
  o.evicted_servers = static_cast<int>(evicted.size());
  o.replacements = kKubernetesServerAccelerators * o.evicted_servers;
  o.stranded_healthy = rack.tpus_per_server() * o.evicted_servers - o.failed;
  Finish(o);
  return o;
}

PolicyOutcome ApplyPolicy(Policy policy, const RackTopology& rack,
                          std::span<const SliceAllocation> allocations, const FailureEvent& event,
                          const ExactOptions& routing) {
  switch (policy) {
    case Policy::kLumion:
      return ApplyLumion(rack, allocations, event, routing);
    case Policy::kTpuMigration:
      return ApplyTpuMigration(allocations, event);
    case Policy::kKubernetes:
      return ApplyKubernetes(rack, allocations, event);
  }
  throw DomainError("unknown policy");
}

double RecoveryTimeline::reconfigure_fraction() const {
  const double t = total();
  return t > 0.0 ? t_reconfigure / t : 0.0;
}

RecoveryTimeline MakeRecoveryTimeline(const RecoveryTimelineConfig& c) {
  for (double v : {c.t_detect, c.t_spare_search, c.t_reconfigure, c.t_software_restart}) {
    if (!std::isfinite(v) || v < 0.0) throw DomainError("timeline phases must be finite and >= 0");
  }
  return {c.t_detect, c.t_spare_search, c.t_reconfigure, c.t_software_restart};
}

std::vector<PolicyStats> Aggregate(std::span<const RackRecord> records,
                                   std::span<const Policy> policies) {
  std::vector<PolicyStats> out;
  for (std::size_t p = 0; p < policies.size(); ++p) {
    PolicyStats s;
    s.policy = policies[p];
    double over = 0.0, repl = 0.0, fib = 0.0, stranded = 0.0;
    for (const RackRecord& r : records) {
      const PolicyOutcome& o = r.outcomes.at(p);
      if (!o.feasible) {
        ++s.infeasible;
        continue;
      }
      ++s.racks;
      over += o.overprovisioning;
      repl += o.replacements;
      fib += o.extra_fibers;
      stranded += o.stranded_healthy;
      s.routing_optimal = s.routing_optimal && o.routing_optimal;
    }
    if (s.racks > 0) {
      const double n = s.racks;
      s.mean_overprovisioning = over / n;
      s.mean_replacements = repl / n;
      s.mean_extra_fibers = fib / n;
      s.mean_stranded = stranded / n;
      double sq_over = 0.0, sq_fib = 0.0;
      for (const RackRecord& r : records) {
        const PolicyOutcome& o = r.outcomes.at(p);
        if (!o.feasible) continue;
        sq_over += (o.overprovisioning - s.mean_overprovisioning) *
                   (o.overprovisioning - s.mean_overprovisioning);
        sq_fib += (o.extra_fibers - s.mean_extra_fibers) * (o.extra_fibers - s.mean_extra_fibers);
      }
      s.stddev_overprovisioning = std::sqrt(sq_over / n);
      s.stddev_extra_fibers = std::sqrt(sq_fib / n);
    }
    out.push_back(s);
  }
  return out;
}

ScenarioReport EvaluateStates(const ScenarioOptions& options, std::span<const RackState> states) {
  if (options.policies.empty()) throw DomainError("at least one policy is required");
  const RackTopology rack = BuildRack(options.placement);
  ScenarioReport report;
  report.racks = static_cast<int>(states.size());
  report.seed = options.seed;
  report.policies = options.policies;
  report.spare_offset = options.placement.offset();
  report.timeline = MakeRecoveryTimeline(options.timeline);
  report.records.resize(states.size());
  internal::ParallelFor(states.size(), ResolveThreadCount(options.threads), [&](std::size_t i) {
    const RackState& state = states[i];
    RackRecord& rec = report.records[i];
    rec.rack_id = static_cast<int>(i);
    rec.seed = state.seed;
    rec.slices = static_cast<int>(state.allocations.size());
    for (const SliceAllocation& s : state.allocations) rec.allocated_tpus += s.size();
    rec.failed = state.failed;
    const FailureEvent event{rec.rack_id, state.failed, Granularity::kTpu};
    for (Policy p : options.policies)
      rec.outcomes.push_back(ApplyPolicy(p, rack, state.allocations, event, options.routing));
  });
  report.stats = Aggregate(report.records, report.policies);
  return report;
}

ScenarioReport RunScenario(const ScenarioOptions& options) {
  if (options.racks < 1) throw DomainError("racks must be at least 1");
  const RackTopology rack = BuildRack(options.placement);
  std::vector<RackState> states(static_cast<std::size_t>(options.racks));
  internal::ParallelFor(states.size(), ResolveThreadCount(options.threads), [&](std::size_t i) {
    states[i] = GenerateRackState(rack, options.distribution, options.failures,
                                  MixSeed(options.seed, i));
  });
  return EvaluateStates(options, states);
}

}  // namespace lumion
