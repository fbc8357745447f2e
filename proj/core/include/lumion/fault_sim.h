#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lumion/coord.h"
#include "lumion/rack_routing.h"
#include "lumion/srg.h"
#include "lumion/torus.h"

namespace lumion {

enum class Policy { kLumion, kTpuMigration, kKubernetes };

inline constexpr std::array<Policy, 3> kAllPolicies = {Policy::kLumion, Policy::kTpuMigration,
                                                       Policy::kKubernetes};

// Accelerators per replacement server under the Kubernetes baseline.
inline constexpr int kKubernetesServerAccelerators = 8;

// "lumion", "tpu_migration", "kubernetes".
std::string ToString(Policy p);
// Accepts the names above (case-insensitive, '-' or '_'); throws ConfigError.
Policy ParsePolicy(const std::string& s);
// Comma-separated list; duplicates are dropped, order kept.
std::vector<Policy> ParsePolicyList(const std::string& s);

struct FailureEvent {
  int rack_id = 0;
  std::vector<Coord> failed_tpus;
  Granularity srg_granularity = Granularity::kTpu;
};

struct PolicyOutcome {
  Policy policy = Policy::kLumion;
  int failed = 0;
  int replacements = 0;
  int overprovisioning = 0;  // replacements - failed
  int extra_fibers = 0;      // Lumion only
  bool feasible = true;

  int affected_slices = 0;
  int evicted_servers = 0;        // Kubernetes
  int stranded_healthy = 0;       // Kubernetes: healthy chips on evicted servers
  int spare_racks_touched = 0;    // TPU migration: one spare rack per migrated slice
  bool routing_optimal = true;    // Lumion
};

// Patches failures in place with free spare-server TPUs and routes the
// replacement circuits exactly. Infeasible (all counts zero) when failures
// outnumber free spares. Throws DomainError if a failed TPU is not allocated.
PolicyOutcome ApplyLumion(const RackTopology& rack, std::span<const SliceAllocation> allocations,
                          const FailureEvent& event, const ExactOptions& routing = {});

// Every slice touching a failure is migrated whole.
PolicyOutcome ApplyTpuMigration(std::span<const SliceAllocation> allocations,
                                const FailureEvent& event);

// Every server holding a failure is evicted and replaced by a full server.
PolicyOutcome ApplyKubernetes(const RackTopology& rack,
                              std::span<const SliceAllocation> allocations,
                              const FailureEvent& event);

PolicyOutcome ApplyPolicy(Policy policy, const RackTopology& rack,
                          std::span<const SliceAllocation> allocations, const FailureEvent& event,
                          const ExactOptions& routing = {});

struct RecoveryTimelineConfig {
  double t_detect = 0.0;
  double t_spare_search = 0.0;
  double t_reconfigure = 1.0;
  double t_software_restart = 20.8;
};

struct RecoveryTimeline {
  double t_detect = 0.0;
  double t_spare_search = 0.0;
  double t_reconfigure = 0.0;
  double t_software_restart = 0.0;

  double total() const { return t_detect + t_spare_search + t_reconfigure + t_software_restart; }
  // t_reconfigure / total, 0 for an all-zero timeline.
  double reconfigure_fraction() const;
};

// Throws DomainError on any negative or non-finite phase.
RecoveryTimeline MakeRecoveryTimeline(const RecoveryTimelineConfig& config = {});

struct ScenarioOptions {
  int racks = 1024;
  std::uint64_t seed = 1;
  SliceDistribution distribution = SliceDistribution::Default();
  FailureCountRange failures{};
  SparePlacement placement{kDefaultSpareOffset};
  std::vector<Policy> policies{kAllPolicies.begin(), kAllPolicies.end()};
  ExactOptions routing = kEnsembleRouting;
  RecoveryTimelineConfig timeline{};
  unsigned threads = 0;  // 0: ResolveThreadCount()
};

struct RackRecord {
  int rack_id = 0;
  std::uint64_t seed = 0;
  int slices = 0;
  int allocated_tpus = 0;
  std::vector<Coord> failed;
  std::vector<PolicyOutcome> outcomes;  // ScenarioOptions::policies order
};

struct PolicyStats {
  Policy policy = Policy::kLumion;
  int racks = 0;       // feasible racks included below
  int infeasible = 0;
  double mean_overprovisioning = 0.0;
  double stddev_overprovisioning = 0.0;  // population
  double mean_replacements = 0.0;
  double mean_extra_fibers = 0.0;
  double stddev_extra_fibers = 0.0;
  double mean_stranded = 0.0;
  bool routing_optimal = true;
};

struct ScenarioReport {
  int racks = 0;
  std::uint64_t seed = 0;
  std::vector<Policy> policies;
  Coord spare_offset{};
  std::vector<RackRecord> records;  // by rack_id
  std::vector<PolicyStats> stats;   // policies order
  RecoveryTimeline timeline;
};

// Per-policy statistics over the feasible outcomes of `records`.
std::vector<PolicyStats> Aggregate(std::span<const RackRecord> records,
                                   std::span<const Policy> policies);

// Rack i uses seed MixSeed(options.seed, i); results do not depend on the
// thread count. Throws DomainError if racks < 1 or policies is empty.
ScenarioReport RunScenario(const ScenarioOptions& options);

// Evaluates the policies on caller-supplied rack states (rack ids follow the
// span order).
ScenarioReport EvaluateStates(const ScenarioOptions& options, std::span<const RackState> states);

}  // namespace lumion
