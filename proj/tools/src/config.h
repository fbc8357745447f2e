#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "lumion/fault_sim.h"
#include "lumion/mzi_mesh.h"
#include "lumion/rack_routing.h"
#include "lumion/srg.h"
#include "lumion/torus.h"

namespace lumion::cli {

struct ProbabilityRange {
  double lo = 0.0;
  double hi = 0.0;
};

struct SparesConfig {
  double slo_percent = 95.0;
  int tpu_groups = 64;
  int server_groups = 16;
  std::vector<Granularity> granularities{Granularity::kTpu, Granularity::kServer};
  std::vector<ProbabilityRange> probability_ranges{
      {0.0, 0.0}, {0.001, 0.005}, {0.005, 0.01}, {0.01, 0.02}, {0.02, 0.05}};
  std::optional<std::vector<SrgSpec>> population;
};

struct RoutingConfig {
  int max_hops = kEnsembleRouting.max_hops;
  std::uint64_t max_nodes = kEnsembleRouting.max_nodes;
  std::vector<int> ks{5, 10};
  int trials = 200;
  int placement_trials = 500;
};

struct MeshConfig {
  int rows = 256;
  int cols = 256;
  int requests = 64;
  std::vector<MeshRequest> request_list;  // overrides `requests` when set
};

// Every knob the subcommands read. Defaults are the documented baseline.
struct ScenarioConfig {
  int racks = 1024;
  std::uint64_t seed = 1;
  std::vector<WeightedShape> slice_distribution = SliceDistribution::Default().shapes();
  FailureCountRange failure_count_range{};
  Coord spare_placement = kDefaultSpareOffset;
  std::vector<Policy> policies{kAllPolicies.begin(), kAllPolicies.end()};
  RecoveryTimelineConfig timeline{};
  SparesConfig spares{};
  RoutingConfig routing{};
  MeshConfig mesh{};

  ExactOptions exact_options() const { return {routing.max_hops, 0.0, routing.max_nodes}; }
  ScenarioOptions scenario_options(unsigned threads) const;
};

// Throws ConfigError on unknown keys, wrong types or out-of-range values.
ScenarioConfig ParseScenarioConfig(const nlohmann::json& j);
ScenarioConfig LoadScenarioConfig(const std::string& path);
// Re-checks values after flag overrides.
void ValidateConfig(const ScenarioConfig& config);

nlohmann::json ToJson(const ScenarioConfig& config);

// 64-bit FNV-1a over the canonical JSON form, as 16 hex digits.
std::string ConfigDigest(const ScenarioConfig& config);

nlohmann::json ReadJsonFile(const std::string& path);

}  // namespace lumion::cli
