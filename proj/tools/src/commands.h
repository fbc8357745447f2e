#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "config.h"
#include "report.h"

namespace lumion::cli {

// Command-line values; unset fields fall back to the config file.
struct CommandOptions {
  std::optional<std::string> config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> racks;
  std::filesystem::path out_dir = "lumion-out";
  Format format = Format::kBoth;
  std::optional<std::string> policies;
  std::string placement = "single";
  std::optional<int> rows;
  std::optional<int> cols;
  std::optional<int> requests;
};

// Config file (or defaults) with flag overrides applied, then validated.
ScenarioConfig ResolveConfig(const CommandOptions& options);

// Each command writes its artifacts under options.out_dir and a human-readable
// table to `log`. Errors propagate as ConfigError, InvariantViolation,
// RouteUnavailable or DomainError.
void RunSpares(const ScenarioConfig& config, const CommandOptions& options, std::ostream& log);
void RunSimulate(const ScenarioConfig& config, const CommandOptions& options, std::ostream& log);
void RunFibers(const ScenarioConfig& config, const CommandOptions& options, std::ostream& log);
void RunMesh(const ScenarioConfig& config, const CommandOptions& options, std::ostream& log);

// Spare sizing rows for every configured granularity and probability range.
// Per-group probabilities are lo + (hi - lo) * u_i with the same u_i for every
// range, so K is monotone across nested ranges.
std::vector<SpareRow> ComputeSpareTable(const ScenarioConfig& config);

// `count` requests between distinct perimeter ports drawn under `seed`.
std::vector<MeshRequest> RandomMeshRequests(const MziMesh& mesh, int count, std::uint64_t seed);

}  // namespace lumion::cli
