#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "config.h"
#include "lumion/fault_sim.h"
#include "lumion/mzi_mesh.h"
#include "lumion/rack_routing.h"

namespace lumion::cli {

// A computed result contradicts a property the tool guarantees.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

enum class Format { kJson, kCsv, kBoth };
Format ParseFormat(const std::string& s);
inline bool WantsJson(Format f) { return f != Format::kCsv; }
inline bool WantsCsv(Format f) { return f != Format::kJson; }

// Fixed CSV header of the per-rack report.
inline constexpr const char* kReportCsvHeader =
    "rack_id,policy,failed,replacements,overprovisioning,extra_fibers";

// Shortest round-trip decimal form, identical to the JSON encoding.
std::string FormatNumber(double v);

struct SpareRow {
  Granularity granularity = Granularity::kTpu;
  int groups = 0;
  double p_lo = 0.0;
  double p_hi = 0.0;
  double p_mean = 0.0;
  std::size_t spares = 0;
  double tail = 0.0;
};

void WriteSparesCsv(std::ostream& out, std::span<const SpareRow> rows);
nlohmann::json SparesToJson(std::span<const SpareRow> rows, double slo_percent);

void WriteReportCsv(std::ostream& out, const ScenarioReport& report);
nlohmann::json ReportToJson(const ScenarioReport& report, const std::string& digest);

void WriteFibersCsv(std::ostream& out, std::span<const RoutingTrial> trials,
                    std::span<const int> ks);
nlohmann::json FibersToJson(std::span<const RoutingTrial> trials, std::span<const int> ks);

void WritePlacementCsv(std::ostream& out, const PlacementSweepResult& sweep);
void WritePlacementTrialsCsv(std::ostream& out, const PlacementSweepResult& sweep);
nlohmann::json PlacementToJson(const PlacementSweepResult& sweep);

struct RunManifest {
  std::string command;
  std::string config_digest;
  std::string tool_version;
  std::uint64_t seed = 0;
  std::string started_at;  // UTC, ISO 8601
  std::string finished_at;
  std::vector<std::string> artifacts;
};

nlohmann::json ToJson(const RunManifest& manifest);
std::string UtcTimestamp();

void WriteText(const std::filesystem::path& path, const std::string& text);
void WriteJson(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace lumion::cli
