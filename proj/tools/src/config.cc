#include "config.h"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <initializer_list>

#include "lumion/error.h"
#include "lumion/json_io.h"

namespace lumion::cli {
namespace {

using nlohmann::json;

void Keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

int Int(const json& v, const std::string& where) {
  if (!v.is_number_integer()) throw ConfigError(where + " must be an integer");
  const auto x = v.get<std::int64_t>();
  if (x < INT32_MIN || x > INT32_MAX) throw ConfigError(where + " is out of range");
  return static_cast<int>(x);
}

std::uint64_t UInt(const json& v, const std::string& where) {
  if (!v.is_number_unsigned()) throw ConfigError(where + " must be a non-negative integer");
  return v.get<std::uint64_t>();
}

double Real(const json& v, const std::string& where) {
  if (!v.is_number()) throw ConfigError(where + " must be a number");
  return v.get<double>();
}

const json& Array(const json& v, const std::string& where) {
  if (!v.is_array()) throw ConfigError(where + " must be an array");
  return v;
}

void ParseSpares(const json& j, SparesConfig& s) {
  Keys(j, "spares", {"slo_percent", "tpu_groups", "server_groups", "granularities",
                     "probability_ranges", "population"});
  if (j.contains("slo_percent")) s.slo_percent = Real(j["slo_percent"], "spares.slo_percent");
  if (j.contains("tpu_groups")) s.tpu_groups = Int(j["tpu_groups"], "spares.tpu_groups");
  if (j.contains("server_groups")) s.server_groups = Int(j["server_groups"], "spares.server_groups");
  if (j.contains("granularities")) {
    s.granularities.clear();
    for (const json& g : Array(j["granularities"], "spares.granularities")) {
      if (!g.is_string()) throw ConfigError("spares.granularities entries must be strings");
      s.granularities.push_back(ParseGranularity(g.get<std::string>()));
    }
  }
  if (j.contains("probability_ranges")) {
    s.probability_ranges.clear();
    for (const json& r : Array(j["probability_ranges"], "spares.probability_ranges")) {
      if (!r.is_array() || r.size() != 2) {
        throw ConfigError("spares.probability_ranges entries must be [lo, hi]");
      }
      s.probability_ranges.push_back({Real(r[0], "probability range"), Real(r[1], "probability range")});
    }
  }
  if (j.contains("population")) {
    const json& pop = j["population"];
    s.population = SrgPopulationFromJson(pop.is_string() ? ReadJsonFile(pop.get<std::string>()) : pop);
  }
}

void ParseRouting(const json& j, RoutingConfig& r) {
  Keys(j, "routing", {"max_hops", "max_nodes", "ks", "trials", "placement_trials"});
  if (j.contains("max_hops")) r.max_hops = Int(j["max_hops"], "routing.max_hops");
  if (j.contains("max_nodes")) r.max_nodes = UInt(j["max_nodes"], "routing.max_nodes");
  if (j.contains("ks")) {
    r.ks.clear();
    for (const json& k : Array(j["ks"], "routing.ks")) r.ks.push_back(Int(k, "routing.ks"));
  }
  if (j.contains("trials")) r.trials = Int(j["trials"], "routing.trials");
  if (j.contains("placement_trials")) {
    r.placement_trials = Int(j["placement_trials"], "routing.placement_trials");
  }
}

void ParseMesh(const json& j, MeshConfig& m) {
  Keys(j, "mesh", {"rows", "cols", "requests"});
  if (j.contains("rows")) m.rows = Int(j["rows"], "mesh.rows");
  if (j.contains("cols")) m.cols = Int(j["cols"], "mesh.cols");
  if (j.contains("requests")) {
    const json& r = j["requests"];
    if (r.is_array()) {
      for (const json& pair : r) {
        if (!pair.is_array() || pair.size() != 2) {
          throw ConfigError("mesh.requests entries must be [src_port, dst_port]");
        }
        m.request_list.push_back({Int(pair[0], "mesh request port"), Int(pair[1], "mesh request port")});
      }
      m.requests = static_cast<int>(m.request_list.size());
    } else {
      m.requests = Int(r, "mesh.requests");
    }
  }
}

void ParseTimeline(const json& j, RecoveryTimelineConfig& t) {
  Keys(j, "timeline", {"t_detect", "t_spare_search", "t_reconfigure", "t_software_restart"});
  if (j.contains("t_detect")) t.t_detect = Real(j["t_detect"], "timeline.t_detect");
  if (j.contains("t_spare_search")) t.t_spare_search = Real(j["t_spare_search"], "timeline.t_spare_search");
  if (j.contains("t_reconfigure")) t.t_reconfigure = Real(j["t_reconfigure"], "timeline.t_reconfigure");
  if (j.contains("t_software_restart")) {
    t.t_software_restart = Real(j["t_software_restart"], "timeline.t_software_restart");
  }
}

}  // namespace

ScenarioOptions ScenarioConfig::scenario_options(unsigned threads) const {
  ScenarioOptions o;
  o.racks = racks;
  o.seed = seed;
  o.distribution = SliceDistribution(slice_distribution);
  o.failures = failure_count_range;
  o.placement = SparePlacement(spare_placement);
  o.policies = policies;
  o.routing = exact_options();
  o.timeline = timeline;
  o.threads = threads;
  return o;
}

ScenarioConfig ParseScenarioConfig(const json& j) {
  Keys(j, "scenario", {"racks", "seed", "slice_distribution", "failure_count_range",
                       "spare_placement", "policies", "timeline", "spares", "routing", "mesh"});
  ScenarioConfig c;
  if (j.contains("racks")) c.racks = Int(j["racks"], "racks");
  if (j.contains("seed")) c.seed = UInt(j["seed"], "seed");
  if (j.contains("slice_distribution")) {
    c.slice_distribution.clear();
    for (const json& e : Array(j["slice_distribution"], "slice_distribution")) {
      Keys(e, "slice_distribution entry", {"shape", "weight"});
      if (!e.contains("shape")) throw ConfigError("slice_distribution entry is missing 'shape'");
      WeightedShape w{CoordFromJson(e["shape"]), 1.0};
      if (e.contains("weight")) w.weight = Real(e["weight"], "slice_distribution.weight");
      c.slice_distribution.push_back(w);
    }
  }
  if (j.contains("failure_count_range")) {
    const json& f = j["failure_count_range"];
    Keys(f, "failure_count_range", {"min", "max"});
    if (f.contains("min")) c.failure_count_range.min = Int(f["min"], "failure_count_range.min");
    if (f.contains("max")) c.failure_count_range.max = Int(f["max"], "failure_count_range.max");
  }
  if (j.contains("spare_placement")) c.spare_placement = CoordFromJson(j["spare_placement"]);
  if (j.contains("policies")) {
    c.policies.clear();
    for (const json& p : Array(j["policies"], "policies")) {
      if (!p.is_string()) throw ConfigError("policies entries must be strings");
      const Policy policy = ParsePolicy(p.get<std::string>());
      if (std::find(c.policies.begin(), c.policies.end(), policy) == c.policies.end()) {
        c.policies.push_back(policy);
      }
    }
  }
  if (j.contains("timeline")) ParseTimeline(j["timeline"], c.timeline);
  if (j.contains("spares")) ParseSpares(j["spares"], c.spares);
  if (j.contains("routing")) ParseRouting(j["routing"], c.routing);
  if (j.contains("mesh")) ParseMesh(j["mesh"], c.mesh);
  ValidateConfig(c);
  return c;
}

void ValidateConfig(const ScenarioConfig& c) {
  if (c.racks < 1) throw ConfigError("racks must be at least 1");
  if (c.failure_count_range.min < 0 || c.failure_count_range.max < c.failure_count_range.min) {
    throw ConfigError("failure_count_range needs 0 <= min <= max");
  }
  if (c.policies.empty()) throw ConfigError("at least one policy is required");
  try {
    SliceDistribution dist(c.slice_distribution);
    const RackTopology rack = BuildRack();
    for (const WeightedShape& w : dist.shapes()) Validate(SliceRequest{w.shape}, rack);
    SparePlacement placement(c.spare_placement);
    MakeRecoveryTimeline(c.timeline);
    SloPolicy slo(c.spares.slo_percent);
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  if (c.spares.tpu_groups < 0 || c.spares.server_groups < 0) {
    throw ConfigError("spares group counts must be >= 0");
  }
  for (const ProbabilityRange& r : c.spares.probability_ranges) {
    if (!(r.lo >= 0.0 && r.lo <= r.hi && r.hi <= 1.0)) {
      throw ConfigError("probability range needs 0 <= lo <= hi <= 1");
    }
  }
  if (c.routing.max_hops < 1) throw ConfigError("routing.max_hops must be at least 1");
  if (c.routing.ks.empty()) throw ConfigError("routing.ks must not be empty");
  for (int k : c.routing.ks)
    if (k < 1) throw ConfigError("routing.ks entries must be at least 1");
  if (c.routing.trials < 0) throw ConfigError("routing.trials must be >= 0");
  if (c.routing.placement_trials < kMinPlacementTrials) {
    throw ConfigError("routing.placement_trials must be at least " +
                      std::to_string(kMinPlacementTrials));
  }
  if (c.mesh.rows < 1 || c.mesh.cols < 1) throw ConfigError("mesh dimensions must be at least 1");
  if (c.mesh.requests < 0) throw ConfigError("mesh.requests must be >= 0");
}

json ToJson(const ScenarioConfig& c) {
  json dist = json::array();
  for (const WeightedShape& w : c.slice_distribution) {
    dist.push_back({{"shape", lumion::ToJson(w.shape)}, {"weight", w.weight}});
  }
  json policies = json::array();
  for (Policy p : c.policies) policies.push_back(ToString(p));
  json grans = json::array();
  for (Granularity g : c.spares.granularities) grans.push_back(ToString(g));
  json ranges = json::array();
  for (const ProbabilityRange& r : c.spares.probability_ranges) ranges.push_back({r.lo, r.hi});
  json spares = {{"slo_percent", c.spares.slo_percent},
                 {"tpu_groups", c.spares.tpu_groups},
                 {"server_groups", c.spares.server_groups},
                 {"granularities", grans},
                 {"probability_ranges", ranges}};
  if (c.spares.population) spares["population"] = SrgPopulationToJson(*c.spares.population);
  json mesh = {{"rows", c.mesh.rows}, {"cols", c.mesh.cols}};
  if (c.mesh.request_list.empty()) {
    mesh["requests"] = c.mesh.requests;
  } else {
    json list = json::array();
    for (const MeshRequest& r : c.mesh.request_list) list.push_back({r.src_port, r.dst_port});
    mesh["requests"] = list;
  }
  return {{"racks", c.racks},
          {"seed", c.seed},
          {"slice_distribution", dist},
          {"failure_count_range",
           {{"min", c.failure_count_range.min}, {"max", c.failure_count_range.max}}},
          {"spare_placement", lumion::ToJson(c.spare_placement)},
          {"policies", policies},
          {"timeline",
           {{"t_detect", c.timeline.t_detect},
            {"t_spare_search", c.timeline.t_spare_search},
            {"t_reconfigure", c.timeline.t_reconfigure},
            {"t_software_restart", c.timeline.t_software_restart}}},
          {"spares", spares},
          {"routing",
           {{"max_hops", c.routing.max_hops},
            {"max_nodes", c.routing.max_nodes},
            {"ks", c.routing.ks},
            {"trials", c.routing.trials},
            {"placement_trials", c.routing.placement_trials}}},
          {"mesh", mesh}};
}

std::string ConfigDigest(const ScenarioConfig& c) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : ToJson(c).dump()) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json ReadJsonFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("'" + path + "' is not valid JSON: " + e.what());
  }
}

ScenarioConfig LoadScenarioConfig(const std::string& path) {
  return ParseScenarioConfig(ReadJsonFile(path));
}

}  // namespace lumion::cli
