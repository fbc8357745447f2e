#include "lumion/json_io.h"

#include <algorithm>
#include <initializer_list>
#include <string>

#include "lumion/error.h"

namespace lumion {
namespace {

using nlohmann::json;

void RequireObject(const json& j, const char* what, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(std::string(what) + " must be an object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError(std::string("unknown key '") + key + "' in " + what);
  }
}

const json& Field(const json& j, const char* key, const char* what) {
  const auto it = j.find(key);
  if (it == j.end()) throw ConfigError(std::string(what) + " is missing '" + key + "'");
  return *it;
}

double Number(const json& j, const char* key, const char* what) {
  const json& v = Field(j, key, what);
  if (!v.is_number()) throw ConfigError(std::string(what) + "." + key + " must be a number");
  return v.get<double>();
}

int Integer(const json& j, const char* key, const char* what) {
  const json& v = Field(j, key, what);
  if (!v.is_number_integer()) throw ConfigError(std::string(what) + "." + key + " must be an integer");
  return v.get<int>();
}

}  // namespace

json ToJson(Coord c) { return json::array({c.x, c.y, c.z}); }

Coord CoordFromJson(const json& j) {
  if (!j.is_array() || j.size() != 3) throw ConfigError("coordinate must be [x, y, z]");
  for (const json& v : j)
    if (!v.is_number_integer()) throw ConfigError("coordinate entries must be integers");
  return {j[0].get<int>(), j[1].get<int>(), j[2].get<int>()};
}

json ToJson(const SrgSpec& srg) {
  json j = {{"id", srg.id}, {"granularity", ToString(srg.granularity)}};
  if (srg.t_repair_h && srg.t_active_h) {
    j["t_repair_h"] = *srg.t_repair_h;
    j["t_active_h"] = *srg.t_active_h;
  } else {
    j["p_fail"] = srg.p_fail;
  }
  return j;
}

SrgSpec SrgFromJson(const json& j) {
  RequireObject(j, "srg", {"id", "granularity", "p_fail", "t_repair_h", "t_active_h"});
  const json& id = Field(j, "id", "srg");
  const json& gran = Field(j, "granularity", "srg");
  if (!id.is_string()) throw ConfigError("srg.id must be a string");
  if (!gran.is_string()) throw ConfigError("srg.granularity must be a string");
  const Granularity g = ParseGranularity(gran.get<std::string>());
  const bool has_p = j.contains("p_fail");
  const bool has_t = j.contains("t_repair_h") || j.contains("t_active_h");
  if (has_p == has_t) {
    throw ConfigError("srg '" + id.get<std::string>() +
                      "' needs either p_fail or both t_repair_h and t_active_h");
  }
  try {
    if (has_t) {
      return MakeSrgFromDurations(id.get<std::string>(), g, Number(j, "t_repair_h", "srg"),
                                  Number(j, "t_active_h", "srg"));
    }
    SrgSpec s{id.get<std::string>(), g, std::nullopt, std::nullopt, Number(j, "p_fail", "srg")};
    Validate(s);
    return s;
  } catch (const DomainError& e) {
    throw ConfigError("srg '" + id.get<std::string>() + "': " + e.what());
  }
}

json SrgPopulationToJson(std::span<const SrgSpec> population) {
  json arr = json::array();
  for (const SrgSpec& s : population) arr.push_back(ToJson(s));
  return arr;
}

std::vector<SrgSpec> SrgPopulationFromJson(const json& j) {
  if (!j.is_array()) throw ConfigError("SRG population must be an array");
  std::vector<SrgSpec> out;
  out.reserve(j.size());
  for (const json& e : j) out.push_back(SrgFromJson(e));
  return out;
}

json ToJson(const SliceAllocation& slice) {
  json members = json::array();
  for (Coord m : slice.members) members.push_back(ToJson(m));
  return {{"id", slice.id},
          {"shape", ToJson(slice.request.shape)},
          {"origin", ToJson(slice.origin)},
          {"extent", ToJson(slice.extent)},
          {"members", members}};
}

json FiberInstanceToJson(const FiberGraph& graph, std::span<const CircuitRequest> requests) {
  json nodes = json::array();
  for (Coord n : graph.nodes()) nodes.push_back(ToJson(n));
  json edges = json::array();
  for (const FiberEdge& e : graph.edges()) {
    edges.push_back({{"u", ToJson(graph.nodes()[static_cast<std::size_t>(e.u)])},
                     {"v", ToJson(graph.nodes()[static_cast<std::size_t>(e.v)])},
                     {"capacity", e.capacity},
                     {"base_load", e.base_load}});
  }
  json reqs = json::array();
  for (const CircuitRequest& r : requests) {
    reqs.push_back({{"src", ToJson(r.src)}, {"dst", ToJson(r.dst)}, {"class", r.wavelength_class}});
  }
  return {{"nodes", nodes}, {"edges", edges}, {"requests", reqs}};
}

FiberInstance FiberInstanceFromJson(const json& j) {
  RequireObject(j, "fiber instance", {"nodes", "edges", "requests"});
  const json& nodes_j = Field(j, "nodes", "fiber instance");
  const json& edges_j = Field(j, "edges", "fiber instance");
  if (!nodes_j.is_array() || !edges_j.is_array()) throw ConfigError("nodes and edges must be arrays");
  std::vector<Coord> nodes;
  for (const json& n : nodes_j) nodes.push_back(CoordFromJson(n));
  std::vector<Coord> sorted = nodes;
  std::sort(sorted.begin(), sorted.end());
  auto index = [&](Coord c) {
    const auto it = std::lower_bound(sorted.begin(), sorted.end(), c);
    if (it == sorted.end() || *it != c) throw ConfigError("edge endpoint " + ToString(c) + " is not a node");
    return static_cast<int>(it - sorted.begin());
  };
  std::vector<FiberEdge> edges;
  for (const json& e : edges_j) {
    RequireObject(e, "edge", {"u", "v", "capacity", "base_load"});
    int u = index(CoordFromJson(Field(e, "u", "edge")));
    int v = index(CoordFromJson(Field(e, "v", "edge")));
    if (u > v) std::swap(u, v);
    edges.push_back({u, v, Integer(e, "capacity", "edge"),
                     e.contains("base_load") ? Integer(e, "base_load", "edge") : 0});
  }
  FiberInstance inst{[&] {
                       try {
                         return FiberGraph(sorted, edges);
                       } catch (const DomainError& e) {
                         throw ConfigError(std::string("fiber instance: ") + e.what());
                       }
                     }(),
                     {}};
  if (j.contains("requests")) {
    const json& reqs = j.at("requests");
    if (!reqs.is_array()) throw ConfigError("requests must be an array");
    for (const json& r : reqs) {
      RequireObject(r, "request", {"src", "dst", "class"});
      CircuitRequest c;
      c.src = CoordFromJson(Field(r, "src", "request"));
      c.dst = CoordFromJson(Field(r, "dst", "request"));
      c.wavelength_class = r.contains("class") ? Integer(r, "class", "request") : 0;
      if (c.wavelength_class < 0) throw ConfigError("request class must be >= 0");
      index(c.src);
      index(c.dst);
      c.src_tpu = c.src;
      c.dst_tpu = c.dst;
      inst.requests.push_back(c);
    }
  }
  return inst;
}

json ToJson(const FiberGraph& graph, const CircuitPlan& plan) {
  json routes = json::array();
  for (const NodePath& p : plan.routes) {
    json path = json::array();
    for (int n : p) path.push_back(ToJson(graph.nodes()[static_cast<std::size_t>(n)]));
    routes.push_back(path);
  }
  return {{"total_extra", plan.total_extra},
          {"total_hops", plan.total_hops},
          {"proven_optimal", plan.proven_optimal},
          {"routes", routes}};
}

std::vector<NodePath> RoutesFromJson(const FiberGraph& graph, const json& plan) {
  if (!plan.is_object()) throw ConfigError("plan must be an object");
  const json& routes = Field(plan, "routes", "plan");
  if (!routes.is_array()) throw ConfigError("plan.routes must be an array");
  std::vector<NodePath> out;
  for (const json& r : routes) {
    if (!r.is_array()) throw ConfigError("route must be an array of coordinates");
    NodePath path;
    for (const json& c : r) {
      const auto idx = graph.NodeIndex(CoordFromJson(c));
      if (!idx) throw ConfigError("route visits unknown server");
      path.push_back(*idx);
    }
    out.push_back(std::move(path));
  }
  return out;
}

json ToJson(const MziMesh& mesh, std::span<const MeshRoute> routes) {
  json out = json::array();
  for (const MeshRoute& r : routes) {
    out.push_back({{"id", r.id},
                   {"src_port", r.request.src_port},
                   {"dst_port", r.request.dst_port},
                   {"hops", r.edges.size()},
                   {"supernodes", r.supernodes},
                   {"edges", r.edges}});
  }
  return {{"rows", mesh.rows()}, {"cols", mesh.cols()}, {"routes", out}};
}

}  // namespace lumion
