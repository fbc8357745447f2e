#pragma once

#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "lumion/coord.h"
#include "lumion/mzi_mesh.h"
#include "lumion/rack_routing.h"
#include "lumion/srg.h"
#include "lumion/torus.h"

namespace lumion {

// Document shapes
//
//   SRG population: [ {"id": str, "granularity": "tpu"|"server", "p_fail": num}
//                   | {"id": str, "granularity": ..., "t_repair_h": num, "t_active_h": num} ]
//   Coordinates:    [x, y, z]
//   Fiber instance: {"nodes": [[x,y,z]...],
//                    "edges": [{"u": [..], "v": [..], "capacity": n, "base_load": n}...],
//                    "requests": [{"src": [..], "dst": [..], "class": n}...]}
//   Fiber plan:     {"total_extra": n, "total_hops": n, "proven_optimal": b,
//                    "routes": [[[x,y,z]...]...]}
//
// Readers throw ConfigError for missing fields, wrong types or unknown keys.

nlohmann::json ToJson(Coord c);
Coord CoordFromJson(const nlohmann::json& j);

nlohmann::json ToJson(const SrgSpec& srg);
SrgSpec SrgFromJson(const nlohmann::json& j);
nlohmann::json SrgPopulationToJson(std::span<const SrgSpec> population);
std::vector<SrgSpec> SrgPopulationFromJson(const nlohmann::json& j);

nlohmann::json ToJson(const SliceAllocation& slice);

struct FiberInstance {
  FiberGraph graph;
  std::vector<CircuitRequest> requests;
};

nlohmann::json FiberInstanceToJson(const FiberGraph& graph,
                                   std::span<const CircuitRequest> requests);
FiberInstance FiberInstanceFromJson(const nlohmann::json& j);
nlohmann::json ToJson(const FiberGraph& graph, const CircuitPlan& plan);
// Reads a plan's routes back as node-index paths of `graph`.
std::vector<NodePath> RoutesFromJson(const FiberGraph& graph, const nlohmann::json& plan);

nlohmann::json ToJson(const MziMesh& mesh, std::span<const MeshRoute> routes);

}  // namespace lumion
