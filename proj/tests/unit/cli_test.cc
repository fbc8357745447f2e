#include <set>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "commands.h"
#include "config.h"
#include "lumion/error.h"
#include "report.h"

namespace lumion::cli {
namespace {

using nlohmann::json;

TEST(ScenarioConfig, Defaults) {
  const ScenarioConfig c = ParseScenarioConfig(json::object());
  EXPECT_EQ(c.racks, 1024);
  EXPECT_EQ(c.spare_placement, kDefaultSpareOffset);
  EXPECT_EQ(c.policies.size(), 3u);
  EXPECT_EQ(c.routing.ks, (std::vector<int>{5, 10}));
  EXPECT_EQ(c.routing.placement_trials, 500);
  EXPECT_EQ(c.mesh.rows, 256);
  EXPECT_EQ(c.mesh.requests, 64);
  EXPECT_DOUBLE_EQ(c.timeline.t_reconfigure, 1.0);
}

TEST(ScenarioConfig, ParsesEveryKey) {
  const ScenarioConfig c = ParseScenarioConfig(json::parse(R"({
    "racks": 8, "seed": 42,
    "slice_distribution": [{"shape": [2,2,2], "weight": 3}, {"shape": [1,1,1]}],
    "failure_count_range": {"min": 2, "max": 3},
    "spare_placement": [-1, 0, 1],
    "policies": ["lumion", "k8s"],
    "timeline": {"t_software_restart": 5},
    "spares": {"slo_percent": 99, "tpu_groups": 32, "granularities": ["tpu"],
               "probability_ranges": [[0.01, 0.02]]},
    "routing": {"max_hops": 5, "max_nodes": 1000, "ks": [3], "trials": 4, "placement_trials": 100},
    "mesh": {"rows": 4, "cols": 6, "requests": [[0, 5], [6, 11]]}
  })"));
  EXPECT_EQ(c.racks, 8);
  EXPECT_EQ(c.seed, 42u);
  ASSERT_EQ(c.slice_distribution.size(), 2u);
  EXPECT_EQ(c.slice_distribution[1].weight, 1.0);
  EXPECT_EQ(c.failure_count_range.min, 2);
  EXPECT_EQ(c.spare_placement, (Coord{-1, 0, 1}));
  EXPECT_EQ(c.policies, (std::vector<Policy>{Policy::kLumion, Policy::kKubernetes}));
  EXPECT_EQ(c.timeline.t_software_restart, 5.0);
  EXPECT_EQ(c.spares.granularities.size(), 1u);
  EXPECT_EQ(c.routing.max_nodes, 1000u);
  EXPECT_EQ(c.mesh.request_list.size(), 2u);
  EXPECT_EQ(c.mesh.requests, 2);
}

TEST(ScenarioConfig, RejectsUnknownKeys) {
  for (const char* doc : {R"({"rack": 1})", R"({"routing": {"k": 5}})", R"({"spares": {"slo": 95}})",
                          R"({"mesh": {"size": 4}})", R"({"timeline": {"t_boot": 1}})",
                          R"({"failure_count_range": {"lo": 1}})",
                          R"({"slice_distribution": [{"shape": [1,1,1], "w": 1}]})"}) {
    EXPECT_THROW(ParseScenarioConfig(json::parse(doc)), ConfigError) << doc;
  }
}

TEST(ScenarioConfig, RejectsBadValues) {
  for (const char* doc :
       {R"({"racks": 0})", R"({"racks": "many"})", R"({"seed": -1})", R"({"spare_placement": [9,9,9]})",
        R"({"failure_count_range": {"min": 3, "max": 1}})", R"({"policies": []})",
        R"({"policies": ["slurm"]})", R"({"timeline": {"t_detect": -1}})",
        R"({"spares": {"slo_percent": 0}})", R"({"spares": {"probability_ranges": [[0.2, 0.1]]}})",
        R"({"spares": {"probability_ranges": [[0.1]]}})", R"({"routing": {"max_hops": 0}})",
        R"({"routing": {"placement_trials": 10}})", R"({"mesh": {"rows": 0}})",
        R"({"slice_distribution": [{"shape": [8,1,1]}]})", R"([1, 2])"}) {
    EXPECT_THROW(ParseScenarioConfig(json::parse(doc)), ConfigError) << doc;
  }
}

TEST(ScenarioConfig, DigestStable) {
  const ScenarioConfig a = ParseScenarioConfig(json::parse(R"({"racks": 8, "seed": 3})"));
  const ScenarioConfig b = ParseScenarioConfig(json::parse(R"({"seed": 3, "racks": 8})"));
  EXPECT_EQ(ConfigDigest(a), ConfigDigest(b));
  EXPECT_EQ(ConfigDigest(a).size(), 16u);
  const ScenarioConfig c = ParseScenarioConfig(json::parse(R"({"racks": 9, "seed": 3})"));
  EXPECT_NE(ConfigDigest(a), ConfigDigest(c));
  EXPECT_EQ(ConfigDigest(ParseScenarioConfig(ToJson(a))), ConfigDigest(a));
}

TEST(ResolveConfig, FlagsWin) {
  CommandOptions o;
  o.seed = 9;
  o.racks = 3;
  o.policies = "tpu_migration";
  o.rows = 8;
  const ScenarioConfig c = ResolveConfig(o);
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.racks, 3);
  EXPECT_EQ(c.policies, (std::vector<Policy>{Policy::kTpuMigration}));
  EXPECT_EQ(c.mesh.rows, 8);
  o.placement = "some";
  EXPECT_THROW(ResolveConfig(o), ConfigError);
  o.placement = "all";
  o.racks = -1;
  EXPECT_THROW(ResolveConfig(o), ConfigError);
}

TEST(ParseFormat, Values) {
  EXPECT_EQ(ParseFormat("JSON"), Format::kJson);
  EXPECT_EQ(ParseFormat("both"), Format::kBoth);
  EXPECT_THROW(ParseFormat("xml"), ConfigError);
}

TEST(SpareTable, ShapeAndMonotone) {
  const ScenarioConfig c = ParseScenarioConfig(json::object());
  const auto rows = ComputeSpareTable(c);
  ASSERT_EQ(rows.size(), 10u);
  EXPECT_EQ(rows[0].spares, 1u);
  EXPECT_EQ(rows[0].tail, 0.0);
  for (std::size_t i = 1; i < 5; ++i) EXPECT_GE(rows[i].spares, rows[i - 1].spares);
  for (std::size_t i = 6; i < 10; ++i) EXPECT_GE(rows[i].spares, rows[i - 1].spares);
  EXPECT_EQ(rows[5].granularity, Granularity::kServer);
  EXPECT_EQ(rows[5].groups, 16);
}

TEST(SpareTable, PointRangeIsUniform) {
  const ScenarioConfig c = ParseScenarioConfig(json::parse(
      R"({"spares": {"granularities": ["tpu"], "probability_ranges": [[0.01, 0.01]]}})"));
  const auto rows = ComputeSpareTable(c);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].spares, 3u);
  EXPECT_DOUBLE_EQ(rows[0].p_mean, 0.01);
}

TEST(SpareTable, ExplicitPopulation) {
  const ScenarioConfig c = ParseScenarioConfig(json::parse(R"({"spares": {"population": [
      {"id": "a", "granularity": "tpu", "p_fail": 0.5}, {"id": "b", "granularity": "tpu", "p_fail": 0.5}]}})"));
  const auto rows = ComputeSpareTable(c);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].groups, 2);
  EXPECT_EQ(rows[0].spares, 3u);
  EXPECT_EQ(rows[1].groups, 0);
}

TEST(ReportCsv, FixedColumns) {
  ScenarioOptions opt;
  opt.racks = 3;
  const ScenarioReport report = RunScenario(opt);
  std::ostringstream out;
  WriteReportCsv(out, report);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "rack_id,policy,failed,replacements,overprovisioning,extra_fibers");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 9);
}

TEST(RandomMeshRequests, DistinctPorts) {
  const MziMesh mesh(8, 8);
  const auto req = RandomMeshRequests(mesh, 14, 3);
  std::set<int> used;
  for (const MeshRequest& r : req) {
    EXPECT_TRUE(mesh.IsPort(r.src_port));
    EXPECT_TRUE(mesh.IsPort(r.dst_port));
    EXPECT_TRUE(used.insert(r.src_port).second);
    EXPECT_TRUE(used.insert(r.dst_port).second);
  }
  EXPECT_THROW(RandomMeshRequests(mesh, 15, 3), ConfigError);
  const auto again = RandomMeshRequests(mesh, 14, 3);
  for (std::size_t i = 0; i < req.size(); ++i) EXPECT_EQ(again[i].src_port, req[i].src_port);
}

}  // namespace
}  // namespace lumion::cli
