#include <benchmark/benchmark.h>

#include <vector>

#include "commands.h"
#include "lumion/fault_sim.h"
#include "lumion/mzi_mesh.h"
#include "lumion/rack_routing.h"
#include "lumion/rng.h"
#include "lumion/srg.h"

namespace {

using namespace lumion;

void BM_BuildDp(benchmark::State& state) {
  Rng rng(1);
  std::vector<double> p(static_cast<std::size_t>(state.range(0)));
  for (double& x : p) x = rng.UniformReal(0.0, 0.05);
  for (auto _ : state) benchmark::DoNotOptimize(BuildDp(p));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_BuildDp)->RangeMultiplier(4)->Range(64, 8192)->Complexity(benchmark::oNSquared);

void BM_FailureCountDistribution(benchmark::State& state) {
  Rng rng(1);
  std::vector<double> p(static_cast<std::size_t>(state.range(0)));
  for (double& x : p) x = rng.UniformReal(0.0, 0.05);
  for (auto _ : state) benchmark::DoNotOptimize(FailureCountDistribution(p));
}
BENCHMARK(BM_FailureCountDistribution)->Arg(10'000);

// Four failures on a rack with the default spare.
void BM_RouteExact(benchmark::State& state) {
  const RackTopology rack = BuildRack(SparePlacement(kDefaultSpareOffset));
  const RackState s = GenerateRackState(rack, SliceDistribution::Default(), {4, 4}, 617);
  const PatchInstance inst = MakePatchInstance(rack, s.allocations, s.failed);
  for (auto _ : state) benchmark::DoNotOptimize(RouteExact(inst.graph, inst.patch.requests, kEnsembleRouting));
}
BENCHMARK(BM_RouteExact)->Unit(benchmark::kMicrosecond);

void BM_RouteKsp(benchmark::State& state) {
  const RackTopology rack = BuildRack(SparePlacement(kDefaultSpareOffset));
  const RackState s = GenerateRackState(rack, SliceDistribution::Default(), {4, 4}, 617);
  const PatchInstance inst = MakePatchInstance(rack, s.allocations, s.failed);
  for (auto _ : state)
    benchmark::DoNotOptimize(RouteKsp(inst.graph, inst.patch.requests, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_RouteKsp)->Arg(5)->Arg(10)->Unit(benchmark::kMicrosecond);

void BM_MeshRoute256(benchmark::State& state) {
  const MziMesh mesh = BuildMesh(256, 256);
  const MergedMesh merged(mesh);
  const std::vector<MeshRequest> requests = cli::RandomMeshRequests(mesh, 64, 1);
  for (auto _ : state) {
    MeshRouter router{merged};
    benchmark::DoNotOptimize(router.RouteAll(requests));
  }
}
BENCHMARK(BM_MeshRoute256)->Unit(benchmark::kMillisecond);

void BM_RunScenario(benchmark::State& state) {
  ScenarioOptions opt;
  opt.racks = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(RunScenario(opt));
}
BENCHMARK(BM_RunScenario)->Arg(128)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
