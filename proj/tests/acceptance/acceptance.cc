// Prints one PASS/FAIL line per acceptance criterion; exits non-zero if any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "commands.h"
#include "lumion/fault_sim.h"
#include "lumion/mzi_mesh.h"
#include "lumion/rack_routing.h"
#include "lumion/rng.h"
#include "lumion/srg.h"
#include "lumion/torus.h"
#include "oracles.h"

namespace {

using namespace lumion;
using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

std::string Fmt(const char* fmt, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, fmt, a, b, c, d);
  return buf;
}

struct Verdict {
  bool pass = true;
  std::string detail;
  void Check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + std::string("failed: ") + what;
    }
  }
  void Note(const std::string& s) { detail += (detail.empty() ? "" : "; ") + s; }
};

Verdict Ac1() {
  Verdict v;
  Rng rng(1001);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> p(rng.UniformIndex(16));
    for (double& x : p) x = rng.UniformUnit();
    const DpMatrix dp = BuildDp(p);
    for (std::size_t k = 0; k <= p.size() + 1; ++k) {
      worst = std::max(worst, std::abs(TailProbability(dp, k) - BruteForceTail(p, k)));
    }
  }
  v.Check(worst <= 1e-12, "max |dp - brute force| = " + Fmt("%.3g", worst));
  std::vector<double> big(10'000);
  for (double& x : big) x = rng.UniformReal(0.0, 0.05);
  const auto t0 = Clock::now();
  const DpMatrix dp = BuildDp(big);
  const double secs = Seconds(t0);
  v.Check(secs < 5.0, "BuildDp(10000) took " + Fmt("%.2f s", secs));
  v.Check(std::abs(TailProbability(dp, 0) - 1.0) == 0.0, "Z(0) != 1");
  v.Note(Fmt("1000 populations, max error %.2e; N=10000 in %.2f s", worst, secs));
  return v;
}

Verdict Ac2() {
  Verdict v;
  const SloPolicy slo(95.0);
  const std::vector<double> p(64, 0.01);
  const std::size_t k = MinSpares(p, slo);
  v.Check(k <= 4, "K = " + std::to_string(k) + " > 4");
  v.Check(k == oracle::BinomialSpares(64, 0.01, 0.95), "K differs from binomial oracle");
  std::size_t prev = 0;
  std::string sweep;
  for (int step = 1; step <= 50; ++step) {
    const double q = 0.001 * step;
    const std::vector<double> probs(64, q);
    const std::size_t kq = MinSpares(probs, slo);
    v.Check(kq >= prev, Fmt("K decreased at p=%.3f", q));
    v.Check(kq == oracle::BinomialSpares(64, q, 0.95), Fmt("K differs from oracle at p=%.3f", q));
    prev = kq;
  }
  v.Note("K(p=0.01) = " + std::to_string(k) + ", K(p=0.05) = " + std::to_string(prev) +
         ", non-decreasing over 50 steps");
  return v;
}

Verdict Ac3() {
  Verdict v;
  ScenarioOptions opt;
  opt.racks = 1024;
  opt.seed = 1;
  const auto t0 = Clock::now();
  const ScenarioReport r = RunScenario(opt);
  const double secs = Seconds(t0);
  const double lumion = r.stats[0].mean_overprovisioning;
  const double tpu = r.stats[1].mean_overprovisioning;
  const double k8s = r.stats[2].mean_overprovisioning;
  v.Check(secs < 60.0, Fmt("took %.1f s", secs));
  v.Check(lumion <= tpu / 10.0, "lumion > tpu_migration / 10");
  v.Check(lumion <= k8s / 2.5, "lumion > kubernetes / 2.5");
  v.Check(r.stats[0].infeasible == 0, "infeasible racks");
  v.Note(Fmt("means lumion %.3f, tpu_migration %.3f, kubernetes %.3f in %.2f s", lumion, tpu, k8s, secs));
  return v;
}

Verdict Ac4() {
  Verdict v;
  const RackTopology rack = BuildRack(SparePlacement(kDefaultSpareOffset));
  const std::vector<SliceRequest> req{{{4, 4, 2}}};
  const auto alloc = AllocateSlices(rack, req, 1).allocations;
  v.Check(alloc.size() == 1 && alloc[0].size() == 32, "slice is not 32 TPUs");
  const FailureEvent ev{0, {alloc[0].members[0], alloc[0].members[17]}, Granularity::kTpu};
  const PolicyOutcome tpu = ApplyTpuMigration(alloc, ev);
  const PolicyOutcome lumion = ApplyLumion(rack, alloc, ev, kEnsembleRouting);
  v.Check(tpu.overprovisioning == 30, "tpu_migration = " + std::to_string(tpu.overprovisioning));
  v.Check(lumion.feasible && lumion.overprovisioning == 0,
          "lumion = " + std::to_string(lumion.overprovisioning));
  v.Note("tpu_migration " + std::to_string(tpu.overprovisioning) + ", lumion " +
         std::to_string(lumion.overprovisioning));
  return v;
}

Verdict Ac5() {
  Verdict v;
  const std::vector<int> ks{5, 10};
  const auto trials = CompareRouting(SliceDistribution::Default(), 200, 7,
                                     SparePlacement(kDefaultSpareOffset), {1, 4}, ks);
  int dominated = 0, gap = 0;
  double max_ms = 0.0;
  for (const RoutingTrial& t : trials) {
    bool ok = true;
    bool big = false;
    for (const auto& [k, extra] : t.ksp) {
      ok = ok && t.exact <= extra;
      big = big || (t.exact > 0 && extra >= 1.2 * t.exact);
    }
    dominated += ok ? 1 : 0;
    gap += big ? 1 : 0;
    max_ms = std::max(max_ms, t.exact_ms);
  }
  v.Check(dominated == 200, std::to_string(200 - dominated) + " instances where KSP beats exact");
  v.Check(max_ms < 500.0, Fmt("slowest exact %.1f ms", max_ms));

  const oracle::Trap trap = oracle::MakeTrap();
  const CircuitPlan exact = RouteExact(trap.graph, trap.requests, {6, 0.0, 0});
  const auto brute = oracle::BruteForceExact(trap.graph, trap.requests, 6);
  v.Check(exact.total_extra == brute.extra, "constructed instance disagrees with brute force");
  for (int k : ks) {
    const int ksp = RouteKsp(trap.graph, trap.requests, k).total_extra;
    v.Check(exact.total_extra > 0 && ksp >= 1.2 * exact.total_extra,
            "constructed instance: ksp" + std::to_string(k) + " = " + std::to_string(ksp));
  }
  v.Note(Fmt("exact <= ksp5, ksp10 on %.0f/200, %.0f with a >= 20%% gap, slowest %.1f ms", dominated,
             gap, max_ms));
  v.Note("constructed instance exact " + std::to_string(exact.total_extra) + " vs ksp " +
         std::to_string(RouteKsp(trap.graph, trap.requests, 5).total_extra));
  return v;
}

Verdict Ac6() {
  Verdict v;
  const auto t0 = Clock::now();
  const PlacementSweepResult r = PlacementSweep(SliceDistribution::Default(), 500, 1);
  const double secs = Seconds(t0);
  std::set<Coord> offsets;
  for (const PlacementStats& s : r.ranking) offsets.insert(s.placement.offset());
  v.Check(r.ranking.size() == 5 && offsets.size() == 5, "ranking does not cover five positions");
  for (std::size_t i = 1; i < r.ranking.size(); ++i) {
    const auto& a = r.ranking[i - 1];
    const auto& b = r.ranking[i];
    v.Check(a.mean_extra < b.mean_extra ||
                (a.mean_extra == b.mean_extra && a.placement.offset() < b.placement.offset()),
            "ranking order");
  }
  std::string order;
  for (const PlacementStats& s : r.ranking) order += " " + ToString(s.placement.offset()) + Fmt("=%.3f", s.mean_extra);
  v.Note("ranking" + order);
  v.Note(std::string("(0,-1,1) ranked first: ") + (r.default_ranked_first ? "yes" : "no") +
         (r.default_has_least_mean ? ", ties for the least mean" : ", not the least mean") +
         " (reported, not asserted)");
  v.Note(Fmt("%.1f s", secs));
  return v;
}

Verdict Ac7() {
  Verdict v;
  const auto t0 = Clock::now();
  const MziMesh mesh = BuildMesh(256, 256);
  MeshRouter router{MergedMesh(mesh)};
  const auto requests = cli::RandomMeshRequests(mesh, 64, 1);
  const auto routes = router.RouteAll(requests);
  const double secs = Seconds(t0);
  const std::vector<int> used = oracle::RouteWaveguides(router.mesh(), routes);
  const std::set<int> distinct(used.begin(), used.end());
  v.Check(routes.size() == 64, "not all requests routed");
  v.Check(distinct.size() == used.size(), "routes share a waveguide");
  v.Check(secs < 2.0, Fmt("took %.3f s", secs));

  long pairs = 0, mismatches = 0;
  for (int rows = 1; rows <= 5; ++rows)
    for (int cols = 1; cols <= 5; ++cols) {
      const MziMesh small(rows, cols);
      const MeshRouter r{MergedMesh(small)};
      for (int a : small.ports())
        for (int b : small.ports()) {
          if (a == b) continue;
          ++pairs;
          const auto route = r.FindRoute({a, b});
          if (!route || static_cast<int>(route->edges.size()) != oracle::MeshBfsDistance(small, a, b)) {
            ++mismatches;
          }
        }
    }
  v.Check(mismatches == 0, std::to_string(mismatches) + " BFS mismatches");
  v.Note(Fmt("64 requests on 256x256 in %.3f s, %.0f waveguides, disjoint; %.0f port pairs match BFS",
             secs, static_cast<double>(used.size()), static_cast<double>(pairs)));
  return v;
}

Verdict Ac8() {
  Verdict v;
  Rng rng(808);
  int mismatches = 0;
  const RackTopology base = BuildRack();
  const std::vector<Coord> shapes{{2, 2, 1}, {4, 2, 2}, {4, 4, 4}, {2, 1, 1}, {1, 4, 2}};
  for (int trial = 0; trial < 500; ++trial) {
    const std::vector<SliceRequest> req{{shapes[rng.UniformIndex(shapes.size())]}};
    const SliceAllocation s = AllocateSlices(base, req, rng.Next()).allocations.at(0);
    RackTopology rack = base;
    for (Axis a : kAllAxes)
      for (const auto& [x, y] : RingLinks(s, a)) rack = rack.WithLinkBandwidth(x, y, rng.UniformReal(1, 400));
    for (Axis a : kAllAxes) {
      double expect = kNoCommunication;
      for (const auto& [x, y] : RingLinks(s, a)) expect = std::min(expect, rack.LinkBandwidth(x, y));
      mismatches += RingBandwidth(rack, s, a) == expect ? 0 : 1;
    }
  }
  v.Check(mismatches == 0, std::to_string(mismatches) + " bottleneck mismatches");

  const std::vector<SliceRequest> two{{{2, 1, 1}}};
  const SliceAllocation s = AllocateSlices(base, two, 1).allocations.at(0);
  const RackTopology rack = base.WithScaledBandwidth(100.0);
  RackTopology doubled = rack;
  const Axis axis = *std::find_if(kAllAxes.begin(), kAllAxes.end(), [&](Axis a) { return s.extent[a] == 2; });
  for (const auto& [x, y] : RingLinks(s, axis)) doubled = doubled.WithLinkBandwidth(x, y, 2 * rack.LinkBandwidth(x, y));
  const double before = RingBandwidth(rack, s, axis);
  const double after = RingBandwidth(doubled, s, axis);
  v.Check(std::isfinite(before), "two-node ring has no links");
  v.Check(after == 2.0 * before, "doubling a two-node slice");

  const RecoveryTimeline t = MakeRecoveryTimeline({0.0, 0.0, 1.0, 20.8});
  const double pct = 100.0 * t.reconfigure_fraction();
  v.Check(std::abs(pct - 4.58) < 0.01, Fmt("reconfiguration fraction %.3f%%", pct));
  v.Note(Fmt("500 random assignments; doubled %.0f -> %.0f; reconfiguration %.3f%%", before, after, pct));
  return v;
}

std::string Slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Verdict Ac9() {
  Verdict v;
  namespace fs = std::filesystem;
  const fs::path root = fs::temp_directory_path() / ("lumion-ac9-" + std::to_string(::getpid()));
  cli::CommandOptions opt;
  opt.racks = 1024;
  opt.seed = 7;
  opt.format = cli::Format::kBoth;
  const cli::ScenarioConfig config = cli::ResolveConfig(opt);
  std::vector<std::string> csv, json;
  for (const char* threads : {"1", "4", "1"}) {
    ::setenv("LUMION_BENCH_THREADS", threads, 1);
    opt.out_dir = root / (std::string("t") + threads + "-" + std::to_string(csv.size()));
    std::ostringstream log;
    cli::RunSimulate(config, opt, log);
    csv.push_back(Slurp(opt.out_dir / "report.csv"));
    json.push_back(Slurp(opt.out_dir / "report.json"));
  }
  ::unsetenv("LUMION_BENCH_THREADS");
  fs::remove_all(root);
  v.Check(!csv[0].empty(), "empty CSV");
  v.Check(csv[0] == csv[1] && csv[0] == csv[2], "CSV differs between runs");
  v.Check(json[0] == json[1] && json[0] == json[2], "JSON differs between runs");
  v.Note(Fmt("three runs (1, 4, 1 threads), %.0f-byte CSV identical", static_cast<double>(csv[0].size())));
  return v;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
      {"AC1 poisson-binomial dp", Ac1}, {"AC2 spare sizing", Ac2},
      {"AC3 overprovisioning ratios", Ac3}, {"AC4 worked example", Ac4},
      {"AC5 routing dominance", Ac5}, {"AC6 placement sweep", Ac6},
      {"AC7 mesh routing", Ac7}, {"AC8 bottleneck bandwidth", Ac8},
      {"AC9 determinism", Ac9}};
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Verdict v;
    try {
      v = run();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail = std::string("exception: ") + e.what();
    }
    failed += v.pass ? 0 : 1;
    std::cout << (v.pass ? "PASS " : "FAIL ") << name << ": " << v.detail << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
