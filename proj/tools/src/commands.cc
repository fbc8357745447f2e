#include "commands.h"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "lumion/error.h"
#include "lumion/json_io.h"
#include "lumion/rng.h"

#ifndef LUMION_VERSION
#define LUMION_VERSION "0.0.0"
#endif

namespace lumion::cli {
namespace {

namespace fs = std::filesystem;

std::string Fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string Sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

class Artifacts {
 public:
  Artifacts(std::string command, const ScenarioConfig& config, const CommandOptions& options)
      : dir_(options.out_dir) {
    manifest_.command = std::move(command);
    manifest_.config_digest = ConfigDigest(config);
    manifest_.tool_version = LUMION_VERSION;
    manifest_.seed = config.seed;
    manifest_.started_at = UtcTimestamp();
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw ConfigError("cannot create output directory '" + dir_.string() + "'");
  }

  template <typename Fn>
  void Text(const std::string& name, Fn&& write) {
    std::ostringstream out;
    write(out);
    WriteText(dir_ / name, out.str());
    manifest_.artifacts.push_back(name);
  }

  void Json(const std::string& name, const nlohmann::json& j) {
    WriteJson(dir_ / name, j);
    manifest_.artifacts.push_back(name);
  }

  void Finish(std::ostream& log) {
    manifest_.finished_at = UtcTimestamp();
    WriteJson(dir_ / "manifest.json", ToJson(manifest_));
    log << "wrote";
    for (const std::string& a : manifest_.artifacts) log << ' ' << (dir_ / a).string();
    log << ' ' << (dir_ / "manifest.json").string() << '\n';
  }

 private:
  fs::path dir_;
  RunManifest manifest_;
};

void CheckOutcome(const RackRecord& rec, const PolicyOutcome& o) {
  auto fail = [&](const std::string& what) {
    throw InvariantViolation("rack " + std::to_string(rec.rack_id) + " " + ToString(o.policy) +
                             ": " + what);
  };
  if (o.failed != static_cast<int>(rec.failed.size())) fail("failed count mismatch");
  if (!o.feasible) {
    if (o.policy != Policy::kLumion) fail("only lumion may be infeasible");
    return;
  }
  if (o.overprovisioning != o.replacements - o.failed) fail("overprovisioning != replacements - failed");
  if (o.replacements < o.failed) fail("fewer replacements than failures");
  if (o.extra_fibers < 0) fail("negative extra fibers");
  if (o.policy == Policy::kLumion && o.overprovisioning != 0) fail("in-place patching overprovisioned");
  if (o.policy != Policy::kLumion && o.extra_fibers != 0) fail("fibers attributed to a baseline");
}

}  // namespace

ScenarioConfig ResolveConfig(const CommandOptions& options) {
  ScenarioConfig c = options.config_path ? LoadScenarioConfig(*options.config_path) : ScenarioConfig{};
  if (options.seed) c.seed = *options.seed;
  if (options.racks) c.racks = *options.racks;
  if (options.policies) c.policies = ParsePolicyList(*options.policies);
  if (options.rows) c.mesh.rows = *options.rows;
  if (options.cols) c.mesh.cols = *options.cols;
  if (options.requests) {
    c.mesh.requests = *options.requests;
    c.mesh.request_list.clear();
  }
  if (options.placement != "single" && options.placement != "all") {
    throw ConfigError("--placement must be 'single' or 'all'");
  }
  ValidateConfig(c);
  return c;
}

std::vector<SpareRow> ComputeSpareTable(const ScenarioConfig& config) {
  const SloPolicy slo(config.spares.slo_percent);
  std::vector<SpareRow> rows;
  auto add = [&](Granularity g, std::span<const double> p, double lo, double hi) {
    SpareRow r;
    r.granularity = g;
    r.groups = static_cast<int>(p.size());
    r.p_lo = lo;
    r.p_hi = hi;
    for (double v : p) r.p_mean += v;
    if (!p.empty()) r.p_mean /= static_cast<double>(p.size());
    const SpareSizing s = SizeSpares(p, slo);
    r.spares = s.spares;
    r.tail = s.tail;
    rows.push_back(r);
  };

  if (config.spares.population) {
    for (Granularity g : config.spares.granularities) {
      std::vector<SrgSpec> subset;
      for (const SrgSpec& s : *config.spares.population)
        if (s.granularity == g) subset.push_back(s);
      const std::vector<double> p = FailureProbabilities(subset);
      const auto [lo, hi] = p.empty() ? std::pair{0.0, 0.0}
                                      : std::pair{*std::min_element(p.begin(), p.end()),
                                                  *std::max_element(p.begin(), p.end())};
      add(g, p, lo, hi);
    }
    return rows;
  }

  for (Granularity g : config.spares.granularities) {
    const int n = g == Granularity::kTpu ? config.spares.tpu_groups : config.spares.server_groups;
    Rng rng(MixSeed(config.seed, static_cast<std::uint64_t>(g)));
    std::vector<double> u(static_cast<std::size_t>(n));
    for (double& v : u) v = rng.UniformUnit();
    for (const ProbabilityRange& range : config.spares.probability_ranges) {
      std::vector<double> p(u.size());
      for (std::size_t i = 0; i < u.size(); ++i) p[i] = range.lo + (range.hi - range.lo) * u[i];
      add(g, p, range.lo, range.hi);
    }
  }

  for (const SpareRow& a : rows) {
    for (const SpareRow& b : rows) {
      if (a.granularity == b.granularity && a.groups == b.groups && a.p_lo <= b.p_lo &&
          a.p_hi <= b.p_hi && a.spares > b.spares && !config.spares.population) {
        throw InvariantViolation("spare count decreased for a higher probability range");
      }
    }
  }
  return rows;
}

void RunSpares(const ScenarioConfig& config, const CommandOptions& options, std::ostream& log) {
  Artifacts art("spares", config, options);
  const std::vector<SpareRow> rows = ComputeSpareTable(config);
  log << "SLO " << FormatNumber(config.spares.slo_percent) << "%\n";
  log << "granularity  groups  p_range            p_mean     K    Z(K)\n";
  for (const SpareRow& r : rows) {
    char line[160];
    const std::string range = "[" + Fixed(r.p_lo, 4) + ", " + Fixed(r.p_hi, 4) + "]";
    std::snprintf(line, sizeof line, "%-11s  %6d  %-17s  %-9s  %3zu  %s\n",
                  ToString(r.granularity).c_str(), r.groups, range.c_str(),
                  Fixed(r.p_mean, 5).c_str(), r.spares, Sci(r.tail).c_str());
    log << line;
  }
  if (WantsCsv(options.format)) art.Text("spares.csv", [&](std::ostream& o) { WriteSparesCsv(o, rows); });
  if (WantsJson(options.format)) art.Json("spares.json", SparesToJson(rows, config.spares.slo_percent));
  art.Finish(log);
}

void RunSimulate(const ScenarioConfig& config, const CommandOptions& options, std::ostream& log) {
  Artifacts art("simulate", config, options);
  const auto t0 = std::chrono::steady_clock::now();
  const ScenarioReport report = RunScenario(config.scenario_options(0));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  for (const RackRecord& rec : report.records)
    for (const PolicyOutcome& o : rec.outcomes) CheckOutcome(rec, o);

  log << report.racks << " racks, seed " << report.seed << ", spare " << ToString(report.spare_offset)
      << ", " << Fixed(secs, 2) << " s\n";
  log << "policy          racks  infeasible  mean_overprov  stddev   mean_extra_fibers\n";
  for (const PolicyStats& s : report.stats) {
    char line[160];
    std::snprintf(line, sizeof line, "%-14s  %5d  %10d  %13s  %7s  %s\n", ToString(s.policy).c_str(),
                  s.racks, s.infeasible, Fixed(s.mean_overprovisioning, 3).c_str(),
                  Fixed(s.stddev_overprovisioning, 3).c_str(),
                  s.policy == Policy::kLumion ? Fixed(s.mean_extra_fibers, 3).c_str() : "-");
    log << line;
  }
  log << "recovery " << FormatNumber(report.timeline.total()) << " s, reconfiguration "
      << Fixed(100.0 * report.timeline.reconfigure_fraction(), 2) << "%\n";

  if (WantsCsv(options.format)) art.Text("report.csv", [&](std::ostream& o) { WriteReportCsv(o, report); });
  if (WantsJson(options.format)) art.Json("report.json", ReportToJson(report, ConfigDigest(config)));
  art.Finish(log);
}

void RunFibers(const ScenarioConfig& config, const CommandOptions& options, std::ostream& log) {
  Artifacts art("fibers", config, options);
  const SliceDistribution dist(config.slice_distribution);

  if (options.placement == "all") {
    const PlacementSweepResult sweep =
        PlacementSweep(dist, config.routing.placement_trials, config.seed, config.failure_count_range,
                       config.exact_options(), 0);
    log << config.routing.placement_trials << " trials per placement\n";
    log << "rank  offset       mean_extra  stddev   lower_bound  optimal\n";
    for (std::size_t i = 0; i < sweep.ranking.size(); ++i) {
      const PlacementStats& s = sweep.ranking[i];
      char line[160];
      std::snprintf(line, sizeof line, "%4zu  %-11s  %10s  %7s  %11s  %s\n", i + 1,
                    ToString(s.placement.offset()).c_str(), Fixed(s.mean_extra, 4).c_str(),
                    Fixed(s.stddev_extra, 4).c_str(), Fixed(s.mean_lower_bound, 4).c_str(),
                    s.all_optimal ? "yes" : "no");
      log << line;
    }
    log << "default " << ToString(kDefaultSpareOffset) << " ranked first: "
        << (sweep.default_ranked_first ? "yes" : "no");
    if (!sweep.default_ranked_first && sweep.default_has_least_mean) {
      log << " (ties for the lowest mean; ties are ordered by offset)";
    }
    log << '\n';
    if (WantsCsv(options.format)) {
      art.Text("placement.csv", [&](std::ostream& o) { WritePlacementCsv(o, sweep); });
      art.Text("placement_trials.csv", [&](std::ostream& o) { WritePlacementTrialsCsv(o, sweep); });
    }
    if (WantsJson(options.format)) art.Json("placement.json", PlacementToJson(sweep));
    art.Finish(log);
    return;
  }

  const std::vector<RoutingTrial> trials =
      CompareRouting(dist, config.routing.trials, config.seed, SparePlacement(config.spare_placement),
                     config.failure_count_range, config.routing.ks, config.exact_options(), 0);
  double exact = 0.0, max_ms = 0.0, worst_ratio = 1.0;
  int proven = 0;
  std::vector<double> ksp(config.routing.ks.size(), 0.0);
  for (std::size_t t = 0; t < trials.size(); ++t) {
    const RoutingTrial& r = trials[t];
    exact += r.exact;
    max_ms = std::max(max_ms, r.exact_ms);
    proven += r.exact_optimal ? 1 : 0;
    for (std::size_t j = 0; j < r.ksp.size(); ++j) {
      if (r.exact > r.ksp[j].second) {
        throw InvariantViolation("trial " + std::to_string(t) + ": exact routing needs more fibers than ksp" +
                                 std::to_string(r.ksp[j].first));
      }
      ksp[j] += r.ksp[j].second;
      if (r.exact > 0) worst_ratio = std::max(worst_ratio, double(r.ksp[j].second) / r.exact);
    }
  }
  const double n = trials.empty() ? 1.0 : static_cast<double>(trials.size());
  log << trials.size() << " instances, spare " << ToString(config.spare_placement) << ", " << proven
      << " proven optimal, slowest exact " << Fixed(max_ms, 1) << " ms\n";
  log << "algorithm  mean_extra_fibers\n";
  log << "exact      " << Fixed(exact / n, 4) << '\n';
  for (std::size_t j = 0; j < ksp.size(); ++j) {
    char line[64];
    std::snprintf(line, sizeof line, "ksp%-8d%s\n", config.routing.ks[j], Fixed(ksp[j] / n, 4).c_str());
    log << line;
  }
  log << "largest ksp/exact ratio " << Fixed(worst_ratio, 3) << '\n';
  if (WantsCsv(options.format)) {
    art.Text("fibers.csv", [&](std::ostream& o) { WriteFibersCsv(o, trials, config.routing.ks); });
  }
  if (WantsJson(options.format)) art.Json("fibers.json", FibersToJson(trials, config.routing.ks));
  art.Finish(log);
}

std::vector<MeshRequest> RandomMeshRequests(const MziMesh& mesh, int count, std::uint64_t seed) {
  std::vector<int> ports = mesh.ports();
  if (count < 0 || static_cast<std::size_t>(count) * 2 > ports.size()) {
    throw ConfigError("mesh has " + std::to_string(ports.size()) + " ports, too few for " +
                      std::to_string(count) + " requests");
  }
  Rng rng(seed);
  rng.Shuffle(std::span<int>(ports));
  std::vector<MeshRequest> requests;
  for (int i = 0; i < count; ++i) {
    requests.push_back({ports[static_cast<std::size_t>(2 * i)], ports[static_cast<std::size_t>(2 * i + 1)]});
  }
  return requests;
}

void RunMesh(const ScenarioConfig& config, const CommandOptions& options, std::ostream& log) {
  Artifacts art("mesh", config, options);
  using Clock = std::chrono::steady_clock;
  const auto t0 = Clock::now();
  const MziMesh mesh = BuildMesh(config.mesh.rows, config.mesh.cols);
  MeshRouter router{MergedMesh(mesh)};
  const auto t1 = Clock::now();
  const std::vector<MeshRequest> requests =
      config.mesh.request_list.empty() ? RandomMeshRequests(mesh, config.mesh.requests, config.seed)
                                       : config.mesh.request_list;
  const std::vector<MeshRoute> routes = router.RouteAll(requests);
  const auto t2 = Clock::now();
  const bool disjoint = RoutesEdgeDisjoint(routes);
  if (!disjoint) throw InvariantViolation("mesh routes share a waveguide");

  log << config.mesh.rows << "x" << config.mesh.cols << " mesh, " << mesh.ports().size() << " ports, "
      << router.mesh().supernode_count() << " supernodes, " << router.mesh().edge_count()
      << " merged edges\n";
  for (const MeshRoute& r : routes) {
    log << "route " << r.id << ": " << r.request.src_port << " -> " << r.request.dst_port << " hops "
        << r.edges.size();
    if (r.supernodes.size() <= 16) {
      log << " via";
      for (int s : r.supernodes) log << ' ' << s;
    }
    log << '\n';
  }
  const auto ms = [](auto d) { return std::chrono::duration<double, std::milli>(d).count(); };
  log << "build+merge " << Fixed(ms(t1 - t0), 2) << " ms, routing " << routes.size() << " requests "
      << Fixed(ms(t2 - t1), 2) << " ms\n";
  log << "disjoint=" << (disjoint ? "true" : "false") << '\n';
  if (WantsJson(options.format)) art.Json("mesh.json", ToJson(mesh, routes));
  art.Finish(log);
}

}  // namespace lumion::cli
