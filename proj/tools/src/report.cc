#include "report.h"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <ctime>
#include <fstream>
#include <ostream>

#include "lumion/error.h"
#include "lumion/json_io.h"

namespace lumion::cli {

using nlohmann::json;

Format ParseFormat(const std::string& s) {
  std::string v = s;
  std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
  if (v == "json") return Format::kJson;
  if (v == "csv") return Format::kCsv;
  if (v == "both") return Format::kBoth;
  throw ConfigError("unknown format '" + s + "' (expected json, csv or both)");
}

std::string FormatNumber(double v) { return json(v).dump(); }

void WriteSparesCsv(std::ostream& out, std::span<const SpareRow> rows) {
  out << "granularity,groups,p_lo,p_hi,p_mean,spares,tail\n";
  for (const SpareRow& r : rows) {
    out << ToString(r.granularity) << ',' << r.groups << ',' << FormatNumber(r.p_lo) << ','
        << FormatNumber(r.p_hi) << ',' << FormatNumber(r.p_mean) << ',' << r.spares << ','
        << FormatNumber(r.tail) << '\n';
  }
}

json SparesToJson(std::span<const SpareRow> rows, double slo_percent) {
  json list = json::array();
  for (const SpareRow& r : rows) {
    list.push_back({{"granularity", ToString(r.granularity)},
                    {"groups", r.groups},
                    {"p_lo", r.p_lo},
                    {"p_hi", r.p_hi},
                    {"p_mean", r.p_mean},
                    {"spares", r.spares},
                    {"tail", r.tail}});
  }
  return {{"slo_percent", slo_percent}, {"rows", list}};
}

void WriteReportCsv(std::ostream& out, const ScenarioReport& report) {
  out << kReportCsvHeader << '\n';
  for (const RackRecord& rec : report.records) {
    for (const PolicyOutcome& o : rec.outcomes) {
      out << rec.rack_id << ',' << ToString(o.policy) << ',' << o.failed << ',';
      if (o.feasible) {
        out << o.replacements << ',' << o.overprovisioning << ',' << o.extra_fibers;
      } else {
        out << ",,";
      }
      out << '\n';
    }
  }
}

namespace {

json OutcomeToJson(const PolicyOutcome& o) {
  return {{"policy", ToString(o.policy)},
          {"feasible", o.feasible},
          {"failed", o.failed},
          {"replacements", o.replacements},
          {"overprovisioning", o.overprovisioning},
          {"overprovisioning_with_stranded", o.overprovisioning + o.stranded_healthy},
          {"extra_fibers", o.extra_fibers},
          {"affected_slices", o.affected_slices},
          {"evicted_servers", o.evicted_servers},
          {"stranded_healthy", o.stranded_healthy},
          {"spare_racks_touched", o.spare_racks_touched},
          {"routing_optimal", o.routing_optimal}};
}

json StatsToJson(const PolicyStats& s) {
  return {{"policy", ToString(s.policy)},
          {"racks", s.racks},
          {"infeasible", s.infeasible},
          {"mean_overprovisioning", s.mean_overprovisioning},
          {"stddev_overprovisioning", s.stddev_overprovisioning},
          {"mean_replacements", s.mean_replacements},
          {"mean_extra_fibers", s.mean_extra_fibers},
          {"stddev_extra_fibers", s.stddev_extra_fibers},
          {"mean_stranded", s.mean_stranded},
          {"routing_optimal", s.routing_optimal}};
}

}  // namespace

json ReportToJson(const ScenarioReport& report, const std::string& digest) {
  json policies = json::array();
  for (Policy p : report.policies) policies.push_back(ToString(p));
  json stats = json::array();
  for (const PolicyStats& s : report.stats) stats.push_back(StatsToJson(s));
  json records = json::array();
  for (const RackRecord& rec : report.records) {
    json failed = json::array();
    for (Coord c : rec.failed) failed.push_back(ToJson(c));
    json outcomes = json::array();
    for (const PolicyOutcome& o : rec.outcomes) outcomes.push_back(OutcomeToJson(o));
    records.push_back({{"rack_id", rec.rack_id},
                       {"seed", rec.seed},
                       {"slices", rec.slices},
                       {"allocated_tpus", rec.allocated_tpus},
                       {"failed", failed},
                       {"outcomes", outcomes}});
  }
  const RecoveryTimeline& t = report.timeline;
  return {{"config_digest", digest},
          {"racks", report.racks},
          {"seed", report.seed},
          {"spare_offset", ToJson(report.spare_offset)},
          {"policies", policies},
          {"timeline",
           {{"t_detect", t.t_detect},
            {"t_spare_search", t.t_spare_search},
            {"t_reconfigure", t.t_reconfigure},
            {"t_software_restart", t.t_software_restart},
            {"total", t.total()},
            {"reconfigure_fraction", t.reconfigure_fraction()}}},
          {"summary", stats},
          {"records", records}};
}

void WriteFibersCsv(std::ostream& out, std::span<const RoutingTrial> trials,
                    std::span<const int> ks) {
  out << "trial,seed,failed,requests,exact,exact_lower_bound,exact_optimal";
  for (int k : ks) out << ",ksp" << k;
  out << '\n';
  for (std::size_t i = 0; i < trials.size(); ++i) {
    const RoutingTrial& t = trials[i];
    out << i << ',' << t.seed << ',' << t.failed << ',' << t.requests << ',' << t.exact << ','
        << t.exact_lower_bound << ',' << (t.exact_optimal ? 1 : 0);
    for (const auto& [k, extra] : t.ksp) out << ',' << extra;
    out << '\n';
  }
}

json FibersToJson(std::span<const RoutingTrial> trials, std::span<const int> ks) {
  const double n = trials.empty() ? 1.0 : static_cast<double>(trials.size());
  double exact = 0.0;
  std::vector<double> ksp(ks.size(), 0.0);
  json rows = json::array();
  for (const RoutingTrial& t : trials) {
    exact += t.exact;
    json k_json = json::object();
    for (std::size_t j = 0; j < t.ksp.size(); ++j) {
      ksp[j] += t.ksp[j].second;
      k_json["ksp" + std::to_string(t.ksp[j].first)] = t.ksp[j].second;
    }
    rows.push_back({{"seed", t.seed},
                    {"failed", t.failed},
                    {"requests", t.requests},
                    {"exact", t.exact},
                    {"exact_lower_bound", t.exact_lower_bound},
                    {"exact_optimal", t.exact_optimal},
                    {"ksp", k_json}});
  }
  json summary = json::array();
  summary.push_back({{"algorithm", "exact"}, {"mean_extra_fibers", exact / n}});
  for (std::size_t j = 0; j < ks.size(); ++j) {
    summary.push_back({{"algorithm", "ksp" + std::to_string(ks[j])},
                       {"mean_extra_fibers", ksp[j] / n}});
  }
  return {{"trials", trials.size()}, {"summary", summary}, {"records", rows}};
}

void WritePlacementCsv(std::ostream& out, const PlacementSweepResult& sweep) {
  out << "rank,dx,dy,dz,mean_extra_fibers,stddev_extra_fibers,mean_lower_bound,all_optimal\n";
  for (std::size_t i = 0; i < sweep.ranking.size(); ++i) {
    const PlacementStats& s = sweep.ranking[i];
    const Coord o = s.placement.offset();
    out << i + 1 << ',' << o.x << ',' << o.y << ',' << o.z << ',' << FormatNumber(s.mean_extra)
        << ',' << FormatNumber(s.stddev_extra) << ',' << FormatNumber(s.mean_lower_bound) << ','
        << (s.all_optimal ? 1 : 0) << '\n';
  }
}

void WritePlacementTrialsCsv(std::ostream& out, const PlacementSweepResult& sweep) {
  out << "trial,dx,dy,dz,extra_fibers,lower_bound\n";
  if (sweep.ranking.empty()) return;
  std::vector<const PlacementStats*> by_offset;
  for (const PlacementStats& s : sweep.ranking) by_offset.push_back(&s);
  std::sort(by_offset.begin(), by_offset.end(), [](const PlacementStats* a, const PlacementStats* b) {
    return a->placement.offset() < b->placement.offset();
  });
  const std::size_t trials = by_offset.front()->per_trial.size();
  for (std::size_t t = 0; t < trials; ++t) {
    for (const PlacementStats* s : by_offset) {
      const Coord o = s->placement.offset();
      out << t << ',' << o.x << ',' << o.y << ',' << o.z << ',' << s->per_trial[t] << ','
          << s->per_trial_lower_bound[t] << '\n';
    }
  }
}

json PlacementToJson(const PlacementSweepResult& sweep) {
  json ranking = json::array();
  for (const PlacementStats& s : sweep.ranking) {
    ranking.push_back({{"offset", ToJson(s.placement.offset())},
                       {"mean_extra_fibers", s.mean_extra},
                       {"stddev_extra_fibers", s.stddev_extra},
                       {"mean_lower_bound", s.mean_lower_bound},
                       {"all_optimal", s.all_optimal},
                       {"per_trial", s.per_trial},
                       {"per_trial_lower_bound", s.per_trial_lower_bound}});
  }
  return {{"ranking", ranking},
          {"default_offset", ToJson(kDefaultSpareOffset)},
          {"default_ranked_first", sweep.default_ranked_first},
          {"default_has_least_mean", sweep.default_has_least_mean}};
}

json ToJson(const RunManifest& m) {
  return {{"command", m.command},
          {"config_digest", m.config_digest},
          {"tool_version", m.tool_version},
          {"seed", m.seed},
          {"started_at", m.started_at},
          {"finished_at", m.finished_at},
          {"artifacts", m.artifacts}};
}

std::string UtcTimestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void WriteText(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << text;
}

void WriteJson(const std::filesystem::path& path, const json& j) { WriteText(path, j.dump(2) + "\n"); }

}  // namespace lumion::cli
