#include "lumion/srg.h"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cstdint>
#include <cmath>

#include "lumion/error.h"

namespace lumion {
namespace {

void CheckProbability(double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw DomainError("failure probability outside [0, 1]: " + std::to_string(p));
  }
}

}  // namespace

std::string ToString(Granularity g) {
  return g == Granularity::kTpu ? "TPU" : "Server";
}

Granularity ParseGranularity(const std::string& s) {
  std::string lower;
  for (char c : s) lower.push_back(static_cast<char>(std::tolower(c)));
  if (lower == "tpu") return Granularity::kTpu;
  if (lower == "server") return Granularity::kServer;
  throw ConfigError("unknown SRG granularity '" + s + "'");
}

double DeriveFailureProbability(double t_repair_h, double t_active_h) {
  if (!(t_repair_h >= 0.0) || !(t_active_h >= 0.0)) {
    throw DomainError("durations must be non-negative");
  }
  const double total = t_active_h + t_repair_h;
  if (!(total > 0.0)) throw DomainError("t_active + t_repair must be positive");
  return t_repair_h / total;
}

SrgSpec MakeSrgFromDurations(std::string id, Granularity g, double t_repair_h,
                             double t_active_h) {
  SrgSpec srg;
  srg.id = std::move(id);
  srg.granularity = g;
  srg.t_repair_h = t_repair_h;
  srg.t_active_h = t_active_h;
  srg.p_fail = DeriveFailureProbability(t_repair_h, t_active_h);
  return srg;
}

void Validate(const SrgSpec& srg) {
  CheckProbability(srg.p_fail);
  if (srg.t_repair_h.has_value() != srg.t_active_h.has_value()) {
    throw DomainError("SRG '" + srg.id + "' has only one of t_repair/t_active");
  }
  if (srg.t_repair_h) {
    const double derived = DeriveFailureProbability(*srg.t_repair_h, *srg.t_active_h);
    if (std::abs(derived - srg.p_fail) > 1e-12) {
      throw DomainError("SRG '" + srg.id + "' p_fail disagrees with its durations");
    }
  }
}

std::vector<double> FailureProbabilities(std::span<const SrgSpec> population) {
  std::vector<double> p;
  p.reserve(population.size());
  for (const SrgSpec& srg : population) {
    Validate(srg);
    p.push_back(srg.p_fail);
  }
  return p;
}

DpMatrix::DpMatrix(std::size_t n)
    : n_(n), stride_(n + 1), cells_((n + 1) * (n + 1), 0.0) {
  cells_[0] = 1.0;
}

DpMatrix BuildDp(std::span<const double> p) {
  for (double pi : p) CheckProbability(pi);
  DpMatrix dp(p.size());
  for (std::size_t i = 1; i <= p.size(); ++i) {
    const double pi = p[i - 1];
    const double qi = 1.0 - pi;
    dp.mutable_at(i, 0) = dp.at(i - 1, 0) * qi;
    for (std::size_t k = 1; k <= i; ++k) {
      dp.mutable_at(i, k) = dp.at(i - 1, k - 1) * pi + dp.at(i - 1, k) * qi;
    }
  }
  return dp;
}

std::vector<double> FailureCountDistribution(std::span<const double> p) {
  for (double pi : p) CheckProbability(pi);
  std::vector<double> row(p.size() + 1, 0.0);
  row[0] = 1.0;
  for (std::size_t i = 1; i <= p.size(); ++i) {
    const double pi = p[i - 1];
    const double qi = 1.0 - pi;
    // In-place, high k first so row[k-1] still holds the previous row.
    for (std::size_t k = i; k >= 1; --k) {
      row[k] = row[k - 1] * pi + row[k] * qi;
    }
    row[0] *= qi;
  }
  return row;
}

double TailProbability(std::span<const double> distribution, std::size_t k) {
  if (distribution.empty()) throw DomainError("empty distribution");
  const std::size_t n = distribution.size() - 1;
  if (k > n + 1) {
    throw DomainError("k = " + std::to_string(k) + " outside [0, N+1]");
  }
  if (k == 0) return 1.0;
  // Smallest terms first; also makes the result monotone in k.
  double sum = 0.0;
  for (std::size_t j = n + 1; j-- > k;) sum += distribution[j];
  return std::min(sum, 1.0);
}

double TailProbability(const DpMatrix& dp, std::size_t k) {
  return TailProbability(dp.final_row(), k);
}

double BruteForceTail(std::span<const double> p, std::size_t k) {
  if (p.size() > kMaxBruteForceGroups) {
    throw DomainError("brute-force tail refuses N > " +
                      std::to_string(kMaxBruteForceGroups));
  }
  for (double pi : p) CheckProbability(pi);
  const std::size_t n = p.size();
  if (k > n + 1) throw DomainError("k outside [0, N+1]");
  double total = 0.0;
  for (std::uint64_t subset = 0; subset < (std::uint64_t{1} << n); ++subset) {
    if (static_cast<std::size_t>(std::popcount(subset)) < k) continue;
    double prob = 1.0;
    for (std::size_t j = 0; j < n; ++j) {
      prob *= ((subset >> j) & 1u) ? p[j] : 1.0 - p[j];
    }
    total += prob;
  }
  return total;
}

SloPolicy::SloPolicy(double slo_percent) : percent_(slo_percent) {
  if (!(slo_percent > 0.0 && slo_percent <= 100.0)) {
    throw DomainError("SLO percent must lie in (0, 100]");
  }
}

SpareSizing SizeSpares(std::span<const double> p, const SloPolicy& slo) {
  const std::vector<double> dist = FailureCountDistribution(p);
  const std::size_t n = p.size();
  const double allowed = 1.0 - slo.fraction();
  for (std::size_t k = 1; k <= n; ++k) {
    const double z = TailProbability(dist, k);
    if (z <= allowed) return {k, z};
  }
  return {n + 1, 0.0};
}

std::size_t MinSpares(std::span<const double> p, const SloPolicy& slo) {
  return SizeSpares(p, slo).spares;
}

}  // namespace lumion
