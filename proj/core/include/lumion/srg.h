#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace lumion {

enum class Granularity { kTpu, kServer };

std::string ToString(Granularity g);
Granularity ParseGranularity(const std::string& s);

// A shared-risk group: components that fail together. Constant failure
// probability, either supplied directly or derived from repair/active time.
struct SrgSpec {
  std::string id;
  Granularity granularity = Granularity::kTpu;
  std::optional<double> t_repair_h;
  std::optional<double> t_active_h;
  double p_fail = 0.0;
};

// Fraction of time a group is faulty: t_repair / (t_active + t_repair).
// Throws DomainError on negative durations or zero total.
double DeriveFailureProbability(double t_repair_h, double t_active_h);

// Builds an SrgSpec from durations, deriving p_fail.
SrgSpec MakeSrgFromDurations(std::string id, Granularity g, double t_repair_h,
                             double t_active_h);

// Throws DomainError unless p_fail lies in [0, 1] and any durations present
// agree with it.
void Validate(const SrgSpec& srg);

std::vector<double> FailureProbabilities(std::span<const SrgSpec> population);

// Poisson-binomial table. Entry (i, k) is the probability of exactly k
// failures among the first i groups. Stored as a dense (n+1) x (n+1) grid.
class DpMatrix {
 public:
  DpMatrix() : DpMatrix(0) {}
  explicit DpMatrix(std::size_t n);

  std::size_t n() const { return n_; }
  double at(std::size_t i, std::size_t k) const { return cells_[i * stride_ + k]; }
  std::span<const double> row(std::size_t i) const {
    return {cells_.data() + i * stride_, stride_};
  }
  std::span<const double> final_row() const { return row(n_); }

 private:
  friend DpMatrix BuildDp(std::span<const double> p);
  double& mutable_at(std::size_t i, std::size_t k) { return cells_[i * stride_ + k]; }

  std::size_t n_;
  std::size_t stride_;
  std::vector<double> cells_;
};

// dp[i][k] = dp[i-1][k-1] * p_i + dp[i-1][k] * (1 - p_i). O(N^2) time.
// Throws DomainError if any probability is outside [0, 1] or NaN.
DpMatrix BuildDp(std::span<const double> p);

// Same recurrence, keeping only the last row (O(N) memory).
std::vector<double> FailureCountDistribution(std::span<const double> p);

// Z(K): probability that at least k of the N groups fail. Z(0) = 1 exactly,
// Z(N+1) = 0. Throws DomainError for k > N+1.
double TailProbability(const DpMatrix& dp, std::size_t k);
double TailProbability(std::span<const double> distribution, std::size_t k);

// Exhaustive sum over all 2^N failure subsets. Test oracle only; refuses
// N > kMaxBruteForceGroups.
inline constexpr std::size_t kMaxBruteForceGroups = 20;
double BruteForceTail(std::span<const double> p, std::size_t k);

class SloPolicy {
 public:
  // slo_percent in (0, 100]; throws DomainError otherwise.
  explicit SloPolicy(double slo_percent);

  double percent() const { return percent_; }
  double fraction() const { return percent_ / 100.0; }

 private:
  double percent_;
};

struct SpareSizing {
  std::size_t spares = 0;  // K
  double tail = 0.0;       // Z(K)
};

// Smallest K >= 1 with Z(K) <= 1 - s. Returns N + 1 (with Z = 0) when no
// K <= N qualifies. Equality counts as meeting the objective.
SpareSizing SizeSpares(std::span<const double> p, const SloPolicy& slo);
std::size_t MinSpares(std::span<const double> p, const SloPolicy& slo);

}  // namespace lumion
