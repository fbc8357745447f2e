#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "lumion/error.h"
#include "lumion/rng.h"
#include "lumion/srg.h"
#include "oracles.h"

namespace lumion {
namespace {

using oracle::BinomialSpares;

TEST(BuildDp, EmptyPopulation) {
  const DpMatrix dp = BuildDp({});
  EXPECT_EQ(dp.n(), 0u);
  EXPECT_DOUBLE_EQ(dp.at(0, 0), 1.0);
}

TEST(BuildDp, FairCoins) {
  const std::vector<double> p{0.5, 0.5};
  const DpMatrix dp = BuildDp(p);
  EXPECT_DOUBLE_EQ(dp.at(2, 0), 0.25);
  EXPECT_DOUBLE_EQ(dp.at(2, 1), 0.5);
  EXPECT_DOUBLE_EQ(dp.at(2, 2), 0.25);
}

TEST(BuildDp, ThreeGroups) {
  const std::vector<double> p{0.1, 0.2, 0.3};
  const DpMatrix dp = BuildDp(p);
  EXPECT_NEAR(dp.at(3, 0), 0.504, 1e-15);
  EXPECT_NEAR(dp.at(3, 3), 0.006, 1e-15);
}

TEST(BuildDp, RejectsBadProbabilities) {
  for (double bad : {-0.1, 1.5, std::nan("")}) {
    const std::vector<double> p{0.2, bad};
    EXPECT_THROW(BuildDp(p), DomainError);
  }
}

TEST(TailProbability, SmallCases) {
  const std::vector<double> single{0.3};
  EXPECT_DOUBLE_EQ(TailProbability(BuildDp(single), 1), 0.3);
  const std::vector<double> coins{0.5, 0.5};
  EXPECT_DOUBLE_EQ(TailProbability(BuildDp(coins), 1), 0.75);
  const std::vector<double> three(3, 0.1);
  EXPECT_NEAR(TailProbability(BuildDp(three), 2), 0.028, 1e-15);
}

TEST(TailProbability, Bounds) {
  const std::vector<double> p{0.2, 0.7, 0.4};
  const DpMatrix dp = BuildDp(p);
  EXPECT_EQ(TailProbability(dp, 0), 1.0);
  EXPECT_EQ(TailProbability(dp, 4), 0.0);
  EXPECT_THROW(TailProbability(dp, 5), DomainError);
}

TEST(BruteForceTail, Examples) {
  const std::vector<double> coins{0.5, 0.5};
  EXPECT_DOUBLE_EQ(BruteForceTail(coins, 2), 0.25);
  const std::vector<double> p{0.1, 0.2, 0.3};
  EXPECT_NEAR(BruteForceTail(p, 1), 0.496, 1e-15);
  const std::vector<double> zeros(5, 0.0);
  EXPECT_EQ(BruteForceTail(zeros, 1), 0.0);
  const std::vector<double> big(kMaxBruteForceGroups + 1, 0.1);
  EXPECT_THROW(BruteForceTail(big, 1), DomainError);
}

TEST(DpProperty, MatchesBruteForce) {
  Rng rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> p(rng.UniformIndex(16));
    for (double& v : p) v = rng.UniformUnit();
    const DpMatrix dp = BuildDp(p);
    for (std::size_t k = 0; k <= p.size() + 1; ++k) {
      ASSERT_NEAR(TailProbability(dp, k), BruteForceTail(p, k), 1e-12) << "N=" << p.size();
    }
  }
}

TEST(DpProperty, RowsSumToOne) {
  Rng rng(12);
  std::vector<double> p(200);
  for (double& v : p) v = rng.UniformUnit();
  const DpMatrix dp = BuildDp(p);
  for (std::size_t i = 0; i <= dp.n(); ++i) {
    const auto row = dp.row(i);
    EXPECT_NEAR(std::accumulate(row.begin(), row.end(), 0.0), 1.0, 1e-9) << "row " << i;
  }
}

TEST(DpProperty, TailNonIncreasing) {
  Rng rng(13);
  std::vector<double> p(40);
  for (double& v : p) v = rng.UniformUnit();
  const DpMatrix dp = BuildDp(p);
  for (std::size_t k = 1; k <= p.size() + 1; ++k) {
    EXPECT_LE(TailProbability(dp, k), TailProbability(dp, k - 1));
  }
}

TEST(DpProperty, PermutationInvariant) {
  Rng rng(14);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> p(1 + rng.UniformIndex(30));
    for (double& v : p) v = rng.UniformUnit();
    std::vector<double> q = p;
    rng.Shuffle(std::span<double>(q));
    const auto a = FailureCountDistribution(p);
    const auto b = FailureCountDistribution(q);
    for (std::size_t k = 0; k < a.size(); ++k) ASSERT_NEAR(a[k], b[k], 1e-12);
  }
}

TEST(DpProperty, LastRowMatchesFullTable) {
  const std::vector<double> p{0.05, 0.5, 0.9, 0.01, 0.3};
  const DpMatrix dp = BuildDp(p);
  const auto last = FailureCountDistribution(p);
  for (std::size_t k = 0; k < last.size(); ++k) EXPECT_DOUBLE_EQ(last[k], dp.at(p.size(), k));
}

TEST(SloPolicy, Domain) {
  EXPECT_NO_THROW(SloPolicy(100.0));
  EXPECT_THROW(SloPolicy(0.0), DomainError);
  EXPECT_THROW(SloPolicy(100.5), DomainError);
  EXPECT_DOUBLE_EQ(SloPolicy(95.0).fraction(), 0.95);
}

TEST(MinSpares, NoFailures) {
  const std::vector<double> p(64, 0.0);
  const SpareSizing s = SizeSpares(p, SloPolicy(95.0));
  EXPECT_EQ(s.spares, 1u);
  EXPECT_EQ(s.tail, 0.0);
}

TEST(MinSpares, UniformTpuGroups) {
  const std::vector<double> p(64, 0.01);
  const std::size_t k = MinSpares(p, SloPolicy(95.0));
  EXPECT_LE(k, 4u);
  EXPECT_EQ(k, BinomialSpares(64, 0.01, 0.95));
  EXPECT_EQ(k, 3u);
}

TEST(MinSpares, UniformServerGroups) {
  const std::vector<double> p(16, 0.05);
  EXPECT_EQ(MinSpares(p, SloPolicy(95.0)), BinomialSpares(16, 0.05, 0.95));
}

TEST(MinSpares, MatchesBinomialOracle) {
  for (int n : {8, 16, 64, 128}) {
    for (double p : {0.001, 0.005, 0.01, 0.02, 0.05, 0.1}) {
      const std::vector<double> probs(static_cast<std::size_t>(n), p);
      EXPECT_EQ(MinSpares(probs, SloPolicy(95.0)), BinomialSpares(n, p, 0.95)) << n << " " << p;
    }
  }
}

TEST(MinSpares, NoneSufficient) {
  const std::vector<double> p(4, 1.0);
  const SpareSizing s = SizeSpares(p, SloPolicy(95.0));
  EXPECT_EQ(s.spares, 5u);
  EXPECT_EQ(s.tail, 0.0);
}

TEST(MinSpares, EqualityMeetsObjective) {
  // Z(1) = 0.5 exactly and the SLO allows 0.5.
  const std::vector<double> p{0.5};
  EXPECT_EQ(MinSpares(p, SloPolicy(50.0)), 1u);
}

TEST(MinSpares, TighterSloNeverNeedsFewer) {
  Rng rng(15);
  std::vector<double> p(64);
  for (double& v : p) v = rng.UniformReal(0.0, 0.05);
  std::size_t prev = 0;
  for (double slo : {50.0, 80.0, 90.0, 95.0, 99.0, 99.9, 99.99}) {
    const std::size_t k = MinSpares(p, SloPolicy(slo));
    EXPECT_GE(k, prev);
    prev = k;
  }
}

TEST(MinSpares, MonotoneInProbability) {
  std::size_t prev = 0;
  for (double p = 0.001; p <= 0.0500001; p += 0.001) {
    const std::vector<double> probs(64, p);
    const std::size_t k = MinSpares(probs, SloPolicy(95.0));
    EXPECT_GE(k, prev) << p;
    prev = k;
  }
}

TEST(Srg, DerivedProbability) {
  EXPECT_DOUBLE_EQ(DeriveFailureProbability(1.0, 99.0), 0.01);
  EXPECT_THROW(DeriveFailureProbability(-1.0, 1.0), DomainError);
  EXPECT_THROW(DeriveFailureProbability(0.0, 0.0), DomainError);
  const SrgSpec s = MakeSrgFromDurations("a", Granularity::kServer, 2.0, 18.0);
  EXPECT_DOUBLE_EQ(s.p_fail, 0.1);
  EXPECT_NO_THROW(Validate(s));
  SrgSpec bad = s;
  bad.p_fail = 0.5;
  EXPECT_THROW(Validate(bad), DomainError);
}

TEST(Srg, GranularityNames) {
  EXPECT_EQ(ParseGranularity("tpu"), Granularity::kTpu);
  EXPECT_EQ(ParseGranularity("SERVER"), Granularity::kServer);
  EXPECT_THROW(ParseGranularity("rack"), ConfigError);
}

}  // namespace
}  // namespace lumion
