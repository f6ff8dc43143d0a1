/*
 * Copyright 2026 The byzfed Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <numeric>
#include <set>
#include <vector>

#include "byzfed/assignment.h"
#include "byzfed/error.h"
#include "byzfed/inclusion.h"

namespace byzfed {
namespace {

double ChiSquarePValue(const std::vector<double>& observed,
                       const std::vector<double>& expected) {
  double stat = 0;
  for (size_t i = 0; i < observed.size(); ++i) {
    stat += (observed[i] - expected[i]) * (observed[i] - expected[i]) / expected[i];
  }
  boost::math::chi_squared dist(static_cast<double>(observed.size() - 1));
  return boost::math::cdf(boost::math::complement(dist, stat));
}

const Seed kSeed = SeedFromU64(77);

TEST(AssignmentTest, SmallPartition) {
  for (uint64_t tau = 0; tau < 20; ++tau) {
    RoundAssignment a = Assign(tau, 4, 2, kSeed);
    std::set<uint32_t> all;
    for (uint32_t j = 0; j < 2; ++j) {
      EXPECT_EQ(a.Cluster(j).size(), 2u);
      all.insert(a.Cluster(j).begin(), a.Cluster(j).end());
    }
    EXPECT_EQ(all, (std::set<uint32_t>{0, 1, 2, 3}));
  }
}

TEST(AssignmentTest, Deterministic) {
  EXPECT_EQ(Assign(5, 60, 4, kSeed), Assign(5, 60, 4, kSeed));
  EXPECT_FALSE(Assign(5, 60, 4, kSeed) == Assign(6, 60, 4, kSeed));
}

TEST(AssignmentTest, Divisibility) {
  try {
    Assign(0, 10, 4, kSeed);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDivisibilityViolation);
  }
}

TEST(AssignmentTest, ListShuffleMatchesIndexShuffle) {
  for (uint32_t n : {1u, 2u, 7u, 64u, 300u, 513u}) {
    Digest key = AssignmentKey(kSeed, n);
    auto perm = ShuffleList(n, key);
    for (uint32_t i = 0; i < n; ++i) ASSERT_EQ(perm[ShuffledIndex(i, n, key)], i);
  }
}

TEST(AssignmentTest, AssignedConsistency) {
  for (uint64_t tau = 0; tau < 100; ++tau) {
    RoundAssignment a = Assign(tau, 24, 3, kSeed);
    for (uint32_t c = 0; c < 24; ++c) {
      uint32_t j = Assigned(tau, c, 24, 3, kSeed);
      auto cl = a.Cluster(j);
      ASSERT_NE(std::find(cl.begin(), cl.end(), c), cl.end());
    }
  }
  for (uint64_t tau = 0; tau < 10; ++tau) EXPECT_EQ(Assigned(tau, 5, 8, 1, kSeed), 0u);
}

TEST(AssignmentTest, UniformAggregatorFrequency) {
  const uint32_t n_c = 12, n_a = 3;
  const int rounds = 10000;
  std::vector<double> hits(n_a, 0.0);
  uint32_t prev = 0;
  int changes = 0;
  for (int tau = 0; tau < rounds; ++tau) {
    uint32_t j = Assign(tau, n_c, n_a, kSeed).AggregatorOf(0);
    hits[j] += 1;
    if (tau > 0 && j != prev) ++changes;
    prev = j;
  }
  EXPECT_GT(ChiSquarePValue(hits, std::vector<double>(n_a, rounds / double(n_a))), 0.01);
  // Aggregator changes between consecutive rounds with probability 1 - 1/n_a.
  double p = 1.0 - 1.0 / n_a, n = rounds - 1;
  EXPECT_NEAR(changes / n, p, 4 * std::sqrt(p * (1 - p) / n));
}

TEST(AssignmentTest, UniformCoAssignment) {
  const uint32_t n_c = 12, n_a = 3, k = 4;
  const int rounds = 10000;
  std::vector<double> together(n_c - 1, 0.0);
  for (int tau = 0; tau < rounds; ++tau) {
    RoundAssignment a = Assign(tau, n_c, n_a, kSeed);
    for (uint32_t c : a.Cluster(a.AggregatorOf(0))) {
      if (c != 0) together[c - 1] += 1;
    }
  }
  double expect = rounds * double(k - 1) / (n_c - 1);
  EXPECT_GT(ChiSquarePValue(together, std::vector<double>(n_c - 1, expect)), 0.01);
}

TEST(IncludeTest, EqualCountsTakesAll) {
  std::vector<uint32_t> counts(10, 3), cand{2, 5, 7};
  auto tb = TieBreakValues(kSeed, 0, 10);
  EXPECT_EQ(Include(counts, cand, 3, tb), cand);
}

TEST(IncludeTest, SortSemantics) {
  // a=0, b=1, c=2, d=3 with counts {0, 5, 1, 2}.
  std::vector<uint32_t> counts{0, 5, 1, 2}, cand{0, 1, 2, 3};
  auto tb = TieBreakValues(kSeed, 0, 4);
  EXPECT_EQ(Include(counts, cand, 2, tb), (std::vector<uint32_t>{0, 2}));
}

TEST(IncludeTest, NotEnough) {
  std::vector<uint32_t> counts(4, 0), cand{0, 1};
  try {
    Include(counts, cand, 3, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotEnough);
  }
}

TEST(IncludeTest, RoundRobinUnderFullParticipation) {
  const uint32_t n = 64, rho = 16;
  std::vector<uint32_t> counts(n, 0), cand(n);
  std::iota(cand.begin(), cand.end(), 0);
  for (uint64_t tau = 0; tau < 500; ++tau) {
    auto tb = TieBreakValues(kSeed, tau, n);
    for (uint32_t c : Include(counts, cand, rho, tb)) ++counts[c];
    auto [lo, hi] = std::minmax_element(counts.begin(), counts.end());
    ASSERT_LE(*hi - *lo, 1u) << "round " << tau;
  }
}

TEST(IncludeTest, TieBreakIsNotIdOrder) {
  // Over many rounds with ties, low ids must not be systematically favoured.
  std::vector<uint32_t> counts(16, 0), cand(16);
  std::iota(cand.begin(), cand.end(), 0);
  int low_first = 0;
  for (uint64_t tau = 0; tau < 200; ++tau) {
    auto pick = Include(counts, cand, 1, TieBreakValues(kSeed, tau, 16));
    low_first += pick[0] < 8;
  }
  EXPECT_GT(low_first, 60);
  EXPECT_LT(low_first, 140);
}

class PingTest : public ::testing::Test {
 protected:
  void SetUp() override {
    for (int i = 0; i < 6; ++i) {
      keys_.push_back(SigningKeyFromSeed(SeedFromU64(300 + i)));
      pks_.push_back(keys_.back().pk);
    }
  }
  Signature PingSig(int client, uint64_t round) {
    return Sign(PingMessage(round), keys_[client].sk);
  }
  std::vector<SigningKeyPair> keys_;
  std::vector<PublicKey> pks_;
};

TEST_F(PingTest, DuplicateIsSingleEntry) {
  PingList p(3);
  p.Record(1, PingSig(1, 3), pks_);
  p.Record(1, PingSig(1, 3), pks_);
  EXPECT_EQ(p.size(), 1u);
}

TEST_F(PingTest, ForgedRejected) {
  PingList p(3);
  try {
    p.Record(1, PingSig(2, 3), pks_);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kBadSignature);
  }
  EXPECT_THROW(p.Record(1, PingSig(1, 4), pks_), Error);  // wrong round
  EXPECT_EQ(p.size(), 0u);
}

TEST_F(PingTest, MergeRules) {
  PingList mine(0), other(0);
  mine.Record(0, PingSig(0, 0), pks_);
  for (int c = 1; c <= 4; ++c) other.Record(c, PingSig(c, 0), pks_);
  EXPECT_FALSE(mine.Merge(other.entries(), 5, pks_));  // undersized
  EXPECT_EQ(mine.size(), 1u);
  EXPECT_TRUE(mine.Merge(other.entries(), 4, pks_));
  EXPECT_EQ(mine.size(), 5u);

  PingList fresh(0);
  PingEntries poisoned = other.entries();
  poisoned[5] = PingSig(4, 0);  // client 5 with client 4's signature
  EXPECT_FALSE(fresh.Merge(poisoned, 4, pks_));
  EXPECT_EQ(fresh.size(), 0u);
}

TEST_F(PingTest, UnificationThreshold) {
  PingList p(0);
  for (int c = 0; c < 4; ++c) p.Record(c, PingSig(c, 0), pks_);
  UnificationState u;
  EXPECT_FALSE(u.MaybeBroadcast(p, 5).has_value());  // one short
  p.Record(4, PingSig(4, 0), pks_);
  EXPECT_TRUE(u.MaybeBroadcast(p, 5).has_value());
  p.Record(5, PingSig(5, 0), pks_);
  EXPECT_FALSE(u.MaybeBroadcast(p, 5).has_value());  // once per round

  UnificationState late;
  late.MarkSumSharesSent();
  EXPECT_FALSE(late.MaybeBroadcast(p, 5).has_value());
}

TEST(WastedTest, Cases) {
  EXPECT_TRUE(WastedDetection(3, 4, 3, 3));
  EXPECT_FALSE(WastedDetection(4, 4, 3, 3));
  EXPECT_FALSE(WastedDetection(3, 4, 2, 3));
}

TEST(BlamingTest, UniformAndExtreme) {
  BlameParams p{1.0, 0.5, 3.0, 10};
  std::vector<uint32_t> uniform(12, 7);
  EXPECT_FALSE(Blaming(uniform, p));
  std::vector<uint32_t> extreme(12, 0);
  extreme[0] = 50;
  EXPECT_TRUE(Blaming(extreme, p));
}

TEST(BlamingTest, RestrictedToMostFrequent) {
  // The two smallest values are dropped before computing statistics.
  std::vector<uint32_t> counts{0, 0, 5, 5, 5, 6};
  InclusionStats s = RestrictedStats(counts, 4);
  EXPECT_EQ(s.spread, 1.0);
  EXPECT_NEAR(s.variance, 0.1875, 1e-12);
}

TEST(BlamingTest, CalibratedFalseBlameRateAndDetection) {
  BlameCalibrationConfig cfg;
  cfg.n_c = 64;
  cfg.n_a = 4;
  cfg.t_c = 8;
  cfg.rho = 6;
  cfg.participation = 64 - 8 - 16;
  cfg.horizon = 60;
  cfg.trials = 100;
  cfg.validation_trials = 100;
  cfg.assignment_seed = kSeed;
  BlameCalibration cal = CalibrateBlame(cfg);
  EXPECT_LT(cal.false_blame_rate, 0.01);
  EXPECT_GT(cal.checks, 1000u);
  // Determinism per seed.
  BlameCalibration again = CalibrateBlame(cfg);
  EXPECT_EQ(again.params.expected_var, cal.params.expected_var);
  EXPECT_EQ(again.params.delta_max, cal.params.delta_max);

  // A biased coordinator that always picks the lowest ids present.
  std::vector<uint32_t> lambda(64, 0);
  bool blamed = false;
  for (uint64_t tau = 0; tau < 60 && !blamed; ++tau) {
    auto a = AssignCached(tau, 64, 4, kSeed);
    std::vector<uint32_t> cl(a->Cluster(0).begin(), a->Cluster(0).end());
    std::sort(cl.begin(), cl.end());
    for (uint32_t i = 0; i < 6; ++i) ++lambda[cl[i]];
    blamed = Blaming(lambda, cal.params);
  }
  EXPECT_TRUE(blamed);
}

}  // namespace
}  // namespace byzfed
