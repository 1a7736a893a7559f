// Copyright 2026 The Private Selection Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "private_selection/verifier.h"

#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "test_util.h"

namespace private_selection {
namespace {

using ::private_selection::testing::MakeCandidate;
using ::private_selection::testing::Perturb;
using ::private_selection::testing::RandomSimplex;

constexpr double kInf = std::numeric_limits<double>::infinity();

// ln((P(S) - delta) / Q(S)) maximized over all 2^n subsets.
double BruteDeltaDivergence(const std::vector<double>& p,
                            const std::vector<double>& q, double delta) {
  const int n = static_cast<int>(p.size());
  double best = -kInf;
  for (uint32_t mask = 1; mask < (1u << n); ++mask) {
    double ps = 0.0, qs = 0.0;
    for (int i = 0; i < n; ++i) {
      if (mask & (1u << i)) {
        ps += p[i];
        qs += q[i];
      }
    }
    const double num = ps - delta;
    if (num <= 0.0) continue;
    best = std::max(best, qs <= 0.0 ? kInf : std::log(num / qs));
  }
  return best;
}

// Smallest delta making P (eps, delta)-close to Q.
double RequiredDelta(const std::vector<double>& p,
                     const std::vector<double>& q, double eps) {
  double d = 0.0;
  for (size_t i = 0; i < p.size(); ++i) {
    d += std::max(0.0, p[i] - std::exp(eps) * q[i]);
  }
  return d;
}

TEST(MaxDivergenceTest, Examples) {
  EXPECT_NEAR(MaxDivergence({0.5, 0.5}, {0.25, 0.75}).value, std::log(2.0),
              1e-15);
  EXPECT_NEAR(MaxDivergence({0.25, 0.75}, {0.5, 0.5}).value, std::log(1.5),
              1e-15);
  EXPECT_EQ(MaxDivergence({0.5, 0.5}, {0.5, 0.5}).value, 0.0);
  EXPECT_EQ(MaxDivergence({0.5, 0.5}, {1.0, 0.0}).value, kInf);
  EXPECT_NEAR(MaxDivergence({1.0, 0.0}, {0.5, 0.5}).value, std::log(2.0),
              1e-15);
  const DivergenceReport r = MaxDivergence({0.5, 0.5}, {0.25, 0.75});
  ASSERT_EQ(r.witness.size(), 1u);
  EXPECT_EQ(r.witness[0], 0);
}

TEST(DeltaDivergenceTest, Examples) {
  EXPECT_NEAR(DeltaDivergence({0.5, 0.5}, {0.25, 0.75}, 0.0).value,
              std::log(2.0), 1e-15);
  EXPECT_NEAR(DeltaDivergence({0.5, 0.5}, {0.25, 0.75}, 0.25).value, 0.0,
              1e-15);
  EXPECT_EQ(DeltaDivergence({0.5, 0.5}, {1.0, 0.0}, 0.4).value, kInf);
  EXPECT_NEAR(DeltaDivergence({0.5, 0.5}, {1.0, 0.0}, 0.5).value,
              std::log(0.5), 1e-15);
  EXPECT_EQ(DeltaDivergence({0.5, 0.5}, {0.5, 0.5}, 1.0).value, -kInf);
}

TEST(DeltaDivergenceTest, MatchesSubsetEnumeration) {
  std::mt19937_64 gen(31);
  std::uniform_int_distribution<int> size(1, 12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 300; ++rep) {
    const int n = size(gen);
    std::vector<double> p = RandomSimplex(n, gen);
    std::vector<double> q = RandomSimplex(n, gen);
    if (rep % 5 == 0) {
      // Put a zero into Q to exercise the infinite branch.
      q[0] = 0.0;
      double total = 0.0;
      for (double x : q) total += x;
      if (total == 0.0) continue;
      for (double& x : q) x /= total;
    }
    for (double delta : {0.0, 0.3 * u(gen), u(gen)}) {
      const double brute = BruteDeltaDivergence(p, q, delta);
      const double sweep = DeltaDivergence(p, q, delta).value;
      if (std::isinf(brute)) {
        EXPECT_EQ(sweep, brute) << "n=" << n << " delta=" << delta;
      } else {
        EXPECT_NEAR(sweep, brute, 1e-10) << "n=" << n << " delta=" << delta;
      }
    }
    const double d0 = DeltaDivergence(p, q, 0.0).value;
    const double dmax = MaxDivergence(p, q).value;
    if (std::isinf(dmax)) {
      EXPECT_EQ(d0, dmax);
    } else {
      EXPECT_NEAR(d0, dmax, 1e-12);
    }
  }
}

TEST(DeltaDivergenceTest, WitnessAttainsValue) {
  std::mt19937_64 gen(32);
  for (int rep = 0; rep < 100; ++rep) {
    const auto p = RandomSimplex(8, gen);
    const auto q = RandomSimplex(8, gen);
    const DivergenceReport r = DeltaDivergence(p, q, 0.05);
    if (!std::isfinite(r.value)) continue;
    double ps = 0.0, qs = 0.0;
    for (int i : r.witness) {
      ps += p[i];
      qs += q[i];
    }
    EXPECT_NEAR(std::log((ps - 0.05) / qs), r.value, 1e-12);
  }
}

NeighborGraph PairGraph() {
  return *NeighborGraph::Create({"D", "D'"}, {{"D", "D'"}});
}

DistributionTable PairTable(std::vector<double> p, std::vector<double> q) {
  DistributionTable t;
  for (size_t i = 0; i < p.size(); ++i) t.outcomes.push_back(std::to_string(i));
  t.probs["D"] = std::move(p);
  t.probs["D'"] = std::move(q);
  return t;
}

TEST(AuditTest, Examples) {
  const DistributionTable t = PairTable({0.5, 0.5}, {0.25, 0.75});
  auto pass = Audit(t, PairGraph(), {std::log(2.0), 0.0});
  ASSERT_TRUE(pass.ok());
  EXPECT_TRUE(pass->pass);
  EXPECT_NEAR(pass->measured, std::log(2.0), 1e-15);
  EXPECT_EQ(pass->witness_from, "D");
  EXPECT_EQ(pass->witness_to, "D'");
  EXPECT_EQ(pass->witness_outcomes, std::vector<std::string>{"0"});

  auto fail = Audit(t, PairGraph(), {0.6, 0.0});
  ASSERT_TRUE(fail.ok());
  EXPECT_FALSE(fail->pass);

  auto with_delta = Audit(t, PairGraph(), {0.0, 0.25});
  ASSERT_TRUE(with_delta.ok());
  EXPECT_TRUE(with_delta->pass);
  EXPECT_NEAR(with_delta->measured, 0.0, 1e-12);

  auto inf = Audit(PairTable({1.0, 0.0}, {0.0, 1.0}), PairGraph(),
                   {kInf, 0.0});
  ASSERT_TRUE(inf.ok());
  EXPECT_TRUE(inf->pass);
}

TEST(AuditTest, RejectsMissingDataset) {
  DistributionTable t = PairTable({0.5, 0.5}, {0.5, 0.5});
  t.probs.erase("D'");
  EXPECT_FALSE(Audit(t, PairGraph(), {1.0, 0.0}).ok());
}

TEST(AuditTest, MonteCarloToleranceWidens) {
  auto t = TableFromCounts({"a", "b"}, {{"D", {5000, 5000}},
                                        {"D'", {4000, 6000}}});
  ASSERT_TRUE(t.ok());
  EXPECT_EQ(*t->trials, 10000);
  auto r = Audit(*t, PairGraph(), {std::log(1.25), 0.0});
  ASSERT_TRUE(r.ok());
  EXPECT_GT(r->tolerance, kExactAuditTolerance);
  EXPECT_TRUE(r->pass);
  EXPECT_FALSE(TableFromCounts({"a"}, {{"D", {1, 2}}}).ok());
}

TEST(AlignOutcomesTest, SharedOutcomeList) {
  OutcomeDistribution d, dp;
  const ScoredSample a{{0, 0}, *Score::Create(0.2)};
  const ScoredSample b{{0, 1}, *Score::Create(0.7)};
  d.outcomes = {{a, "x0", 0.5}};
  d.bot_prob = 0.5;
  dp.outcomes = {{b, "x1", 0.75}};
  dp.bot_prob = 0.25;
  const DistributionTable t = AlignOutcomes({{"D", d}, {"D'", dp}});
  ASSERT_EQ(t.outcomes.size(), 3u);
  double total_d = 0.0, total_dp = 0.0;
  for (size_t i = 0; i < t.outcomes.size(); ++i) {
    total_d += t.probs.at("D")[i];
    total_dp += t.probs.at("D'")[i];
  }
  EXPECT_NEAR(total_d, 1.0, 1e-15);
  EXPECT_NEAR(total_dp, 1.0, 1e-15);
  EXPECT_NE(std::find(t.outcomes.begin(), t.outcomes.end(), "bot"),
            t.outcomes.end());
  EXPECT_NE(std::find(t.outcomes.begin(), t.outcomes.end(), "0:x1"),
            t.outcomes.end());
}

TEST(AuditTest, ThresholdSelectorWithinClaim) {
  const std::vector<std::string> ds = {"D", "D'"};
  const auto q = MakeCandidate(0, {0.1, 0.5, 0.9}, ds,
                               {{0.2, 0.5, 0.3}, {0.3, 0.45, 0.25}});
  const double eps1 = std::max(MaxDivergence(q.probabilities(0), q.probabilities(1)).value,
                               MaxDivergence(q.probabilities(1), q.probabilities(0)).value);
  auto params = ThresholdParams::WithMinimumIterations(0.5, 0.1, 0.5);
  std::map<std::string, OutcomeDistribution> per;
  for (const auto& d : ds) per[d] = *OracleThresholdDistribution(q, d, *params);
  auto r = Audit(AlignOutcomes(per), PairGraph(), {2 * eps1 + 0.5, 0.0});
  ASSERT_TRUE(r.ok());
  EXPECT_TRUE(r->pass) << r->measured;
}

TEST(SplitMergeTest, Examples) {
  // P = (0.06, 0.94), Q = (0.01, 0.99) are (0, 0.05)-close.
  const std::vector<double> p = {0.06, 0.94}, q = {0.01, 0.99};
  auto s = SplitEvent(p, q, 0.0, 0.05, 0.5);
  ASSERT_TRUE(s.ok());
  EXPECT_TRUE(s->pass);
  EXPECT_EQ(s->event, std::vector<int>{0});
  EXPECT_NEAR(s->prob_p, 0.06, 1e-15);
  EXPECT_NEAR(s->mass_bound, 0.05 / (1 - std::exp(-0.5)), 1e-12);
  EXPECT_LE(s->restricted_divergence, 0.5 + 1e-12);

  EXPECT_EQ(SplitEvent(p, q, 0.0, 0.01, 0.5).status().code(),
            absl::StatusCode::kFailedPrecondition);
  EXPECT_FALSE(SplitEvent(p, q, 0.5, 0.05, 0.5).ok());
  EXPECT_FALSE(SplitEvent(p, q, 0.0, 0.2, 0.5).ok());

  const MergeReport m = MergeEvent(p, q, {0}, 0.5);
  EXPECT_TRUE(m.premise);
  EXPECT_TRUE(m.pass);
  EXPECT_NEAR(m.prob_p, 0.06, 1e-15);
  const MergeReport bad = MergeEvent(p, q, {}, 0.5);
  EXPECT_FALSE(bad.premise);
}

TEST(SplitMergeTest, RandomRoundTrips) {
  std::mt19937_64 gen(33);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 200; ++rep) {
    const auto p = RandomSimplex(6, gen);
    const auto q = Perturb(p, 0.4, gen);
    const double eps = 0.2 * u(gen);
    const double delta =
        std::max(RequiredDelta(p, q, eps), RequiredDelta(q, p, eps)) + 1e-12;
    if (delta >= 0.1) continue;
    const double eps_prime = eps + 0.1 + u(gen);
    auto s = SplitEvent(p, q, eps, delta, eps_prime);
    ASSERT_TRUE(s.ok()) << s.status();
    EXPECT_TRUE(s->pass);
    EXPECT_LE(s->prob_p_high, s->mass_bound + 1e-12);
    EXPECT_LE(s->prob_q_high, s->mass_bound + 1e-12);
    // Points where Q dominates carry at most e^{-eps'} of their Q mass
    // under P.
    const double two_sided = s->mass_bound * (1.0 + std::exp(-eps_prime));
    EXPECT_LE(s->prob_p, two_sided + 1e-12);
    EXPECT_LE(s->prob_q, two_sided + 1e-12);
    const MergeReport m = MergeEvent(p, q, s->event, eps_prime);
    EXPECT_TRUE(m.premise);
    EXPECT_TRUE(m.pass);
    EXPECT_LE(m.divergence_pq, eps_prime + 1e-9);
    EXPECT_LE(m.divergence_qp, eps_prime + 1e-9);
  }
}

}  // namespace
}  // namespace private_selection
