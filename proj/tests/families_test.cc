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

#include "private_selection/families.h"

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "private_selection/trials.h"
#include "private_selection/verifier.h"

namespace private_selection {
namespace {

// Visits every joint outcome of one sample per candidate with its
// probability.
void ForEachJoint(
    const std::vector<DiscreteCandidate>& candidates, std::string_view ds,
    const std::function<void(const std::vector<ScoredSample>&, double)>& fn) {
  const int k = static_cast<int>(candidates.size());
  std::vector<std::vector<double>> probs;
  for (const auto& c : candidates) probs.push_back(*c.Probabilities(ds));
  std::vector<size_t> pos(k, 0);
  while (true) {
    std::vector<ScoredSample> draw(k);
    double p = 1.0;
    for (int i = 0; i < k; ++i) {
      draw[i] = candidates[i].support()[pos[i]].sample;
      p *= probs[i][pos[i]];
    }
    fn(draw, p);
    int i = 0;
    while (i < k && ++pos[i] == candidates[i].support().size()) pos[i++] = 0;
    if (i == k) return;
  }
}

std::vector<double> BruteWinnerLaw(
    const std::vector<DiscreteCandidate>& candidates, std::string_view ds) {
  std::vector<double> law(candidates.size(), 0.0);
  ForEachJoint(candidates, ds, [&](const auto& draw, double p) {
    size_t best = 0;
    for (size_t i = 1; i < draw.size(); ++i) {
      if (draw[best] < draw[i]) best = i;
    }
    law[best] += p;
  });
  return law;
}

double BruteDominance(const std::vector<DiscreteCandidate>& candidates,
                      std::string_view ds, int target) {
  double total = 0.0;
  ForEachJoint(candidates, ds, [&](const auto& draw, double p) {
    double top = -1.0;
    for (const auto& s : draw) top = std::max(top, s.score.value());
    int ties = 0;
    for (const auto& s : draw) ties += s.score.value() == top;
    if (draw[target].score.value() == top) total += p / ties;
  });
  return total;
}

TEST(NaiveMaxTest, MatchesEnumeration) {
  for (auto variant : {NaiveMaxVariant::kLiteral, NaiveMaxVariant::kBalanced}) {
    for (int rivals = 1; rivals <= 8; ++rivals) {
      auto family = NaiveMaxFamily(rivals, 0.1, variant);
      ASSERT_TRUE(family.ok());
      for (const char* ds : {kFamilyDataset, kFamilyNeighbor}) {
        const auto brute = BruteWinnerLaw(family->candidates, ds);
        const auto law = NaiveMaxDistribution(family->candidates, ds);
        ASSERT_TRUE(law.ok());
        ASSERT_EQ(law->size(), brute.size());
        for (size_t i = 0; i < brute.size(); ++i) {
          EXPECT_NEAR((*law)[i], brute[i], 1e-14);
        }
      }
    }
  }
}

TEST(NaiveMaxTest, LogRatioGrowsWithRivals) {
  auto r = NaiveMaxCheck(2, 0.1);
  ASSERT_TRUE(r.ok());
  EXPECT_NEAR(r->log_ratio, 0.2, 1e-12);
  EXPECT_TRUE(r->pass);
  for (int rivals = 1; rivals <= 10; ++rivals) {
    for (double eps : {0.05, 0.1, 0.3}) {
      for (auto v : {NaiveMaxVariant::kLiteral, NaiveMaxVariant::kBalanced}) {
        auto c = NaiveMaxCheck(rivals, eps, v);
        ASSERT_TRUE(c.ok());
        EXPECT_NEAR(c->log_ratio, rivals * eps, 1e-12);
      }
    }
  }
}

TEST(NaiveMaxTest, BalancedDivergenceIsExact) {
  auto family = NaiveMaxFamily(3, 0.3, NaiveMaxVariant::kBalanced);
  ASSERT_TRUE(family.ok());
  EXPECT_NEAR(*MeasuredCandidateDivergence(*family), 0.3, 1e-12);
  auto literal = NaiveMaxFamily(3, 0.3, NaiveMaxVariant::kLiteral);
  EXPECT_NEAR(*MeasuredCandidateDivergence(*literal),
              -std::log(2.0 - std::exp(0.3)), 1e-12);
}

TEST(NaiveMaxApproxTest, RegimeAndReport) {
  auto r = NaiveMaxApproxCheck(20, 0.1, 0.5);
  ASSERT_TRUE(r.ok());
  EXPECT_FALSE(r->in_regime);
  EXPECT_NEAR(r->target, 0.5 * std::log(10.0) * 0.5, 1e-12);
  auto in = NaiveMaxApproxCheck(691, 1e-3, 0.3);
  ASSERT_TRUE(in.ok());
  EXPECT_TRUE(in->in_regime);
  EXPECT_TRUE(in->pass) << in->event_ratio << " vs " << in->target;
  EXPECT_GE(in->index_divergence, in->event_ratio - 1e-12);
}

TEST(NaiveMaxApproxTest, UnitLogInverseDelta) {
  auto r = NaiveMaxApproxCheck(100, std::exp(-1.0), 0.5);
  ASSERT_TRUE(r.ok());
  EXPECT_TRUE(r->in_regime);
  EXPECT_GE(r->event_ratio, 0.5 * 0.5) << r->event_ratio;
}

TEST(NaiveMaxApproxTest, ZeroEps) {
  auto r = NaiveMaxApproxCheck(100, std::exp(-1.0), 0.0);
  ASSERT_TRUE(r.ok());
  EXPECT_LE(r->event_ratio, 0.0);
}

TEST(DecreasingThresholdsTest, ClosedFormMatchesRecursion) {
  EXPECT_NEAR(DecreasingThresholdsClosedForm(0.5, 0.5, 1), 1.0 / 6.0, 1e-15);
  for (double p : {0.1, 0.5, 0.9}) {
    for (double gamma : {0.05, 0.5, 0.95}) {
      for (int rounds = 1; rounds <= 6; ++rounds) {
        // Probability of ending at score 0 from the top level, by stepping
        // down through the levels.
        double zero = 1.0 - p;
        for (int j = rounds - 1; j >= 0; --j) {
          zero = (1 - p) * gamma * zero / (1 - (1 - p) * (1 - gamma));
        }
        EXPECT_NEAR(DecreasingThresholdsClosedForm(p, gamma, rounds), zero,
                    1e-14);
      }
    }
  }
}

TEST(DecreasingThresholdsTest, SimulationAgrees) {
  auto r = DecreasingThresholdsCheck(0.5, 0.5, 1, 0.1, 200000,
                                     RandomStream(41, 0));
  ASSERT_TRUE(r.ok());
  EXPECT_TRUE(r->agrees) << r->simulated << " vs " << r->closed_form;
  EXPECT_TRUE(r->amplifies);
  EXPECT_GT(r->amplification, r->required);
}

TEST(PercentileTest, Medians) {
  EXPECT_EQ(EmpiricalMedian({1, 2, 3, 4}), 3);
  EXPECT_EQ(EmpiricalMedian({3, 1, 2}), 2);
  EXPECT_EQ(EmpiricalMedian({5}), 5);
  auto family = PercentileFamily(0.2);
  ASSERT_TRUE(family.ok());
  const auto& q = family->candidates[0];
  EXPECT_NE(*DistributionMedian(q, kFamilyDataset),
            *DistributionMedian(q, kFamilyNeighbor));
  const double divergence = *MeasuredCandidateDivergence(*family);
  EXPECT_NEAR(divergence, std::log(1.2 / 0.8), 1e-12);
  EXPECT_LE(divergence, 2 * 0.2 + std::pow(0.2, 3) + 1e-12);
}

TEST(PercentileTest, Check) {
  auto r = PercentileCheck(0.2, 10000, 100, RandomStream(42, 0));
  ASSERT_TRUE(r.ok());
  EXPECT_TRUE(r->pass);
  EXPECT_LE(r->divergence, r->bound + 1e-12);
  EXPECT_NEAR(r->bound, 0.4 + 0.008, 1e-12);
}

TEST(PackingTest, DistanceAndSteps) {
  EXPECT_EQ(PackingDistance(4, 0.1, 0.5), 2);
  EXPECT_EQ(PackingDistance(16, 0.1, 0.1),
            static_cast<int>(std::ceil(0.6 * std::log(16.0) / 0.1)));
  for (int k : {2, 4, 8}) {
    for (double eps : {0.2, 0.5, 1.0}) {
      auto r = PackingCheck(k, 0.1, eps);
      ASSERT_TRUE(r.ok());
      EXPECT_TRUE(r->pass) << k << " " << eps;
      EXPECT_GT(r->own_probability, r->other_probability);
    }
  }
  EXPECT_FALSE(PackingFamily(4, 0.2, 0.5).ok());
}

TEST(PackingTest, DominanceMatchesEnumeration) {
  auto family = PackingFamily(4, 0.1, 0.5);
  ASSERT_TRUE(family.ok());
  for (const std::string& ds : family->graph.datasets()) {
    for (int t = 0; t < 4; ++t) {
      EXPECT_NEAR(*DominanceProbability(family->candidates, ds, t),
                  BruteDominance(family->candidates, ds, t), 1e-13)
          << ds << " " << t;
    }
  }
}

TEST(PackingTest, WeakUsefulness) {
  auto family = PackingFamily(4, 0.1, 0.5);
  ASSERT_TRUE(family.ok());
  const IndexMechanism argmax = [](const CounterexampleFamily& f,
                                   std::string_view ds, RandomStream& rng) {
    return ArgmaxOfSamples(f.candidates, ds, rng);
  };
  const IndexMechanism constant = [](const CounterexampleFamily&,
                                     std::string_view, RandomStream&) {
    return absl::StatusOr<int>(0);
  };
  auto good = WeakUsefulnessCheck(*family, argmax, 0.5, 10000,
                                  RandomStream(43, 0));
  ASSERT_TRUE(good.ok());
  EXPECT_TRUE(good->pass);
  auto bad = WeakUsefulnessCheck(*family, constant, 0.5, 10000,
                                 RandomStream(44, 0));
  ASSERT_TRUE(bad.ok());
  EXPECT_FALSE(bad->pass);
  // The constant mechanism still answers D1 correctly.
  EXPECT_TRUE(bad->entries[0].pass);
}

TEST(PackingTest, ArgmaxFrequencyMatchesDominance) {
  auto family = PackingFamily(3, 0.1, 0.5);
  ASSERT_TRUE(family.ok());
  const int n = 100000;
  auto picks = RunTrials(n, RandomStream(45, 0), [&](int64_t, RandomStream& r) {
    return *ArgmaxOfSamples(family->candidates, "D2", r);
  });
  const double p = *DominanceProbability(family->candidates, "D2", 1);
  const double f =
      static_cast<double>(std::count(picks.begin(), picks.end(), 1)) / n;
  EXPECT_NEAR(f, p, 4.0 * std::sqrt(p * (1 - p) / n));
}

}  // namespace
}  // namespace private_selection
