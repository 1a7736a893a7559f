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

#include "private_selection/mechanisms.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "gtest/gtest.h"
#include "private_selection/trials.h"

namespace private_selection {
namespace {

std::vector<double> Frequencies(const std::vector<int>& picks, int k) {
  std::vector<double> f(k, 0.0);
  for (int p : picks) f[p] += 1.0 / picks.size();
  return f;
}

std::vector<int> ExpMechDraws(const std::vector<double>& scores, double eps,
                              int64_t n, uint64_t seed) {
  return RunTrials(n, RandomStream(seed, 0), [&](int64_t, RandomStream& r) {
    return *ExpMech(scores, eps, r);
  });
}

TEST(ExpMechTest, EqualScoresUniform) {
  const auto f = Frequencies(ExpMechDraws({0.3, 0.3, 0.3}, 1.0, 1000000, 1), 3);
  for (double x : f) EXPECT_NEAR(x, 1.0 / 3.0, 0.003);
}

TEST(ExpMechTest, TwoScores) {
  const auto f = Frequencies(ExpMechDraws({0.0, 1.0}, 1.0, 1000000, 2), 2);
  EXPECT_NEAR(f[1], std::exp(1.0) / (1.0 + std::exp(1.0)), 0.002);
  EXPECT_NEAR(std::exp(1.0) / (1.0 + std::exp(1.0)), 0.7311, 1e-4);
}

TEST(ExpMechTest, ZeroEpsilonUniform) {
  const auto p = SoftmaxProbabilities({0.0, 5.0, -3.0, 1.0}, 0.0);
  for (double x : p) EXPECT_DOUBLE_EQ(x, 0.25);
  RandomStream rng(0, 0);
  EXPECT_FALSE(ExpMech({}, 1.0, rng).ok());
}

TEST(ExpMechTest, SoftmaxAgainstRationals) {
  // With eps = ln 2 and integer scores the weights are powers of two, so the
  // probabilities are exact rationals computed in integer arithmetic.
  std::mt19937_64 gen(3);
  std::uniform_int_distribution<int> score(-10, 10);
  for (int k = 1; k <= 6; ++k) {
    for (int rep = 0; rep < 50; ++rep) {
      std::vector<int> a(k);
      for (int& x : a) x = score(gen);
      const int low = *std::min_element(a.begin(), a.end());
      std::vector<uint64_t> weight(k);
      uint64_t total = 0;
      for (int i = 0; i < k; ++i) {
        weight[i] = uint64_t{1} << (a[i] - low);
        total += weight[i];
      }
      std::vector<double> scores(a.begin(), a.end());
      const auto p = SoftmaxProbabilities(scores, std::log(2.0));
      for (int i = 0; i < k; ++i) {
        EXPECT_NEAR(p[i], static_cast<double>(weight[i]) / total, 1e-12);
      }
    }
  }
}

TEST(ExpMechTest, FrequenciesWithinFourSigma) {
  const std::vector<double> scores = {0.1, 0.7, 0.4, 0.9, 0.0};
  const double eps = 2.5;
  const int n = 1000000;
  const auto f = Frequencies(ExpMechDraws(scores, eps, n, 4), 5);
  const auto p = SoftmaxProbabilities(scores, eps);
  for (int i = 0; i < 5; ++i) {
    EXPECT_NEAR(f[i], p[i], 4.0 * std::sqrt(p[i] * (1 - p[i]) / n));
  }
}

TEST(ExpMechTest, ShiftAndScaleInvariance) {
  const std::vector<double> scores = {0.125, 0.5, 0.875, 0.25};
  std::vector<double> shifted, scaled;
  for (double s : scores) {
    shifted.push_back(s + 3.0);
    scaled.push_back(s * 2.0);
  }
  for (int i = 0; i < 2000; ++i) {
    RandomStream a(5, i), b(5, i), c(5, i);
    const int base = *ExpMech(scores, 3.0, a);
    EXPECT_EQ(*ExpMech(shifted, 3.0, b), base);
    EXPECT_EQ(*ExpMech(scaled, 1.5, c), base);
  }
}

ScoredOptionSet Options(std::vector<double> scores, std::vector<double> s) {
  return *ScoredOptionSet::Create(std::move(scores), std::move(s));
}

double FrequencyOf(int target, const std::vector<int>& picks) {
  return static_cast<double>(std::count(picks.begin(), picks.end(), target)) /
         picks.size();
}

TEST(ScoredOptionSetTest, Validation) {
  EXPECT_FALSE(ScoredOptionSet::Create({}, {1.0}).ok());
  EXPECT_FALSE(ScoredOptionSet::Create({1.0, 2.0}, {-1.0}).ok());
  EXPECT_FALSE(ScoredOptionSet::Create({1.0, 2.0}, {1.0, 1.0, 1.0}).ok());
  EXPECT_TRUE(ScoredOptionSet::Create({1.0, 2.0}, {1.0, 0.5}).ok());
}

TEST(EmSelectTest, SingleOption) {
  RandomStream rng(6, 0);
  for (int i = 0; i < 100; ++i) {
    EXPECT_EQ(*EmSelect(Options({0.3}, {1.0}), 1.0, 0.1, rng), 0);
  }
}

TEST(EmSelectTest, TopOptionDominates) {
  std::vector<double> scores(8, 0.0);
  scores[7] = 1.0;
  const ScoredOptionSet opts = Options(scores, {1.0});
  auto picks = RunTrials(10000, RandomStream(7, 0),
                         [&](int64_t, RandomStream& r) {
                           return *EmSelect(opts, 2.0, 0.1, r);
                         });
  EXPECT_GE(FrequencyOf(7, picks), 0.8);
}

TEST(EmSelectTest, UtilityTail) {
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> scores(16);
  for (double& s : scores) s = u(gen);
  const double best = *std::max_element(scores.begin(), scores.end());
  const double eps = 1.0, beta = 0.1;
  const ScoredOptionSet opts = Options(scores, {1.0});
  const int n = 10000;
  auto picks = RunTrials(n, RandomStream(9, 0), [&](int64_t, RandomStream& r) {
    return *EmSelect(opts, eps, beta, r);
  });
  int64_t bad = 0;
  for (int p : picks) {
    bad += best - scores[p] > kUtilityConstant * std::log(16 / beta) / eps;
  }
  const CheckReport r = FrequencyCheck("em_utility", bad, n, beta);
  EXPECT_TRUE(r.pass) << r.empirical;
}

TEST(GeneralizedEmSelectTest, EqualSensitivitiesMatchEmSelect) {
  const ScoredOptionSet opts = Options({0.2, 0.6, 0.5}, {0.3});
  const int n = 100000;
  auto gen = RunTrials(n, RandomStream(10, 0), [&](int64_t, RandomStream& r) {
    return *GeneralizedEmSelect(opts, 1.0, 0.3, 1e-6, r);
  });
  auto em = RunTrials(n, RandomStream(11, 0), [&](int64_t, RandomStream& r) {
    return *EmSelect(opts, 1.0, 0.3, r);
  });
  const auto fg = Frequencies(gen, 3), fe = Frequencies(em, 3);
  for (int i = 0; i < 3; ++i) {
    const double p = 0.5 * (fg[i] + fe[i]);
    EXPECT_NEAR(fg[i], fe[i], 3.0 * std::sqrt(2.0 * p * (1 - p) / n));
  }
}

TEST(GeneralizedEmSelectTest, HugeSensitivityBuried) {
  const ScoredOptionSet opts = Options({1.0, 0.9}, {0.01, 10.0});
  auto picks = RunTrials(10000, RandomStream(12, 0),
                         [&](int64_t, RandomStream& r) {
                           return *GeneralizedEmSelect(opts, 1.0, 0.1, 1e-6, r);
                         });
  EXPECT_GE(FrequencyOf(0, picks), 0.9);
}

TEST(MarginSelectTest, RangeChecks) {
  RandomStream rng(13, 0);
  const ScoredOptionSet opts = Options({1.0, 0.0}, {1.0});
  EXPECT_FALSE(MarginSelect(opts, 1.0, 0.01, rng).ok());
  EXPECT_FALSE(MarginSelect(opts, 0.5, 0.25, rng).ok());
  EXPECT_TRUE(MarginSelect(opts, 0.5, 0.2, rng).ok());
}

TEST(MarginSelectTest, WideMarginWins) {
  // The noise support radius is ln(1/delta) s / eps; a margin of twice the
  // full width cannot be flipped. Random stopping can still end before the
  // best option is ever drawn, which the beta budget covers.
  const double eps = 0.5, delta = 0.01, beta = 0.05;
  const double width = 2.0 * std::log(1.0 / delta) / eps;
  const ScoredOptionSet opts = Options({2.0 * width, 0.0, 0.0, 0.0}, {1.0});
  const int n = 10000;
  auto picks = RunTrials(n, RandomStream(14, 0), [&](int64_t, RandomStream& r) {
    return *MarginSelect(opts, eps, delta, r, beta);
  });
  const CheckReport r =
      FrequencyCheck("margin_failure", n - std::count(picks.begin(), picks.end(), 0), n, beta);
  EXPECT_TRUE(r.pass) << r.empirical;
}

TEST(MarginSelectTest, TiedOptionsSplit) {
  const ScoredOptionSet opts = Options({0.5, 0.5}, {1.0});
  const int n = 10000;
  auto picks = RunTrials(n, RandomStream(15, 0), [&](int64_t, RandomStream& r) {
    return *MarginSelect(opts, 0.5, 0.01, r);
  });
  EXPECT_NEAR(FrequencyOf(0, picks), 0.5, 3.0 * std::sqrt(0.25 / n));
}

TEST(MarginSelectTest, FourOptions) {
  const double margin = 4.0 * std::log(100.0);
  const ScoredOptionSet opts = Options({margin, 0.0, 0.0, 0.0}, {1.0});
  auto picks = RunTrials(10000, RandomStream(16, 0),
                         [&](int64_t, RandomStream& r) {
                           return *MarginSelect(opts, 0.5, 0.01, r);
                         });
  EXPECT_GE(FrequencyOf(0, picks), 0.95);
}

TEST(SmoothEmSelectTest, RejectsBoundaryDelta) {
  RandomStream rng(17, 0);
  const double beta = 0.1, eps = 1.0;
  const double delta = beta / 4;
  auto opts = ScoredOptionSet::Create({1, 0, 0, 0}, {1.0},
                                      SmoothSensitivityEta(eps, delta));
  ASSERT_TRUE(opts.ok());
  EXPECT_FALSE(SmoothEmSelect(*opts, eps, delta, beta, rng).ok());
  auto wrong_eta = ScoredOptionSet::Create({1, 0, 0, 0}, {1.0}, 0.5);
  EXPECT_FALSE(SmoothEmSelect(*wrong_eta, eps, 1e-3, beta, rng).ok());
  auto no_eta = ScoredOptionSet::Create({1, 0, 0, 0}, {1.0});
  EXPECT_FALSE(SmoothEmSelect(*no_eta, eps, 1e-3, beta, rng).ok());
}

TEST(SmoothEmSelectTest, EtaFormula) {
  EXPECT_NEAR(SmoothSensitivityEta(1.0, 0.01),
              1.0 / (4.0 * std::log(200.0)), 1e-15);
}

TEST(SmoothEmSelectTest, ConstantSensitivityMatchesGeneralized) {
  const double eps = 1.0, delta = 1e-3, beta = 0.2;
  auto smooth = ScoredOptionSet::Create({0.4, 0.9, 0.1}, {0.2},
                                        SmoothSensitivityEta(eps, delta));
  const ScoredOptionSet plain = Options({0.4, 0.9, 0.1}, {0.2});
  for (int i = 0; i < 20000; ++i) {
    RandomStream a(18, i), b(18, i);
    EXPECT_EQ(*SmoothEmSelect(*smooth, eps, delta, beta, a),
              *GeneralizedEmSelect(plain, eps, beta, delta, b));
  }
}

TEST(SmoothEmSelectTest, SmallSensitivityOptionSelected) {
  const double eps = 1.0, delta = 1e-4, beta = 0.1;
  auto opts = ScoredOptionSet::Create({1.0, 0.5, 0.5, 0.5},
                                      {0.01, 0.05, 0.05, 0.05},
                                      SmoothSensitivityEta(eps, delta));
  ASSERT_TRUE(opts.ok());
  auto picks = RunTrials(10000, RandomStream(19, 0),
                         [&](int64_t, RandomStream& r) {
                           return *SmoothEmSelect(*opts, eps, delta, beta, r);
                         });
  EXPECT_GE(FrequencyOf(0, picks), 1.0 - 2.0 * beta);
}

TEST(AmplificationTest, Config) {
  EXPECT_EQ(AmplificationConfig::Create(0.5, 0.25, 1.0, 10)->dummy_count(), 5);
  EXPECT_EQ(AmplificationConfig::Create(0.5, 0.3, 1.0, 10)->dummy_count(), 5);
  EXPECT_FALSE(AmplificationConfig::Create(0.5, 0.0, 1.0, 10).ok());
  EXPECT_FALSE(AmplificationConfig::Create(0.5, 1.0, 1.0, 10).ok());
  EXPECT_FALSE(AmplificationConfig::Create(0.5, 0.25, 0.0, 10).ok());
  EXPECT_FALSE(AmplificationConfig::Create(0.5, 0.25, 1.0, 0).ok());
}

TEST(AmplificationTest, AllAtThresholdIsUniform) {
  auto cfg = AmplificationConfig::Create(0.7, 0.25, 2.0, 20);
  const int n = 100000;
  const int d = cfg->dummy_count();
  auto dummies = RunTrials(n, RandomStream(20, 0), [&](int64_t, RandomStream& r) {
    return AmplificationEm(std::vector<double>(20, 0.7), *cfg, r)->dummy ? 1 : 0;
  });
  const double p = static_cast<double>(d) / (20 + d);
  EXPECT_NEAR(FrequencyOf(1, dummies),
              p, 3.0 * std::sqrt(p * (1 - p) / n));
}

TEST(AmplificationTest, LowScoresGiveDummies) {
  auto cfg = AmplificationConfig::Create(1.0, 0.25, 50.0, 20);
  RandomStream rng(21, 0);
  int dummies = 0;
  for (int i = 0; i < 10000; ++i) {
    auto o = AmplificationEm(std::vector<double>(20, 0.0), *cfg, rng);
    ASSERT_TRUE(o.ok());
    dummies += o->dummy;
    EXPECT_EQ(o->dummy, o->index >= 20);
  }
  EXPECT_GE(dummies, 9999);
}

TEST(AmplificationTest, MeanWeightMatchesQuadrature) {
  for (double tau : {0.3, 0.9, 1.0, 1.4}) {
    for (double eps2 : {0.5, 5.0}) {
      const int m = 200000;
      double sum = 0.0;
      for (int i = 0; i < m; ++i) {
        const double q = (i + 0.5) / m;
        sum += std::exp(eps2 * (std::min(tau, q) - tau)) / m;
      }
      EXPECT_NEAR(UniformMeanWeight(tau, eps2), sum, 1e-8);
    }
  }
}

ScoreDraw UniformScores() {
  return [](RandomStream& r) { return r.Uniform(); };
}

TEST(AmplificationTest, DummyBound) {
  auto cfg = AmplificationConfig::Create(0.9, 0.25, 5.0, 100);
  const double p = UniformMeanWeight(0.9, 5.0);
  const CheckReport r =
      AmplificationDummyCheck(UniformScores(), *cfg, p, 100000, RandomStream(22, 0));
  EXPECT_TRUE(r.pass) << r.empirical << " vs " << r.bound;
  // With 1/gamma integral the bound has the closed form below.
  EXPECT_NEAR(AmplificationDummyBound(*cfg, p), 1.25 / (100 * p * 0.25 + 1),
              1e-12);
}

TEST(AmplificationTest, UtilityBounds) {
  auto cfg = AmplificationConfig::Create(0.9, 0.25, 5.0, 100);
  const double p = UniformMeanWeight(0.9, 5.0);
  const RandomStream root(23, 0);
  const CheckReport vacuous =
      AmplificationUtilityCheck(UniformScores(), *cfg, p, 1.0, 10000, root);
  EXPECT_TRUE(vacuous.pass);
  EXPECT_EQ(vacuous.empirical, 0.0);
  EXPECT_EQ(AmplificationUtilityThreshold(*cfg, 1.0, p), -INFINITY);

  const ScoreDraw at_tau = [](RandomStream&) { return 0.9; };
  const CheckReport exact =
      AmplificationUtilityCheck(at_tau, *cfg, 1.0, 0.1, 10000, root);
  EXPECT_TRUE(exact.pass);
  EXPECT_EQ(exact.empirical, 0.0);

  const CheckReport uniform =
      AmplificationUtilityCheck(UniformScores(), *cfg, p, 0.05, 100000, root);
  EXPECT_TRUE(uniform.pass) << uniform.empirical;
}

}  // namespace
}  // namespace private_selection
