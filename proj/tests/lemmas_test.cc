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

#include "private_selection/lemmas.h"

#include <cmath>
#include <random>
#include <vector>

#include "gtest/gtest.h"

namespace private_selection {
namespace {

std::vector<double> BrutePmf(const std::vector<double>& probs) {
  const int n = static_cast<int>(probs.size());
  std::vector<double> pmf(n + 1, 0.0);
  for (uint32_t mask = 0; mask < (1u << n); ++mask) {
    double p = 1.0;
    for (int i = 0; i < n; ++i) p *= (mask & (1u << i)) ? probs[i] : 1 - probs[i];
    pmf[__builtin_popcount(mask)] += p;
  }
  return pmf;
}

TEST(PoissonBinomialTest, MatchesEnumeration) {
  std::mt19937_64 gen(51);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int n = 1; n <= 10; ++n) {
    std::vector<double> probs(n);
    for (double& p : probs) p = u(gen);
    const PoissonBinomial law(probs);
    const auto brute = BrutePmf(probs);
    ASSERT_EQ(law.n(), n);
    double mean = 0.0;
    for (int k = 0; k <= n; ++k) {
      EXPECT_NEAR(law.pmf()[k], brute[k], 1e-14);
      mean += k * brute[k];
    }
    EXPECT_NEAR(law.mean(), mean, 1e-12);
    double upper = 0.0;
    for (int k = 0; k <= n; ++k) {
      if (k >= 1.5) upper += brute[k];
    }
    EXPECT_NEAR(law.UpperTail(1.5), upper, 1e-12);
    EXPECT_NEAR(law.LowerTail(1.5), 1.0 - upper, 1e-12);
  }
}

TEST(PoissonBinomialTest, SampleMean) {
  const PoissonBinomial law({0.1, 0.5, 0.9, 0.3});
  RandomStream rng(52, 0);
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) sum += law.Sample(rng);
  EXPECT_NEAR(sum / n, 1.8, 0.01);
}

TEST(CouplingTest, Constants) {
  auto c = CouplingBound(0.5, 0.25, 0.1);
  ASSERT_TRUE(c.ok());
  const double coupling =
      2.0 * (std::exp(0.75) + 1.0 + std::exp(0.25));
  EXPECT_NEAR(c->coupling, coupling, 1e-12);
  EXPECT_NEAR(c->offset,
              coupling * std::log(20.0) / (0.5 * (std::exp(0.75) - 1.0)),
              1e-10);
  EXPECT_FALSE(CouplingBound(0.0, 0.25, 0.1).ok());
  EXPECT_FALSE(CouplingBound(0.5, 0.25, 1.0).ok());
}

TEST(CouplingTest, Check) {
  std::vector<double> x(40, 0.3), y(40, 0.3);
  auto r = CouplingCheck(0.5, 0.1, 0.1, x, y, 20000, RandomStream(53, 0));
  ASSERT_TRUE(r.ok());
  EXPECT_TRUE(r->pass);
  std::vector<double> big(40, 0.9);
  EXPECT_FALSE(
      CouplingCheck(0.5, 0.1, 0.1, big, y, 100, RandomStream(53, 0)).ok());
}

TEST(ChernoffTest, Checks) {
  std::mt19937_64 gen(54);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 5; ++rep) {
    std::vector<double> probs(30);
    for (double& p : probs) p = u(gen);
    for (double eps : {0.1, 0.5, 0.9}) {
      auto up = ChernoffUpperCheck(eps, 0.1, probs, 10000, RandomStream(55, rep));
      auto low = ChernoffLowerCheck(eps, 0.1, probs, 10000, RandomStream(56, rep));
      ASSERT_TRUE(up.ok());
      ASSERT_TRUE(low.ok());
      EXPECT_TRUE(up->pass);
      EXPECT_TRUE(low->pass);
    }
  }
  EXPECT_FALSE(ChernoffUpperCheck(0.5, 0.1, {1.5}, 10, RandomStream(0, 0)).ok());
}

TEST(SandwichTest, Example) {
  auto r = InverseMomentSandwich({{{0.0, 0.5}, {1.0, 0.5}}});
  ASSERT_TRUE(r.ok());
  EXPECT_NEAR(r->exact, 0.75, 1e-15);
  EXPECT_NEAR(r->lower, 1.0 / 1.5, 1e-15);
  EXPECT_NEAR(r->upper, 2.0, 1e-15);
  EXPECT_TRUE(r->holds);
  EXPECT_FALSE(InverseMomentSandwich({{}}).ok());
  EXPECT_FALSE(InverseMomentSandwich({{{0.5, 0.7}}}).ok());
}

TEST(SandwichTest, RandomVariables) {
  std::mt19937_64 gen(57);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<FiniteVariable> vars(4);
    double mean_sum = 0.0;
    for (auto& v : vars) {
      const double a = u(gen), b = u(gen), w = u(gen);
      v = {{a, w}, {b, 1.0 - w}};
      mean_sum += a * w + b * (1.0 - w);
    }
    auto r = InverseMomentSandwich(vars);
    ASSERT_TRUE(r.ok());
    EXPECT_TRUE(r->holds);
    EXPECT_NEAR(r->lower, 1.0 / (1.0 + mean_sum), 1e-14);
    EXPECT_GE(r->exact, r->lower - 1e-14);
    EXPECT_LE(r->exact, r->upper + 1e-14);
  }
}

TEST(ValidateLemmasTest, ZeroTrialsSkips) {
  const auto results = ValidateLemmas(0, 1);
  ASSERT_FALSE(results.empty());
  for (const auto& r : results) EXPECT_EQ(r.status, "skipped") << r.name;
}

TEST(ValidateLemmasTest, SmallRunPasses) {
  for (const auto& r : ValidateLemmas(5000, 2)) {
    EXPECT_EQ(r.status, "pass") << r.name;
  }
}

}  // namespace
}  // namespace private_selection
