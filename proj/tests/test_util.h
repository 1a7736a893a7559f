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

// Helpers shared by the unit and acceptance tests: instance builders and
// independent reference computations that do not reuse library code paths.

#ifndef PRIVATE_SELECTION_TESTS_TEST_UTIL_H_
#define PRIVATE_SELECTION_TESTS_TEST_UTIL_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "private_selection/core.h"
#include "private_selection/selection.h"

namespace private_selection::testing {

// Builds a candidate with the given scores and one probability row per
// dataset. Payload output ids follow support order.
inline DiscreteCandidate MakeCandidate(
    int index, const std::vector<double>& scores,
    const std::vector<std::string>& datasets,
    const std::vector<std::vector<double>>& probs) {
  std::vector<SupportPoint> support;
  for (size_t j = 0; j < scores.size(); ++j) {
    support.push_back(
        {{{index, static_cast<int64_t>(j)}, *Score::Create(scores[j])},
         "x" + std::to_string(j)});
  }
  return *DiscreteCandidate::Create(std::move(support), datasets, probs);
}

inline DiscreteCandidate SingleDataset(const std::vector<double>& scores,
                                       const std::vector<double>& probs,
                                       int index = 0) {
  return MakeCandidate(index, scores, {"D"}, {probs});
}

inline std::vector<double> RandomSimplex(int n, std::mt19937_64& gen) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> w(n);
  double total = 0.0;
  for (double& x : w) {
    x = e(gen);
    total += x;
  }
  for (double& x : w) x /= total;
  // Absorb rounding so the row sums to one within the library tolerance.
  double sum = 0.0;
  for (int i = 0; i + 1 < n; ++i) sum += w[i];
  w[n - 1] = 1.0 - sum;
  return w;
}

// Probability row within a factor e^{eps} of `base` pointwise, normalized.
// Normalization can shrink the ratio, never raise it above e^{2 eps}; the
// caller measures the actual divergence.
inline std::vector<double> Perturb(const std::vector<double>& base, double eps,
                                   std::mt19937_64& gen) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> w(base.size());
  double total = 0.0;
  for (size_t i = 0; i < base.size(); ++i) {
    w[i] = base[i] * std::exp(eps * u(gen));
    total += w[i];
  }
  for (double& x : w) x /= total;
  double sum = 0.0;
  for (size_t i = 0; i + 1 < w.size(); ++i) sum += w[i];
  w.back() = 1.0 - sum;
  return w;
}

// Random grid scores in {0, 1/8, ..., 1}, possibly repeated.
inline std::vector<double> RandomScores(int n, std::mt19937_64& gen) {
  std::uniform_int_distribution<int> d(0, 8);
  std::vector<double> s(n);
  for (double& x : s) x = d(gen) / 8.0;
  return s;
}

// Reference outcome law keyed by payload, with kBotKey for bot.
using PayloadLaw = std::map<std::pair<int, int64_t>, double>;
inline constexpr std::pair<int, int64_t> kBotKey{-1, -1};

inline PayloadLaw ToLaw(const OutcomeDistribution& dist) {
  PayloadLaw law;
  for (const OutcomeEntry& e : dist.outcomes) {
    law[{e.sample.payload.candidate, e.sample.payload.output}] += e.prob;
  }
  law[kBotKey] += dist.bot_prob;
  return law;
}

// Threshold selection law by stepping the per-iteration recursion directly.
inline PayloadLaw ReferenceThresholdLaw(const std::vector<ScoredSample>& pts,
                                        const std::vector<double>& probs,
                                        double tau, double gamma, int64_t t) {
  double pass = 0.0;
  for (size_t i = 0; i < pts.size(); ++i) {
    if (pts[i].score.value() >= tau) pass += probs[i];
  }
  double alive = 1.0;  // probability of reaching the current iteration
  double success = 0.0;
  double bot = 0.0;
  for (int64_t j = 1; j <= t; ++j) {
    success += alive * pass;
    const double fail = alive * (1.0 - pass);
    if (j == t) {
      bot += fail;
    } else {
      bot += fail * gamma;
      alive = fail * (1.0 - gamma);
    }
  }
  PayloadLaw law;
  for (size_t i = 0; i < pts.size(); ++i) {
    if (pts[i].score.value() >= tau && pass > 0.0) {
      law[{pts[i].payload.candidate, pts[i].payload.output}] +=
          success * probs[i] / pass;
    }
  }
  law[kBotKey] += bot;
  return law;
}

// Random-stop law by a forward pass over the distribution of the running
// maximum. `t` < 0 means no forced stop; the loop then runs until the
// remaining mass is below 1e-16.
inline PayloadLaw ReferenceRandomStopLaw(const std::vector<ScoredSample>& pts,
                                         const std::vector<double>& probs,
                                         double gamma, int64_t t) {
  std::vector<size_t> order(pts.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return pts[a] < pts[b]; });
  const size_t n = pts.size();
  std::vector<double> p(n);
  for (size_t r = 0; r < n; ++r) p[r] = probs[order[r]];
  std::vector<double> cdf(n);  // Pr[draw rank <= r]
  double acc = 0.0;
  for (size_t r = 0; r < n; ++r) {
    acc += p[r];
    cdf[r] = acc;
  }
  // state[r]: probability that the running maximum has rank r and the loop
  // is still alive after the current draw.
  std::vector<double> state = p;
  std::vector<double> out(n, 0.0);
  for (int64_t j = 1;; ++j) {
    const bool forced = t > 0 && j == t;
    double alive = 0.0;
    for (size_t r = 0; r < n; ++r) {
      const double stop = forced ? state[r] : state[r] * gamma;
      out[r] += stop;
      state[r] -= stop;
      alive += state[r];
    }
    if (forced || alive < 1e-16) break;
    std::vector<double> next(n, 0.0);
    double below = 0.0;  // sum of state[s] for s < r
    for (size_t r = 0; r < n; ++r) {
      next[r] = state[r] * cdf[r] + below * p[r];
      below += state[r];
    }
    state = std::move(next);
  }
  PayloadLaw law;
  for (size_t r = 0; r < n; ++r) {
    const ScoredSample& s = pts[order[r]];
    law[{s.payload.candidate, s.payload.output}] += out[r];
  }
  law[kBotKey] += 0.0;
  return law;
}

inline std::vector<ScoredSample> Samples(const DiscreteCandidate& q) {
  std::vector<ScoredSample> out;
  for (const SupportPoint& p : q.support()) out.push_back(p.sample);
  return out;
}

}  // namespace private_selection::testing

#endif  // PRIVATE_SELECTION_TESTS_TEST_UTIL_H_
