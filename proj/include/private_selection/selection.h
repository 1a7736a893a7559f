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

// Selection from a private candidate given sampling access: a known
// threshold with a per-step stopping coin, and random stopping that keeps
// the running maximum. Each sampler has an exact outcome-distribution
// oracle for finite candidates.

#ifndef PRIVATE_SELECTION_SELECTION_H_
#define PRIVATE_SELECTION_SELECTION_H_

#include <cstdint>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_format.h"
#include "private_selection/core.h"

namespace private_selection {

// Iteration cap for modes that stop only by coin flips.
inline constexpr int64_t kSafetyIterationCap = 100'000'000;

struct ThresholdParams {
  double tau = 0.5;
  double gamma = 0.0;
  double eps0 = 1.0;
  int64_t max_iterations = 1;

  // Smallest T with T >= max{(1/gamma) ln(2/eps0), 1 + 1/(e gamma)}.
  static int64_t MinimumIterations(double gamma, double eps0);

  // gamma = 0 needs an explicit finite T; gamma > 0 needs T at least
  // MinimumIterations.
  static absl::StatusOr<ThresholdParams> Create(double tau, double gamma,
                                                double eps0,
                                                int64_t max_iterations);

  // Uses MinimumIterations(gamma, eps0) for T.
  static absl::StatusOr<ThresholdParams> WithMinimumIterations(double tau,
                                                               double gamma,
                                                               double eps0);
};

enum class RandomStopMode {
  kUnbounded,       // stop only by the gamma coin
  kHardStopPure,    // forced stop at the pure-DP horizon
  kHardStopApprox,  // forced stop at (1/gamma) ln(1/delta2)
  kHardStopCustom,  // forced stop at a caller-chosen horizon
};

struct RandomStopParams {
  double gamma = 1.0;
  RandomStopMode mode = RandomStopMode::kUnbounded;
  std::optional<int64_t> max_iterations;
  double eps0 = 0.0;
  double delta2 = 0.0;

  static absl::StatusOr<RandomStopParams> Unbounded(double gamma);
  // eps0 in (0, 1/2); T = ceil((1/gamma)(ln L + ln ln L)),
  // L = 2(1 + gamma)^2 / (eps0 gamma^2).
  static absl::StatusOr<RandomStopParams> HardStopPure(double gamma,
                                                       double eps0);
  // T = ceil((1/gamma) ln(1/delta2)).
  static absl::StatusOr<RandomStopParams> HardStopApprox(double gamma,
                                                         double delta2);
  // gamma in [0, 1]; any T >= 1.
  static absl::StatusOr<RandomStopParams> HardStopCustom(
      double gamma, int64_t max_iterations);

  static int64_t PureHorizon(double gamma, double eps0);
  static int64_t ApproxHorizon(double gamma, double delta2);
};

struct SelectionOutcome {
  bool is_bot = true;
  ScoredSample sample;
  int64_t calls = 0;

  static SelectionOutcome Bot(int64_t calls) { return {true, {}, calls}; }
  static SelectionOutcome Sample(ScoredSample s, int64_t calls) {
    return {false, s, calls};
  }
};

struct OutcomeEntry {
  ScoredSample sample;
  std::string label;
  double prob = 0.0;
};

// Exact distribution over samples and bot.
struct OutcomeDistribution {
  std::vector<OutcomeEntry> outcomes;
  double bot_prob = 0.0;

  double Total() const;
};

absl::StatusOr<SelectionOutcome> ThresholdSelect(const SamplerCandidate& q,
                                                 std::string_view dataset,
                                                 const ThresholdParams& params,
                                                 RandomStream& rng);

SelectionOutcome ThresholdSelect(const BoundSampler& draw,
                                 const ThresholdParams& params,
                                 RandomStream& rng);

absl::StatusOr<OutcomeDistribution> OracleThresholdDistribution(
    const DiscreteCandidate& q, std::string_view dataset,
    const ThresholdParams& params);

// Runs the random-stop loop over any strictly ordered draw type. Returns the
// running maximum and the number of draws.
template <typename Draw>
absl::StatusOr<std::pair<std::invoke_result_t<Draw&, RandomStream&>, int64_t>> RandomStopLoop(
    Draw& draw, double gamma, std::optional<int64_t> max_iterations,
    RandomStream& rng) {
  using Item = std::invoke_result_t<Draw&, RandomStream&>;
  const int64_t cap = max_iterations.value_or(kSafetyIterationCap);
  Item best = draw(rng);
  int64_t calls = 1;
  while (true) {
    if (calls >= cap) {
      if (!max_iterations.has_value()) {
        return absl::ResourceExhaustedError(absl::StrFormat(
            "random stopping exceeded the safety cap of %d iterations "
            "(gamma=%g)",
            cap, gamma));
      }
      return std::make_pair(best, calls);
    }
    if (rng.Bernoulli(gamma)) return std::make_pair(best, calls);
    Item next = draw(rng);
    ++calls;
    if (best < next) best = next;
  }
}

absl::StatusOr<SelectionOutcome> RandomStopSelect(
    const SamplerCandidate& q, std::string_view dataset,
    const RandomStopParams& params, RandomStream& rng);

absl::StatusOr<SelectionOutcome> RandomStopSelect(
    const BoundSampler& draw, const RandomStopParams& params,
    RandomStream& rng);

// max_iterations empty means no forced stop; requires gamma > 0.
absl::StatusOr<OutcomeDistribution> OracleRandomStopDistribution(
    const DiscreteCandidate& q, std::string_view dataset, double gamma,
    std::optional<int64_t> max_iterations);

struct UtilityBoundReport {
  double quantile_score = 0.0;  // Q^(p)
  double exact_failure = 0.0;   // Pr[output score < Q^(p)]
  double bound = 0.0;           // gamma / p
  bool holds = false;
};

absl::StatusOr<UtilityBoundReport> RandomStopUtilityBound(
    const DiscreteCandidate& q, std::string_view dataset, double gamma,
    double p);

}  // namespace private_selection

#endif  // PRIVATE_SELECTION_SELECTION_H_
