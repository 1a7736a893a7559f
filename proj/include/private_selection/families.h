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

// Constructed instances showing where simpler selection rules lose privacy,
// and the packing family behind the factor-two lower bound.

#ifndef PRIVATE_SELECTION_FAMILIES_H_
#define PRIVATE_SELECTION_FAMILIES_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "private_selection/core.h"
#include "private_selection/report.h"

namespace private_selection {

inline constexpr char kFamilyDataset[] = "D";
inline constexpr char kFamilyNeighbor[] = "D'";

struct CounterexampleFamily {
  std::string name;
  std::vector<std::pair<std::string, double>> params;
  NeighborGraph graph;
  std::vector<DiscreteCandidate> candidates;
  // Largest per-candidate max-divergence over every edge, in closed form.
  double declared_epsilon = 0.0;
};

// Largest max-divergence of any candidate across any edge, both directions.
absl::StatusOr<double> MeasuredCandidateDivergence(
    const CounterexampleFamily& family);

// Exact distribution of the winning candidate index when each candidate is
// sampled once and the largest sample in the (score, payload) order wins.
absl::StatusOr<std::vector<double>> NaiveMaxDistribution(
    const std::vector<DiscreteCandidate>& candidates,
    std::string_view dataset);

// kLiteral uses 0.8 with probability 1/2 versus e^eps / 2. Its 0.95 outcome
// then has divergence -ln(2 - e^eps) > eps. kBalanced uses 1 / (1 + e^eps)
// versus e^eps / (1 + e^eps), so every outcome has divergence exactly eps.
// Both give the winner-0 log-ratio K eps.
enum class NaiveMaxVariant { kLiteral, kBalanced };

// A reference candidate fixed at 0.9 plus `rivals` candidates on
// {0.8, 0.95}.
absl::StatusOr<CounterexampleFamily> NaiveMaxFamily(
    int rivals, double eps, NaiveMaxVariant variant = NaiveMaxVariant::kLiteral);

struct NaiveMaxReport {
  double prob_d = 0.0;        // Pr[winner = 0 | D]
  double prob_neighbor = 0.0;  // Pr[winner = 0 | D']
  double log_ratio = 0.0;
  double expected = 0.0;       // rivals * eps
  double candidate_divergence = 0.0;
  double declared = 0.0;
  bool pass = false;
};

absl::StatusOr<NaiveMaxReport> NaiveMaxCheck(
    int rivals, double eps, NaiveMaxVariant variant = NaiveMaxVariant::kLiteral);

// Rivals take 0.95 with probability L / K versus e^{-eps} L / K, with
// L = ln(1 / delta).
absl::StatusOr<CounterexampleFamily> NaiveMaxApproxFamily(int rivals,
                                                          double delta,
                                                          double eps);

struct NaiveMaxApproxReport {
  double prob_d = 0.0;
  double prob_neighbor = 0.0;
  double event_ratio = 0.0;       // ln((Pr[D'] - delta) / Pr[D])
  double index_divergence = 0.0;  // full delta-divergence of the winner law
  double target = 0.0;            // 0.5 ln(1/delta) eps
  bool in_regime = false;         // K >= 100 ln(1/delta)
  bool pass = false;
};

absl::StatusOr<NaiveMaxApproxReport> NaiveMaxApproxCheck(int rivals,
                                                         double delta,
                                                         double eps);

// Lowers the threshold from 1 by 1/R with probability gamma after each
// failed draw, and returns the first sample at or above it.
absl::StatusOr<ScoredSample> DecreasingThresholdSelect(
    const BoundSampler& draw, double gamma, int rounds, RandomStream& rng);

// Pr[output score 0] for Bernoulli(p) scores:
// (1 - p) gamma^R ((1 - p) / (p (1 - gamma) + gamma))^R.
double DecreasingThresholdsClosedForm(double p, double gamma, int rounds);

struct DecreasingThresholdsReport {
  double closed_form = 0.0;
  double simulated = 0.0;
  double std_error = 0.0;
  bool agrees = false;  // within four standard errors
  double amplification = 0.0;  // ln of the closed-form ratio
  double required = 0.0;       // R eps
  bool amplifies = false;
};

// The neighbor sets 1 - p' = e^eps (1 - p).
absl::StatusOr<DecreasingThresholdsReport> DecreasingThresholdsCheck(
    double p, double gamma, int rounds, double eps, int64_t trials,
    const RandomStream& root);

absl::StatusOr<CounterexampleFamily> PercentileFamily(double eps);

// Largest support score s with Pr[q >= s] >= 1/2.
absl::StatusOr<double> DistributionMedian(const DiscreteCandidate& q,
                                          std::string_view dataset);
// Largest sample value s with at least half of the samples >= s.
double EmpiricalMedian(std::vector<double> samples);

struct PercentileReport {
  double divergence = 0.0;
  double bound = 0.0;  // 2 eps + eps^3
  double median_d = 0.0;
  double median_neighbor = 0.0;
  double flip_rate = 0.0;
  int64_t samples = 0;
  int64_t trials = 0;
  bool pass = false;
};

absl::StatusOr<PercentileReport> PercentileCheck(double eps, int64_t samples,
                                                 int64_t trials,
                                                 const RandomStream& root);

// Datasets D0, D1..DK and chain points "D{j}_{t}" between D0 and Dj. Each
// Bernoulli parameter moves geometrically along the chain, in p while p is
// the binding side and in 1 - p after that, so no step exceeds eps.
absl::StatusOr<CounterexampleFamily> PackingFamily(int k, double alpha,
                                                   double eps);

// ceil((0.5 + alpha) ln K / eps).
int PackingDistance(int k, double alpha, double eps);

struct PackingReport {
  int distance = 0;
  double max_step_divergence = 0.0;
  double eps = 0.0;
  double own_probability = 0.0;    // p_j(D_j)
  double other_probability = 0.0;  // p_i(D_j), i != j
  double base_probability = 0.0;   // p_i(D_0)
  bool pass = false;
};

absl::StatusOr<PackingReport> PackingCheck(int k, double alpha, double eps);

// Pr[argmax = target] with one sample per candidate and uniform tie-breaking
// among equal scores.
absl::StatusOr<double> DominanceProbability(
    const std::vector<DiscreteCandidate>& candidates,
    std::string_view dataset, int target);

// One sample per candidate; ties broken uniformly at random.
absl::StatusOr<int> ArgmaxOfSamples(
    const std::vector<DiscreteCandidate>& candidates,
    std::string_view dataset, RandomStream& rng);

using IndexMechanism = std::function<absl::StatusOr<int>(
    const CounterexampleFamily&, std::string_view, RandomStream&)>;

struct UsefulnessEntry {
  std::string dataset;
  int target = 0;
  double dominance = 0.0;
  bool dominant = false;
  double frequency = 0.0;
  bool pass = true;
};

struct UsefulnessReport {
  double gamma_level = 0.0;
  int64_t trials = 0;
  std::vector<UsefulnessEntry> entries;
  bool pass = false;
};

// Estimates Pr[M(Dj) = j] on each Dj of a packing family. A dominant target
// passes when its frequency is at least gamma_level minus three standard
// errors.
absl::StatusOr<UsefulnessReport> WeakUsefulnessCheck(
    const CounterexampleFamily& family, const IndexMechanism& mechanism,
    double gamma_level, int64_t trials, const RandomStream& root);

}  // namespace private_selection

#endif  // PRIVATE_SELECTION_FAMILIES_H_
