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

// Exponential-mechanism style selectors built from noisy score candidates
// and random stopping, plus the dummy-class amplification mechanism.

#ifndef PRIVATE_SELECTION_MECHANISMS_H_
#define PRIVATE_SELECTION_MECHANISMS_H_

#include <functional>
#include <optional>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "private_selection/core.h"
#include "private_selection/report.h"

namespace private_selection {

// Constant inside the O(s ln(K / beta) / eps) utility claims.
inline constexpr double kUtilityConstant = 4.0;

struct ScoredOptionSet {
  std::vector<double> scores;
  std::vector<double> sensitivities;  // one shared value or one per option
  std::optional<double> smooth_eta;   // set when sensitivities are smooth

  static absl::StatusOr<ScoredOptionSet> Create(
      std::vector<double> scores, std::vector<double> sensitivities,
      std::optional<double> smooth_eta = std::nullopt);

  size_t size() const { return scores.size(); }
  double sensitivity(size_t i) const {
    return sensitivities.size() == 1 ? sensitivities[0] : sensitivities[i];
  }
  bool shared_sensitivity() const;
};

// Softmax weights e^{eps A_i} normalized, evaluated in log space.
std::vector<double> SoftmaxProbabilities(const std::vector<double>& scores,
                                         double eps);

absl::StatusOr<int> ExpMech(const std::vector<double>& scores, double eps,
                            RandomStream& rng);

absl::StatusOr<int> EmSelect(const ScoredOptionSet& opts, double eps,
                             double beta, RandomStream& rng);

// Shifted candidates q_i - 2 s_i ln(K / beta) / eps + Lap(s_i / eps) with a
// hard stop at (K / beta) ln(1 / delta).
absl::StatusOr<int> GeneralizedEmSelect(const ScoredOptionSet& opts,
                                        double eps, double beta, double delta,
                                        RandomStream& rng);

// Truncated-Laplace candidates q_i + TLap^{ln(1/delta)}(s / eps), hard stop
// at (K / beta) ln(1 / delta). Requires eps < 1 and delta < 1/4.
absl::StatusOr<int> MarginSelect(const ScoredOptionSet& opts, double eps,
                                 double delta, RandomStream& rng,
                                 double beta = 0.05);

// eta = eps / (4 ln(2 / delta)).
double SmoothSensitivityEta(double eps, double delta);

// Requires delta < beta / K and smooth sensitivities at eta.
absl::StatusOr<int> SmoothEmSelect(const ScoredOptionSet& opts, double eps,
                                   double delta, double beta,
                                   RandomStream& rng);

struct AmplificationConfig {
  double tau = 0.0;
  double gamma = 0.25;
  double eps2 = 1.0;
  int num_runs = 1;  // N

  static absl::StatusOr<AmplificationConfig> Create(double tau, double gamma,
                                                    double eps2,
                                                    int num_runs);
  // 1 + ceil(1 / gamma).
  int dummy_count() const;
};

struct AmplificationOutcome {
  int index = 0;  // in [0, N + d); indices >= N are dummies
  bool dummy = false;
  double score = 0.0;  // min{tau, q_i} or tau for a dummy
};

absl::StatusOr<AmplificationOutcome> AmplificationEm(
    const std::vector<double>& samples, const AmplificationConfig& cfg,
    RandomStream& rng);

// d / (N p + d - 1); equals (gamma + 1) / (N p gamma + 1) when 1/gamma is an
// integer.
double AmplificationDummyBound(const AmplificationConfig& cfg,
                               double mean_weight);

// tau - ln(1 / (delta p)) / eps2.
double AmplificationUtilityThreshold(const AmplificationConfig& cfg,
                                     double delta, double mean_weight);

// Mean of E e^{eps2 (min{tau, q} - tau)} for q uniform on [0, 1].
double UniformMeanWeight(double tau, double eps2);

using ScoreDraw = std::function<double(RandomStream&)>;

// Runs the mechanism on N fresh draws of q per trial and compares the dummy
// frequency with AmplificationDummyBound.
CheckReport AmplificationDummyCheck(const ScoreDraw& draw_q,
                                    const AmplificationConfig& cfg,
                                    double mean_weight, int64_t trials,
                                    const RandomStream& root);

// Failure means the returned score is below AmplificationUtilityThreshold.
// delta_target >= 1 makes the threshold -inf.
CheckReport AmplificationUtilityCheck(const ScoreDraw& draw_q,
                                      const AmplificationConfig& cfg,
                                      double mean_weight, double delta_target,
                                      int64_t trials,
                                      const RandomStream& root);

}  // namespace private_selection

#endif  // PRIVATE_SELECTION_MECHANISMS_H_
