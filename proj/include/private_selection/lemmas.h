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

// Validators for the concentration and coupling lemmas behind the
// sparse-vector analysis, the inverse-moment sandwich used by the
// amplification bound, and the event split/merge conversions.

#ifndef PRIVATE_SELECTION_LEMMAS_H_
#define PRIVATE_SELECTION_LEMMAS_H_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "absl/status/statusor.h"
#include "private_selection/core.h"
#include "private_selection/report.h"

namespace private_selection {

// Law of a sum of independent Bernoulli variables, held as its exact pmf.
class PoissonBinomial {
 public:
  explicit PoissonBinomial(const std::vector<double>& probs);

  int n() const { return static_cast<int>(pmf_.size()) - 1; }
  double mean() const { return mean_; }
  const std::vector<double>& pmf() const { return pmf_; }

  // Pr[X >= x] and Pr[X <= x] for real x.
  double UpperTail(double x) const;
  double LowerTail(double x) const;
  int Sample(RandomStream& rng) const;

 private:
  std::vector<double> pmf_;
  double mean_ = 0.0;
  CategoricalSampler sampler_;
};

struct CouplingConstants {
  double coupling = 0.0;  // C
  double offset = 0.0;    // Delta
};

// C = 2 (e^{eps0 + eps1} + 1 + e^{eps0 / 2}),
// Delta = C ln(2 / delta0) / (eps0 (e^{eps0 + eps1} - 1)).
absl::StatusOr<CouplingConstants> CouplingBound(double eps0, double eps1,
                                                double delta0);

// Violation: X + Delta >= e^{eps1 + eps0} (Y + Delta) with X, Y independent.
// Requires E X <= e^{eps1} E Y. Passes when the Monte Carlo rate is within
// three standard errors of delta0 and the exact rate is at most delta0.
absl::StatusOr<CheckReport> CouplingCheck(double eps0, double eps1,
                                          double delta0,
                                          const std::vector<double>& x_probs,
                                          const std::vector<double>& y_probs,
                                          int64_t trials,
                                          const RandomStream& root);

// Violation: X >= e^eps E X + ((e^eps + 1) / eps) ln(1 / delta).
absl::StatusOr<CheckReport> ChernoffUpperCheck(double eps, double delta,
                                               const std::vector<double>& probs,
                                               int64_t trials,
                                               const RandomStream& root);

// Violation: Y <= e^{-eps} E Y - ln(1 / delta) / eps.
absl::StatusOr<CheckReport> ChernoffLowerCheck(double eps, double delta,
                                               const std::vector<double>& probs,
                                               int64_t trials,
                                               const RandomStream& root);

// A [0, 1]-valued variable with finite support: (value, probability) pairs.
using FiniteVariable = std::vector<std::pair<double, double>>;

struct SandwichReport {
  double exact = 0.0;  // E[1 / (1 + sum X_i)]
  double lower = 0.0;  // 1 / (1 + sum E X_i)
  double upper = 0.0;  // 1 / sum E X_i
  bool holds = false;
};

// Exact enumeration over the product of supports (at most 1e7 points).
absl::StatusOr<SandwichReport> InverseMomentSandwich(
    const std::vector<FiniteVariable>& variables);

struct LemmaResult {
  std::string name;
  std::string status;  // "pass", "fail" or "skipped"
  std::vector<CheckReport> checks;
};

// Runs every validator with `trials` Monte Carlo trials per check; zero
// trials skips them all.
std::vector<LemmaResult> ValidateLemmas(int64_t trials, uint64_t seed);

}  // namespace private_selection

#endif  // PRIVATE_SELECTION_LEMMAS_H_
