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

// Sparse-vector thresholding on percentiles of private queries, and the
// two-stage selector that first finds a threshold and then runs
// known-threshold selection at it.
//
// When a query candidate carries its exact distribution, sample counts are
// drawn from the matching binomial or multinomial law instead of
// materializing every sample. The count distribution is identical, and this
// keeps desk-scale runs feasible for large sample sizes.

#ifndef PRIVATE_SELECTION_SPARSE_VECTOR_H_
#define PRIVATE_SELECTION_SPARSE_VECTOR_H_

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "private_selection/core.h"
#include "private_selection/selection.h"

namespace private_selection {

// Largest sample size accepted by default.
inline constexpr double kDefaultMaxSamples = 1e12;
// Largest sample size for exact-count fast paths (fits in int64).
inline constexpr double kExactPathMaxSamples = 4.0e18;

// x / (1 - x) on (0, 1).
absl::StatusOr<double> Phi(double x);
// Inverse of Phi: y / (1 + y).
double PhiInverse(double y);
// (count + offset) / (n - count + offset).
double PhiNd(int64_t count, int64_t n, double offset);
// Same potential at a real-valued exceedance x: (n x + offset) /
// (n (1 - x) + offset).
double PhiNdAt(double x, int64_t n, double offset);

// 2 (e^{eps0 + eps1} + 1 + e^{eps0 / 2}).
double CouplingConstant(double eps0, double eps1);

struct PotentialParams {
  int64_t samples = 0;         // N, rounded up
  double samples_real = 0.0;   // N before rounding
  double offset = 0.0;         // additive offset in the potential
  double lipschitz = 0.0;      // S
  double coupling = 0.0;       // C
  double target_shift = 0.0;   // Lambda; threshold finding only
};

// Both derivations reject N above max_samples. Passing an infinite
// max_samples evaluates the formulas anyway; N then saturates at the int64
// maximum in `samples` while `samples_real` keeps the value.
absl::StatusOr<PotentialParams> DeriveExtendedParams(
    int horizon, double delta, double eps0, double eps1, double eps3,
    double beta, double p_star, double max_samples = kDefaultMaxSamples);

absl::StatusOr<PotentialParams> DeriveFindThresholdParams(
    int rounds, double delta, double eps0, double eps1, double eps3,
    double beta, double p_star, double max_samples = kDefaultMaxSamples);

enum class SparseVectorKind { kExtended, kFindThreshold };

struct SVConfig {
  SparseVectorKind kind = SparseVectorKind::kExtended;
  double eps0 = 0.0;
  double eps1 = 0.0;
  double eps3 = 0.0;
  double delta = 0.0;
  double beta = 0.0;
  double p_star = 0.5;
  int horizon = 0;  // T for the extended variant, R for threshold finding
  double max_samples = kDefaultMaxSamples;
  PotentialParams derived;

  // Runnable configs require max_samples <= kExactPathMaxSamples.
  static absl::StatusOr<SVConfig> Extended(
      int horizon, double delta, double eps0, double eps1, double eps3,
      double beta, double p_star, double max_samples = kDefaultMaxSamples);
  static absl::StatusOr<SVConfig> FindThreshold(
      int rounds, double delta, double eps0, double eps1, double eps3,
      double beta, double p_star, double max_samples = kDefaultMaxSamples);

  // Recomputes the derived fields and requires exact agreement.
  absl::Status Validate() const;
};

struct QueryRecord {
  int index = 0;
  double tau = 0.0;
  int64_t count = 0;
  double exceedance = 0.0;  // oracle variant only
  bool fired = false;
  double query_noise = 0.0;
};

struct SVOutcome {
  std::optional<int> halted_at;  // zero-based
  std::vector<bool> answers;     // true for a fired query
  int64_t samples_used = 0;
  double threshold_noise = 0.0;
  std::vector<QueryRecord> trace;
  int clamped_exceedances = 0;
};

struct StreamQuery {
  SamplerCandidate candidate;
  double tau = 0.0;
};

using QueryStream = std::vector<StreamQuery>;

// Oracle variant given exact exceedances. Values in {0, 1} are clamped to
// [1e-15, 1 - 1e-15] and counted in clamped_exceedances.
absl::StatusOr<SVOutcome> AboveThresholdOracle(
    const std::vector<double>& exceedances, double p_star, double eps1,
    double eps3, RandomStream& rng);

absl::StatusOr<SVOutcome> ExtendedAboveThreshold(const QueryStream& stream,
                                                 std::string_view dataset,
                                                 const SVConfig& cfg,
                                                 RandomStream& rng);

// Grid threshold 1 - (i - 1) / (R - 1) for i in [1, R].
double GridThreshold(int i, int rounds);

struct ThresholdSearch {
  std::optional<double> tau;
  std::optional<int> index;  // one-based grid index
  int64_t samples_used = 0;
  double threshold_noise = 0.0;
  std::vector<QueryRecord> trace;
};

// Draws the N samples once and sweeps the grid from 1 down to 0.
absl::StatusOr<ThresholdSearch> FindPercentileThreshold(
    const SamplerCandidate& q, std::string_view dataset, const SVConfig& cfg,
    RandomStream& rng);

// Bounds from the oracle analysis, in potential units, with a = 12 eps1 /
// eps3.
struct OracleBoundsPhi {
  double late_stop;     // (beta / (R + 1))^a Phi(p*)
  double early_stop;    // ((R + 1) / beta)^a Phi(p*)
  double halt_trigger;  // (1 / beta)^a Phi(p*)
};

absl::StatusOr<OracleBoundsPhi> OracleHaltingBounds(double beta, int rounds,
                                                    double eps1, double eps3,
                                                    double p_star);

// Same bounds at p* = 1/2 stated directly as exceedance values.
struct MedianBounds {
  double late_stop;
  double early_stop;
  double halt_trigger;
};

MedianBounds MedianHaltingBounds(double beta, int rounds, double eps1,
                                 double eps3);

struct PrivateSelectParams {
  int rounds = 5;
  double beta = 0.25;
  double delta = 0.1;
  double eps0 = 0.5;
  double eps1 = 0.05;
};

struct PrivateSelectPlan {
  SVConfig stage1;
  double target_exceedance = 0.0;  // p1
  double gamma = 0.0;              // p1 * beta
  int64_t stage2_horizon = 0;
  double call_bound = 0.0;         // bound expression without constant
  double deterministic_calls = 0.0;  // N + T
};

// K ((R + 1) / beta^2)^{6 + 12 eps1 / eps0} (ln(R / delta) / eps0^2 +
// ln(1 / eps0) / beta).
double PrivateSelectCallBound(int num_candidates,
                              const PrivateSelectParams& params);

// Stage 1 searches for the exceedance level 1/(2K) that the best median
// guarantees on the uniform mixture; p1 sets the stage-2 stopping budget.
absl::StatusOr<PrivateSelectPlan> PlanPrivateSelect(
    int num_candidates, const PrivateSelectParams& params,
    double max_samples);

struct PrivateSelectResult {
  SelectionOutcome outcome;
  std::optional<double> threshold;
  int64_t stage1_samples = 0;
  int64_t stage2_calls = 0;
  int64_t total_calls = 0;
};

absl::StatusOr<PrivateSelectResult> PrivateSelect(
    const std::vector<SamplerCandidate>& candidates, std::string_view dataset,
    const PrivateSelectParams& params, RandomStream& rng);

// Variant reusing a plan computed once for many trials.
absl::StatusOr<PrivateSelectResult> PrivateSelect(
    const SamplerCandidate& mixture, std::string_view dataset,
    const PrivateSelectPlan& plan, RandomStream& rng);

}  // namespace private_selection

#endif  // PRIVATE_SELECTION_SPARSE_VECTOR_H_
