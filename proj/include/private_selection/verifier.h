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

// Exact divergences between finite distributions, privacy audits over a
// neighbor graph, and the conversions between (eps, delta)-closeness and
// pure closeness outside a small event.

#ifndef PRIVATE_SELECTION_VERIFIER_H_
#define PRIVATE_SELECTION_VERIFIER_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "private_selection/core.h"
#include "private_selection/selection.h"

namespace private_selection {

// Divergence of P from Q with the outcome set attaining it.
struct DivergenceReport {
  double value = 0.0;
  double delta = 0.0;
  std::vector<int> witness;  // indices into the aligned outcome list
};

// max_x ln(P(x) / Q(x)) over the support of P; +inf when Q misses a point of
// P. Requires equal lengths.
DivergenceReport MaxDivergence(const std::vector<double>& p,
                               const std::vector<double>& q);

// max_S ln((P(S) - delta) / Q(S)) by a prefix sweep in decreasing
// likelihood-ratio order. May be negative or -inf.
DivergenceReport DeltaDivergence(const std::vector<double>& p,
                                 const std::vector<double>& q, double delta);

// Outcome distributions for each dataset over one shared outcome list.
// `trials` is set when the probabilities are Monte Carlo frequencies.
struct DistributionTable {
  std::vector<std::string> outcomes;
  std::map<std::string, std::vector<double>> probs;
  std::optional<int64_t> trials;
};

// Keys outcomes by payload, labelled "candidate:label", plus a "bot"
// outcome.
DistributionTable AlignOutcomes(
    const std::map<std::string, OutcomeDistribution>& per_dataset);

// Frequencies from counts per dataset.
absl::StatusOr<DistributionTable> TableFromCounts(
    std::vector<std::string> outcomes,
    const std::map<std::string, std::vector<int64_t>>& counts);

struct AuditReport {
  double claimed_epsilon = 0.0;
  double claimed_delta = 0.0;
  double measured = 0.0;
  double tolerance = 0.0;
  std::string witness_from;
  std::string witness_to;
  std::vector<std::string> witness_outcomes;
  bool pass = false;
};

// Worst divergence over every edge in both directions against the claim.
// Exact tables use a 1e-9 tolerance; Monte Carlo tables add three standard
// errors of the log-ratio at the witness event. `extra_slack` is added on
// top. An infinite claim always passes.
absl::StatusOr<AuditReport> Audit(const DistributionTable& table,
                                  const NeighborGraph& graph,
                                  PrivacyLoss claimed,
                                  double extra_slack = 0.0);

inline constexpr double kExactAuditTolerance = 1e-9;

struct SplitReport {
  std::vector<int> event;  // B
  double prob_p = 0.0;     // P(B)
  double prob_q = 0.0;     // Q(B)
  double prob_p_high = 0.0;  // P({P/Q >= e^{eps'}})
  double prob_q_high = 0.0;  // Q({Q/P >= e^{eps'}})
  double mass_bound = 0.0;  // delta / (1 - e^{eps - eps'})
  double restricted_divergence = 0.0;  // both directions, outside B
  bool pass = false;
};

// B = {P/Q >= e^{eps'}} union {Q/P >= e^{eps'}}. Fails with
// FailedPrecondition when P and Q are not (eps, delta)-close. Outside B the
// check uses the restricted (unnormalized) measures.
absl::StatusOr<SplitReport> SplitEvent(const std::vector<double>& p,
                                       const std::vector<double>& q,
                                       double eps, double delta,
                                       double eps_prime);

struct MergeReport {
  double prob_p = 0.0;
  double prob_q = 0.0;
  double divergence_pq = 0.0;  // D^{P(B)}(P || Q)
  double divergence_qp = 0.0;  // D^{Q(B)}(Q || P)
  bool premise = false;
  bool pass = false;
};

// Given pure eps-closeness outside `event`, checks (eps, P(B))-closeness of
// P from Q and (eps, Q(B))-closeness of Q from P.
MergeReport MergeEvent(const std::vector<double>& p,
                       const std::vector<double>& q,
                       const std::vector<int>& event, double eps);

}  // namespace private_selection

#endif  // PRIVATE_SELECTION_VERIFIER_H_
