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

#include "private_selection/verifier.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>

#include "absl/strings/str_format.h"

namespace private_selection {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double LogRatio(double numerator, double denominator) {
  if (numerator <= 0.0) return -kInf;
  if (denominator <= 0.0) return kInf;
  return std::log(numerator / denominator);
}

// Standard error of ln(freq - shift) for a frequency over `trials` draws.
double LogFrequencyStdError(double freq, double shift, int64_t trials) {
  const double centered = freq - shift;
  if (centered <= 0.0 || trials <= 0) return 0.0;
  return std::sqrt(freq * (1.0 - freq) / static_cast<double>(trials)) /
         centered;
}

}  // namespace

DivergenceReport MaxDivergence(const std::vector<double>& p,
                               const std::vector<double>& q) {
  DivergenceReport report;
  report.value = -kInf;
  for (size_t x = 0; x < p.size() && x < q.size(); ++x) {
    if (p[x] <= 0.0) continue;
    const double v = LogRatio(p[x], q[x]);
    if (v > report.value) {
      report.value = v;
      report.witness = {static_cast<int>(x)};
    }
  }
  return report;
}

DivergenceReport DeltaDivergence(const std::vector<double>& p,
                                 const std::vector<double>& q, double delta) {
  std::vector<int> order;
  for (size_t x = 0; x < p.size() && x < q.size(); ++x) {
    if (p[x] > 0.0) order.push_back(static_cast<int>(x));
  }
  // Decreasing P/Q compared by cross-multiplication; Q = 0 sorts first.
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return p[a] * q[b] > p[b] * q[a];
  });
  DivergenceReport report;
  report.delta = delta;
  report.value = -kInf;
  double mass_p = 0.0;
  double mass_q = 0.0;
  size_t best_prefix = 0;
  for (size_t k = 0; k < order.size(); ++k) {
    mass_p += p[order[k]];
    mass_q += q[order[k]];
    const double v = LogRatio(mass_p - delta, mass_q);
    if (v > report.value) {
      report.value = v;
      best_prefix = k + 1;
    }
  }
  report.witness.assign(order.begin(), order.begin() + best_prefix);
  return report;
}

DistributionTable AlignOutcomes(
    const std::map<std::string, OutcomeDistribution>& per_dataset) {
  std::map<Payload, std::string> keys;
  for (const auto& [dataset, dist] : per_dataset) {
    for (const OutcomeEntry& e : dist.outcomes) {
      keys.emplace(e.sample.payload,
                   e.label.empty()
                       ? absl::StrFormat("%d:%d", e.sample.payload.candidate,
                                         e.sample.payload.output)
                       : absl::StrFormat("%d:%s", e.sample.payload.candidate,
                                         e.label));
    }
  }
  DistributionTable table;
  std::map<Payload, int> position;
  for (const auto& [payload, label] : keys) {
    position[payload] = static_cast<int>(table.outcomes.size());
    table.outcomes.push_back(label);
  }
  const int bot = static_cast<int>(table.outcomes.size());
  table.outcomes.push_back("bot");
  for (const auto& [dataset, dist] : per_dataset) {
    std::vector<double> probs(table.outcomes.size(), 0.0);
    for (const OutcomeEntry& e : dist.outcomes) {
      probs[position[e.sample.payload]] += e.prob;
    }
    probs[bot] = dist.bot_prob;
    table.probs[dataset] = std::move(probs);
  }
  return table;
}

absl::StatusOr<DistributionTable> TableFromCounts(
    std::vector<std::string> outcomes,
    const std::map<std::string, std::vector<int64_t>>& counts) {
  DistributionTable table;
  table.outcomes = std::move(outcomes);
  std::optional<int64_t> trials;
  for (const auto& [dataset, row] : counts) {
    if (row.size() != table.outcomes.size()) {
      return absl::InvalidArgumentError(absl::StrFormat(
          "dataset %s has %d counts for %d outcomes", dataset, row.size(),
          table.outcomes.size()));
    }
    const int64_t total = std::accumulate(row.begin(), row.end(), int64_t{0});
    if (total <= 0) {
      return absl::InvalidArgumentError(
          absl::StrFormat("dataset %s has no trials", dataset));
    }
    if (trials.has_value() && *trials != total) {
      return absl::InvalidArgumentError(
          "every dataset must use the same number of trials");
    }
    trials = total;
    std::vector<double> freq(row.size());
    for (size_t i = 0; i < row.size(); ++i) {
      freq[i] = static_cast<double>(row[i]) / static_cast<double>(total);
    }
    table.probs[dataset] = std::move(freq);
  }
  table.trials = trials;
  return table;
}

absl::StatusOr<AuditReport> Audit(const DistributionTable& table,
                                  const NeighborGraph& graph,
                                  PrivacyLoss claimed, double extra_slack) {
  AuditReport report;
  report.claimed_epsilon = claimed.epsilon;
  report.claimed_delta = claimed.delta;
  report.measured = -kInf;
  for (const auto& [a, b] : graph.edges()) {
    auto pa = table.probs.find(a);
    auto pb = table.probs.find(b);
    if (pa == table.probs.end() || pb == table.probs.end()) {
      return absl::InvalidArgumentError(absl::StrFormat(
          "no output distribution for edge %s-%s", a, b));
    }
    for (int direction = 0; direction < 2; ++direction) {
      const auto& from = direction == 0 ? *pa : *pb;
      const auto& to = direction == 0 ? *pb : *pa;
      DivergenceReport d =
          DeltaDivergence(from.second, to.second, claimed.delta);
      if (d.value <= report.measured) continue;
      report.measured = d.value;
      report.witness_from = from.first;
      report.witness_to = to.first;
      report.witness_outcomes.clear();
      double mass_p = 0.0;
      double mass_q = 0.0;
      for (int x : d.witness) {
        report.witness_outcomes.push_back(table.outcomes[x]);
        mass_p += from.second[x];
        mass_q += to.second[x];
      }
      report.tolerance = kExactAuditTolerance;
      if (table.trials.has_value() && std::isfinite(d.value)) {
        const double se_p =
            LogFrequencyStdError(mass_p, claimed.delta, *table.trials);
        const double se_q = LogFrequencyStdError(mass_q, 0.0, *table.trials);
        report.tolerance += 3.0 * std::sqrt(se_p * se_p + se_q * se_q);
      }
    }
  }
  if (graph.edges().empty()) report.measured = 0.0;
  report.tolerance += extra_slack;
  report.pass = std::isinf(claimed.epsilon) && claimed.epsilon > 0
                    ? true
                    : report.measured <= claimed.epsilon + report.tolerance;
  return report;
}

absl::StatusOr<SplitReport> SplitEvent(const std::vector<double>& p,
                                       const std::vector<double>& q,
                                       double eps, double delta,
                                       double eps_prime) {
  if (p.size() != q.size()) {
    return absl::InvalidArgumentError("distributions differ in length");
  }
  if (!(eps_prime > eps)) {
    return absl::InvalidArgumentError("eps' must exceed eps");
  }
  if (!(delta >= 0.0 && delta < 0.1)) {
    return absl::InvalidArgumentError("delta must lie in [0, 1/10)");
  }
  constexpr double kPremiseTolerance = 1e-12;
  if (DeltaDivergence(p, q, delta).value > eps + kPremiseTolerance ||
      DeltaDivergence(q, p, delta).value > eps + kPremiseTolerance) {
    return absl::FailedPreconditionError(absl::StrFormat(
        "distributions are not (%g, %g)-close", eps, delta));
  }
  const double cut = std::exp(eps_prime);
  SplitReport report;
  report.mass_bound = delta / (1.0 - std::exp(eps - eps_prime));
  for (size_t x = 0; x < p.size(); ++x) {
    if (p[x] <= 0.0 && q[x] <= 0.0) continue;
    const bool p_high = p[x] >= cut * q[x];
    const bool q_high = q[x] >= cut * p[x];
    if (p_high || q_high) {
      report.event.push_back(static_cast<int>(x));
      report.prob_p += p[x];
      report.prob_q += q[x];
      if (p_high) report.prob_p_high += p[x];
      if (q_high) report.prob_q_high += q[x];
    } else {
      report.restricted_divergence =
          std::max(report.restricted_divergence, std::abs(std::log(p[x] / q[x])));
    }
  }
  constexpr double kSlack = 1e-12;
  report.pass = report.prob_p_high <= report.mass_bound + kSlack &&
                report.prob_q_high <= report.mass_bound + kSlack &&
                report.restricted_divergence <= eps_prime + kSlack;
  return report;
}

MergeReport MergeEvent(const std::vector<double>& p,
                       const std::vector<double>& q,
                       const std::vector<int>& event, double eps) {
  MergeReport report;
  std::vector<bool> in_event(p.size(), false);
  for (int x : event) {
    if (x >= 0 && static_cast<size_t>(x) < p.size()) in_event[x] = true;
  }
  double restricted = 0.0;
  for (size_t x = 0; x < p.size() && x < q.size(); ++x) {
    if (in_event[x]) {
      report.prob_p += p[x];
      report.prob_q += q[x];
      continue;
    }
    if (p[x] <= 0.0 && q[x] <= 0.0) continue;
    restricted = std::max(restricted, std::abs(LogRatio(p[x], q[x])));
  }
  report.premise = restricted <= eps + 1e-12;
  report.divergence_pq = DeltaDivergence(p, q, report.prob_p).value;
  report.divergence_qp = DeltaDivergence(q, p, report.prob_q).value;
  report.pass = report.premise && report.divergence_pq <= eps + 1e-12 &&
                report.divergence_qp <= eps + 1e-12;
  return report;
}

}  // namespace private_selection
