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

#include "private_selection/selection.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "absl/strings/str_format.h"

namespace private_selection {
namespace {

constexpr double kE = 2.718281828459045;

int64_t CeilToIterations(double value) {
  if (!(value < 9.0e18)) return std::numeric_limits<int64_t>::max();
  return std::max<int64_t>(1, static_cast<int64_t>(std::ceil(value)));
}

// r^T for r in [0, 1], computed from 1 - r to keep precision near r = 1.
double PowFromComplement(double one_minus_r, int64_t t) {
  if (one_minus_r >= 1.0) return 0.0;
  if (one_minus_r <= 0.0) return 1.0;
  return std::exp(static_cast<double>(t) * std::log1p(-one_minus_r));
}

}  // namespace

double OutcomeDistribution::Total() const {
  double total = bot_prob;
  for (const OutcomeEntry& e : outcomes) total += e.prob;
  return total;
}

int64_t ThresholdParams::MinimumIterations(double gamma, double eps0) {
  if (!(gamma > 0.0)) return std::numeric_limits<int64_t>::max();
  const double needed =
      std::max(std::log(2.0 / eps0) / gamma, 1.0 + 1.0 / (kE * gamma));
  return CeilToIterations(needed);
}

absl::StatusOr<ThresholdParams> ThresholdParams::Create(
    double tau, double gamma, double eps0, int64_t max_iterations) {
  if (!(tau >= 0.0 && tau <= 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("threshold must lie in [0, 1], got %g", tau));
  }
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("gamma must lie in [0, 1], got %g", gamma));
  }
  if (max_iterations < 1) {
    return absl::InvalidArgumentError("T must be a positive integer");
  }
  if (gamma > 0.0) {
    if (!(eps0 > 0.0 && eps0 <= 1.0)) {
      return absl::InvalidArgumentError(
          absl::StrFormat("eps0 must lie in (0, 1], got %g", eps0));
    }
    const int64_t minimum = MinimumIterations(gamma, eps0);
    if (max_iterations < minimum) {
      return absl::InvalidArgumentError(absl::StrFormat(
          "T=%d is below the required %d for gamma=%g, eps0=%g",
          max_iterations, minimum, gamma, eps0));
    }
  }
  ThresholdParams params;
  params.tau = tau;
  params.gamma = gamma;
  params.eps0 = eps0;
  params.max_iterations = max_iterations;
  return params;
}

absl::StatusOr<ThresholdParams> ThresholdParams::WithMinimumIterations(
    double tau, double gamma, double eps0) {
  if (!(gamma > 0.0)) {
    return absl::InvalidArgumentError(
        "gamma = 0 requires an explicit finite T");
  }
  if (!(eps0 > 0.0 && eps0 <= 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("eps0 must lie in (0, 1], got %g", eps0));
  }
  return Create(tau, gamma, eps0, MinimumIterations(gamma, eps0));
}

int64_t RandomStopParams::PureHorizon(double gamma, double eps0) {
  const double l = 2.0 * (1.0 + gamma) * (1.0 + gamma) / (eps0 * gamma * gamma);
  return CeilToIterations((std::log(l) + std::log(std::log(l))) / gamma);
}

int64_t RandomStopParams::ApproxHorizon(double gamma, double delta2) {
  return CeilToIterations(std::log(1.0 / delta2) / gamma);
}

absl::StatusOr<RandomStopParams> RandomStopParams::Unbounded(double gamma) {
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "unbounded random stopping needs gamma in (0, 1], got %g", gamma));
  }
  RandomStopParams params;
  params.gamma = gamma;
  params.mode = RandomStopMode::kUnbounded;
  return params;
}

absl::StatusOr<RandomStopParams> RandomStopParams::HardStopPure(double gamma,
                                                                double eps0) {
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("gamma must lie in (0, 1], got %g", gamma));
  }
  if (!(eps0 > 0.0 && eps0 < 0.5)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("hard-stop-pure needs eps0 in (0, 1/2), got %g", eps0));
  }
  RandomStopParams params;
  params.gamma = gamma;
  params.mode = RandomStopMode::kHardStopPure;
  params.eps0 = eps0;
  params.max_iterations = PureHorizon(gamma, eps0);
  return params;
}

absl::StatusOr<RandomStopParams> RandomStopParams::HardStopApprox(
    double gamma, double delta2) {
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("gamma must lie in (0, 1], got %g", gamma));
  }
  if (!(delta2 > 0.0 && delta2 < 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("delta2 must lie in (0, 1), got %g", delta2));
  }
  RandomStopParams params;
  params.gamma = gamma;
  params.mode = RandomStopMode::kHardStopApprox;
  params.delta2 = delta2;
  params.max_iterations = ApproxHorizon(gamma, delta2);
  return params;
}

absl::StatusOr<RandomStopParams> RandomStopParams::HardStopCustom(
    double gamma, int64_t max_iterations) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("gamma must lie in [0, 1], got %g", gamma));
  }
  if (max_iterations < 1) {
    return absl::InvalidArgumentError("T must be a positive integer");
  }
  RandomStopParams params;
  params.gamma = gamma;
  params.mode = RandomStopMode::kHardStopCustom;
  params.max_iterations = max_iterations;
  return params;
}

SelectionOutcome ThresholdSelect(const BoundSampler& draw,
                                 const ThresholdParams& params,
                                 RandomStream& rng) {
  for (int64_t j = 1; j <= params.max_iterations; ++j) {
    ScoredSample sample = draw(rng);
    if (sample.score.value() >= params.tau) {
      return SelectionOutcome::Sample(sample, j);
    }
    if (rng.Bernoulli(params.gamma)) return SelectionOutcome::Bot(j);
  }
  return SelectionOutcome::Bot(params.max_iterations);
}

absl::StatusOr<SelectionOutcome> ThresholdSelect(const SamplerCandidate& q,
                                                 std::string_view dataset,
                                                 const ThresholdParams& params,
                                                 RandomStream& rng) {
  absl::StatusOr<BoundSampler> draw = q.Bind(dataset);
  if (!draw.ok()) return draw.status();
  return ThresholdSelect(*draw, params, rng);
}

absl::StatusOr<OutcomeDistribution> OracleThresholdDistribution(
    const DiscreteCandidate& q, std::string_view dataset,
    const ThresholdParams& params) {
  absl::StatusOr<int> index = q.DatasetIndex(dataset);
  if (!index.ok()) return index.status();
  const std::vector<double>& probs = q.probabilities(*index);
  const auto& support = q.support();

  double p1 = 0.0;
  for (size_t k = 0; k < support.size(); ++k) {
    if (support[k].sample.score.value() >= params.tau) p1 += probs[k];
  }
  p1 = std::min(p1, 1.0);
  const double gamma = params.gamma;
  const int64_t t = params.max_iterations;
  // r = (1 - p1)(1 - gamma); 1 - r = p1 + gamma - p1 gamma.
  const double one_minus_r = p1 + gamma - p1 * gamma;
  const double r_pow_t = PowFromComplement(one_minus_r, t);

  double factor;
  double bot;
  if (one_minus_r <= 0.0) {
    factor = static_cast<double>(t);
    bot = 1.0;
  } else {
    factor = (1.0 - r_pow_t) / one_minus_r;
    const double miss_pow_t =
        PowFromComplement(p1, t) * PowFromComplement(gamma, t);
    bot = ((1.0 - p1) * gamma + p1 * miss_pow_t) / one_minus_r;
  }

  OutcomeDistribution dist;
  for (size_t k = 0; k < support.size(); ++k) {
    if (support[k].sample.score.value() < params.tau) continue;
    dist.outcomes.push_back(
        {support[k].sample, support[k].label, probs[k] * factor});
  }
  dist.bot_prob = bot;
  return dist;
}

absl::StatusOr<SelectionOutcome> RandomStopSelect(
    const BoundSampler& draw, const RandomStopParams& params,
    RandomStream& rng) {
  if (params.mode == RandomStopMode::kUnbounded && !(params.gamma > 0.0)) {
    return absl::InvalidArgumentError(
        "unbounded random stopping needs gamma > 0");
  }
  std::optional<int64_t> cap;
  if (params.mode != RandomStopMode::kUnbounded) cap = params.max_iterations;
  auto step = [&draw](RandomStream& r) { return draw(r); };
  auto result = RandomStopLoop(step, params.gamma, cap, rng);
  if (!result.ok()) return result.status();
  return SelectionOutcome::Sample(result->first, result->second);
}

absl::StatusOr<SelectionOutcome> RandomStopSelect(
    const SamplerCandidate& q, std::string_view dataset,
    const RandomStopParams& params, RandomStream& rng) {
  absl::StatusOr<BoundSampler> draw = q.Bind(dataset);
  if (!draw.ok()) return draw.status();
  return RandomStopSelect(*draw, params, rng);
}

absl::StatusOr<OutcomeDistribution> OracleRandomStopDistribution(
    const DiscreteCandidate& q, std::string_view dataset, double gamma,
    std::optional<int64_t> max_iterations) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("gamma must lie in [0, 1], got %g", gamma));
  }
  if (!max_iterations.has_value() && gamma == 0.0) {
    return absl::InvalidArgumentError(
        "gamma = 0 requires a finite hard stop");
  }
  if (max_iterations.has_value() && *max_iterations < 1) {
    return absl::InvalidArgumentError("T must be a positive integer");
  }
  absl::StatusOr<int> index = q.DatasetIndex(dataset);
  if (!index.ok()) return index.status();
  const std::vector<double>& probs = q.probabilities(*index);
  const auto& support = q.support();

  std::vector<size_t> order(support.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return support[b].sample < support[a].sample;
  });

  // G(a) = sum_{j=1}^T (1-gamma)^{j-1} gamma a^j.
  auto coin_sum = [&](double a) {
    if (gamma == 0.0) return 0.0;
    const double c = (1.0 - gamma) * a;
    if (!max_iterations.has_value()) return gamma * a / (1.0 - c);
    const double c_pow_t =
        std::pow(c, static_cast<double>(*max_iterations));
    return gamma * a * (1.0 - c_pow_t) / (1.0 - c);
  };

  OutcomeDistribution dist;
  dist.outcomes.resize(support.size());
  double above = 0.0;  // p0: mass strictly above in the total order
  for (size_t k : order) {
    const double p = probs[k];
    const double p0 = std::min(above, 1.0);
    const double p1 = std::min(above + p, 1.0);
    double prob;
    if (p == 0.0) {
      prob = 0.0;
    } else if (!max_iterations.has_value()) {
      prob = gamma * p /
             ((p0 * (1.0 - gamma) + gamma) * (p1 * (1.0 - gamma) + gamma));
    } else {
      const double t = static_cast<double>(*max_iterations);
      const double a = 1.0 - p0;
      const double b = 1.0 - p1;
      prob = coin_sum(a) - coin_sum(b) +
             std::pow(1.0 - gamma, t) * (std::pow(a, t) - std::pow(b, t));
    }
    dist.outcomes[k] = {support[k].sample, support[k].label,
                        std::max(prob, 0.0)};
    above += p;
  }
  dist.bot_prob = 0.0;
  return dist;
}

absl::StatusOr<UtilityBoundReport> RandomStopUtilityBound(
    const DiscreteCandidate& q, std::string_view dataset, double gamma,
    double p) {
  if (!(p > 0.0)) {
    return absl::InvalidArgumentError("percentile p must be positive");
  }
  absl::StatusOr<int> index = q.DatasetIndex(dataset);
  if (!index.ok()) return index.status();
  const std::vector<double>& probs = q.probabilities(*index);
  const auto& support = q.support();

  // Q^(p) = sup{z : Pr[Q >= z] > p}; for finite support it is a support
  // score with positive mass.
  double quantile = -std::numeric_limits<double>::infinity();
  for (size_t k = 0; k < support.size(); ++k) {
    if (probs[k] <= 0.0) continue;
    const double z = support[k].sample.score.value();
    double mass = 0.0;
    for (size_t m = 0; m < support.size(); ++m) {
      if (support[m].sample.score.value() >= z) mass += probs[m];
    }
    if (mass > p) quantile = std::max(quantile, z);
  }

  absl::StatusOr<OutcomeDistribution> dist =
      OracleRandomStopDistribution(q, dataset, gamma, std::nullopt);
  if (!dist.ok()) return dist.status();
  UtilityBoundReport report;
  report.quantile_score = quantile;
  for (const OutcomeEntry& e : dist->outcomes) {
    if (e.sample.score.value() < quantile) report.exact_failure += e.prob;
  }
  report.bound = gamma / p;
  report.holds = report.exact_failure <= report.bound + 1e-12;
  return report;
}

}  // namespace private_selection
