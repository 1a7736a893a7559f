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

#include "private_selection/sparse_vector.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "absl/strings/str_format.h"

namespace private_selection {
namespace {

constexpr double kClampLow = 1e-15;
constexpr double kClampHigh = 1.0 - 1e-15;
// Above this many expected iterations, stage 2 on an exact candidate jumps
// straight to the first decisive iteration.
constexpr double kGeometricJumpThreshold = 1e4;

bool InOpenUnit(double x) { return x > 0.0 && x < 1.0; }

absl::Status CheckCommon(int horizon, int min_horizon, double delta,
                         double eps0, double eps1, double eps3, double beta,
                         double p_star) {
  if (horizon < min_horizon) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "horizon must be at least %d, got %d", min_horizon, horizon));
  }
  if (!InOpenUnit(delta)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("delta must lie in (0, 1), got %g", delta));
  }
  if (!InOpenUnit(beta)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("beta must lie in (0, 1), got %g", beta));
  }
  if (!InOpenUnit(p_star)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("p* must lie in (0, 1), got %g", p_star));
  }
  if (!(eps0 > 0.0 && eps0 <= 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("eps0 must lie in (0, 1], got %g", eps0));
  }
  if (!(eps1 > 0.0) || std::isinf(eps1)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("eps1 must be positive, got %g", eps1));
  }
  if (!(eps3 > 0.0) || std::isinf(eps3)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("eps3 must be positive, got %g", eps3));
  }
  return absl::OkStatus();
}

absl::StatusOr<int64_t> RoundSamples(double log_samples, double max_samples) {
  const double samples = std::exp(log_samples);
  if (!(log_samples <= std::log(max_samples))) {
    return absl::OutOfRangeError(absl::StrFormat(
        "parameters imply N = %.4g samples, above the limit %.4g", samples,
        max_samples));
  }
  // Only reachable when the caller lifts the cap to inspect the formula.
  if (!(samples < 9.2e18)) return std::numeric_limits<int64_t>::max();
  return static_cast<int64_t>(std::ceil(samples));
}

int64_t SaturatingAdd(int64_t a, int64_t b) {
  if (a > std::numeric_limits<int64_t>::max() - b) {
    return std::numeric_limits<int64_t>::max();
  }
  return a + b;
}

// Number of draws with score >= tau among n fresh draws.
absl::StatusOr<int64_t> CountExceedances(const SamplerCandidate& q,
                                         std::string_view dataset, double tau,
                                         int64_t n, RandomStream& rng) {
  if (const DiscreteCandidate* exact = q.exact()) {
    absl::StatusOr<double> p = exact->Exceedance(dataset, tau);
    if (!p.ok()) return p.status();
    return rng.Binomial(n, *p);
  }
  absl::StatusOr<BoundSampler> draw = q.Bind(dataset);
  if (!draw.ok()) return draw.status();
  int64_t count = 0;
  for (int64_t j = 0; j < n; ++j) {
    if ((*draw)(rng).score.value() >= tau) ++count;
  }
  return count;
}

}  // namespace

absl::StatusOr<double> Phi(double x) {
  if (!InOpenUnit(x)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("potential needs x in (0, 1), got %g", x));
  }
  return x / (1.0 - x);
}

double PhiInverse(double y) {
  return std::isinf(y) ? 1.0 : y / (1.0 + y);
}

double PhiNd(int64_t count, int64_t n, double offset) {
  return (static_cast<double>(count) + offset) /
         (static_cast<double>(n - count) + offset);
}

double PhiNdAt(double x, int64_t n, double offset) {
  const double nn = static_cast<double>(n);
  return (nn * x + offset) / (nn * (1.0 - x) + offset);
}

double CouplingConstant(double eps0, double eps1) {
  return 2.0 * (std::exp(eps0 + eps1) + 1.0 + std::exp(eps0 / 2.0));
}

absl::StatusOr<PotentialParams> DeriveExtendedParams(
    int horizon, double delta, double eps0, double eps1, double eps3,
    double beta, double p_star, double max_samples) {
  absl::Status status =
      CheckCommon(horizon, 2, delta, eps0, eps1, eps3, beta, p_star);
  if (!status.ok()) return status;
  PotentialParams out;
  out.lipschitz = 2.0 * (eps1 + eps0);
  out.coupling = CouplingConstant(eps0, eps1);
  out.offset = out.coupling * std::log(8.0 * horizon / delta) /
               (eps0 * std::expm1(eps0 + eps1));
  const double exponent = 6.0 * out.lipschitz / eps3;
  const double log_samples =
      eps0 + std::log(out.offset) - std::log(std::min(p_star, 1.0 - p_star)) +
      exponent * std::log((horizon + 1.0) / beta);
  out.samples_real = std::exp(log_samples);
  absl::StatusOr<int64_t> n = RoundSamples(log_samples, max_samples);
  if (!n.ok()) return n.status();
  out.samples = *n;
  out.target_shift = 0.0;
  return out;
}

absl::StatusOr<PotentialParams> DeriveFindThresholdParams(
    int rounds, double delta, double eps0, double eps1, double eps3,
    double beta, double p_star, double max_samples) {
  absl::Status status =
      CheckCommon(rounds, 2, delta, eps0, eps1, eps3, beta, p_star);
  if (!status.ok()) return status;
  PotentialParams out;
  out.lipschitz = eps1 + eps0;
  out.coupling = CouplingConstant(eps0, eps1);
  out.offset = out.coupling * std::log(4.0 * rounds / delta) /
               (eps0 * std::expm1(eps0 + eps1));
  const double exponent = 6.0 * out.lipschitz / eps3;
  const double log_samples = std::log(3.0) + std::log(out.offset) +
                             eps0 / 2.0 - std::log(p_star) +
                             2.0 * exponent * std::log(1.0 / beta) +
                             exponent * std::log(rounds + 1.0);
  out.samples_real = std::exp(log_samples);
  absl::StatusOr<int64_t> n = RoundSamples(log_samples, max_samples);
  if (!n.ok()) return n.status();
  out.samples = *n;
  out.target_shift = eps0 / 2.0 + exponent * std::log(1.0 / beta);
  return out;
}

absl::StatusOr<SVConfig> SVConfig::Extended(int horizon, double delta,
                                            double eps0, double eps1,
                                            double eps3, double beta,
                                            double p_star,
                                            double max_samples) {
  if (!(max_samples <= kExactPathMaxSamples)) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "max_samples %.4g is above the runnable limit %.4g", max_samples,
        kExactPathMaxSamples));
  }
  absl::StatusOr<PotentialParams> derived = DeriveExtendedParams(
      horizon, delta, eps0, eps1, eps3, beta, p_star, max_samples);
  if (!derived.ok()) return derived.status();
  SVConfig cfg;
  cfg.kind = SparseVectorKind::kExtended;
  cfg.eps0 = eps0;
  cfg.eps1 = eps1;
  cfg.eps3 = eps3;
  cfg.delta = delta;
  cfg.beta = beta;
  cfg.p_star = p_star;
  cfg.horizon = horizon;
  cfg.max_samples = max_samples;
  cfg.derived = *derived;
  return cfg;
}

absl::StatusOr<SVConfig> SVConfig::FindThreshold(int rounds, double delta,
                                                 double eps0, double eps1,
                                                 double eps3, double beta,
                                                 double p_star,
                                                 double max_samples) {
  if (!(max_samples <= kExactPathMaxSamples)) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "max_samples %.4g is above the runnable limit %.4g", max_samples,
        kExactPathMaxSamples));
  }
  absl::StatusOr<PotentialParams> derived = DeriveFindThresholdParams(
      rounds, delta, eps0, eps1, eps3, beta, p_star, max_samples);
  if (!derived.ok()) return derived.status();
  SVConfig cfg;
  cfg.kind = SparseVectorKind::kFindThreshold;
  cfg.eps0 = eps0;
  cfg.eps1 = eps1;
  cfg.eps3 = eps3;
  cfg.delta = delta;
  cfg.beta = beta;
  cfg.p_star = p_star;
  cfg.horizon = rounds;
  cfg.max_samples = max_samples;
  cfg.derived = *derived;
  return cfg;
}

absl::Status SVConfig::Validate() const {
  absl::StatusOr<PotentialParams> fresh =
      kind == SparseVectorKind::kExtended
          ? DeriveExtendedParams(horizon, delta, eps0, eps1, eps3, beta,
                                 p_star, max_samples)
          : DeriveFindThresholdParams(horizon, delta, eps0, eps1, eps3, beta,
                                      p_star, max_samples);
  if (!fresh.ok()) return fresh.status();
  if (fresh->samples != derived.samples || fresh->offset != derived.offset ||
      fresh->lipschitz != derived.lipschitz ||
      fresh->coupling != derived.coupling ||
      fresh->target_shift != derived.target_shift) {
    return absl::FailedPreconditionError(
        "derived sparse-vector parameters do not match their primitives");
  }
  return absl::OkStatus();
}

absl::StatusOr<SVOutcome> AboveThresholdOracle(
    const std::vector<double>& exceedances, double p_star, double eps1,
    double eps3, RandomStream& rng) {
  if (exceedances.empty()) {
    return absl::InvalidArgumentError("query stream is empty");
  }
  if (!InOpenUnit(p_star)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("p* must lie in (0, 1), got %g", p_star));
  }
  if (!(eps1 > 0.0) || !(eps3 > 0.0)) {
    return absl::InvalidArgumentError("eps1 and eps3 must be positive");
  }
  SVOutcome out;
  out.threshold_noise = SampleLaplace(4.0 * eps1 / eps3, rng);
  const double target = out.threshold_noise + std::log(*Phi(p_star));
  for (size_t i = 0; i < exceedances.size(); ++i) {
    double p = exceedances[i];
    if (!(p >= 0.0 && p <= 1.0)) {
      return absl::InvalidArgumentError(
          absl::StrFormat("exceedance %g outside [0, 1]", p));
    }
    if (p < kClampLow || p > kClampHigh) {
      p = std::clamp(p, kClampLow, kClampHigh);
      ++out.clamped_exceedances;
    }
    QueryRecord record;
    record.index = static_cast<int>(i);
    record.exceedance = p;
    record.query_noise = SampleLaplace(8.0 * eps1 / eps3, rng);
    record.fired = record.query_noise + std::log(p / (1.0 - p)) > target;
    out.trace.push_back(record);
    out.answers.push_back(record.fired);
    if (record.fired) {
      out.halted_at = static_cast<int>(i);
      break;
    }
  }
  return out;
}

absl::StatusOr<SVOutcome> ExtendedAboveThreshold(const QueryStream& stream,
                                                 std::string_view dataset,
                                                 const SVConfig& cfg,
                                                 RandomStream& rng) {
  if (cfg.kind != SparseVectorKind::kExtended) {
    return absl::InvalidArgumentError(
        "configuration was not derived for the extended variant");
  }
  if (stream.empty()) {
    return absl::InvalidArgumentError("query stream is empty");
  }
  const PotentialParams& pp = cfg.derived;
  SVOutcome out;
  out.threshold_noise = SampleLaplace(2.0 * pp.lipschitz / cfg.eps3, rng);
  const double target = out.threshold_noise +
                        std::log(PhiNdAt(cfg.p_star, pp.samples, pp.offset));
  const size_t limit =
      std::min(stream.size(), static_cast<size_t>(cfg.horizon));
  for (size_t i = 0; i < limit; ++i) {
    absl::StatusOr<int64_t> count = CountExceedances(
        stream[i].candidate, dataset, stream[i].tau, pp.samples, rng);
    if (!count.ok()) return count.status();
    out.samples_used = SaturatingAdd(out.samples_used, pp.samples);
    QueryRecord record;
    record.index = static_cast<int>(i);
    record.tau = stream[i].tau;
    record.count = *count;
    record.query_noise = SampleLaplace(4.0 * pp.lipschitz / cfg.eps3, rng);
    record.fired =
        record.query_noise + std::log(PhiNd(*count, pp.samples, pp.offset)) >=
        target;
    out.trace.push_back(record);
    out.answers.push_back(record.fired);
    if (record.fired) {
      out.halted_at = static_cast<int>(i);
      break;
    }
  }
  return out;
}

double GridThreshold(int i, int rounds) {
  return 1.0 - static_cast<double>(i - 1) / static_cast<double>(rounds - 1);
}

absl::StatusOr<ThresholdSearch> FindPercentileThreshold(
    const SamplerCandidate& q, std::string_view dataset, const SVConfig& cfg,
    RandomStream& rng) {
  if (cfg.kind != SparseVectorKind::kFindThreshold) {
    return absl::InvalidArgumentError(
        "configuration was not derived for threshold finding");
  }
  const int rounds = cfg.horizon;
  if (rounds < 2) return absl::InvalidArgumentError("R must be at least 2");
  const PotentialParams& pp = cfg.derived;

  ThresholdSearch out;
  out.threshold_noise = SampleLaplace(2.0 * pp.lipschitz / cfg.eps3, rng);

  // bins[i - 1] counts samples whose first passing grid index is i; the
  // last bin holds samples below every grid point.
  std::vector<int64_t> bins(rounds + 1, 0);
  if (const DiscreteCandidate* exact = q.exact()) {
    std::vector<double> probs(rounds + 1, 0.0);
    double previous = 0.0;
    for (int i = 1; i <= rounds; ++i) {
      absl::StatusOr<double> ex =
          exact->Exceedance(dataset, GridThreshold(i, rounds));
      if (!ex.ok()) return ex.status();
      const double current = std::max(*ex, previous);
      probs[i - 1] = current - previous;
      previous = current;
    }
    probs[rounds] = std::max(0.0, 1.0 - previous);
    bins = MultinomialCounts(pp.samples, probs, rng);
  } else {
    absl::StatusOr<BoundSampler> draw = q.Bind(dataset);
    if (!draw.ok()) return draw.status();
    for (int64_t j = 0; j < pp.samples; ++j) {
      const double score = (*draw)(rng).score.value();
      int bin = rounds;
      for (int i = 1; i <= rounds; ++i) {
        if (score >= GridThreshold(i, rounds)) {
          bin = i - 1;
          break;
        }
      }
      ++bins[bin];
    }
  }
  out.samples_used = pp.samples;

  const double target = out.threshold_noise - pp.target_shift +
                        std::log(static_cast<double>(pp.samples) * cfg.p_star +
                                 pp.offset);
  int64_t count = 0;
  for (int i = 1; i <= rounds; ++i) {
    const int64_t next = count + bins[i - 1];
    if (next < count) {
      return absl::InternalError("exceedance counts are not monotone");
    }
    count = next;
    QueryRecord record;
    record.index = i;
    record.tau = GridThreshold(i, rounds);
    record.count = count;
    record.query_noise = SampleLaplace(4.0 * pp.lipschitz / cfg.eps3, rng);
    record.fired = record.query_noise +
                       std::log(static_cast<double>(count) + pp.offset) >=
                   target;
    out.trace.push_back(record);
    if (record.fired) {
      out.tau = record.tau;
      out.index = i;
      break;
    }
  }
  return out;
}

absl::StatusOr<OracleBoundsPhi> OracleHaltingBounds(double beta, int rounds,
                                                    double eps1, double eps3,
                                                    double p_star) {
  absl::StatusOr<double> phi_star = Phi(p_star);
  if (!phi_star.ok()) return phi_star.status();
  const double a = 12.0 * eps1 / eps3;
  OracleBoundsPhi out;
  out.late_stop = std::pow(beta / (rounds + 1.0), a) * *phi_star;
  out.early_stop = std::pow((rounds + 1.0) / beta, a) * *phi_star;
  out.halt_trigger = std::pow(1.0 / beta, a) * *phi_star;
  return out;
}

MedianBounds MedianHaltingBounds(double beta, int rounds, double eps1,
                                 double eps3) {
  const double a = 12.0 * eps1 / eps3;
  const double b = std::pow(beta, a);
  const double r = std::pow(rounds + 1.0, a);
  MedianBounds out;
  out.late_stop = b / (b + r);
  out.early_stop = r / (b + r);
  out.halt_trigger = 1.0 - b / (1.0 + b);
  return out;
}

double PrivateSelectCallBound(int num_candidates,
                              const PrivateSelectParams& params) {
  const double exponent = 6.0 + 12.0 * params.eps1 / params.eps0;
  const double base = (params.rounds + 1.0) / (params.beta * params.beta);
  return num_candidates * std::pow(base, exponent) *
         (std::log(params.rounds / params.delta) /
              (params.eps0 * params.eps0) +
          std::log(1.0 / params.eps0) / params.beta);
}

absl::StatusOr<PrivateSelectPlan> PlanPrivateSelect(
    int num_candidates, const PrivateSelectParams& params,
    double max_samples) {
  if (num_candidates < 1) {
    return absl::InvalidArgumentError("at least one candidate is required");
  }
  const double p_star = 1.0 / (2.0 * num_candidates);
  absl::StatusOr<SVConfig> stage1 = SVConfig::FindThreshold(
      params.rounds, params.delta, params.eps0, params.eps1, params.eps0,
      params.beta, p_star, max_samples);
  if (!stage1.ok()) return stage1.status();

  PrivateSelectPlan plan;
  plan.stage1 = *stage1;
  const double exponent = 6.0 + 12.0 * params.eps1 / params.eps0;
  plan.target_exceedance =
      std::exp(exponent * std::log(params.beta * params.beta /
                                   (params.rounds + 1.0))) /
      (12.0 * num_candidates);
  plan.gamma = plan.target_exceedance * params.beta;
  if (!(plan.gamma > 0.0)) {
    return absl::OutOfRangeError("stage-2 stopping budget underflows to 0");
  }
  const double horizon = std::max(std::log(2.0 / params.eps0) / plan.gamma,
                                  1.0 + 1.0 / (std::exp(1.0) * plan.gamma));
  if (!(horizon < 9.0e18)) {
    return absl::OutOfRangeError(absl::StrFormat(
        "stage-2 horizon %.4g does not fit in 64 bits", horizon));
  }
  plan.stage2_horizon = ThresholdParams::MinimumIterations(plan.gamma,
                                                           params.eps0);
  plan.call_bound = PrivateSelectCallBound(num_candidates, params);
  plan.deterministic_calls = static_cast<double>(plan.stage1.derived.samples) +
                             static_cast<double>(plan.stage2_horizon);
  return plan;
}

namespace {

// Stage 2 on an exact candidate: jumps to the first iteration that either
// passes the threshold or flips the stopping coin. Same law as the loop.
absl::StatusOr<SelectionOutcome> GeometricThresholdSelect(
    const DiscreteCandidate& q, std::string_view dataset,
    const ThresholdParams& params, double pass, RandomStream& rng) {
  const double decisive = pass + (1.0 - pass) * params.gamma;
  const double u = rng.OpenUniform();
  const double jump = std::ceil(std::log(u) / std::log1p(-decisive));
  if (!(jump <= static_cast<double>(params.max_iterations))) {
    return SelectionOutcome::Bot(params.max_iterations);
  }
  const int64_t step = std::max<int64_t>(1, static_cast<int64_t>(jump));
  if (!rng.Bernoulli(pass / decisive)) return SelectionOutcome::Bot(step);
  absl::StatusOr<int> index = q.DatasetIndex(dataset);
  if (!index.ok()) return index.status();
  std::vector<double> weights = q.probabilities(*index);
  for (size_t k = 0; k < weights.size(); ++k) {
    if (q.support()[k].sample.score.value() < params.tau) weights[k] = 0.0;
  }
  const size_t pick = CategoricalSampler(weights).Draw(rng);
  return SelectionOutcome::Sample(q.support()[pick].sample, step);
}

}  // namespace

absl::StatusOr<PrivateSelectResult> PrivateSelect(
    const SamplerCandidate& mixture, std::string_view dataset,
    const PrivateSelectPlan& plan, RandomStream& rng) {
  absl::StatusOr<ThresholdSearch> search =
      FindPercentileThreshold(mixture, dataset, plan.stage1, rng);
  if (!search.ok()) return search.status();
  PrivateSelectResult result;
  result.stage1_samples = search->samples_used;
  if (!search->tau.has_value()) {
    result.outcome = SelectionOutcome::Bot(result.stage1_samples);
    result.total_calls = result.stage1_samples;
    return result;
  }
  result.threshold = search->tau;
  absl::StatusOr<ThresholdParams> params =
      ThresholdParams::Create(*search->tau, plan.gamma, plan.stage1.eps0,
                              plan.stage2_horizon);
  if (!params.ok()) return params.status();

  SelectionOutcome stage2;
  const DiscreteCandidate* exact = mixture.exact();
  double pass = 0.0;
  if (exact != nullptr) {
    absl::StatusOr<double> ex = exact->Exceedance(dataset, *search->tau);
    if (!ex.ok()) return ex.status();
    pass = *ex;
  }
  const double decisive = pass + (1.0 - pass) * plan.gamma;
  if (exact != nullptr && 1.0 / decisive > kGeometricJumpThreshold) {
    absl::StatusOr<SelectionOutcome> jumped =
        GeometricThresholdSelect(*exact, dataset, *params, pass, rng);
    if (!jumped.ok()) return jumped.status();
    stage2 = *jumped;
  } else {
    absl::StatusOr<BoundSampler> draw = mixture.Bind(dataset);
    if (!draw.ok()) return draw.status();
    stage2 = ThresholdSelect(*draw, *params, rng);
  }
  result.stage2_calls = stage2.calls;
  result.total_calls = SaturatingAdd(result.stage1_samples, stage2.calls);
  result.outcome = stage2;
  result.outcome.calls = result.total_calls;
  return result;
}

absl::StatusOr<PrivateSelectResult> PrivateSelect(
    const std::vector<SamplerCandidate>& candidates, std::string_view dataset,
    const PrivateSelectParams& params, RandomStream& rng) {
  absl::StatusOr<SamplerCandidate> mixture = UniformMixture(candidates);
  if (!mixture.ok()) return mixture.status();
  const double max_samples = mixture->exact() != nullptr
                                 ? kExactPathMaxSamples
                                 : kDefaultMaxSamples;
  absl::StatusOr<PrivateSelectPlan> plan = PlanPrivateSelect(
      static_cast<int>(candidates.size()), params, max_samples);
  if (!plan.ok()) return plan.status();
  return PrivateSelect(*mixture, dataset, *plan, rng);
}

}  // namespace private_selection
