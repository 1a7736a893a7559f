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

#include "private_selection/mechanisms.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "absl/strings/str_format.h"
#include "private_selection/selection.h"
#include "private_selection/trials.h"

namespace private_selection {
namespace {

// Noisy score of one option; ties broken by index.
struct NoisyOption {
  double value = 0.0;
  int index = 0;

  friend bool operator<(const NoisyOption& a, const NoisyOption& b) {
    if (a.value != b.value) return a.value < b.value;
    return a.index < b.index;
  }
};

absl::Status CheckUnitOpen(double x, const char* name) {
  if (!(x > 0.0 && x < 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("%s must lie in (0, 1), got %g", name, x));
  }
  return absl::OkStatus();
}

absl::Status CheckEpsilon(double eps) {
  if (!(eps > 0.0) || !std::isfinite(eps)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("epsilon must be positive and finite, got %g", eps));
  }
  return absl::OkStatus();
}

double NoiseOrZero(double scale, RandomStream& rng) {
  return scale > 0.0 ? SampleLaplace(scale, rng) : 0.0;
}

// Shared body of the generalized and smooth-sensitivity selectors.
absl::StatusOr<int> ShiftedRandomStop(const ScoredOptionSet& opts, double eps,
                                      double beta, double delta,
                                      RandomStream& rng) {
  if (auto s = CheckEpsilon(eps); !s.ok()) return s;
  if (auto s = CheckUnitOpen(beta, "beta"); !s.ok()) return s;
  if (auto s = CheckUnitOpen(delta, "delta"); !s.ok()) return s;
  const int k = static_cast<int>(opts.size());
  const double log_term = std::log(k / beta);
  const double gamma = beta / k;
  const int64_t horizon = RandomStopParams::ApproxHorizon(gamma, delta);
  auto draw = [&](RandomStream& r) {
    const int i = static_cast<int>(r.UniformInt(k));
    const double s = opts.sensitivity(i);
    return NoisyOption{
        opts.scores[i] - 2.0 * s * log_term / eps + NoiseOrZero(s / eps, r),
        i};
  };
  auto result = RandomStopLoop(draw, gamma, horizon, rng);
  if (!result.ok()) return result.status();
  return result->first.index;
}

}  // namespace

absl::StatusOr<ScoredOptionSet> ScoredOptionSet::Create(
    std::vector<double> scores, std::vector<double> sensitivities,
    std::optional<double> smooth_eta) {
  if (scores.empty()) {
    return absl::InvalidArgumentError("at least one option is required");
  }
  for (double q : scores) {
    if (!std::isfinite(q)) {
      return absl::InvalidArgumentError("scores must be finite");
    }
  }
  if (sensitivities.size() != 1 && sensitivities.size() != scores.size()) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "expected 1 or %d sensitivities, got %d", scores.size(),
        sensitivities.size()));
  }
  for (double s : sensitivities) {
    if (!(s >= 0.0) || !std::isfinite(s)) {
      return absl::InvalidArgumentError(
          absl::StrFormat("sensitivities must be finite and >= 0, got %g", s));
    }
  }
  if (smooth_eta.has_value() && !(*smooth_eta > 0.0)) {
    return absl::InvalidArgumentError("smooth_eta must be positive");
  }
  return ScoredOptionSet{std::move(scores), std::move(sensitivities),
                         smooth_eta};
}

bool ScoredOptionSet::shared_sensitivity() const {
  return std::all_of(sensitivities.begin(), sensitivities.end(),
                     [&](double s) { return s == sensitivities[0]; });
}

std::vector<double> SoftmaxProbabilities(const std::vector<double>& scores,
                                         double eps) {
  std::vector<double> probs(scores.size(), 0.0);
  if (scores.empty()) return probs;
  double top = -std::numeric_limits<double>::infinity();
  for (double q : scores) top = std::max(top, eps * q);
  double total = 0.0;
  for (size_t i = 0; i < scores.size(); ++i) {
    probs[i] = std::exp(eps * scores[i] - top);
    total += probs[i];
  }
  for (double& p : probs) p /= total;
  return probs;
}

absl::StatusOr<int> ExpMech(const std::vector<double>& scores, double eps,
                            RandomStream& rng) {
  if (scores.empty()) {
    return absl::InvalidArgumentError("exp_mech needs at least one score");
  }
  for (double q : scores) {
    if (!std::isfinite(q)) {
      return absl::InvalidArgumentError("scores must be finite");
    }
  }
  if (!(eps >= 0.0) || !std::isfinite(eps)) {
    return absl::InvalidArgumentError("epsilon must be finite and >= 0");
  }
  CategoricalSampler sampler(SoftmaxProbabilities(scores, eps));
  return static_cast<int>(sampler.Draw(rng));
}

absl::StatusOr<int> EmSelect(const ScoredOptionSet& opts, double eps,
                             double beta, RandomStream& rng) {
  if (!opts.shared_sensitivity()) {
    return absl::InvalidArgumentError(
        "em_select needs one shared sensitivity");
  }
  if (auto s = CheckEpsilon(eps); !s.ok()) return s;
  if (!(beta > 0.0 && beta <= 1.0)) {
    return absl::InvalidArgumentError("beta must lie in (0, 1]");
  }
  const int k = static_cast<int>(opts.size());
  const double scale = opts.sensitivities[0] / eps;
  auto draw = [&](RandomStream& r) {
    const int i = static_cast<int>(r.UniformInt(k));
    return NoisyOption{opts.scores[i] + NoiseOrZero(scale, r), i};
  };
  auto result = RandomStopLoop(draw, beta / k, std::nullopt, rng);
  if (!result.ok()) return result.status();
  return result->first.index;
}

absl::StatusOr<int> GeneralizedEmSelect(const ScoredOptionSet& opts,
                                        double eps, double beta, double delta,
                                        RandomStream& rng) {
  return ShiftedRandomStop(opts, eps, beta, delta, rng);
}

absl::StatusOr<int> MarginSelect(const ScoredOptionSet& opts, double eps,
                                 double delta, RandomStream& rng,
                                 double beta) {
  if (!opts.shared_sensitivity()) {
    return absl::InvalidArgumentError(
        "margin selection needs one shared sensitivity");
  }
  if (!(eps > 0.0 && eps < 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("epsilon must lie in (0, 1), got %g", eps));
  }
  if (!(delta > 0.0 && delta < 0.25)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("delta must lie in (0, 1/4), got %g", delta));
  }
  if (auto s = CheckUnitOpen(beta, "beta"); !s.ok()) return s;
  const int k = static_cast<int>(opts.size());
  const NoiseParams noise{opts.sensitivities[0] / eps, std::log(1.0 / delta)};
  const double gamma = beta / k;
  const int64_t horizon = RandomStopParams::ApproxHorizon(gamma, delta);
  auto draw = [&](RandomStream& r) {
    const int i = static_cast<int>(r.UniformInt(k));
    const double z = noise.scale > 0.0 ? SampleTruncatedLaplace(noise, r) : 0.0;
    return NoisyOption{opts.scores[i] + z, i};
  };
  auto result = RandomStopLoop(draw, gamma, horizon, rng);
  if (!result.ok()) return result.status();
  return result->first.index;
}

double SmoothSensitivityEta(double eps, double delta) {
  return eps / (4.0 * std::log(2.0 / delta));
}

absl::StatusOr<int> SmoothEmSelect(const ScoredOptionSet& opts, double eps,
                                   double delta, double beta,
                                   RandomStream& rng) {
  if (auto s = CheckEpsilon(eps); !s.ok()) return s;
  if (auto s = CheckUnitOpen(beta, "beta"); !s.ok()) return s;
  if (auto s = CheckUnitOpen(delta, "delta"); !s.ok()) return s;
  const double k = static_cast<double>(opts.size());
  if (!(delta < beta / k)) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "delta must be below beta / K = %g, got %g", beta / k, delta));
  }
  if (!opts.smooth_eta.has_value()) {
    return absl::InvalidArgumentError(
        "smooth sensitivities must state their smoothness parameter");
  }
  const double eta = SmoothSensitivityEta(eps, delta);
  if (std::abs(*opts.smooth_eta - eta) > 1e-12 * std::max(1.0, eta)) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "sensitivities are %g-smooth but eps=%g, delta=%g need %g-smooth",
        *opts.smooth_eta, eps, delta, eta));
  }
  return ShiftedRandomStop(opts, eps, beta, delta, rng);
}

absl::StatusOr<AmplificationConfig> AmplificationConfig::Create(
    double tau, double gamma, double eps2, int num_runs) {
  if (!std::isfinite(tau)) {
    return absl::InvalidArgumentError("tau must be finite");
  }
  if (auto s = CheckUnitOpen(gamma, "gamma"); !s.ok()) return s;
  if (auto s = CheckEpsilon(eps2); !s.ok()) return s;
  if (num_runs < 1) {
    return absl::InvalidArgumentError("N must be at least 1");
  }
  return AmplificationConfig{tau, gamma, eps2, num_runs};
}

int AmplificationConfig::dummy_count() const {
  // The small slack keeps 1/gamma from rounding up past an exact integer.
  return 1 + static_cast<int>(std::ceil(1.0 / gamma - 1e-9));
}

absl::StatusOr<AmplificationOutcome> AmplificationEm(
    const std::vector<double>& samples, const AmplificationConfig& cfg,
    RandomStream& rng) {
  if (static_cast<int>(samples.size()) != cfg.num_runs) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "expected %d samples, got %d", cfg.num_runs, samples.size()));
  }
  const int d = cfg.dummy_count();
  std::vector<double> scores;
  scores.reserve(samples.size() + d);
  for (double q : samples) scores.push_back(std::min(cfg.tau, q));
  scores.insert(scores.end(), d, cfg.tau);
  auto index = ExpMech(scores, cfg.eps2, rng);
  if (!index.ok()) return index.status();
  return AmplificationOutcome{*index, *index >= cfg.num_runs, scores[*index]};
}

double AmplificationDummyBound(const AmplificationConfig& cfg,
                               double mean_weight) {
  const double d = cfg.dummy_count();
  return d / (cfg.num_runs * mean_weight + d - 1.0);
}

double AmplificationUtilityThreshold(const AmplificationConfig& cfg,
                                     double delta, double mean_weight) {
  if (delta >= 1.0) return -std::numeric_limits<double>::infinity();
  return cfg.tau - std::log(1.0 / (delta * mean_weight)) / cfg.eps2;
}

double UniformMeanWeight(double tau, double eps2) {
  if (tau <= 0.0) return 1.0;
  // Integral of e^{eps2 (q - tau)} over q in [0, min(tau, 1)], plus the mass
  // above tau.
  const double upper = std::min(tau, 1.0);
  const double below =
      (std::exp(eps2 * (upper - tau)) - std::exp(-eps2 * tau)) / eps2;
  return below + std::max(0.0, 1.0 - tau);
}

namespace {

struct AmplificationTrial {
  bool dummy = false;
  double score = 0.0;
  bool ok = true;
};

std::vector<AmplificationTrial> RunAmplification(
    const ScoreDraw& draw_q, const AmplificationConfig& cfg, int64_t trials,
    const RandomStream& root) {
  return RunTrials(trials, root, [&](int64_t, RandomStream& rng) {
    std::vector<double> samples(cfg.num_runs);
    for (double& q : samples) q = draw_q(rng);
    auto out = AmplificationEm(samples, cfg, rng);
    if (!out.ok()) return AmplificationTrial{false, 0.0, false};
    return AmplificationTrial{out->dummy, out->score, true};
  });
}

void AddConfigParams(const AmplificationConfig& cfg, double mean_weight,
                     CheckReport& report) {
  report.params = {{"tau", cfg.tau},
                   {"gamma", cfg.gamma},
                   {"eps2", cfg.eps2},
                   {"N", static_cast<double>(cfg.num_runs)},
                   {"dummies", static_cast<double>(cfg.dummy_count())},
                   {"p", mean_weight}};
}

}  // namespace

CheckReport AmplificationDummyCheck(const ScoreDraw& draw_q,
                                    const AmplificationConfig& cfg,
                                    double mean_weight, int64_t trials,
                                    const RandomStream& root) {
  const auto runs = RunAmplification(draw_q, cfg, trials, root);
  int64_t dummies = 0;
  for (const auto& r : runs) dummies += r.dummy ? 1 : 0;
  CheckReport report =
      FrequencyCheck("amplification_dummy", dummies, trials,
                     AmplificationDummyBound(cfg, mean_weight));
  AddConfigParams(cfg, mean_weight, report);
  return report;
}

CheckReport AmplificationUtilityCheck(const ScoreDraw& draw_q,
                                      const AmplificationConfig& cfg,
                                      double mean_weight, double delta_target,
                                      int64_t trials,
                                      const RandomStream& root) {
  const double threshold =
      AmplificationUtilityThreshold(cfg, delta_target, mean_weight);
  const auto runs = RunAmplification(draw_q, cfg, trials, root);
  int64_t failures = 0;
  for (const auto& r : runs) failures += (!r.ok || r.score < threshold) ? 1 : 0;
  CheckReport report = FrequencyCheck("amplification_utility", failures,
                                      trials, std::min(1.0, delta_target));
  AddConfigParams(cfg, mean_weight, report);
  report.params.push_back({"delta_target", delta_target});
  report.params.push_back({"threshold", threshold});
  return report;
}

}  // namespace private_selection
