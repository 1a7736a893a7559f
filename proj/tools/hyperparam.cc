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

// Synthetic hyperparameter tuning: each setting trains a noisy learner and
// is scored on a held-out validation set with Laplace noise. A discretized
// twin of the validation step is audited exactly across a neighbor edge.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "cli.h"
#include "private_selection/core.h"
#include "private_selection/json_io.h"
#include "private_selection/selection.h"
#include "private_selection/sparse_vector.h"
#include "private_selection/trials.h"
#include "private_selection/verifier.h"

namespace private_selection::cli {
namespace {

using nlohmann::json;

struct Scenario {
  std::vector<double> qualities;
  int64_t train_size = 1000;
  int64_t validation_size = 10000;
  double eps1 = 1.0;
  double eps2 = 1.0;
};

// One tuning run: train setting i, then score it on the validation set.
ScoredSample TrainAndValidate(const Scenario& s, RandomStream& rng) {
  const int k = static_cast<int>(s.qualities.size());
  const int i = static_cast<int>(rng.UniformInt(k));
  const double accuracy = std::clamp(
      s.qualities[i] + SampleLaplace(1.0 / (s.train_size * s.eps1), rng), 0.0,
      1.0);
  const int64_t correct = rng.Binomial(s.validation_size, accuracy);
  const double noisy =
      static_cast<double>(correct) / s.validation_size +
      SampleLaplace(1.0 / (s.validation_size * s.eps2), rng);
  return {{i, 0}, Score::Clamped(noisy)};
}

// Count of correct answers plus two-sided geometric noise with ratio
// e^{-eps2}, clamped to [0, n].
std::vector<double> ClampedGeometricCounts(int64_t count, int64_t n,
                                           double eps2) {
  const double ratio = std::exp(-eps2);
  std::vector<double> probs(n + 1);
  const double interior = (1.0 - ratio) / (1.0 + ratio);
  for (int64_t x = 1; x < n; ++x) {
    probs[x] = interior * std::pow(ratio, std::abs(x - count));
  }
  probs[0] = std::pow(ratio, static_cast<double>(count)) / (1.0 + ratio);
  probs[n] = std::pow(ratio, static_cast<double>(n - count)) / (1.0 + ratio);
  if (n == 0) probs[0] = 1.0;
  return probs;
}

absl::StatusOr<std::vector<DiscreteCandidate>> TwinCandidates(
    const Scenario& s, int64_t twin_size) {
  std::vector<DiscreteCandidate> out;
  for (size_t i = 0; i < s.qualities.size(); ++i) {
    const int64_t count = std::min<int64_t>(
        std::llround(s.qualities[i] * twin_size), twin_size - 1);
    std::vector<SupportPoint> support;
    for (int64_t x = 0; x <= twin_size; ++x) {
      auto score = Score::Create(static_cast<double>(x) / twin_size);
      if (!score.ok()) return score.status();
      support.push_back({{{static_cast<int>(i), x}, *score},
                         absl::StrCat(x, "/", twin_size)});
    }
    auto candidate = DiscreteCandidate::Create(
        std::move(support), {"V", "V'"},
        {ClampedGeometricCounts(count, twin_size, s.eps2),
         ClampedGeometricCounts(count + 1, twin_size, s.eps2)});
    if (!candidate.ok()) return candidate.status();
    out.push_back(*std::move(candidate));
  }
  return out;
}

}  // namespace

absl::StatusOr<CommandResult> RunHyperparamExperiment(
    const CliOptions& options) {
  auto cfg = LoadConfig(options, "experiment", 500);
  if (!cfg.ok()) return cfg.status();
  ConfigReader& r = cfg->reader;
  Scenario s;
  auto qualities = r.NumberList(
      "qualities", std::vector<double>{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8});
  auto m = r.Integer("m", s.train_size);
  auto n = r.Integer("n", s.validation_size);
  auto eps1 = r.Number("eps1", s.eps1);
  auto eps2 = r.Number("eps2", s.eps2);
  auto gamma = r.Number("gamma", 0.02);
  auto margin = r.Number("margin", 0.1);
  auto required = r.Number("required_success", 0.9);
  auto twin_size = r.Integer("twin_n", 200);
  auto ps = r.Value("private_select");
  for (const absl::Status& st :
       {qualities.status(), m.status(), n.status(), eps1.status(),
        eps2.status(), gamma.status(), margin.status(), required.status(),
        twin_size.status(), ps.status()}) {
    if (!st.ok()) return st;
  }
  ConfigReader pr(*ps, "config.private_select");
  PrivateSelectParams params;
  {
    auto rounds = pr.Integer("rounds", params.rounds);
    auto beta = pr.Number("beta", params.beta);
    auto delta = pr.Number("delta", params.delta);
    auto e0 = pr.Number("eps0", params.eps0);
    auto e1 = pr.Number("eps1", params.eps1);
    for (const absl::Status& st : {rounds.status(), beta.status(),
                                   delta.status(), e0.status(), e1.status()}) {
      if (!st.ok()) return st;
    }
    params = {static_cast<int>(*rounds), *beta, *delta, *e0, *e1};
  }
  if (auto st = pr.Finish(); !st.ok()) return st;
  if (auto st = r.Finish(); !st.ok()) return st;
  if (qualities->empty()) {
    return absl::InvalidArgumentError("qualities must be nonempty");
  }
  for (double q : *qualities) {
    if (!(q >= 0.0 && q <= 1.0)) {
      return absl::InvalidArgumentError("qualities must lie in [0, 1]");
    }
  }
  if (*m < 1 || *n < 1 || *twin_size < 2) {
    return absl::InvalidArgumentError("need m >= 1, n >= 1 and twin_n >= 2");
  }
  if (!(*eps1 > 0.0) || !(*eps2 > 0.0)) {
    return absl::InvalidArgumentError("eps1 and eps2 must be positive");
  }
  s.qualities = *qualities;
  s.train_size = *m;
  s.validation_size = *n;
  s.eps1 = *eps1;
  s.eps2 = *eps2;
  const int k = static_cast<int>(s.qualities.size());
  const double best =
      *std::max_element(s.qualities.begin(), s.qualities.end());
  auto rs = RandomStopParams::Unbounded(*gamma);
  if (!rs.ok()) return rs.status();

  const int64_t trials = cfg->trials;
  const RandomStream root(cfg->seed, 0);
  const BoundSampler draw = [&s](RandomStream& rng) {
    return TrainAndValidate(s, rng);
  };
  auto stop_runs = RunTrials(trials, root.Substream(0),
                             [&](int64_t, RandomStream& rng) {
                               return RandomStopSelect(draw, *rs, rng);
                             });

  auto twin = TwinCandidates(s, *twin_size);
  if (!twin.ok()) return twin.status();
  std::vector<SamplerCandidate> samplers;
  for (const DiscreteCandidate& c : *twin) samplers.push_back(c.AsSampler());
  auto mixture = UniformMixture(samplers);
  if (!mixture.ok()) return mixture.status();
  auto plan = PlanPrivateSelect(k, params, kExactPathMaxSamples);
  if (!plan.ok()) return plan.status();
  auto select_runs = RunTrials(trials, root.Substream(1),
                               [&](int64_t, RandomStream& rng) {
                                 return PrivateSelect(*mixture, "V", *plan,
                                                      rng);
                               });

  CommandResult result;
  result.csv.push_back({"trial", "selector", "setting", "true_quality",
                        "validation_score", "calls"});
  int64_t stop_hits = 0;
  double stop_calls = 0.0;
  for (size_t t = 0; t < stop_runs.size(); ++t) {
    if (!stop_runs[t].ok()) return stop_runs[t].status();
    const SelectionOutcome& o = *stop_runs[t];
    const int setting = o.sample.payload.candidate;
    if (s.qualities[setting] >= best - *margin - 1e-12) ++stop_hits;
    stop_calls += static_cast<double>(o.calls);
    result.csv.push_back({std::to_string(t), "random_stop",
                          std::to_string(setting),
                          FormatDouble(s.qualities[setting]),
                          FormatDouble(o.sample.score.value()),
                          std::to_string(o.calls)});
  }
  int64_t select_hits = 0;
  int64_t select_bots = 0;
  for (size_t t = 0; t < select_runs.size(); ++t) {
    if (!select_runs[t].ok()) return select_runs[t].status();
    const PrivateSelectResult& res = *select_runs[t];
    const SelectionOutcome& o = res.outcome;
    if (o.is_bot) {
      ++select_bots;
    } else if (s.qualities[o.sample.payload.candidate] >=
               best - *margin - 1e-12) {
      ++select_hits;
    }
    result.csv.push_back(
        {std::to_string(t), "private_select",
         o.is_bot ? "bot" : std::to_string(o.sample.payload.candidate),
         o.is_bot ? "" : FormatDouble(s.qualities[o.sample.payload.candidate]),
         o.is_bot ? "" : FormatDouble(o.sample.score.value()),
         std::to_string(res.total_calls)});
  }

  // Exact audit of each twin score distribution across the V ~ V' edge.
  double worst = 0.0;
  for (const DiscreteCandidate& c : *twin) {
    worst = std::max(worst, MaxDivergence(c.probabilities(0),
                                          c.probabilities(1)).value);
    worst = std::max(worst, MaxDivergence(c.probabilities(1),
                                          c.probabilities(0)).value);
  }
  const bool audit_pass = worst <= s.eps2 + kExactAuditTolerance;

  const double denom = trials > 0 ? static_cast<double>(trials) : 1.0;
  const double stop_rate = stop_hits / denom;
  const bool stop_pass = trials == 0 || stop_rate >= *required;
  result.pass = stop_pass && audit_pass;
  result.report = {
      {"command", "experiment"},
      {"experiment", "hyperparam"},
      {"seed", cfg->seed},
      {"trials", trials},
      {"scenario",
       {{"qualities", s.qualities},
        {"m", s.train_size},
        {"n", s.validation_size},
        {"eps1", s.eps1},
        {"eps2", s.eps2}}},
      {"random_stop",
       {{"gamma", *gamma},
        {"success_rate", stop_rate},
        {"required", *required},
        {"mean_calls", stop_calls / denom},
        {"pass", stop_pass}}},
      {"private_select_twin",
       {{"success_rate", select_hits / denom},
        {"bot_rate", select_bots / denom},
        {"samples", plan->stage1.derived.samples},
        {"stage2_horizon", plan->stage2_horizon}}},
      {"validation_audit",
       {{"twin_n", *twin_size},
        {"measured", worst},
        {"bound", s.eps2},
        {"tolerance", kExactAuditTolerance},
        {"pass", audit_pass}}},
      {"pass", result.pass}};
  result.summary = {
      absl::StrFormat("random_stop: within %g of the best in %.4f of %d trials "
                      "(need %g)",
                      *margin, stop_rate, trials, *required),
      absl::StrFormat("private_select on the twin: success %.4f, bot %.4f",
                      select_hits / denom, select_bots / denom),
      absl::StrFormat("validation audit: measured %.12g <= eps2 = %g: %s",
                      worst, s.eps2, audit_pass ? "PASS" : "FAIL")};
  return result;
}

}  // namespace private_selection::cli
