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

#include "private_selection/lemmas.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <initializer_list>
#include <limits>

#include "absl/status/status.h"
#include "absl/strings/str_format.h"
#include "private_selection/trials.h"
#include "private_selection/verifier.h"

namespace private_selection {
namespace {

absl::Status CheckUnit(double x, const char* name) {
  if (!(x > 0.0 && x < 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("%s must lie in (0, 1), got %g", name, x));
  }
  return absl::OkStatus();
}

absl::Status CheckProbs(const std::vector<double>& probs) {
  for (double p : probs) {
    if (!(p >= 0.0 && p <= 1.0)) {
      return absl::InvalidArgumentError("Bernoulli parameters must be in [0, 1]");
    }
  }
  return absl::OkStatus();
}

// Monte Carlo rate of `violated` plus the exact rate, both against `bound`.
CheckReport TailReport(std::string name, int64_t hits, int64_t trials,
                       double bound, double exact) {
  CheckReport report = FrequencyCheck(std::move(name), hits, trials, bound);
  report.params.push_back({"exact", exact});
  report.pass = report.pass && exact <= bound + 1e-12;
  return report;
}

}  // namespace

PoissonBinomial::PoissonBinomial(const std::vector<double>& probs) {
  pmf_.assign(1, 1.0);
  for (double p : probs) {
    std::vector<double> next(pmf_.size() + 1, 0.0);
    for (size_t k = 0; k < pmf_.size(); ++k) {
      next[k] += pmf_[k] * (1.0 - p);
      next[k + 1] += pmf_[k] * p;
    }
    pmf_ = std::move(next);
    mean_ += p;
  }
  sampler_ = CategoricalSampler(pmf_);
}

double PoissonBinomial::UpperTail(double x) const {
  double total = 0.0;
  for (size_t k = 0; k < pmf_.size(); ++k) {
    if (static_cast<double>(k) >= x) total += pmf_[k];
  }
  return std::min(1.0, total);
}

double PoissonBinomial::LowerTail(double x) const {
  double total = 0.0;
  for (size_t k = 0; k < pmf_.size(); ++k) {
    if (static_cast<double>(k) <= x) total += pmf_[k];
  }
  return std::min(1.0, total);
}

int PoissonBinomial::Sample(RandomStream& rng) const {
  return static_cast<int>(sampler_.Draw(rng));
}

absl::StatusOr<CouplingConstants> CouplingBound(double eps0, double eps1,
                                                double delta0) {
  if (auto s = CheckUnit(eps0, "eps0"); !s.ok()) return s;
  if (auto s = CheckUnit(eps1, "eps1"); !s.ok()) return s;
  if (auto s = CheckUnit(delta0, "delta0"); !s.ok()) return s;
  const double growth = std::exp(eps0 + eps1);
  CouplingConstants out;
  out.coupling = 2.0 * (growth + 1.0 + std::exp(eps0 / 2.0));
  out.offset =
      out.coupling * std::log(2.0 / delta0) / (eps0 * (growth - 1.0));
  return out;
}

absl::StatusOr<CheckReport> CouplingCheck(double eps0, double eps1,
                                          double delta0,
                                          const std::vector<double>& x_probs,
                                          const std::vector<double>& y_probs,
                                          int64_t trials,
                                          const RandomStream& root) {
  auto constants = CouplingBound(eps0, eps1, delta0);
  if (!constants.ok()) return constants.status();
  if (auto s = CheckProbs(x_probs); !s.ok()) return s;
  if (auto s = CheckProbs(y_probs); !s.ok()) return s;
  const PoissonBinomial x(x_probs);
  const PoissonBinomial y(y_probs);
  if (x.mean() > std::exp(eps1) * y.mean() * (1.0 + 1e-12)) {
    return absl::InvalidArgumentError("E X must be at most e^eps1 E Y");
  }
  const double growth = std::exp(eps0 + eps1);
  const double offset = constants->offset;
  auto violated = [&](double xv, double yv) {
    return xv + offset >= growth * (yv + offset);
  };
  double exact = 0.0;
  for (int k = 0; k <= y.n(); ++k) {
    exact += y.pmf()[k] * x.UpperTail(growth * (k + offset) - offset);
  }
  auto hits = RunTrials(trials, root, [&](int64_t, RandomStream& rng) {
    const int xv = x.Sample(rng);
    const int yv = y.Sample(rng);
    return violated(xv, yv) ? 1 : 0;
  });
  int64_t count = 0;
  for (int h : hits) count += h;
  CheckReport report = TailReport("coupling", count, trials, delta0, exact);
  report.params.insert(report.params.begin(),
                       {{"eps0", eps0},
                        {"eps1", eps1},
                        {"delta0", delta0},
                        {"C", constants->coupling},
                        {"Delta", offset},
                        {"n", static_cast<double>(x_probs.size())}});
  return report;
}

absl::StatusOr<CheckReport> ChernoffUpperCheck(double eps, double delta,
                                               const std::vector<double>& probs,
                                               int64_t trials,
                                               const RandomStream& root) {
  if (auto s = CheckUnit(eps, "eps"); !s.ok()) return s;
  if (auto s = CheckUnit(delta, "delta"); !s.ok()) return s;
  if (auto s = CheckProbs(probs); !s.ok()) return s;
  const PoissonBinomial x(probs);
  const double cut = std::exp(eps) * x.mean() +
                     (std::exp(eps) + 1.0) / eps * std::log(1.0 / delta);
  auto hits = RunTrials(trials, root, [&](int64_t, RandomStream& rng) {
    return x.Sample(rng) >= cut ? 1 : 0;
  });
  int64_t count = 0;
  for (int h : hits) count += h;
  CheckReport report =
      TailReport("chernoff_upper", count, trials, delta, x.UpperTail(cut));
  report.params.insert(report.params.begin(),
                       {{"eps", eps},
                        {"delta", delta},
                        {"n", static_cast<double>(probs.size())},
                        {"mean", x.mean()},
                        {"cut", cut}});
  return report;
}

absl::StatusOr<CheckReport> ChernoffLowerCheck(double eps, double delta,
                                               const std::vector<double>& probs,
                                               int64_t trials,
                                               const RandomStream& root) {
  if (auto s = CheckUnit(eps, "eps"); !s.ok()) return s;
  if (auto s = CheckUnit(delta, "delta"); !s.ok()) return s;
  if (auto s = CheckProbs(probs); !s.ok()) return s;
  const PoissonBinomial y(probs);
  const double cut =
      std::exp(-eps) * y.mean() - std::log(1.0 / delta) / eps;
  auto hits = RunTrials(trials, root, [&](int64_t, RandomStream& rng) {
    return y.Sample(rng) <= cut ? 1 : 0;
  });
  int64_t count = 0;
  for (int h : hits) count += h;
  CheckReport report =
      TailReport("chernoff_lower", count, trials, delta, y.LowerTail(cut));
  report.params.insert(report.params.begin(),
                       {{"eps", eps},
                        {"delta", delta},
                        {"n", static_cast<double>(probs.size())},
                        {"mean", y.mean()},
                        {"cut", cut}});
  return report;
}

absl::StatusOr<SandwichReport> InverseMomentSandwich(
    const std::vector<FiniteVariable>& variables) {
  double points = 1.0;
  double mean_sum = 0.0;
  for (const FiniteVariable& v : variables) {
    if (v.empty()) return absl::InvalidArgumentError("empty support");
    double mass = 0.0;
    for (const auto& [value, prob] : v) {
      if (!(value >= 0.0 && value <= 1.0) || !(prob >= 0.0)) {
        return absl::InvalidArgumentError(
            "values must lie in [0, 1] with nonnegative probabilities");
      }
      mass += prob;
      mean_sum += value * prob;
    }
    if (std::abs(mass - 1.0) > kNormalizationTolerance) {
      return absl::InvalidArgumentError("probabilities must sum to 1");
    }
    points *= static_cast<double>(v.size());
  }
  if (points > 1e7) {
    return absl::OutOfRangeError("support product too large to enumerate");
  }
  double exact = 0.0;
  std::function<void(size_t, double, double)> walk = [&](size_t i, double sum,
                                                         double prob) {
    if (i == variables.size()) {
      exact += prob / (1.0 + sum);
      return;
    }
    for (const auto& [value, p] : variables[i]) {
      if (p > 0.0) walk(i + 1, sum + value, prob * p);
    }
  };
  walk(0, 0.0, 1.0);
  SandwichReport report;
  report.exact = exact;
  report.lower = 1.0 / (1.0 + mean_sum);
  report.upper = mean_sum > 0.0 ? 1.0 / mean_sum
                                : std::numeric_limits<double>::infinity();
  constexpr double kTol = 1e-12;
  report.holds = report.lower <= exact + kTol && exact <= report.upper + kTol;
  return report;
}

namespace {

struct DistributionPair {
  std::vector<double> p;
  std::vector<double> q;
};

void Normalize(std::vector<double>& v) {
  double total = 0.0;
  for (double x : v) total += x;
  for (double& x : v) x /= total;
}

DistributionPair RandomPair(RandomStream& rng, int size, double spread,
                            bool spike) {
  DistributionPair pair{std::vector<double>(size), std::vector<double>(size)};
  for (int x = 0; x < size; ++x) {
    pair.q[x] = -std::log(rng.OpenUniform());
    pair.p[x] = pair.q[x] * std::exp(spread * (2.0 * rng.Uniform() - 1.0));
  }
  if (spike) {
    const int x = static_cast<int>(rng.UniformInt(size));
    pair.q[x] *= 0.02;
  }
  Normalize(pair.p);
  Normalize(pair.q);
  if (rng.Bernoulli(0.5)) std::swap(pair.p, pair.q);
  return pair;
}

// Random pairs that are (eps, delta)-close in both directions.
DistributionPair RandomClosePair(RandomStream& rng, double eps, double delta) {
  while (true) {
    DistributionPair pair = RandomPair(rng, 8, 0.45, rng.Bernoulli(0.5));
    if (DeltaDivergence(pair.p, pair.q, delta).value <= eps &&
        DeltaDivergence(pair.q, pair.p, delta).value <= eps) {
      return pair;
    }
  }
}

CheckReport CountFailures(std::string name, int64_t failures,
                          int64_t instances) {
  CheckReport report;
  report.name = std::move(name);
  report.trials = instances;
  report.empirical = static_cast<double>(failures);
  report.bound = 0.0;
  report.pass = failures == 0;
  return report;
}

std::string StatusOf(const std::vector<CheckReport>& checks) {
  return AllPass(checks) ? "pass" : "fail";
}

constexpr double kGridEps[] = {0.1, 0.3, 0.6};
constexpr double kGridDelta[] = {0.01, 0.05, 0.1};
constexpr int kEventInstances = 1000;

}  // namespace

std::vector<LemmaResult> ValidateLemmas(int64_t trials, uint64_t seed) {
  std::vector<LemmaResult> results = {
      {"coupling", "skipped", {}},       {"chernoff_upper", "skipped", {}},
      {"chernoff_lower", "skipped", {}}, {"inverse_moment", "skipped", {}},
      {"split_event", "skipped", {}},    {"merge_event", "skipped", {}}};
  if (trials <= 0) return results;
  const RandomStream root(seed, 0);
  RandomStream setup = root.Substream(0);
  uint64_t next_stream = 1;
  auto record = [&](LemmaResult& result, absl::StatusOr<CheckReport> r) {
    if (r.ok()) {
      result.checks.push_back(*std::move(r));
    } else {
      CheckReport failed;
      failed.name = result.name;
      failed.note = std::string(r.status().message());
      result.checks.push_back(std::move(failed));
    }
  };

  for (double eps : kGridEps) {
    for (double delta : kGridDelta) {
      // Near-tight coupling instance: n = ceil(Delta), E X = e^eps1 E Y.
      auto constants = CouplingBound(eps, eps, delta);
      const int n = static_cast<int>(std::ceil(constants->offset));
      std::vector<double> y_probs(n);
      std::vector<double> x_probs(n);
      for (int i = 0; i < n; ++i) {
        y_probs[i] = std::exp(-eps) * setup.Uniform();
        x_probs[i] = std::exp(eps) * y_probs[i];
      }
      record(results[0], CouplingCheck(eps, eps, delta, x_probs, y_probs,
                                       trials, root.Substream(next_stream++)));

      const std::vector<double> flat(1000, 0.3);
      std::vector<double> mixed(1000);
      for (double& p : mixed) p = setup.Uniform();
      for (const std::vector<double>* probs :
           std::initializer_list<const std::vector<double>*>{&flat, &mixed}) {
        record(results[1], ChernoffUpperCheck(eps, delta, *probs, trials,
                                              root.Substream(next_stream++)));
        record(results[2], ChernoffLowerCheck(eps, delta, *probs, trials,
                                              root.Substream(next_stream++)));
      }
    }
  }

  {
    int64_t failures = 0;
    int64_t instances = 0;
    for (int n = 1; n <= 12; ++n) {
      for (int support = 2; support <= 3; ++support) {
        for (int rep = 0; rep < 10; ++rep) {
          std::vector<FiniteVariable> vars(n);
          for (FiniteVariable& v : vars) {
            std::vector<double> w(support);
            for (double& x : w) x = -std::log(setup.OpenUniform());
            Normalize(w);
            for (int j = 0; j < support; ++j) {
              v.push_back({setup.Uniform(), w[j]});
            }
          }
          auto r = InverseMomentSandwich(vars);
          ++instances;
          if (!r.ok() || !r->holds) ++failures;
        }
      }
    }
    results[3].checks.push_back(
        CountFailures("inverse_moment", failures, instances));
  }

  {
    constexpr double kEps = 0.3;
    constexpr double kDelta = 0.05;
    int64_t failures = 0;
    int64_t specialization_failures = 0;
    int64_t round_trip_failures = 0;
    RandomStream rng = root.Substream(next_stream++);
    for (int i = 0; i < kEventInstances; ++i) {
      DistributionPair pair = RandomClosePair(rng, kEps, kDelta);
      const double tight = kEps + std::sqrt(2.0 * kDelta);
      auto split = SplitEvent(pair.p, pair.q, kEps, kDelta, tight);
      if (!split.ok() || !split->pass) {
        ++failures;
        continue;
      }
      if (split->prob_p_high > std::sqrt(kDelta) + 1e-12) {
        ++specialization_failures;
      }
      const double loose = kEps + 0.01 + rng.Uniform();
      auto other = SplitEvent(pair.p, pair.q, kEps, kDelta, loose);
      if (!other.ok() || !other->pass) ++failures;
      const MergeReport merged =
          MergeEvent(pair.p, pair.q, split->event, tight);
      const double root_delta = std::sqrt(kDelta);
      if (!merged.pass ||
          DeltaDivergence(pair.p, pair.q, root_delta).value > tight + 1e-12 ||
          DeltaDivergence(pair.q, pair.p, root_delta).value > tight + 1e-12) {
        ++round_trip_failures;
      }
    }
    results[4].checks.push_back(
        CountFailures("split_event", failures, kEventInstances));
    results[4].checks.push_back(CountFailures(
        "split_event_sqrt_delta", specialization_failures, kEventInstances));
    results[4].checks.push_back(CountFailures(
        "split_merge_round_trip", round_trip_failures, kEventInstances));
  }

  {
    int64_t failures = 0;
    RandomStream rng = root.Substream(next_stream++);
    for (int i = 0; i < kEventInstances; ++i) {
      DistributionPair pair = RandomPair(rng, 8, 1.0, rng.Bernoulli(0.5));
      std::vector<int> event;
      double restricted = 0.0;
      for (int x = 0; x < 8; ++x) {
        if (rng.Bernoulli(0.3)) {
          event.push_back(x);
        } else {
          restricted = std::max(
              restricted, std::abs(std::log(pair.p[x] / pair.q[x])));
        }
      }
      if (!MergeEvent(pair.p, pair.q, event, restricted).pass) ++failures;
    }
    results[5].checks.push_back(
        CountFailures("merge_event", failures, kEventInstances));
  }

  for (LemmaResult& r : results) r.status = StatusOf(r.checks);
  return results;
}

}  // namespace private_selection
