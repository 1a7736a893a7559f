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

#include "private_selection/families.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "private_selection/selection.h"
#include "private_selection/trials.h"
#include "private_selection/verifier.h"

namespace private_selection {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Outcome {
  double score;
  std::string label;
};

absl::StatusOr<DiscreteCandidate> MakeCandidate(
    int index, const std::vector<Outcome>& outcomes,
    const std::vector<std::string>& datasets,
    std::vector<std::vector<double>> probs) {
  std::vector<SupportPoint> support;
  for (size_t j = 0; j < outcomes.size(); ++j) {
    auto score = Score::Create(outcomes[j].score);
    if (!score.ok()) return score.status();
    support.push_back(
        {ScoredSample{Payload{index, static_cast<int64_t>(j)}, *score},
         outcomes[j].label});
  }
  return DiscreteCandidate::Create(std::move(support), datasets,
                                   std::move(probs));
}

absl::StatusOr<NeighborGraph> TwoDatasetGraph() {
  return NeighborGraph::Create({kFamilyDataset, kFamilyNeighbor},
                               {{kFamilyDataset, kFamilyNeighbor}});
}

absl::StatusOr<double> CandidateDivergence(const DiscreteCandidate& c,
                                           const NeighborGraph& graph) {
  double worst = 0.0;
  for (const auto& [a, b] : graph.edges()) {
    auto pa = c.Probabilities(a);
    auto pb = c.Probabilities(b);
    if (!pa.ok()) return pa.status();
    if (!pb.ok()) return pb.status();
    worst = std::max(worst, MaxDivergence(*pa, *pb).value);
    worst = std::max(worst, MaxDivergence(*pb, *pa).value);
  }
  return worst;
}

}  // namespace

absl::StatusOr<double> MeasuredCandidateDivergence(
    const CounterexampleFamily& family) {
  double worst = 0.0;
  for (const DiscreteCandidate& c : family.candidates) {
    auto d = CandidateDivergence(c, family.graph);
    if (!d.ok()) return d.status();
    worst = std::max(worst, *d);
  }
  return worst;
}

absl::StatusOr<std::vector<double>> NaiveMaxDistribution(
    const std::vector<DiscreteCandidate>& candidates,
    std::string_view dataset) {
  const int k = static_cast<int>(candidates.size());
  std::vector<std::vector<double>> probs(k);
  for (int i = 0; i < k; ++i) {
    auto p = candidates[i].Probabilities(dataset);
    if (!p.ok()) return p.status();
    probs[i] = *std::move(p);
  }
  // Samples are compared with the candidate field set to the list position.
  auto relabeled = [&](int i, int x) {
    ScoredSample s = candidates[i].support()[x].sample;
    s.payload.candidate = i;
    return s;
  };
  std::vector<double> winner(k, 0.0);
  for (int i = 0; i < k; ++i) {
    const int size_i = static_cast<int>(probs[i].size());
    for (int x = 0; x < size_i; ++x) {
      if (probs[i][x] <= 0.0) continue;
      const ScoredSample s = relabeled(i, x);
      double mass = probs[i][x];
      for (int j = 0; j < k && mass > 0.0; ++j) {
        if (j == i) continue;
        double below = 0.0;
        for (size_t y = 0; y < probs[j].size(); ++y) {
          if (relabeled(j, static_cast<int>(y)) < s) below += probs[j][y];
        }
        mass *= below;
      }
      winner[i] += mass;
    }
  }
  return winner;
}

absl::StatusOr<CounterexampleFamily> NaiveMaxFamily(int rivals, double eps,
                                                    NaiveMaxVariant variant) {
  if (rivals < 1) {
    return absl::InvalidArgumentError("at least one rival is required");
  }
  if (!(eps >= 0.0)) {
    return absl::InvalidArgumentError("eps must be nonnegative");
  }
  const double growth = std::exp(eps);
  if (variant == NaiveMaxVariant::kLiteral && growth > 2.0) {
    return absl::OutOfRangeError(absl::StrFormat(
        "e^eps = %g exceeds 2; the neighbor probabilities would be invalid",
        growth));
  }
  const double low = variant == NaiveMaxVariant::kLiteral
                         ? 0.5
                         : 1.0 / (1.0 + growth);
  auto graph = TwoDatasetGraph();
  if (!graph.ok()) return graph.status();
  CounterexampleFamily family{
      "naive-max-pure",
      {{"K", static_cast<double>(rivals)},
       {"eps", eps},
       {"balanced", variant == NaiveMaxVariant::kBalanced ? 1.0 : 0.0}},
      *std::move(graph),
      {},
      0.0};
  const std::vector<std::string> datasets = {kFamilyDataset, kFamilyNeighbor};
  auto reference = MakeCandidate(0, {{0.9, "0.9"}}, datasets, {{1.0}, {1.0}});
  if (!reference.ok()) return reference.status();
  family.candidates.push_back(*std::move(reference));
  const double low_neighbor = growth * low;
  for (int i = 1; i <= rivals; ++i) {
    auto rival = MakeCandidate(i, {{0.8, "0.8"}, {0.95, "0.95"}}, datasets,
                               {{low, 1.0 - low},
                                {low_neighbor, 1.0 - low_neighbor}});
    if (!rival.ok()) return rival.status();
    family.candidates.push_back(*std::move(rival));
  }
  family.declared_epsilon =
      variant == NaiveMaxVariant::kBalanced
          ? eps
          : (growth >= 2.0 ? kInf : std::max(eps, -std::log(2.0 - growth)));
  return family;
}

absl::StatusOr<NaiveMaxReport> NaiveMaxCheck(int rivals, double eps,
                                             NaiveMaxVariant variant) {
  auto family = NaiveMaxFamily(rivals, eps, variant);
  if (!family.ok()) return family.status();
  auto on_d = NaiveMaxDistribution(family->candidates, kFamilyDataset);
  auto on_neighbor = NaiveMaxDistribution(family->candidates, kFamilyNeighbor);
  if (!on_d.ok()) return on_d.status();
  if (!on_neighbor.ok()) return on_neighbor.status();
  auto measured = MeasuredCandidateDivergence(*family);
  if (!measured.ok()) return measured.status();
  NaiveMaxReport report;
  report.prob_d = (*on_d)[0];
  report.prob_neighbor = (*on_neighbor)[0];
  report.log_ratio = std::log(report.prob_neighbor / report.prob_d);
  report.expected = rivals * eps;
  report.candidate_divergence = *measured;
  report.declared = family->declared_epsilon;
  const double tol = 1e-12 * std::max(1.0, report.expected);
  report.pass = std::abs(report.log_ratio - report.expected) <= tol &&
                std::abs(report.candidate_divergence - report.declared) <=
                    1e-12 * std::max(1.0, report.declared);
  return report;
}

absl::StatusOr<CounterexampleFamily> NaiveMaxApproxFamily(int rivals,
                                                          double delta,
                                                          double eps) {
  if (rivals < 1) {
    return absl::InvalidArgumentError("at least one rival is required");
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    return absl::InvalidArgumentError("delta must lie in (0, 1)");
  }
  if (!(eps >= 0.0)) {
    return absl::InvalidArgumentError("eps must be nonnegative");
  }
  const double rate = std::log(1.0 / delta) / rivals;
  if (rate > 1.0) {
    return absl::OutOfRangeError(absl::StrFormat(
        "ln(1/delta) / K = %g exceeds 1", rate));
  }
  const double rate_neighbor = std::exp(-eps) * rate;
  auto graph = TwoDatasetGraph();
  if (!graph.ok()) return graph.status();
  CounterexampleFamily family{
      "naive-max-approx",
      {{"K", static_cast<double>(rivals)}, {"delta", delta}, {"eps", eps}},
      *std::move(graph),
      {},
      0.0};
  const std::vector<std::string> datasets = {kFamilyDataset, kFamilyNeighbor};
  auto reference = MakeCandidate(0, {{0.9, "0.9"}}, datasets, {{1.0}, {1.0}});
  if (!reference.ok()) return reference.status();
  family.candidates.push_back(*std::move(reference));
  for (int i = 1; i <= rivals; ++i) {
    auto rival = MakeCandidate(
        i, {{0.8, "0.8"}, {0.95, "0.95"}}, datasets,
        {{1.0 - rate, rate}, {1.0 - rate_neighbor, rate_neighbor}});
    if (!rival.ok()) return rival.status();
    family.candidates.push_back(*std::move(rival));
  }
  const double low_ratio =
      rate >= 1.0 ? kInf
                  : std::log((1.0 - rate_neighbor) / (1.0 - rate));
  family.declared_epsilon = std::max(eps, low_ratio);
  return family;
}

absl::StatusOr<NaiveMaxApproxReport> NaiveMaxApproxCheck(int rivals,
                                                         double delta,
                                                         double eps) {
  auto family = NaiveMaxApproxFamily(rivals, delta, eps);
  if (!family.ok()) return family.status();
  auto on_d = NaiveMaxDistribution(family->candidates, kFamilyDataset);
  auto on_neighbor = NaiveMaxDistribution(family->candidates, kFamilyNeighbor);
  if (!on_d.ok()) return on_d.status();
  if (!on_neighbor.ok()) return on_neighbor.status();
  const double log_inv_delta = std::log(1.0 / delta);
  NaiveMaxApproxReport report;
  report.prob_d = (*on_d)[0];
  report.prob_neighbor = (*on_neighbor)[0];
  report.event_ratio =
      report.prob_neighbor > delta
          ? std::log((report.prob_neighbor - delta) / report.prob_d)
          : -kInf;
  report.index_divergence =
      DeltaDivergence(*on_neighbor, *on_d, delta).value;
  report.target = 0.5 * log_inv_delta * eps;
  report.in_regime = rivals >= 100.0 * log_inv_delta;
  report.pass = report.in_regime && report.event_ratio >= report.target;
  return report;
}

absl::StatusOr<ScoredSample> DecreasingThresholdSelect(
    const BoundSampler& draw, double gamma, int rounds, RandomStream& rng) {
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    return absl::InvalidArgumentError("gamma must lie in (0, 1]");
  }
  if (rounds < 1) return absl::InvalidArgumentError("R must be at least 1");
  int level = rounds;  // threshold is level / R
  for (int64_t calls = 0; calls < kSafetyIterationCap; ++calls) {
    const ScoredSample s = draw(rng);
    if (level == 0 || s.score.value() >= static_cast<double>(level) / rounds) {
      return s;
    }
    if (rng.Bernoulli(gamma)) --level;
  }
  return absl::ResourceExhaustedError(
      "decreasing thresholds exceeded the iteration cap");
}

double DecreasingThresholdsClosedForm(double p, double gamma, int rounds) {
  const double step = (1.0 - p) * gamma / (p * (1.0 - gamma) + gamma);
  return (1.0 - p) * std::pow(step, rounds);
}

absl::StatusOr<DecreasingThresholdsReport> DecreasingThresholdsCheck(
    double p, double gamma, int rounds, double eps, int64_t trials,
    const RandomStream& root) {
  if (!(p >= 0.0 && p < 1.0) || !(gamma > 0.0 && gamma < 1.0)) {
    return absl::InvalidArgumentError("need p in [0, 1) and gamma in (0, 1)");
  }
  if (rounds < 1) return absl::InvalidArgumentError("R must be at least 1");
  const double neighbor_low = std::exp(eps) * (1.0 - p);
  if (neighbor_low > 1.0) {
    return absl::OutOfRangeError("e^eps (1 - p) exceeds 1");
  }
  DecreasingThresholdsReport report;
  report.closed_form = DecreasingThresholdsClosedForm(p, gamma, rounds);
  const Score one = *Score::Create(1.0);
  const Score zero = *Score::Create(0.0);
  BoundSampler bernoulli = [&](RandomStream& rng) {
    return rng.Bernoulli(p) ? ScoredSample{{0, 1}, one}
                            : ScoredSample{{0, 0}, zero};
  };
  auto runs = RunTrials(trials, root, [&](int64_t, RandomStream& rng) {
    auto s = DecreasingThresholdSelect(bernoulli, gamma, rounds, rng);
    return s.ok() ? (s->score.value() == 0.0 ? 1 : 0) : -1;
  });
  int64_t zeros = 0;
  for (int r : runs) {
    if (r < 0) return absl::InternalError("simulation failed");
    zeros += r;
  }
  report.simulated =
      trials > 0 ? static_cast<double>(zeros) / static_cast<double>(trials)
                 : 0.0;
  report.std_error = FrequencyStdError(report.closed_form, trials);
  report.agrees =
      std::abs(report.simulated - report.closed_form) <=
      4.0 * report.std_error + 1e-12;
  const double neighbor =
      DecreasingThresholdsClosedForm(1.0 - neighbor_low, gamma, rounds);
  report.amplification = std::log(neighbor / report.closed_form);
  report.required = rounds * eps;
  report.amplifies = report.amplification >= report.required - 1e-12;
  return report;
}

absl::StatusOr<CounterexampleFamily> PercentileFamily(double eps) {
  if (!(eps > 0.0 && eps < 1.0)) {
    return absl::InvalidArgumentError("eps must lie in (0, 1)");
  }
  auto graph = TwoDatasetGraph();
  if (!graph.ok()) return graph.status();
  CounterexampleFamily family{"percentile-median",
                              {{"eps", eps}},
                              *std::move(graph),
                              {},
                              std::log((1.0 + eps) / (1.0 - eps))};
  auto q = MakeCandidate(
      0, {{0.0, "m1"}, {1.0, "m2"}}, {kFamilyDataset, kFamilyNeighbor},
      {{(1.0 - eps) / 2.0, (1.0 + eps) / 2.0},
       {(1.0 + eps) / 2.0, (1.0 - eps) / 2.0}});
  if (!q.ok()) return q.status();
  family.candidates.push_back(*std::move(q));
  return family;
}

absl::StatusOr<double> DistributionMedian(const DiscreteCandidate& q,
                                          std::string_view dataset) {
  auto probs = q.Probabilities(dataset);
  if (!probs.ok()) return probs.status();
  double best = -kInf;
  for (size_t x = 0; x < probs->size(); ++x) {
    if ((*probs)[x] <= 0.0) continue;
    const double s = q.support()[x].sample.score.value();
    auto above = q.Exceedance(dataset, s);
    if (!above.ok()) return above.status();
    if (*above >= 0.5) best = std::max(best, s);
  }
  return best;
}

double EmpiricalMedian(std::vector<double> samples) {
  if (samples.empty()) return -kInf;
  std::sort(samples.begin(), samples.end(), std::greater<double>());
  // The k-th largest value has at least k samples at or above it.
  const size_t k = (samples.size() + 1) / 2;
  return samples[k - 1];
}

absl::StatusOr<PercentileReport> PercentileCheck(double eps, int64_t samples,
                                                 int64_t trials,
                                                 const RandomStream& root) {
  auto family = PercentileFamily(eps);
  if (!family.ok()) return family.status();
  const DiscreteCandidate& q = family->candidates[0];
  PercentileReport report;
  auto measured = MeasuredCandidateDivergence(*family);
  if (!measured.ok()) return measured.status();
  report.divergence = *measured;
  report.bound = 2.0 * eps + eps * eps * eps;
  auto median_d = DistributionMedian(q, kFamilyDataset);
  auto median_neighbor = DistributionMedian(q, kFamilyNeighbor);
  if (!median_d.ok()) return median_d.status();
  if (!median_neighbor.ok()) return median_neighbor.status();
  report.median_d = *median_d;
  report.median_neighbor = *median_neighbor;
  report.samples = samples;
  report.trials = trials;
  const CategoricalSampler on_d(*q.Probabilities(kFamilyDataset));
  const CategoricalSampler on_neighbor(*q.Probabilities(kFamilyNeighbor));
  auto flips = RunTrials(trials, root, [&](int64_t, RandomStream& rng) {
    std::vector<double> a(samples);
    std::vector<double> b(samples);
    for (double& v : a) v = q.support()[on_d.Draw(rng)].sample.score.value();
    for (double& v : b) {
      v = q.support()[on_neighbor.Draw(rng)].sample.score.value();
    }
    return EmpiricalMedian(a) != EmpiricalMedian(b) ? 1 : 0;
  });
  int64_t flipped = 0;
  for (int f : flips) flipped += f;
  report.flip_rate =
      trials > 0 ? static_cast<double>(flipped) / static_cast<double>(trials)
                 : 0.0;
  const bool small_eps = eps <= 0.5;
  report.pass = (!small_eps || report.divergence <= report.bound + 1e-12) &&
                report.median_d != report.median_neighbor &&
                (trials == 0 || report.flip_rate >= 0.99);
  return report;
}

int PackingDistance(int k, double alpha, double eps) {
  return static_cast<int>(std::ceil((0.5 + alpha) * std::log(k) / eps));
}

namespace {

struct PackingEndpoints {
  double base;   // p_i(D0)
  double own;    // p_j(Dj)
  double other;  // p_i(Dj), i != j
};

PackingEndpoints PackingProbabilities(int k, double alpha) {
  return {1.0 / (2.0 * std::sqrt(static_cast<double>(k))),
          1.0 - 1.0 / (2.0 * std::pow(k, alpha)),
          1.0 / (2.0 * std::pow(k, 1.0 + alpha))};
}

// Rate-limited step from p toward target: neither p nor 1 - p changes by a
// factor above e^rate.
double StepToward(double p, double target, double rate) {
  if (target >= p) {
    return std::min({target, p * std::exp(rate),
                     1.0 - (1.0 - p) * std::exp(-rate)});
  }
  return std::max({target, p * std::exp(-rate),
                   1.0 - (1.0 - p) * std::exp(rate)});
}

// Bernoulli path of `distance` steps from `from` to `to`. Geometric in p
// while p is the binding side, geometric in 1 - p once that side binds. The
// per-step rate is the smallest one that reaches `to` on time.
std::vector<double> InterpolatePath(double from, double to, int distance) {
  auto run = [&](double rate) {
    std::vector<double> path = {from};
    for (int t = 1; t <= distance; ++t) {
      path.push_back(StepToward(path.back(), to, rate));
    }
    return path;
  };
  double lo = 0.0;
  double hi = std::abs(std::log(to / from)) +
              std::abs(std::log((1.0 - to) / (1.0 - from)));
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (run(mid).back() == to) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  std::vector<double> path = run(hi);
  path.back() = to;
  return path;
}

}  // namespace

absl::StatusOr<CounterexampleFamily> PackingFamily(int k, double alpha,
                                                   double eps) {
  if (k < 2) return absl::InvalidArgumentError("K must be at least 2");
  if (!(alpha > 0.0 && alpha < 1.0 / 6.0)) {
    return absl::InvalidArgumentError("alpha must lie in (0, 1/6)");
  }
  if (!(eps > 0.0)) return absl::InvalidArgumentError("eps must be positive");
  const int distance = PackingDistance(k, alpha, eps);
  const PackingEndpoints ends = PackingProbabilities(k, alpha);

  // Dataset list: D0, then for each j the chain points and Dj.
  std::vector<std::string> datasets = {"D0"};
  std::vector<std::pair<std::string, std::string>> edges;
  // chain[j][t] is the dataset at step t of chain j (t = 0 is D0).
  std::vector<std::vector<std::string>> chain(k + 1);
  for (int j = 1; j <= k; ++j) {
    chain[j].push_back("D0");
    for (int t = 1; t < distance; ++t) {
      chain[j].push_back(absl::StrCat("D", j, "_", t));
    }
    chain[j].push_back(absl::StrCat("D", j));
    for (int t = 1; t <= distance; ++t) {
      datasets.push_back(chain[j][t]);
      edges.push_back({chain[j][t - 1], chain[j][t]});
    }
  }
  auto graph = NeighborGraph::Create(datasets, edges);
  if (!graph.ok()) return graph.status();

  CounterexampleFamily family{"packing",
                              {{"K", static_cast<double>(k)},
                               {"alpha", alpha},
                               {"eps", eps},
                               {"distance", static_cast<double>(distance)}},
                              *std::move(graph),
                              {},
                              eps};
  for (int i = 0; i < k; ++i) {
    std::vector<std::vector<double>> probs;
    probs.push_back({1.0 - ends.base, ends.base});
    for (int j = 1; j <= k; ++j) {
      const double target = (i == j - 1) ? ends.own : ends.other;
      const std::vector<double> path =
          InterpolatePath(ends.base, target, distance);
      for (int t = 1; t <= distance; ++t) {
        probs.push_back({1.0 - path[t], path[t]});
      }
    }
    auto c = MakeCandidate(i, {{0.0, "0"}, {1.0, "1"}}, datasets,
                           std::move(probs));
    if (!c.ok()) return c.status();
    family.candidates.push_back(*std::move(c));
  }
  return family;
}

absl::StatusOr<PackingReport> PackingCheck(int k, double alpha, double eps) {
  auto family = PackingFamily(k, alpha, eps);
  if (!family.ok()) return family.status();
  auto measured = MeasuredCandidateDivergence(*family);
  if (!measured.ok()) return measured.status();
  const PackingEndpoints ends = PackingProbabilities(k, alpha);
  PackingReport report;
  report.distance = PackingDistance(k, alpha, eps);
  report.max_step_divergence = *measured;
  report.eps = eps;
  report.own_probability = ends.own;
  report.other_probability = ends.other;
  report.base_probability = ends.base;
  report.pass = report.max_step_divergence <= eps + 1e-12;
  return report;
}

absl::StatusOr<double> DominanceProbability(
    const std::vector<DiscreteCandidate>& candidates,
    std::string_view dataset, int target) {
  const int k = static_cast<int>(candidates.size());
  if (target < 0 || target >= k) {
    return absl::InvalidArgumentError("target index out of range");
  }
  std::vector<std::vector<double>> probs(k);
  for (int i = 0; i < k; ++i) {
    auto p = candidates[i].Probabilities(dataset);
    if (!p.ok()) return p.status();
    probs[i] = *std::move(p);
  }
  double total = 0.0;
  const auto& own = candidates[target].support();
  for (size_t x = 0; x < own.size(); ++x) {
    if (probs[target][x] <= 0.0) continue;
    const double s = own[x].sample.score.value();
    // ties[m]: probability that exactly m rivals tie at s and the rest are
    // below it.
    std::vector<double> ties = {1.0};
    for (int i = 0; i < k; ++i) {
      if (i == target) continue;
      double below = 0.0;
      double equal = 0.0;
      const auto& support = candidates[i].support();
      for (size_t y = 0; y < support.size(); ++y) {
        const double v = support[y].sample.score.value();
        if (v < s) below += probs[i][y];
        if (v == s) equal += probs[i][y];
      }
      std::vector<double> next(ties.size() + 1, 0.0);
      for (size_t m = 0; m < ties.size(); ++m) {
        next[m] += ties[m] * below;
        next[m + 1] += ties[m] * equal;
      }
      ties = std::move(next);
    }
    double share = 0.0;
    for (size_t m = 0; m < ties.size(); ++m) share += ties[m] / (m + 1.0);
    total += probs[target][x] * share;
  }
  return total;
}

absl::StatusOr<int> ArgmaxOfSamples(
    const std::vector<DiscreteCandidate>& candidates,
    std::string_view dataset, RandomStream& rng) {
  double best = -kInf;
  std::vector<int> leaders;
  for (size_t i = 0; i < candidates.size(); ++i) {
    auto probs = candidates[i].Probabilities(dataset);
    if (!probs.ok()) return probs.status();
    const size_t x = CategoricalSampler(*probs).Draw(rng);
    const double s = candidates[i].support()[x].sample.score.value();
    if (s > best) {
      best = s;
      leaders.clear();
    }
    if (s == best) leaders.push_back(static_cast<int>(i));
  }
  if (leaders.empty()) return absl::InvalidArgumentError("no candidates");
  return leaders[rng.UniformInt(leaders.size())];
}

absl::StatusOr<UsefulnessReport> WeakUsefulnessCheck(
    const CounterexampleFamily& family, const IndexMechanism& mechanism,
    double gamma_level, int64_t trials, const RandomStream& root) {
  if (!(gamma_level > 0.0 && gamma_level < 1.0)) {
    return absl::InvalidArgumentError("gamma level must lie in (0, 1)");
  }
  UsefulnessReport report;
  report.gamma_level = gamma_level;
  report.trials = trials;
  report.pass = true;
  const int k = static_cast<int>(family.candidates.size());
  for (int j = 1; j <= k; ++j) {
    UsefulnessEntry entry;
    entry.dataset = absl::StrCat("D", j);
    entry.target = j - 1;
    auto dominance =
        DominanceProbability(family.candidates, entry.dataset, entry.target);
    if (!dominance.ok()) return dominance.status();
    entry.dominance = *dominance;
    entry.dominant = entry.dominance >= 1.0 - gamma_level;
    auto hits = RunTrials(
        trials, root.Substream(j), [&](int64_t, RandomStream& rng) {
          auto chosen = mechanism(family, entry.dataset, rng);
          if (!chosen.ok()) return -1;
          return *chosen == entry.target ? 1 : 0;
        });
    int64_t count = 0;
    for (int h : hits) {
      if (h < 0) return absl::InternalError("mechanism failed");
      count += h;
    }
    entry.frequency =
        trials > 0 ? static_cast<double>(count) / static_cast<double>(trials)
                   : 0.0;
    entry.pass = !entry.dominant ||
                 entry.frequency >=
                     gamma_level - 3.0 * FrequencyStdError(gamma_level, trials);
    report.pass = report.pass && entry.pass;
    report.entries.push_back(std::move(entry));
  }
  return report;
}

}  // namespace private_selection
