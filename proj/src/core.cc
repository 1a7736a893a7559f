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

#include "private_selection/core.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"

namespace private_selection {

absl::StatusOr<Score> Score::Create(double value) {
  if (!(value >= 0.0 && value <= 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("score must lie in [0, 1], got %g", value));
  }
  return Score(value);
}

Score Score::Clamped(double value) {
  if (std::isnan(value)) return Score(0.0);
  return Score(std::clamp(value, 0.0, 1.0));
}

uint64_t MixBits(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

RandomStream::RandomStream(uint64_t seed, uint64_t stream_id)
    : seed_(seed),
      stream_id_(stream_id),
      engine_(MixBits(seed ^ MixBits(stream_id ^ 0x5851f42d4c957f2dULL))) {}

RandomStream RandomStream::Substream(uint64_t index) const {
  return RandomStream(seed_, MixBits(stream_id_ * 0x2545f4914f6cdd1dULL +
                                     MixBits(index + 1)));
}

double RandomStream::Uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RandomStream::OpenUniform() {
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

bool RandomStream::Bernoulli(double p) {
  if (p <= 0.0) return false;
  if (p >= 1.0) return true;
  return Uniform() < p;
}

uint64_t RandomStream::UniformInt(uint64_t n) {
  std::uniform_int_distribution<uint64_t> dist(0, n - 1);
  return dist(engine_);
}

int64_t RandomStream::Binomial(int64_t n, double p) {
  if (n <= 0 || p <= 0.0) return 0;
  if (p >= 1.0) return n;
  std::binomial_distribution<int64_t> dist(n, p);
  return dist(engine_);
}

absl::Status NoiseParams::Validate() const {
  if (!(scale > 0.0) || std::isinf(scale)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("noise scale must be positive, got %g", scale));
  }
  if (!(truncation > 0.0)) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "truncation multiplier must be positive, got %g", truncation));
  }
  return absl::OkStatus();
}

namespace {

double LaplaceQuantile(double scale, double u) {
  if (u < 0.5) return scale * std::log(2.0 * u);
  return -scale * std::log(2.0 * (1.0 - u));
}

}  // namespace

double SampleLaplace(double scale, RandomStream& rng) {
  return LaplaceQuantile(scale, rng.OpenUniform());
}

double SampleLaplace(const NoiseParams& params, RandomStream& rng) {
  return SampleLaplace(params.scale, rng);
}

double SampleTruncatedLaplace(const NoiseParams& params, RandomStream& rng) {
  if (std::isinf(params.truncation)) return SampleLaplace(params, rng);
  // Mass below -a is e^{-T}/2; draw u uniformly on (F(-a), F(a)).
  const double tail = 0.5 * std::exp(-params.truncation);
  const double u = tail + rng.OpenUniform() * (1.0 - 2.0 * tail);
  const double bound = params.truncation * params.scale;
  return std::clamp(LaplaceQuantile(params.scale, u), -bound, bound);
}

double LaplaceCdf(const NoiseParams& params, double x) {
  if (x == std::numeric_limits<double>::infinity()) return 1.0;
  if (x == -std::numeric_limits<double>::infinity()) return 0.0;
  if (x < 0.0) return 0.5 * std::exp(x / params.scale);
  return 1.0 - 0.5 * std::exp(-x / params.scale);
}

absl::StatusOr<NeighborGraph> NeighborGraph::Create(
    std::vector<std::string> datasets,
    std::vector<std::pair<std::string, std::string>> edges) {
  std::set<std::string> names(datasets.begin(), datasets.end());
  if (names.size() != datasets.size()) {
    return absl::InvalidArgumentError("duplicate dataset id");
  }
  for (const auto& [a, b] : edges) {
    if (!names.count(a) || !names.count(b)) {
      return absl::InvalidArgumentError(
          absl::StrCat("edge references unknown dataset: ", a, "-", b));
    }
    if (a == b) {
      return absl::InvalidArgumentError(
          absl::StrCat("self-loop on dataset ", a));
    }
  }
  NeighborGraph graph;
  graph.datasets_ = std::move(datasets);
  graph.edges_ = std::move(edges);
  return graph;
}

bool NeighborGraph::Contains(std::string_view dataset) const {
  return std::find(datasets_.begin(), datasets_.end(), dataset) !=
         datasets_.end();
}

CategoricalSampler::CategoricalSampler(const std::vector<double>& weights) {
  cumulative_.reserve(weights.size());
  double total = 0.0;
  for (double w : weights) {
    total += w;
    cumulative_.push_back(total);
  }
}

size_t CategoricalSampler::Draw(RandomStream& rng) const {
  const double u = rng.Uniform() * cumulative_.back();
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  size_t index = static_cast<size_t>(it - cumulative_.begin());
  if (index >= cumulative_.size()) index = cumulative_.size() - 1;
  // Skip zero-weight entries that share the same cumulative value.
  while (index > 0 && cumulative_[index] == cumulative_[index - 1]) --index;
  return index;
}

std::vector<int64_t> MultinomialCounts(int64_t n,
                                       const std::vector<double>& probs,
                                       RandomStream& rng) {
  std::vector<int64_t> counts(probs.size(), 0);
  double remaining_mass = 0.0;
  for (double p : probs) remaining_mass += p;
  int64_t remaining = n;
  for (size_t i = 0; i < probs.size() && remaining > 0; ++i) {
    if (i + 1 == probs.size()) {
      counts[i] = remaining;
      break;
    }
    const double conditional =
        remaining_mass > 0.0 ? std::clamp(probs[i] / remaining_mass, 0.0, 1.0)
                             : 0.0;
    counts[i] = rng.Binomial(remaining, conditional);
    remaining -= counts[i];
    remaining_mass -= probs[i];
  }
  return counts;
}

absl::StatusOr<DiscreteCandidate> DiscreteCandidate::Create(
    std::vector<SupportPoint> support, std::vector<std::string> datasets,
    std::vector<std::vector<double>> probs) {
  if (support.empty()) {
    return absl::InvalidArgumentError("candidate support is empty");
  }
  if (datasets.empty() || datasets.size() != probs.size()) {
    return absl::InvalidArgumentError(
        "one probability vector per dataset is required");
  }
  std::set<std::string> names(datasets.begin(), datasets.end());
  if (names.size() != datasets.size()) {
    return absl::InvalidArgumentError("duplicate dataset id");
  }
  std::set<Payload> payloads;
  for (const SupportPoint& point : support) {
    if (!payloads.insert(point.sample.payload).second) {
      return absl::InvalidArgumentError(absl::StrFormat(
          "duplicate payload (%d, %d) in support",
          point.sample.payload.candidate, point.sample.payload.output));
    }
  }
  for (size_t d = 0; d < probs.size(); ++d) {
    if (probs[d].size() != support.size()) {
      return absl::InvalidArgumentError(absl::StrCat(
          "dataset ", datasets[d], ": probability vector length ",
          probs[d].size(), " does not match support size ", support.size()));
    }
    double total = 0.0;
    for (double p : probs[d]) {
      if (!(p >= 0.0) || std::isinf(p)) {
        return absl::InvalidArgumentError(absl::StrCat(
            "dataset ", datasets[d], ": probabilities must be nonnegative"));
      }
      total += p;
    }
    if (std::abs(total - 1.0) > kNormalizationTolerance) {
      return absl::InvalidArgumentError(absl::StrFormat(
          "dataset %s: probabilities sum to %.17g", datasets[d], total));
    }
  }
  DiscreteCandidate candidate;
  candidate.support_ = std::move(support);
  candidate.datasets_ = std::move(datasets);
  candidate.probs_ = std::move(probs);
  return candidate;
}

absl::StatusOr<int> DiscreteCandidate::DatasetIndex(
    std::string_view dataset) const {
  for (size_t i = 0; i < datasets_.size(); ++i) {
    if (datasets_[i] == dataset) return static_cast<int>(i);
  }
  return absl::NotFoundError(absl::StrCat("unknown dataset: ", std::string(dataset)));
}

absl::StatusOr<std::vector<double>> DiscreteCandidate::Probabilities(
    std::string_view dataset) const {
  absl::StatusOr<int> index = DatasetIndex(dataset);
  if (!index.ok()) return index.status();
  return probs_[*index];
}

absl::StatusOr<double> DiscreteCandidate::Exceedance(std::string_view dataset,
                                                     double tau) const {
  absl::StatusOr<int> index = DatasetIndex(dataset);
  if (!index.ok()) return index.status();
  double total = 0.0;
  for (size_t k = 0; k < support_.size(); ++k) {
    if (support_[k].sample.score.value() >= tau) total += probs_[*index][k];
  }
  return std::min(total, 1.0);
}

SamplerCandidate DiscreteCandidate::AsSampler(PrivacyLoss declared) const {
  auto exact = std::make_shared<const DiscreteCandidate>(*this);
  SamplerCandidate::Binder binder =
      [exact](std::string_view dataset) -> absl::StatusOr<BoundSampler> {
    absl::StatusOr<int> index = exact->DatasetIndex(dataset);
    if (!index.ok()) return index.status();
    auto sampler =
        std::make_shared<CategoricalSampler>(exact->probabilities(*index));
    return BoundSampler([exact, sampler](RandomStream& rng) {
      return exact->support()[sampler->Draw(rng)].sample;
    });
  };
  return SamplerCandidate(std::move(binder), declared, exact);
}

SamplerCandidate::SamplerCandidate(
    Binder binder, PrivacyLoss declared,
    std::shared_ptr<const DiscreteCandidate> exact)
    : binder_(std::move(binder)),
      declared_(declared),
      exact_(std::move(exact)) {}

absl::StatusOr<BoundSampler> SamplerCandidate::Bind(
    std::string_view dataset) const {
  return binder_(dataset);
}

absl::StatusOr<ScoredSample> SamplerCandidate::Draw(std::string_view dataset,
                                                    RandomStream& rng) const {
  absl::StatusOr<BoundSampler> bound = Bind(dataset);
  if (!bound.ok()) return bound.status();
  return (*bound)(rng);
}

absl::StatusOr<SamplerCandidate> UniformMixture(
    const std::vector<SamplerCandidate>& candidates) {
  if (candidates.empty()) {
    return absl::InvalidArgumentError("mixture of zero candidates");
  }
  PrivacyLoss declared;
  bool all_exact = true;
  for (const SamplerCandidate& c : candidates) {
    declared.epsilon = std::max(declared.epsilon, c.declared().epsilon);
    declared.delta = std::max(declared.delta, c.declared().delta);
    all_exact = all_exact && c.exact() != nullptr;
  }
  std::shared_ptr<const DiscreteCandidate> exact;
  if (all_exact) {
    std::vector<DiscreteCandidate> parts;
    for (const SamplerCandidate& c : candidates) parts.push_back(*c.exact());
    absl::StatusOr<DiscreteCandidate> mixed = DiscreteMixture(parts);
    if (mixed.ok()) {
      exact = std::make_shared<const DiscreteCandidate>(*std::move(mixed));
    }
  }
  auto members = std::make_shared<std::vector<SamplerCandidate>>(candidates);
  SamplerCandidate::Binder binder =
      [members](std::string_view dataset) -> absl::StatusOr<BoundSampler> {
    auto bound = std::make_shared<std::vector<BoundSampler>>();
    for (const SamplerCandidate& c : *members) {
      absl::StatusOr<BoundSampler> b = c.Bind(dataset);
      if (!b.ok()) return b.status();
      bound->push_back(*std::move(b));
    }
    return BoundSampler([bound](RandomStream& rng) {
      const uint64_t i = rng.UniformInt(bound->size());
      ScoredSample sample = (*bound)[i](rng);
      sample.payload.candidate = static_cast<int>(i);
      return sample;
    });
  };
  return SamplerCandidate(std::move(binder), declared, std::move(exact));
}

absl::StatusOr<DiscreteCandidate> DiscreteMixture(
    const std::vector<DiscreteCandidate>& candidates) {
  if (candidates.empty()) {
    return absl::InvalidArgumentError("mixture of zero candidates");
  }
  const std::vector<std::string>& datasets = candidates.front().datasets();
  const std::set<std::string> names(datasets.begin(), datasets.end());
  for (const DiscreteCandidate& c : candidates) {
    if (std::set<std::string>(c.datasets().begin(), c.datasets().end()) !=
        names) {
      return absl::InvalidArgumentError(
          "mixture members disagree on the dataset set");
    }
  }
  const double weight = 1.0 / static_cast<double>(candidates.size());
  std::vector<SupportPoint> support;
  std::vector<std::vector<double>> probs(datasets.size());
  for (size_t i = 0; i < candidates.size(); ++i) {
    const DiscreteCandidate& c = candidates[i];
    for (const SupportPoint& point : c.support()) {
      SupportPoint relabeled = point;
      relabeled.sample.payload.candidate = static_cast<int>(i);
      support.push_back(std::move(relabeled));
    }
    for (size_t d = 0; d < datasets.size(); ++d) {
      const int index = *c.DatasetIndex(datasets[d]);
      for (double p : c.probabilities(index)) {
        probs[d].push_back(p * weight);
      }
    }
  }
  return DiscreteCandidate::Create(std::move(support), datasets,
                                   std::move(probs));
}

}  // namespace private_selection
