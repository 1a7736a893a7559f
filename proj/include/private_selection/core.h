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

#ifndef PRIVATE_SELECTION_CORE_H_
#define PRIVATE_SELECTION_CORE_H_

#include <compare>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"

namespace private_selection {

// Per-dataset probabilities must sum to one within this tolerance.
inline constexpr double kNormalizationTolerance = 1e-12;

// A score in [0, 1]. Thresholds share the same range.
class Score {
 public:
  constexpr Score() = default;

  static absl::StatusOr<Score> Create(double value);

  // Clamps into [0, 1]. NaN maps to 0.
  static Score Clamped(double value);

  double value() const { return value_; }

  friend bool operator==(Score a, Score b) { return a.value_ == b.value_; }
  friend auto operator<=>(Score a, Score b) { return a.value_ <=> b.value_; }

 private:
  explicit constexpr Score(double value) : value_(value) {}

  double value_ = 0.0;
};

// Opaque output identifier: the candidate index plus an output id.
struct Payload {
  int candidate = 0;
  int64_t output = 0;

  friend auto operator<=>(const Payload&, const Payload&) = default;
};

struct ScoredSample {
  Payload payload;
  Score score;
};

// Strict total order: by score, then by payload.
inline bool operator<(const ScoredSample& a, const ScoredSample& b) {
  if (a.score.value() != b.score.value()) {
    return a.score.value() < b.score.value();
  }
  return a.payload < b.payload;
}

inline bool operator==(const ScoredSample& a, const ScoredSample& b) {
  return a.score == b.score && a.payload == b.payload;
}

// Deterministic pseudo-random stream keyed by (seed, stream id). Not
// cryptographically secure.
class RandomStream {
 public:
  RandomStream(uint64_t seed, uint64_t stream_id);

  uint64_t seed() const { return seed_; }
  uint64_t stream_id() const { return stream_id_; }

  // Independent child stream; depends only on (seed, stream id, index).
  RandomStream Substream(uint64_t index) const;

  // Uniform on [0, 1).
  double Uniform();
  // Uniform on (0, 1).
  double OpenUniform();
  bool Bernoulli(double p);
  // Uniform on {0, ..., n - 1}; n > 0.
  uint64_t UniformInt(uint64_t n);
  int64_t Binomial(int64_t n, double p);

  std::mt19937_64& engine() { return engine_; }

 private:
  uint64_t seed_;
  uint64_t stream_id_;
  std::mt19937_64 engine_;
};

// SplitMix64 finalizer, used to derive stream seeds.
uint64_t MixBits(uint64_t x);

struct NoiseParams {
  double scale = 1.0;
  // Support is [-truncation * scale, truncation * scale].
  double truncation = std::numeric_limits<double>::infinity();

  absl::Status Validate() const;
};

double SampleLaplace(const NoiseParams& params, RandomStream& rng);
double SampleLaplace(double scale, RandomStream& rng);

// Inverse-CDF draw restricted to the truncated range.
double SampleTruncatedLaplace(const NoiseParams& params, RandomStream& rng);

double LaplaceCdf(const NoiseParams& params, double x);

struct PrivacyLoss {
  double epsilon = 0.0;
  double delta = 0.0;
};

class NeighborGraph {
 public:
  static absl::StatusOr<NeighborGraph> Create(
      std::vector<std::string> datasets,
      std::vector<std::pair<std::string, std::string>> edges);

  const std::vector<std::string>& datasets() const { return datasets_; }
  const std::vector<std::pair<std::string, std::string>>& edges() const {
    return edges_;
  }
  bool Contains(std::string_view dataset) const;

 private:
  std::vector<std::string> datasets_;
  std::vector<std::pair<std::string, std::string>> edges_;
};

// Cumulative-weight sampler over a finite index set.
class CategoricalSampler {
 public:
  CategoricalSampler() = default;
  explicit CategoricalSampler(const std::vector<double>& weights);

  size_t Draw(RandomStream& rng) const;
  size_t size() const { return cumulative_.size(); }

 private:
  std::vector<double> cumulative_;
};

// Counts of n iid categorical draws, realized by sequential binomials.
std::vector<int64_t> MultinomialCounts(int64_t n,
                                       const std::vector<double>& probs,
                                       RandomStream& rng);

struct SupportPoint {
  ScoredSample sample;
  std::string label;
};

class SamplerCandidate;

// A candidate given by an explicit finite output distribution per dataset.
// The support is shared by every dataset; zero probabilities are allowed.
class DiscreteCandidate {
 public:
  static absl::StatusOr<DiscreteCandidate> Create(
      std::vector<SupportPoint> support, std::vector<std::string> datasets,
      std::vector<std::vector<double>> probs);

  const std::vector<SupportPoint>& support() const { return support_; }
  const std::vector<std::string>& datasets() const { return datasets_; }

  absl::StatusOr<int> DatasetIndex(std::string_view dataset) const;
  absl::StatusOr<std::vector<double>> Probabilities(
      std::string_view dataset) const;
  const std::vector<double>& probabilities(int dataset_index) const {
    return probs_[dataset_index];
  }

  // Pr[score >= tau] on the dataset.
  absl::StatusOr<double> Exceedance(std::string_view dataset,
                                    double tau) const;

  SamplerCandidate AsSampler(PrivacyLoss declared = {}) const;

 private:
  std::vector<SupportPoint> support_;
  std::vector<std::string> datasets_;
  std::vector<std::vector<double>> probs_;
};

using BoundSampler = std::function<ScoredSample(RandomStream&)>;

// Black-box sampling access to a candidate. When the exact distribution is
// known it is carried along so that callers may use exact fast paths.
class SamplerCandidate {
 public:
  using Binder =
      std::function<absl::StatusOr<BoundSampler>(std::string_view dataset)>;

  SamplerCandidate(Binder binder, PrivacyLoss declared,
                   std::shared_ptr<const DiscreteCandidate> exact = nullptr);

  absl::StatusOr<BoundSampler> Bind(std::string_view dataset) const;
  absl::StatusOr<ScoredSample> Draw(std::string_view dataset,
                                    RandomStream& rng) const;

  const PrivacyLoss& declared() const { return declared_; }
  const DiscreteCandidate* exact() const { return exact_.get(); }

 private:
  Binder binder_;
  PrivacyLoss declared_;
  std::shared_ptr<const DiscreteCandidate> exact_;
};

// Draws i uniformly, then samples candidate i. The payload's candidate field
// is set to i.
absl::StatusOr<SamplerCandidate> UniformMixture(
    const std::vector<SamplerCandidate>& candidates);

absl::StatusOr<DiscreteCandidate> DiscreteMixture(
    const std::vector<DiscreteCandidate>& candidates);

}  // namespace private_selection

#endif  // PRIVATE_SELECTION_CORE_H_
