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

// Python bindings. Structured results cross the boundary as JSON text and
// are decoded on the Python side.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "cli.h"
#include "json.hpp"
#include "private_selection/core.h"
#include "private_selection/families.h"
#include "private_selection/json_io.h"
#include "private_selection/mechanisms.h"
#include "private_selection/selection.h"
#include "private_selection/sparse_vector.h"
#include "private_selection/verifier.h"
#include "pybind11/pybind11.h"
#include "pybind11/stl.h"

namespace py = pybind11;

namespace private_selection {
namespace {

template <typename T>
T Unwrap(absl::StatusOr<T> value) {
  if (!value.ok()) throw std::invalid_argument(value.status().ToString());
  return *std::move(value);
}

DiscreteCandidate SingleCandidate(const std::vector<double>& scores,
                                  const std::vector<double>& probs) {
  std::vector<SupportPoint> support;
  for (size_t j = 0; j < scores.size(); ++j) {
    support.push_back({{{0, static_cast<int64_t>(j)}, Unwrap(Score::Create(scores[j]))},
                       std::to_string(j)});
  }
  return Unwrap(DiscreteCandidate::Create(std::move(support), {"D"}, {probs}));
}

std::string ThresholdDistribution(const std::vector<double>& scores,
                                  const std::vector<double>& probs, double tau,
                                  double gamma, double eps0) {
  const auto params =
      Unwrap(ThresholdParams::WithMinimumIterations(tau, gamma, eps0));
  const auto dist = Unwrap(
      OracleThresholdDistribution(SingleCandidate(scores, probs), "D", params));
  nlohmann::json out = OutcomeDistributionToJson(dist);
  out["max_iterations"] = params.max_iterations;
  return out.dump();
}

std::string RandomStopDistribution(const std::vector<double>& scores,
                                   const std::vector<double>& probs,
                                   double gamma,
                                   std::optional<int64_t> max_iterations) {
  return OutcomeDistributionToJson(
             Unwrap(OracleRandomStopDistribution(
                 SingleCandidate(scores, probs), "D", gamma, max_iterations)))
      .dump();
}

// Output scores of repeated threshold selection; None marks bot.
std::vector<std::optional<double>> ThresholdSamples(
    const std::vector<double>& scores, const std::vector<double>& probs,
    double tau, double gamma, double eps0, int64_t trials, uint64_t seed) {
  const auto params =
      Unwrap(ThresholdParams::WithMinimumIterations(tau, gamma, eps0));
  const DiscreteCandidate q = SingleCandidate(scores, probs);
  const SamplerCandidate sampler = q.AsSampler();
  RandomStream rng(seed, 0);
  std::vector<std::optional<double>> out;
  out.reserve(trials);
  for (int64_t i = 0; i < trials; ++i) {
    const SelectionOutcome o = Unwrap(ThresholdSelect(sampler, "D", params, rng));
    out.push_back(o.is_bot ? std::nullopt
                           : std::optional<double>(o.sample.score.value()));
  }
  return out;
}

std::string NaiveMax(int rivals, double eps, bool balanced) {
  const NaiveMaxReport r = Unwrap(NaiveMaxCheck(
      rivals, eps,
      balanced ? NaiveMaxVariant::kBalanced : NaiveMaxVariant::kLiteral));
  return nlohmann::json{{"prob_d", r.prob_d},
                        {"prob_neighbor", r.prob_neighbor},
                        {"log_ratio", r.log_ratio},
                        {"expected", r.expected},
                        {"candidate_divergence", r.candidate_divergence},
                        {"pass", r.pass}}
      .dump();
}

nlohmann::json ParamsToJson(const PotentialParams& p) {
  return {{"samples", p.samples},       {"samples_real", p.samples_real},
          {"offset", p.offset},         {"lipschitz", p.lipschitz},
          {"coupling", p.coupling},     {"target_shift", p.target_shift}};
}

std::string RunCommand(const std::string& command,
                       std::optional<std::string> config,
                       std::optional<uint64_t> seed,
                       std::optional<int64_t> trials,
                       const std::string& family) {
  cli::CliOptions options;
  options.config_path = std::move(config);
  options.seed = seed;
  options.trials = trials;
  absl::StatusOr<cli::CommandResult> result;
  if (command == "select") {
    result = cli::RunSelect(options);
  } else if (command == "find-threshold") {
    result = cli::RunFindThreshold(options);
  } else if (command == "audit") {
    result = cli::RunAudit(options);
  } else if (command == "counterexample") {
    result = cli::RunCounterexample(family, options);
  } else if (command == "experiment") {
    result = cli::RunHyperparamExperiment(options);
  } else if (command == "validate-lemmas") {
    result = cli::RunValidateLemmas(options);
  } else {
    throw std::invalid_argument("unknown command " + command);
  }
  return Unwrap(std::move(result)).report.dump();
}

}  // namespace
}  // namespace private_selection

PYBIND11_MODULE(_core, m) {
  using namespace private_selection;  // NOLINT
  m.doc() = "Private selection from private candidates.";
  m.def("softmax_probabilities", &SoftmaxProbabilities, py::arg("scores"),
        py::arg("eps"));
  m.def("threshold_distribution", &ThresholdDistribution, py::arg("scores"),
        py::arg("probs"), py::arg("tau"), py::arg("gamma"), py::arg("eps0"));
  m.def("random_stop_distribution", &RandomStopDistribution,
        py::arg("scores"), py::arg("probs"), py::arg("gamma"),
        py::arg("max_iterations") = py::none());
  m.def("threshold_samples", &ThresholdSamples, py::arg("scores"),
        py::arg("probs"), py::arg("tau"), py::arg("gamma"), py::arg("eps0"),
        py::arg("trials"), py::arg("seed"));
  m.def(
      "max_divergence",
      [](const std::vector<double>& p, const std::vector<double>& q) {
        return MaxDivergence(p, q).value;
      },
      py::arg("p"), py::arg("q"));
  m.def(
      "delta_divergence",
      [](const std::vector<double>& p, const std::vector<double>& q,
         double delta) { return DeltaDivergence(p, q, delta).value; },
      py::arg("p"), py::arg("q"), py::arg("delta"));
  m.def("naive_max_check", &NaiveMax, py::arg("rivals"), py::arg("eps"),
        py::arg("balanced") = false);
  m.def(
      "derive_extended_params",
      [](int horizon, double delta, double eps0, double eps1, double eps3,
         double beta, double p_star) {
        return ParamsToJson(Unwrap(DeriveExtendedParams(
                                horizon, delta, eps0, eps1, eps3, beta, p_star)))
            .dump();
      },
      py::arg("horizon"), py::arg("delta"), py::arg("eps0"), py::arg("eps1"),
      py::arg("eps3"), py::arg("beta"), py::arg("p_star"));
  m.def(
      "derive_find_threshold_params",
      [](int rounds, double delta, double eps0, double eps1, double eps3,
         double beta, double p_star) {
        return ParamsToJson(Unwrap(DeriveFindThresholdParams(
                                rounds, delta, eps0, eps1, eps3, beta, p_star)))
            .dump();
      },
      py::arg("rounds"), py::arg("delta"), py::arg("eps0"), py::arg("eps1"),
      py::arg("eps3"), py::arg("beta"), py::arg("p_star"));
  m.def("run_command", &RunCommand, py::arg("command"),
        py::arg("config") = py::none(), py::arg("seed") = py::none(),
        py::arg("trials") = py::none(), py::arg("family") = "");
}
