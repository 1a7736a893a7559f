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

#include "cli.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>
#include <utility>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_join.h"
#include "private_selection/core.h"
#include "private_selection/families.h"
#include "private_selection/json_io.h"
#include "private_selection/lemmas.h"
#include "private_selection/mechanisms.h"
#include "private_selection/selection.h"
#include "private_selection/sparse_vector.h"
#include "private_selection/trials.h"
#include "private_selection/verifier.h"

namespace private_selection::cli {

using nlohmann::json;

ConfigReader::ConfigReader(json obj, std::string where)
    : obj_(std::move(obj)), where_(std::move(where)) {
  if (obj_.is_null()) obj_ = json::object();
}

bool ConfigReader::Has(const std::string& key) const {
  return obj_.is_object() && obj_.contains(key);
}

absl::StatusOr<double> ConfigReader::Number(const std::string& key,
                                            std::optional<double> fallback) {
  used_.insert(key);
  if (!Has(key)) {
    if (fallback.has_value()) return *fallback;
    return absl::InvalidArgumentError(
        absl::StrCat(where_, ": missing number \"", key, "\""));
  }
  auto value = NumberFromJson(obj_[key]);
  if (!value.ok()) {
    return absl::InvalidArgumentError(
        absl::StrCat(where_, ".", key, ": ", value.status().message()));
  }
  return value;
}

absl::StatusOr<int64_t> ConfigReader::Integer(const std::string& key,
                                              std::optional<int64_t> fallback) {
  used_.insert(key);
  if (!Has(key)) {
    if (fallback.has_value()) return *fallback;
    return absl::InvalidArgumentError(
        absl::StrCat(where_, ": missing integer \"", key, "\""));
  }
  const json& v = obj_[key];
  if (v.is_number_integer()) return v.get<int64_t>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (d == std::floor(d) && std::abs(d) < 9e18) {
      return static_cast<int64_t>(d);
    }
  }
  return absl::InvalidArgumentError(
      absl::StrCat(where_, ".", key, ": expected an integer"));
}

absl::StatusOr<std::string> ConfigReader::String(
    const std::string& key, std::optional<std::string> fallback) {
  used_.insert(key);
  if (!Has(key)) {
    if (fallback.has_value()) return *fallback;
    return absl::InvalidArgumentError(
        absl::StrCat(where_, ": missing string \"", key, "\""));
  }
  if (!obj_[key].is_string()) {
    return absl::InvalidArgumentError(
        absl::StrCat(where_, ".", key, ": expected a string"));
  }
  return obj_[key].get<std::string>();
}

absl::StatusOr<json> ConfigReader::Value(const std::string& key) {
  used_.insert(key);
  if (!Has(key)) return json();
  return obj_[key];
}

absl::StatusOr<std::vector<double>> ConfigReader::NumberList(
    const std::string& key, std::optional<std::vector<double>> fallback) {
  used_.insert(key);
  if (!Has(key)) {
    if (fallback.has_value()) return *fallback;
    return absl::InvalidArgumentError(
        absl::StrCat(where_, ": missing list \"", key, "\""));
  }
  const json& v = obj_[key];
  if (!v.is_array()) {
    return absl::InvalidArgumentError(
        absl::StrCat(where_, ".", key, ": expected an array"));
  }
  std::vector<double> out;
  for (const json& x : v) {
    auto d = NumberFromJson(x);
    if (!d.ok()) return d.status();
    out.push_back(*d);
  }
  return out;
}

absl::Status ConfigReader::Finish() const {
  if (!obj_.is_object()) {
    return absl::InvalidArgumentError(
        absl::StrCat(where_, " must be a JSON object"));
  }
  std::vector<std::string> unknown;
  for (const auto& [key, value] : obj_.items()) {
    if (!used_.count(key)) unknown.push_back(key);
  }
  if (!unknown.empty()) {
    return absl::InvalidArgumentError(absl::StrCat(
        where_, ": unknown key(s) ", absl::StrJoin(unknown, ", ")));
  }
  return absl::OkStatus();
}

namespace {

absl::StatusOr<json> ReadJsonFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    return absl::NotFoundError(absl::StrCat("cannot open ", path));
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  json doc = json::parse(buffer.str(), nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded()) {
    return absl::InvalidArgumentError(absl::StrCat(path, " is not valid JSON"));
  }
  return doc;
}

}  // namespace

absl::StatusOr<LoadedConfig> LoadConfig(const CliOptions& options,
                                        const std::string& command,
                                        int64_t default_trials) {
  json doc = json::object();
  if (options.config_path.has_value()) {
    auto read = ReadJsonFile(*options.config_path);
    if (!read.ok()) return read.status();
    doc = *std::move(read);
    if (!doc.is_object()) {
      return absl::InvalidArgumentError("config must be a JSON object");
    }
  }
  LoadedConfig loaded{ConfigReader(doc, "config"), 1, default_trials};
  auto declared = loaded.reader.String("command", command);
  if (!declared.ok()) return declared.status();
  if (*declared != command) {
    return absl::InvalidArgumentError(absl::StrCat(
        "config is for command \"", *declared, "\", not \"", command, "\""));
  }
  auto seed_value = loaded.reader.Value("seed");
  if (!seed_value.ok()) return seed_value.status();
  if (options.seed.has_value()) {
    loaded.seed = *options.seed;
  } else if (!seed_value->is_null()) {
    if (!seed_value->is_number_unsigned()) {
      return absl::InvalidArgumentError("config.seed must be an unsigned integer");
    }
    loaded.seed = seed_value->get<uint64_t>();
  }
  auto trials = loaded.reader.Integer("trials", default_trials);
  if (!trials.ok()) return trials.status();
  loaded.trials = options.trials.value_or(*trials);
  if (loaded.trials < 0) {
    return absl::InvalidArgumentError("trials must be nonnegative");
  }
  return loaded;
}

std::string CsvEscape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string FormatDouble(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return absl::StrFormat("%.17g", x);
}

absl::Status WriteResult(const CommandResult& result,
                         const CliOptions& options) {
  if (!options.out.has_value()) {
    std::cout << result.report.dump(2) << "\n";
    return absl::OkStatus();
  }
  const std::string& out = *options.out;
  {
    std::ofstream f(out);
    if (!f) return absl::InternalError(absl::StrCat("cannot write ", out));
    f << result.report.dump(2) << "\n";
  }
  if (!result.csv.empty()) {
    std::ofstream f(out + ".trials.csv");
    if (!f) return absl::InternalError("cannot write the trials CSV");
    for (const auto& row : result.csv) {
      std::vector<std::string> escaped;
      for (const std::string& field : row) escaped.push_back(CsvEscape(field));
      f << absl::StrJoin(escaped, ",") << "\r\n";
    }
  }
  if (!result.jsonl.empty()) {
    std::ofstream f(out + ".trace.jsonl");
    if (!f) return absl::InternalError("cannot write the trace");
    for (const json& rec : result.jsonl) f << rec.dump() << "\n";
  }
  for (const std::string& line : result.summary) std::cout << line << "\n";
  return absl::OkStatus();
}

namespace {

// Resolves "instance" (inline document or path) or "family" into a
// candidate document.
absl::StatusOr<CandidateDocument> FamilyDocument(const json& spec);

absl::StatusOr<CandidateDocument> LoadInstance(ConfigReader& reader,
                                               const CliOptions& options) {
  auto instance = reader.Value("instance");
  auto family = reader.Value("family");
  if (!instance.ok()) return instance.status();
  if (!family.ok()) return family.status();
  if (!instance->is_null() && !family->is_null()) {
    return absl::InvalidArgumentError(
        "give either \"instance\" or \"family\", not both");
  }
  if (!family->is_null()) return FamilyDocument(*family);
  if (instance->is_null()) {
    return absl::InvalidArgumentError("config needs \"instance\" or \"family\"");
  }
  if (instance->is_string()) {
    std::filesystem::path path = instance->get<std::string>();
    if (path.is_relative() && options.config_path.has_value()) {
      path = std::filesystem::path(*options.config_path).parent_path() / path;
    }
    auto doc = ReadJsonFile(path.string());
    if (!doc.ok()) return doc.status();
    return CandidateDocumentFromJson(*doc);
  }
  return CandidateDocumentFromJson(*instance);
}

std::string OutcomeLabel(const CandidateDocument& doc, const Payload& payload) {
  if (payload.candidate >= 0 &&
      payload.candidate < static_cast<int>(doc.candidates.size())) {
    for (const SupportPoint& p : doc.candidates[payload.candidate].support()) {
      if (p.sample.payload.output == payload.output) {
        return absl::StrCat(payload.candidate, ":", p.label);
      }
    }
  }
  return absl::StrCat(payload.candidate, ":", payload.output);
}

// Largest max-divergence of the distributions in `table` over the graph.
double MeasuredDivergence(const DistributionTable& table,
                          const NeighborGraph& graph) {
  double worst = 0.0;
  for (const auto& [a, b] : graph.edges()) {
    const auto& pa = table.probs.at(a);
    const auto& pb = table.probs.at(b);
    worst = std::max(worst, MaxDivergence(pa, pb).value);
    worst = std::max(worst, MaxDivergence(pb, pa).value);
  }
  return worst;
}

DistributionTable CandidateTable(const DiscreteCandidate& q) {
  DistributionTable table;
  for (const SupportPoint& p : q.support()) {
    table.outcomes.push_back(absl::StrCat(p.sample.payload.candidate, ":",
                                          p.label));
  }
  for (size_t d = 0; d < q.datasets().size(); ++d) {
    table.probs[q.datasets()[d]] = q.probabilities(static_cast<int>(d));
  }
  return table;
}

absl::StatusOr<ThresholdParams> ReadThresholdParams(ConfigReader& p) {
  auto tau = p.Number("tau");
  auto gamma = p.Number("gamma", 0.1);
  auto eps0 = p.Number("eps0", 0.5);
  auto iterations = p.Integer("max_iterations", 0);
  for (const absl::Status& s :
       {tau.status(), gamma.status(), eps0.status(), iterations.status()}) {
    if (!s.ok()) return s;
  }
  if (*iterations == 0) {
    return ThresholdParams::WithMinimumIterations(*tau, *gamma, *eps0);
  }
  return ThresholdParams::Create(*tau, *gamma, *eps0, *iterations);
}

absl::StatusOr<RandomStopParams> ReadRandomStopParams(ConfigReader& p) {
  auto gamma = p.Number("gamma", 0.1);
  auto mode = p.String("mode", "unbounded");
  if (!gamma.ok()) return gamma.status();
  if (!mode.ok()) return mode.status();
  if (*mode == "unbounded") return RandomStopParams::Unbounded(*gamma);
  if (*mode == "hard_stop_pure") {
    auto eps0 = p.Number("eps0");
    if (!eps0.ok()) return eps0.status();
    return RandomStopParams::HardStopPure(*gamma, *eps0);
  }
  if (*mode == "hard_stop_approx") {
    auto delta2 = p.Number("delta2");
    if (!delta2.ok()) return delta2.status();
    return RandomStopParams::HardStopApprox(*gamma, *delta2);
  }
  if (*mode == "hard_stop_custom") {
    auto t = p.Integer("max_iterations");
    if (!t.ok()) return t.status();
    return RandomStopParams::HardStopCustom(*gamma, *t);
  }
  return absl::InvalidArgumentError(absl::StrCat("unknown mode ", *mode));
}

absl::StatusOr<PrivateSelectParams> ReadPrivateSelectParams(ConfigReader& p) {
  PrivateSelectParams params;
  auto rounds = p.Integer("rounds", params.rounds);
  auto beta = p.Number("beta", params.beta);
  auto delta = p.Number("delta", params.delta);
  auto eps0 = p.Number("eps0", params.eps0);
  auto eps1 = p.Number("eps1", params.eps1);
  for (const absl::Status& s : {rounds.status(), beta.status(), delta.status(),
                                eps0.status(), eps1.status()}) {
    if (!s.ok()) return s;
  }
  params.rounds = static_cast<int>(*rounds);
  params.beta = *beta;
  params.delta = *delta;
  params.eps0 = *eps0;
  params.eps1 = *eps1;
  return params;
}

absl::StatusOr<ConfigReader> SubReader(ConfigReader& parent,
                                       const std::string& key) {
  auto value = parent.Value(key);
  if (!value.ok()) return value.status();
  if (!value->is_null() && !value->is_object()) {
    return absl::InvalidArgumentError(
        absl::StrCat(parent.where(), ".", key, " must be an object"));
  }
  return ConfigReader(*value, absl::StrCat(parent.where(), ".", key));
}

// Exact-vs-simulated agreement per outcome, within four standard errors.
struct Agreement {
  json frequencies = json::object();
  double worst_z = 0.0;
  bool pass = true;
};

Agreement CompareWithExact(const CandidateDocument& doc,
                           const OutcomeDistribution& exact,
                           const std::vector<SelectionOutcome>& runs) {
  std::map<Payload, int64_t> counts;
  int64_t bots = 0;
  for (const SelectionOutcome& o : runs) {
    if (o.is_bot) {
      ++bots;
    } else {
      ++counts[o.sample.payload];
    }
  }
  const double n = static_cast<double>(runs.size());
  Agreement out;
  auto compare = [&](const std::string& label, double p, int64_t c) {
    const double freq = n > 0 ? c / n : 0.0;
    out.frequencies[label] = {{"exact", p}, {"empirical", freq}};
    if (n == 0) return;
    const double se = std::sqrt(p * (1.0 - p) / n);
    const double gap = std::abs(freq - p);
    if (se > 0.0) out.worst_z = std::max(out.worst_z, gap / se);
    if (gap > 4.0 * se + 1e-12) out.pass = false;
  };
  std::map<Payload, bool> seen;
  for (const OutcomeEntry& e : exact.outcomes) {
    seen[e.sample.payload] = true;
    compare(OutcomeLabel(doc, e.sample.payload), e.prob,
            counts[e.sample.payload]);
  }
  for (const auto& [payload, c] : counts) {
    if (!seen.count(payload)) compare(OutcomeLabel(doc, payload), 0.0, c);
  }
  compare("bot", exact.bot_prob, bots);
  return out;
}

}  // namespace

absl::StatusOr<CommandResult> RunSelect(const CliOptions& options) {
  auto cfg = LoadConfig(options, "select", 10000);
  if (!cfg.ok()) return cfg.status();
  ConfigReader& r = cfg->reader;
  auto doc = LoadInstance(r, options);
  if (!doc.ok()) return doc.status();
  auto dataset = r.String("dataset", doc->graph.datasets().front());
  auto algorithm = r.String("algorithm", "threshold");
  auto params_reader = SubReader(r, "params");
  for (const absl::Status& s :
       {dataset.status(), algorithm.status(), params_reader.status()}) {
    if (!s.ok()) return s;
  }
  if (!doc->graph.Contains(*dataset)) {
    return absl::InvalidArgumentError(absl::StrCat("unknown dataset ", *dataset));
  }
  ConfigReader& p = *params_reader;
  const RandomStream root(cfg->seed, 0);
  const int64_t trials = cfg->trials;
  CommandResult result;
  result.report = {{"command", "select"},
                   {"algorithm", *algorithm},
                   {"dataset", *dataset},
                   {"seed", cfg->seed},
                   {"trials", trials}};

  auto mixture = DiscreteMixture(doc->candidates);
  if (!mixture.ok()) return mixture.status();
  const SamplerCandidate sampler = mixture->AsSampler();

  if (*algorithm == "threshold" || *algorithm == "random_stop") {
    std::optional<ThresholdParams> tp;
    std::optional<RandomStopParams> rp;
    if (*algorithm == "threshold") {
      auto read = ReadThresholdParams(p);
      if (!read.ok()) return read.status();
      tp = *read;
    } else {
      auto read = ReadRandomStopParams(p);
      if (!read.ok()) return read.status();
      rp = *read;
    }
    if (auto s = p.Finish(); !s.ok()) return s;
    if (auto s = r.Finish(); !s.ok()) return s;
    auto exact = tp.has_value()
                     ? OracleThresholdDistribution(*mixture, *dataset, *tp)
                     : OracleRandomStopDistribution(*mixture, *dataset,
                                                    rp->gamma,
                                                    rp->max_iterations);
    if (!exact.ok()) return exact.status();
    auto runs = RunTrials(trials, root, [&](int64_t, RandomStream& rng) {
      auto o = tp.has_value()
                   ? ThresholdSelect(sampler, *dataset, *tp, rng)
                   : RandomStopSelect(sampler, *dataset, *rp, rng);
      return o.ok() ? *o : SelectionOutcome{true, {}, -1};
    });
    result.csv.push_back({"trial", "outcome", "candidate", "score", "calls"});
    int64_t total_calls = 0;
    for (size_t t = 0; t < runs.size(); ++t) {
      const SelectionOutcome& o = runs[t];
      if (o.calls < 0) return absl::InternalError("a trial failed");
      total_calls += o.calls;
      result.csv.push_back(
          {std::to_string(t),
           o.is_bot ? "bot" : OutcomeLabel(*doc, o.sample.payload),
           o.is_bot ? "" : std::to_string(o.sample.payload.candidate),
           o.is_bot ? "" : FormatDouble(o.sample.score.value()),
           std::to_string(o.calls)});
    }
    const Agreement agreement = CompareWithExact(*doc, *exact, runs);
    result.report["exact"] = OutcomeDistributionToJson(*exact);
    result.report["outcomes"] = agreement.frequencies;
    result.report["worst_z"] = agreement.worst_z;
    result.report["mean_calls"] =
        trials > 0 ? static_cast<double>(total_calls) / trials : 0.0;
    result.pass = agreement.pass;
    result.summary.push_back(absl::StrFormat(
        "select %s on %s: %d trials, worst |z| = %.3f, %s", *algorithm,
        *dataset, trials, agreement.worst_z,
        agreement.pass ? "matches the exact distribution"
                       : "DOES NOT match the exact distribution"));
  } else if (*algorithm == "private_select") {
    auto params = ReadPrivateSelectParams(p);
    if (!params.ok()) return params.status();
    auto max_samples = p.Number("max_samples", kExactPathMaxSamples);
    if (!max_samples.ok()) return max_samples.status();
    if (auto s = p.Finish(); !s.ok()) return s;
    if (auto s = r.Finish(); !s.ok()) return s;
    std::vector<SamplerCandidate> samplers;
    for (const DiscreteCandidate& c : doc->candidates) {
      samplers.push_back(c.AsSampler());
    }
    auto joint = UniformMixture(samplers);
    if (!joint.ok()) return joint.status();
    const int k = static_cast<int>(doc->candidates.size());
    auto plan = PlanPrivateSelect(k, *params, *max_samples);
    if (!plan.ok()) return plan.status();
    auto runs = RunTrials(trials, root, [&](int64_t, RandomStream& rng) {
      return PrivateSelect(*joint, *dataset, *plan, rng);
    });
    result.csv.push_back({"trial", "outcome", "candidate", "score",
                          "threshold", "calls"});
    int64_t bots = 0;
    int64_t max_calls = 0;
    double mean_calls = 0.0;
    for (size_t t = 0; t < runs.size(); ++t) {
      if (!runs[t].ok()) return runs[t].status();
      const PrivateSelectResult& res = *runs[t];
      const SelectionOutcome& o = res.outcome;
      bots += o.is_bot ? 1 : 0;
      max_calls = std::max(max_calls, res.total_calls);
      mean_calls += static_cast<double>(res.total_calls);
      result.csv.push_back(
          {std::to_string(t),
           o.is_bot ? "bot" : OutcomeLabel(*doc, o.sample.payload),
           o.is_bot ? "" : std::to_string(o.sample.payload.candidate),
           o.is_bot ? "" : FormatDouble(o.sample.score.value()),
           res.threshold.has_value() ? FormatDouble(*res.threshold) : "",
           std::to_string(res.total_calls)});
    }
    if (trials > 0) mean_calls /= static_cast<double>(trials);
    const bool within = max_calls <= plan->deterministic_calls;
    result.report["plan"] = {
        {"samples", plan->stage1.derived.samples},
        {"stage2_horizon", plan->stage2_horizon},
        {"gamma", plan->gamma},
        {"target_exceedance", plan->target_exceedance},
        {"call_bound_expression", plan->call_bound},
        {"deterministic_calls", plan->deterministic_calls}};
    result.report["bot_rate"] =
        trials > 0 ? static_cast<double>(bots) / trials : 0.0;
    result.report["mean_calls"] = mean_calls;
    result.report["max_calls"] = max_calls;
    result.report["calls_within_plan"] = within;
    result.pass = within;
    result.summary.push_back(absl::StrFormat(
        "private_select on %s: %d trials, bot rate %.4f, max calls %d", *dataset,
        trials, trials > 0 ? static_cast<double>(bots) / trials : 0.0,
        max_calls));
  } else {
    return absl::InvalidArgumentError(
        absl::StrCat("unknown algorithm ", *algorithm));
  }
  result.report["pass"] = result.pass;
  return result;
}

absl::StatusOr<CommandResult> RunFindThreshold(const CliOptions& options) {
  auto cfg = LoadConfig(options, "find-threshold", 1);
  if (!cfg.ok()) return cfg.status();
  ConfigReader& r = cfg->reader;
  auto doc = LoadInstance(r, options);
  if (!doc.ok()) return doc.status();
  auto dataset = r.String("dataset", doc->graph.datasets().front());
  auto candidate = r.Integer("candidate", -1);
  auto rounds = r.Integer("rounds", 10);
  auto delta = r.Number("delta", 0.1);
  auto eps0 = r.Number("eps0", 0.25);
  auto eps1 = r.Number("eps1", 0.25);
  auto eps3 = r.Number("eps3", 3.0);
  auto beta = r.Number("beta", 0.2);
  auto p_star = r.Number("p_star", 0.5);
  auto max_samples = r.Number("max_samples", kDefaultMaxSamples);
  for (const absl::Status& s :
       {dataset.status(), candidate.status(), rounds.status(), delta.status(),
        eps0.status(), eps1.status(), eps3.status(), beta.status(),
        p_star.status(), max_samples.status()}) {
    if (!s.ok()) return s;
  }
  if (auto s = r.Finish(); !s.ok()) return s;
  if (!doc->graph.Contains(*dataset)) {
    return absl::InvalidArgumentError(absl::StrCat("unknown dataset ", *dataset));
  }
  absl::StatusOr<DiscreteCandidate> q =
      *candidate < 0 ? DiscreteMixture(doc->candidates)
      : *candidate < static_cast<int64_t>(doc->candidates.size())
          ? absl::StatusOr<DiscreteCandidate>(doc->candidates[*candidate])
          : absl::StatusOr<DiscreteCandidate>(
                absl::InvalidArgumentError("candidate index out of range"));
  if (!q.ok()) return q.status();
  auto sv = SVConfig::FindThreshold(static_cast<int>(*rounds), *delta, *eps0,
                                    *eps1, *eps3, *beta, *p_star,
                                    *max_samples);
  if (!sv.ok()) return sv.status();
  const SamplerCandidate sampler = q->AsSampler();
  const RandomStream root(cfg->seed, 0);
  auto runs = RunTrials(cfg->trials, root, [&](int64_t, RandomStream& rng) {
    return FindPercentileThreshold(sampler, *dataset, *sv, rng);
  });
  CommandResult result;
  result.csv.push_back({"trial", "tau", "index", "samples"});
  json taus = json::object();
  for (size_t t = 0; t < runs.size(); ++t) {
    if (!runs[t].ok()) return runs[t].status();
    const ThresholdSearch& s = *runs[t];
    const std::string tau = s.tau.has_value() ? FormatDouble(*s.tau) : "none";
    result.csv.push_back({std::to_string(t), tau,
                          s.index.has_value() ? std::to_string(*s.index) : "",
                          std::to_string(s.samples_used)});
    taus[tau] = taus.value(tau, 0) + 1;
    for (json& rec :
         TraceRecords(s.trace, s.threshold_noise, options.debug_unsafe)) {
      rec["trial"] = t;
      result.jsonl.push_back(std::move(rec));
    }
  }
  result.report = {{"command", "find-threshold"},
                   {"dataset", *dataset},
                   {"seed", cfg->seed},
                   {"trials", cfg->trials},
                   {"samples", sv->derived.samples},
                   {"offset", sv->derived.offset},
                   {"target_shift", sv->derived.target_shift},
                   {"thresholds", taus},
                   {"noise_released", options.debug_unsafe},
                   {"pass", true}};
  if (runs.size() == 1) {
    const ThresholdSearch& s = *runs[0];
    result.report["tau"] = s.tau.has_value() ? json(*s.tau) : json();
    result.report["index"] = s.index.has_value() ? json(*s.index) : json();
  }
  result.summary.push_back(absl::StrFormat(
      "find-threshold on %s: N = %d samples, %d trials", *dataset,
      sv->derived.samples, cfg->trials));
  return result;
}

namespace {

absl::StatusOr<NaiveMaxVariant> ReadVariant(ConfigReader& r) {
  auto name = r.String("variant", "literal");
  if (!name.ok()) return name.status();
  if (*name == "literal") return NaiveMaxVariant::kLiteral;
  if (*name == "balanced") return NaiveMaxVariant::kBalanced;
  return absl::InvalidArgumentError(absl::StrCat("unknown variant ", *name));
}

int DefaultApproxRivals(double delta) {
  return static_cast<int>(std::ceil(100.0 * std::log(1.0 / delta)));
}

absl::StatusOr<CandidateDocument> FamilyDocument(const json& spec) {
  ConfigReader r(spec, "family");
  auto name = r.String("name");
  if (!name.ok()) return name.status();
  absl::StatusOr<CounterexampleFamily> family =
      absl::InvalidArgumentError(absl::StrCat("unknown family ", *name));
  if (*name == "naive-max-pure") {
    auto k = r.Integer("K", 2);
    auto eps = r.Number("eps", 0.1);
    auto variant = ReadVariant(r);
    if (!k.ok()) return k.status();
    if (!eps.ok()) return eps.status();
    if (!variant.ok()) return variant.status();
    family = NaiveMaxFamily(static_cast<int>(*k), *eps, *variant);
  } else if (*name == "naive-max-approx") {
    auto delta = r.Number("delta", 1e-3);
    if (!delta.ok()) return delta.status();
    auto k = r.Integer("K", DefaultApproxRivals(*delta));
    auto eps = r.Number("eps", 0.3);
    if (!k.ok()) return k.status();
    if (!eps.ok()) return eps.status();
    family = NaiveMaxApproxFamily(static_cast<int>(*k), *delta, *eps);
  } else if (*name == "percentile-median") {
    auto eps = r.Number("eps", 0.2);
    if (!eps.ok()) return eps.status();
    family = PercentileFamily(*eps);
  } else if (*name == "packing") {
    auto k = r.Integer("K", 4);
    auto alpha = r.Number("alpha", 0.1);
    auto eps = r.Number("eps", 0.5);
    for (const absl::Status& s : {k.status(), alpha.status(), eps.status()}) {
      if (!s.ok()) return s;
    }
    family = PackingFamily(static_cast<int>(*k), *alpha, *eps);
  }
  if (!family.ok()) return family.status();
  if (auto s = r.Finish(); !s.ok()) return s;
  return CandidateDocument{family->graph, family->candidates};
}

}  // namespace

absl::StatusOr<CommandResult> RunAudit(const CliOptions& options) {
  auto cfg = LoadConfig(options, "audit", 100000);
  if (!cfg.ok()) return cfg.status();
  ConfigReader& r = cfg->reader;
  auto doc = LoadInstance(r, options);
  if (!doc.ok()) return doc.status();
  auto algorithm = r.String("algorithm", "threshold");
  auto params_reader = SubReader(r, "params");
  auto claim_reader = SubReader(r, "claim");
  for (const absl::Status& s : {algorithm.status(), params_reader.status(),
                                claim_reader.status()}) {
    if (!s.ok()) return s;
  }
  ConfigReader& p = *params_reader;
  ConfigReader& c = *claim_reader;
  auto claim_eps = c.Value("epsilon");
  auto claim_delta = c.Number("delta", 0.0);
  if (!claim_eps.ok()) return claim_eps.status();
  if (!claim_delta.ok()) return claim_delta.status();
  if (auto s = c.Finish(); !s.ok()) return s;
  const bool auto_claim =
      claim_eps->is_null() ||
      (claim_eps->is_string() && claim_eps->get<std::string>() == "auto");

  DistributionTable table;
  double auto_epsilon = std::numeric_limits<double>::quiet_NaN();
  double slack = 0.0;
  json details = json::object();
  auto mixture = DiscreteMixture(doc->candidates);
  if (!mixture.ok()) return mixture.status();
  const double eps1_hat =
      MeasuredDivergence(CandidateTable(*mixture), doc->graph);
  details["eps1_measured"] = eps1_hat;

  if (*algorithm == "threshold" || *algorithm == "random_stop") {
    std::map<std::string, OutcomeDistribution> dists;
    std::optional<ThresholdParams> tp;
    std::optional<RandomStopParams> rp;
    if (*algorithm == "threshold") {
      auto read = ReadThresholdParams(p);
      if (!read.ok()) return read.status();
      tp = *read;
      auto_epsilon = 2.0 * eps1_hat + tp->eps0;
    } else {
      auto read = ReadRandomStopParams(p);
      if (!read.ok()) return read.status();
      rp = *read;
      if (rp->mode == RandomStopMode::kUnbounded) {
        auto_epsilon = 3.0 * eps1_hat;
      } else if (rp->mode == RandomStopMode::kHardStopPure) {
        auto_epsilon = 3.0 * eps1_hat + 3.0 * rp->eps0;
      }
    }
    for (const std::string& d : doc->graph.datasets()) {
      auto dist = tp.has_value()
                      ? OracleThresholdDistribution(*mixture, d, *tp)
                      : OracleRandomStopDistribution(*mixture, d, rp->gamma,
                                                     rp->max_iterations);
      if (!dist.ok()) return dist.status();
      dists[d] = *std::move(dist);
    }
    table = AlignOutcomes(dists);
  } else if (*algorithm == "naive_max") {
    for (size_t i = 0; i < doc->candidates.size(); ++i) {
      table.outcomes.push_back(std::to_string(i));
    }
    for (const std::string& d : doc->graph.datasets()) {
      auto dist = NaiveMaxDistribution(doc->candidates, d);
      if (!dist.ok()) return dist.status();
      table.probs[d] = *std::move(dist);
    }
  } else if (*algorithm == "amplification") {
    auto tau = p.Number("tau", 0.5);
    auto gamma = p.Number("gamma", 0.1);
    auto eps2 = p.Number("eps2", 1.0);
    auto runs = p.Integer("N", 10);
    auto extra = p.Number("slack", 0.05);
    for (const absl::Status& s : {tau.status(), gamma.status(), eps2.status(),
                                  runs.status(), extra.status()}) {
      if (!s.ok()) return s;
    }
    auto amp = AmplificationConfig::Create(*tau, *gamma, *eps2,
                                           static_cast<int>(*runs));
    if (!amp.ok()) return amp.status();
    auto_epsilon = 2.0 * eps1_hat + 8.0 * amp->gamma;
    slack = *extra;
    for (int i = 0; i < amp->num_runs; ++i) {
      table.outcomes.push_back(absl::StrCat("run", i));
    }
    table.outcomes.push_back("dummy");
    const RandomStream root(cfg->seed, 0);
    std::map<std::string, std::vector<int64_t>> counts;
    uint64_t stream = 0;
    for (const std::string& d : doc->graph.datasets()) {
      auto probs = mixture->Probabilities(d);
      if (!probs.ok()) return probs.status();
      const CategoricalSampler draw(*probs);
      auto picks = RunTrials(
          cfg->trials, root.Substream(stream++),
          [&](int64_t, RandomStream& rng) {
            std::vector<double> scores(amp->num_runs);
            for (double& s : scores) {
              s = mixture->support()[draw.Draw(rng)].sample.score.value();
            }
            auto out = AmplificationEm(scores, *amp, rng);
            return out.ok() ? std::min(out->index, amp->num_runs) : -1;
          });
      std::vector<int64_t> row(table.outcomes.size(), 0);
      for (int pick : picks) {
        if (pick < 0) return absl::InternalError("amplification run failed");
        ++row[pick];
      }
      counts[d] = std::move(row);
    }
    auto mc = TableFromCounts(table.outcomes, counts);
    if (!mc.ok()) return mc.status();
    table = *std::move(mc);
  } else {
    return absl::InvalidArgumentError(
        absl::StrCat("unknown algorithm ", *algorithm));
  }
  if (auto s = p.Finish(); !s.ok()) return s;
  if (auto s = r.Finish(); !s.ok()) return s;

  PrivacyLoss claim{0.0, *claim_delta};
  if (auto_claim) {
    if (std::isnan(auto_epsilon)) {
      return absl::InvalidArgumentError(absl::StrCat(
          "no automatic bound for ", *algorithm, "; give claim.epsilon"));
    }
    claim.epsilon = auto_epsilon;
  } else {
    auto eps = NumberFromJson(*claim_eps);
    if (!eps.ok()) return eps.status();
    claim.epsilon = *eps;
  }
  auto audit = Audit(table, doc->graph, claim, slack);
  if (!audit.ok()) return audit.status();
  CommandResult result;
  result.report = AuditReportToJson(*audit);
  result.report["command"] = "audit";
  result.report["algorithm"] = *algorithm;
  result.report["claim_source"] = auto_claim ? "bound" : "config";
  result.report["details"] = details;
  if (table.trials.has_value()) {
    result.report["trials"] = *table.trials;
    result.report["seed"] = cfg->seed;
  }
  result.pass = audit->pass;
  result.summary.push_back(absl::StrFormat(
      "audit %s: measured %s vs claimed %s (+%s): %s", *algorithm,
      FormatDouble(audit->measured), FormatDouble(claim.epsilon),
      FormatDouble(audit->tolerance), audit->pass ? "PASS" : "FAIL"));
  if (!audit->witness_outcomes.empty()) {
    result.summary.push_back(absl::StrCat(
        "witness ", audit->witness_from, " -> ", audit->witness_to, ": {",
        absl::StrJoin(audit->witness_outcomes, ", "), "}"));
  }
  return result;
}

absl::StatusOr<CommandResult> RunCounterexample(const std::string& name,
                                                const CliOptions& options) {
  auto cfg = LoadConfig(options, "counterexample", 0);
  if (!cfg.ok()) return cfg.status();
  ConfigReader& r = cfg->reader;
  const RandomStream root(cfg->seed, 0);
  CommandResult result;
  result.report = {{"command", "counterexample"},
                   {"family", name},
                   {"seed", cfg->seed}};
  json& rep = result.report;
  if (name == "naive-max-pure") {
    auto k = r.Integer("K", 2);
    auto eps = r.Number("eps", 0.1);
    auto variant = ReadVariant(r);
    for (const absl::Status& s : {k.status(), eps.status(), variant.status()}) {
      if (!s.ok()) return s;
    }
    if (auto s = r.Finish(); !s.ok()) return s;
    auto check = NaiveMaxCheck(static_cast<int>(*k), *eps, *variant);
    if (!check.ok()) return check.status();
    rep["params"] = {{"K", *k}, {"eps", *eps},
                     {"variant", *variant == NaiveMaxVariant::kLiteral
                                     ? "literal" : "balanced"}};
    rep["prob_winner0_D"] = check->prob_d;
    rep["prob_winner0_neighbor"] = check->prob_neighbor;
    rep["log_ratio"] = check->log_ratio;
    rep["expected_K_eps"] = check->expected;
    rep["candidate_divergence"] = JsonNumber(check->candidate_divergence);
    rep["declared_candidate_divergence"] = JsonNumber(check->declared);
    result.pass = check->pass;
    result.summary = {
        absl::StrFormat("Pr[winner = 0 | D]  = %.12g", check->prob_d),
        absl::StrFormat("Pr[winner = 0 | D'] = %.12g", check->prob_neighbor),
        absl::StrFormat("ln ratio = %.12g   (K * eps = %.12g)",
                        check->log_ratio, check->expected),
        absl::StrFormat("per-candidate divergence = %.12g",
                        check->candidate_divergence)};
  } else if (name == "naive-max-approx") {
    auto delta = r.Number("delta", 1e-3);
    if (!delta.ok()) return delta.status();
    auto k = r.Integer("K", DefaultApproxRivals(*delta));
    auto eps = r.Number("eps", 0.3);
    if (!k.ok()) return k.status();
    if (!eps.ok()) return eps.status();
    if (auto s = r.Finish(); !s.ok()) return s;
    auto check = NaiveMaxApproxCheck(static_cast<int>(*k), *delta, *eps);
    if (!check.ok()) return check.status();
    rep["params"] = {{"K", *k}, {"delta", *delta}, {"eps", *eps}};
    rep["prob_winner0_D"] = check->prob_d;
    rep["prob_winner0_neighbor"] = check->prob_neighbor;
    rep["event_ratio"] = JsonNumber(check->event_ratio);
    rep["index_divergence"] = JsonNumber(check->index_divergence);
    rep["target_half_L_eps"] = check->target;
    rep["in_regime"] = check->in_regime;
    result.pass = check->pass;
    result.summary = {
        absl::StrFormat("Pr[winner = 0 | D] = %.12g (delta = %g)",
                        check->prob_d, *delta),
        absl::StrFormat("Pr[winner = 0 | D'] = %.12g", check->prob_neighbor),
        absl::StrFormat(
            "ln((Pr[D'] - delta) / Pr[D]) = %.12g   (0.5 ln(1/delta) eps = "
            "%.12g)",
            check->event_ratio, check->target)};
  } else if (name == "decreasing-thresholds") {
    auto p = r.Number("p", 0.5);
    auto gamma = r.Number("gamma", 0.5);
    auto rounds = r.Integer("R", 1);
    auto eps = r.Number("eps", 0.1);
    for (const absl::Status& s :
         {p.status(), gamma.status(), rounds.status(), eps.status()}) {
      if (!s.ok()) return s;
    }
    if (auto s = r.Finish(); !s.ok()) return s;
    const int64_t trials = cfg->trials > 0 ? cfg->trials : 1000000;
    auto check = DecreasingThresholdsCheck(*p, *gamma,
                                           static_cast<int>(*rounds), *eps,
                                           trials, root);
    if (!check.ok()) return check.status();
    rep["params"] = {{"p", *p}, {"gamma", *gamma}, {"R", *rounds},
                     {"eps", *eps}, {"trials", trials}};
    rep["closed_form"] = check->closed_form;
    rep["simulated"] = check->simulated;
    rep["std_error"] = check->std_error;
    rep["agrees"] = check->agrees;
    rep["log_amplification"] = check->amplification;
    rep["required_R_eps"] = check->required;
    rep["amplifies"] = check->amplifies;
    result.pass = check->agrees && check->amplifies;
    result.summary = {
        absl::StrFormat(
            "Pr[output 0] = (1-p) ((1-p) gamma / (p (1-gamma) + gamma))^R = %.12g",
            check->closed_form),
        absl::StrFormat("simulated = %.6f over %d trials", check->simulated,
                        trials),
        absl::StrFormat("ln ratio under 1-p -> e^eps (1-p): %.12g >= R eps = "
                        "%.12g",
                        check->amplification, check->required)};
  } else if (name == "percentile-median") {
    auto eps = r.Number("eps", 0.2);
    auto samples = r.Integer("samples", 10000);
    if (!eps.ok()) return eps.status();
    if (!samples.ok()) return samples.status();
    if (auto s = r.Finish(); !s.ok()) return s;
    const int64_t trials = cfg->trials > 0 ? cfg->trials : 100;
    auto check = PercentileCheck(*eps, *samples, trials, root);
    if (!check.ok()) return check.status();
    rep["params"] = {{"eps", *eps}, {"samples", *samples}, {"trials", trials}};
    rep["divergence"] = check->divergence;
    rep["bound_2eps_eps3"] = check->bound;
    rep["median_D"] = check->median_d;
    rep["median_neighbor"] = check->median_neighbor;
    rep["flip_rate"] = check->flip_rate;
    result.pass = check->pass;
    result.summary = {
        absl::StrFormat("divergence ln((1+eps)/(1-eps)) = %.12g", check->divergence),
        absl::StrFormat("median on D = %g, on D' = %g: %s", check->median_d,
                        check->median_neighbor,
                        check->median_d != check->median_neighbor
                            ? "median flips" : "no flip"),
        absl::StrFormat("empirical median flip rate = %.4f", check->flip_rate)};
  } else if (name == "packing") {
    auto k = r.Integer("K", 4);
    auto alpha = r.Number("alpha", 0.1);
    auto eps = r.Number("eps", 0.5);
    auto gamma_level = r.Number("gamma_level", 0.5);
    auto mechanism = r.String("mechanism", "argmax");
    for (const absl::Status& s : {k.status(), alpha.status(), eps.status(),
                                  gamma_level.status(), mechanism.status()}) {
      if (!s.ok()) return s;
    }
    if (auto s = r.Finish(); !s.ok()) return s;
    auto check = PackingCheck(static_cast<int>(*k), *alpha, *eps);
    if (!check.ok()) return check.status();
    auto family = PackingFamily(static_cast<int>(*k), *alpha, *eps);
    if (!family.ok()) return family.status();
    IndexMechanism mech;
    if (*mechanism == "argmax") {
      mech = [](const CounterexampleFamily& f, std::string_view d,
                RandomStream& rng) {
        return ArgmaxOfSamples(f.candidates, d, rng);
      };
    } else if (*mechanism == "constant") {
      mech = [](const CounterexampleFamily&, std::string_view,
                RandomStream&) -> absl::StatusOr<int> { return 0; };
    } else if (*mechanism == "private_select") {
      mech = [](const CounterexampleFamily& f, std::string_view d,
                RandomStream& rng) -> absl::StatusOr<int> {
        std::vector<SamplerCandidate> samplers;
        for (const DiscreteCandidate& c : f.candidates) {
          samplers.push_back(c.AsSampler());
        }
        auto res = PrivateSelect(samplers, d, PrivateSelectParams{}, rng);
        if (!res.ok()) return res.status();
        return res->outcome.is_bot ? -1 : res->outcome.sample.payload.candidate;
      };
    } else {
      return absl::InvalidArgumentError(
          absl::StrCat("unknown mechanism ", *mechanism));
    }
    const int64_t trials = cfg->trials > 0 ? cfg->trials : 10000;
    auto useful = WeakUsefulnessCheck(*family, mech, *gamma_level, trials, root);
    if (!useful.ok()) return useful.status();
    rep["params"] = {{"K", *k}, {"alpha", *alpha}, {"eps", *eps},
                     {"gamma_level", *gamma_level}, {"mechanism", *mechanism},
                     {"trials", trials}};
    rep["distance"] = check->distance;
    rep["max_step_divergence"] = check->max_step_divergence;
    rep["p_own"] = check->own_probability;
    rep["p_other"] = check->other_probability;
    rep["p_base"] = check->base_probability;
    json entries = json::array();
    for (const UsefulnessEntry& e : useful->entries) {
      entries.push_back({{"dataset", e.dataset},
                         {"target", e.target},
                         {"dominance", e.dominance},
                         {"dominant", e.dominant},
                         {"frequency", e.frequency},
                         {"pass", e.pass}});
    }
    rep["usefulness"] = entries;
    rep["weakly_useful"] = useful->pass;
    result.pass = check->pass && useful->pass;
    result.summary = {
        absl::StrFormat("distance = ceil((0.5+alpha) ln K / eps) = %d",
                        check->distance),
        absl::StrFormat("max per-step divergence = %.12g (eps = %g)",
                        check->max_step_divergence, *eps),
        absl::StrFormat("mechanism %s weakly useful at level %g: %s",
                        *mechanism, *gamma_level,
                        useful->pass ? "yes" : "no")};
  } else {
    return absl::InvalidArgumentError(
        absl::StrCat("unknown counterexample ", name));
  }
  rep["pass"] = result.pass;
  return result;
}

absl::StatusOr<CommandResult> RunValidateLemmas(const CliOptions& options) {
  auto cfg = LoadConfig(options, "validate-lemmas", 100000);
  if (!cfg.ok()) return cfg.status();
  if (auto s = cfg->reader.Finish(); !s.ok()) return s;
  const std::vector<LemmaResult> results =
      ValidateLemmas(cfg->trials, cfg->seed);
  CommandResult result;
  json validators = json::array();
  for (const LemmaResult& lemma : results) {
    json checks = json::array();
    for (const CheckReport& c : lemma.checks) {
      checks.push_back(CheckReportToJson(c));
    }
    validators.push_back(
        {{"name", lemma.name}, {"status", lemma.status}, {"checks", checks}});
    if (lemma.status == "fail") result.pass = false;
    result.summary.push_back(
        absl::StrFormat("%-16s %s (%d checks)", lemma.name, lemma.status,
                        lemma.checks.size()));
  }
  result.report = {{"command", "validate-lemmas"},
                   {"seed", cfg->seed},
                   {"trials", cfg->trials},
                   {"validators", validators},
                   {"pass", result.pass}};
  return result;
}

}  // namespace private_selection::cli
