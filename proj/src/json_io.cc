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

#include "private_selection/json_io.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace private_selection {
namespace {

using nlohmann::json;

absl::Status RequireKeys(const json& obj, const std::set<std::string>& allowed,
                         std::string_view where) {
  if (!obj.is_object()) {
    return absl::InvalidArgumentError(
        absl::StrCat(std::string(where), " must be a JSON object"));
  }
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) {
      return absl::InvalidArgumentError(absl::StrCat(
          "unknown key \"", key, "\" in ", std::string(where)));
    }
  }
  for (const std::string& key : allowed) {
    if (!obj.contains(key)) {
      return absl::InvalidArgumentError(absl::StrCat(
          "missing key \"", key, "\" in ", std::string(where)));
    }
  }
  return absl::OkStatus();
}

absl::StatusOr<DiscreteCandidate> CandidateFromJson(
    const json& obj, int index, const std::vector<std::string>& datasets) {
  const std::string where = absl::StrCat("candidate ", index);
  if (auto s = RequireKeys(obj, {"support", "probs"}, where); !s.ok()) {
    return s;
  }
  const json& support_json = obj["support"];
  if (!support_json.is_array() || support_json.empty()) {
    return absl::InvalidArgumentError(
        absl::StrCat(where, ": support must be a nonempty array"));
  }
  std::vector<std::string> labels;
  std::vector<double> scores;
  for (const json& point : support_json) {
    if (auto s = RequireKeys(point, {"payload", "score"}, where + " support");
        !s.ok()) {
      return s;
    }
    if (!point["payload"].is_string() || !point["score"].is_number()) {
      return absl::InvalidArgumentError(absl::StrCat(
          where, ": payload must be a string and score a number"));
    }
    labels.push_back(point["payload"].get<std::string>());
    scores.push_back(point["score"].get<double>());
  }
  std::vector<std::string> sorted = labels;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    return absl::InvalidArgumentError(
        absl::StrCat(where, ": duplicate payload"));
  }
  std::vector<SupportPoint> support;
  for (size_t j = 0; j < labels.size(); ++j) {
    auto score = Score::Create(scores[j]);
    if (!score.ok()) {
      return absl::InvalidArgumentError(
          absl::StrCat(where, ": ", score.status().message()));
    }
    const int64_t rank =
        std::lower_bound(sorted.begin(), sorted.end(), labels[j]) -
        sorted.begin();
    support.push_back({ScoredSample{Payload{index, rank}, *score}, labels[j]});
  }
  const json& probs_json = obj["probs"];
  if (!probs_json.is_object()) {
    return absl::InvalidArgumentError(
        absl::StrCat(where, ": probs must map dataset ids to arrays"));
  }
  for (const auto& [name, row] : probs_json.items()) {
    if (std::find(datasets.begin(), datasets.end(), name) == datasets.end()) {
      return absl::InvalidArgumentError(
          absl::StrCat(where, ": probs for unknown dataset ", name));
    }
  }
  std::vector<std::vector<double>> probs;
  for (const std::string& name : datasets) {
    if (!probs_json.contains(name)) {
      return absl::InvalidArgumentError(
          absl::StrCat(where, ": no probabilities for dataset ", name));
    }
    const json& row = probs_json[name];
    if (!row.is_array()) {
      return absl::InvalidArgumentError(
          absl::StrCat(where, ": probabilities must be an array"));
    }
    std::vector<double> values;
    for (const json& p : row) {
      if (!p.is_number()) {
        return absl::InvalidArgumentError(
            absl::StrCat(where, ": probabilities must be numbers"));
      }
      values.push_back(p.get<double>());
    }
    probs.push_back(std::move(values));
  }
  auto candidate =
      DiscreteCandidate::Create(std::move(support), datasets, std::move(probs));
  if (!candidate.ok()) {
    return absl::InvalidArgumentError(
        absl::StrCat(where, ": ", candidate.status().message()));
  }
  return candidate;
}

}  // namespace

absl::StatusOr<CandidateDocument> CandidateDocumentFromJson(const json& doc) {
  if (auto s = RequireKeys(doc, {"datasets", "edges", "candidates"},
                           "candidate document");
      !s.ok()) {
    return s;
  }
  if (!doc["datasets"].is_array() || !doc["edges"].is_array() ||
      !doc["candidates"].is_array()) {
    return absl::InvalidArgumentError(
        "datasets, edges and candidates must be arrays");
  }
  std::vector<std::string> datasets;
  for (const json& d : doc["datasets"]) {
    if (!d.is_string()) {
      return absl::InvalidArgumentError("dataset ids must be strings");
    }
    datasets.push_back(d.get<std::string>());
  }
  std::vector<std::pair<std::string, std::string>> edges;
  for (const json& e : doc["edges"]) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_string() ||
        !e[1].is_string()) {
      return absl::InvalidArgumentError(
          "each edge must be a pair of dataset ids");
    }
    edges.push_back({e[0].get<std::string>(), e[1].get<std::string>()});
  }
  auto graph = NeighborGraph::Create(datasets, std::move(edges));
  if (!graph.ok()) return graph.status();
  CandidateDocument out{*std::move(graph), {}};
  int index = 0;
  for (const json& c : doc["candidates"]) {
    auto candidate = CandidateFromJson(c, index++, datasets);
    if (!candidate.ok()) return candidate.status();
    out.candidates.push_back(*std::move(candidate));
  }
  if (out.candidates.empty()) {
    return absl::InvalidArgumentError("at least one candidate is required");
  }
  return out;
}

absl::StatusOr<CandidateDocument> ParseCandidateDocument(
    std::string_view text) {
  json doc = json::parse(text.begin(), text.end(), nullptr,
                         /*allow_exceptions=*/false);
  if (doc.is_discarded()) {
    return absl::InvalidArgumentError("candidate document is not valid JSON");
  }
  return CandidateDocumentFromJson(doc);
}

json CandidateDocumentToJson(const CandidateDocument& doc) {
  json out;
  out["datasets"] = doc.graph.datasets();
  out["edges"] = json::array();
  for (const auto& [a, b] : doc.graph.edges()) {
    out["edges"].push_back({a, b});
  }
  out["candidates"] = json::array();
  for (const DiscreteCandidate& c : doc.candidates) {
    json support = json::array();
    for (const SupportPoint& point : c.support()) {
      support.push_back({{"payload", point.label},
                         {"score", point.sample.score.value()}});
    }
    json probs = json::object();
    for (size_t d = 0; d < c.datasets().size(); ++d) {
      probs[c.datasets()[d]] = c.probabilities(static_cast<int>(d));
    }
    out["candidates"].push_back({{"support", support}, {"probs", probs}});
  }
  return out;
}

json JsonNumber(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

absl::StatusOr<double> NumberFromJson(const json& value) {
  if (value.is_number()) return value.get<double>();
  if (value.is_string()) {
    const std::string s = value.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  return absl::InvalidArgumentError(
      absl::StrCat("expected a number, got ", value.dump()));
}

json OutcomeDistributionToJson(const OutcomeDistribution& dist) {
  json outcomes = json::array();
  for (const OutcomeEntry& e : dist.outcomes) {
    outcomes.push_back(
        {{"payload", e.label.empty()
                         ? absl::StrCat(e.sample.payload.candidate, ":",
                                        e.sample.payload.output)
                         : e.label},
         {"candidate", e.sample.payload.candidate},
         {"score", e.sample.score.value()},
         {"prob", e.prob}});
  }
  return {{"outcomes", outcomes}, {"bot_prob", dist.bot_prob}};
}

std::vector<json> TraceRecords(const std::vector<QueryRecord>& trace,
                               double threshold_noise, bool include_noise) {
  std::vector<json> records;
  for (const QueryRecord& r : trace) {
    json rec = {{"index", r.index},
                {"tau", r.tau},
                {"count", r.count},
                {"fired", r.fired}};
    if (include_noise) {
      rec["query_noise"] = JsonNumber(r.query_noise);
      rec["threshold_noise"] = JsonNumber(threshold_noise);
    }
    records.push_back(std::move(rec));
  }
  return records;
}

json CheckReportToJson(const CheckReport& report) {
  json params = json::object();
  for (const auto& [key, value] : report.params) params[key] = JsonNumber(value);
  json out = {{"mechanism", report.name},
              {"params", params},
              {"empirical", JsonNumber(report.empirical)},
              {"bound", JsonNumber(report.bound)},
              {"tolerance", JsonNumber(report.tolerance)},
              {"trials", report.trials},
              {"pass", report.pass}};
  if (!report.note.empty()) out["note"] = report.note;
  return out;
}

json AuditReportToJson(const AuditReport& report) {
  return {{"claimed",
           {{"epsilon", JsonNumber(report.claimed_epsilon)},
            {"delta", JsonNumber(report.claimed_delta)}}},
          {"measured", JsonNumber(report.measured)},
          {"tolerance", JsonNumber(report.tolerance)},
          {"witness",
           {{"from", report.witness_from},
            {"to", report.witness_to},
            {"outcomes", report.witness_outcomes}}},
          {"pass", report.pass}};
}

}  // namespace private_selection
