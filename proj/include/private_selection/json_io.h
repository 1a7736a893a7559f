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

// JSON encodings for candidate documents, outcome distributions,
// sparse-vector traces and check reports.
//
// Candidate document:
//   {"datasets": [...], "edges": [[a, b], ...],
//    "candidates": [{"support": [{"payload": "x", "score": s}, ...],
//                    "probs": {"dataset": [p, ...], ...}}, ...]}
//
// Payload strings are opaque. Within a candidate they are ordered
// lexicographically, and that order breaks score ties.

#ifndef PRIVATE_SELECTION_JSON_IO_H_
#define PRIVATE_SELECTION_JSON_IO_H_

#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "json.hpp"
#include "private_selection/core.h"
#include "private_selection/report.h"
#include "private_selection/selection.h"
#include "private_selection/sparse_vector.h"
#include "private_selection/verifier.h"

namespace private_selection {

struct CandidateDocument {
  NeighborGraph graph;
  std::vector<DiscreteCandidate> candidates;
};

absl::StatusOr<CandidateDocument> CandidateDocumentFromJson(
    const nlohmann::json& doc);
absl::StatusOr<CandidateDocument> ParseCandidateDocument(
    std::string_view text);
nlohmann::json CandidateDocumentToJson(const CandidateDocument& doc);

// Non-finite values become the strings "inf", "-inf" or "nan".
nlohmann::json JsonNumber(double x);
// Accepts numbers and the strings above.
absl::StatusOr<double> NumberFromJson(const nlohmann::json& value);

nlohmann::json OutcomeDistributionToJson(const OutcomeDistribution& dist);

// One JSON object per query. Noise values are included only when
// `include_noise` is set; they reveal private information.
std::vector<nlohmann::json> TraceRecords(const std::vector<QueryRecord>& trace,
                                         double threshold_noise,
                                         bool include_noise);

nlohmann::json CheckReportToJson(const CheckReport& report);
nlohmann::json AuditReportToJson(const AuditReport& report);

}  // namespace private_selection

#endif  // PRIVATE_SELECTION_JSON_IO_H_
