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

#include <cmath>
#include <string>

#include "gtest/gtest.h"
#include "private_selection/selection.h"

namespace private_selection {
namespace {

using nlohmann::json;

constexpr char kDocument[] = R"({
  "datasets": ["D", "D'"],
  "edges": [["D", "D'"]],
  "candidates": [
    {"support": [{"payload": "b", "score": 0.5}, {"payload": "a", "score": 0.5}],
     "probs": {"D": [0.25, 0.75], "D'": [0.5, 0.5]}},
    {"support": [{"payload": "z", "score": 1.0}],
     "probs": {"D": [1.0], "D'": [1.0]}}
  ]
})";

TEST(CandidateDocumentTest, Parses) {
  auto doc = ParseCandidateDocument(kDocument);
  ASSERT_TRUE(doc.ok()) << doc.status();
  EXPECT_EQ(doc->graph.datasets().size(), 2u);
  ASSERT_EQ(doc->candidates.size(), 2u);
  const auto& support = doc->candidates[0].support();
  EXPECT_EQ(support[0].label, "b");
  // Output ids follow the lexicographic rank of the payload string.
  EXPECT_EQ(support[0].sample.payload.output, 1);
  EXPECT_EQ(support[1].sample.payload.output, 0);
  EXPECT_EQ(doc->candidates[1].support()[0].sample.payload.candidate, 1);
}

TEST(CandidateDocumentTest, RoundTrip) {
  auto doc = ParseCandidateDocument(kDocument);
  ASSERT_TRUE(doc.ok());
  const json encoded = CandidateDocumentToJson(*doc);
  auto again = CandidateDocumentFromJson(encoded);
  ASSERT_TRUE(again.ok()) << again.status();
  EXPECT_EQ(CandidateDocumentToJson(*again), encoded);
}

TEST(CandidateDocumentTest, RejectsMalformed) {
  json doc = json::parse(kDocument);
  json extra = doc;
  extra["comment"] = "x";
  EXPECT_FALSE(CandidateDocumentFromJson(extra).ok());
  json unknown = doc;
  unknown["candidates"][0]["probs"]["E"] = {1.0, 0.0};
  EXPECT_FALSE(CandidateDocumentFromJson(unknown).ok());
  json missing = doc;
  missing["candidates"][0]["probs"].erase("D'");
  EXPECT_FALSE(CandidateDocumentFromJson(missing).ok());
  json duplicate = doc;
  duplicate["candidates"][0]["support"][1]["payload"] = "b";
  EXPECT_FALSE(CandidateDocumentFromJson(duplicate).ok());
  json range = doc;
  range["candidates"][1]["support"][0]["score"] = 1.5;
  EXPECT_FALSE(CandidateDocumentFromJson(range).ok());
  json sums = doc;
  sums["candidates"][0]["probs"]["D"] = {0.25, 0.8};
  EXPECT_FALSE(CandidateDocumentFromJson(sums).ok());
  json self_loop = doc;
  self_loop["edges"] = {{"D", "D"}};
  EXPECT_FALSE(CandidateDocumentFromJson(self_loop).ok());
  EXPECT_FALSE(ParseCandidateDocument("{not json").ok());
}

TEST(JsonNumberTest, NonFiniteRoundTrip) {
  for (double x : std::initializer_list<double>{1.5, -2.0, INFINITY, -INFINITY}) {
    auto back = NumberFromJson(JsonNumber(x));
    ASSERT_TRUE(back.ok());
    EXPECT_EQ(*back, x);
  }
  EXPECT_TRUE(std::isnan(*NumberFromJson(JsonNumber(std::nan("")))));
  EXPECT_EQ(JsonNumber(INFINITY), json("inf"));
  EXPECT_FALSE(NumberFromJson(json("many")).ok());
}

TEST(TraceRecordsTest, NoiseWithheldByDefault) {
  QueryRecord r;
  r.index = 3;
  r.tau = 0.5;
  r.count = 10;
  r.fired = true;
  r.query_noise = 0.25;
  auto hidden = TraceRecords({r}, 0.75, false);
  ASSERT_EQ(hidden.size(), 1u);
  EXPECT_FALSE(hidden[0].contains("query_noise"));
  EXPECT_FALSE(hidden[0].contains("threshold_noise"));
  EXPECT_EQ(hidden[0]["count"], 10);
  auto shown = TraceRecords({r}, 0.75, true);
  EXPECT_EQ(shown[0]["query_noise"], 0.25);
  EXPECT_EQ(shown[0]["threshold_noise"], 0.75);
}

TEST(OutcomeDistributionJsonTest, Fields) {
  OutcomeDistribution dist;
  dist.outcomes.push_back({{{1, 2}, *Score::Create(0.5)}, "x", 0.75});
  dist.bot_prob = 0.25;
  const json j = OutcomeDistributionToJson(dist);
  EXPECT_EQ(j["bot_prob"], 0.25);
  ASSERT_EQ(j["outcomes"].size(), 1u);
  EXPECT_EQ(j["outcomes"][0]["prob"], 0.75);
  EXPECT_EQ(j["outcomes"][0]["score"], 0.5);
  EXPECT_EQ(j["outcomes"][0]["candidate"], 1);
}

}  // namespace
}  // namespace private_selection
