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

#ifndef PRIVATE_SELECTION_REPORT_H_
#define PRIVATE_SELECTION_REPORT_H_

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace private_selection {

// Outcome of one empirical or exact check against a stated bound.
struct CheckReport {
  std::string name;
  std::vector<std::pair<std::string, double>> params;
  double empirical = 0.0;
  double bound = 0.0;
  double tolerance = 0.0;
  int64_t trials = 0;
  bool pass = false;
  std::string note;
};

// Standard error of a frequency estimate.
inline double FrequencyStdError(double p, int64_t trials) {
  if (trials <= 0) return 0.0;
  const double q = std::min(std::max(p, 0.0), 1.0);
  return std::sqrt(q * (1.0 - q) / static_cast<double>(trials));
}

// Frequency check: empirical <= bound + sigmas * stderr(bound).
inline CheckReport FrequencyCheck(std::string name, int64_t hits,
                                  int64_t trials, double bound,
                                  double sigmas = 3.0) {
  CheckReport report;
  report.name = std::move(name);
  report.trials = trials;
  report.empirical =
      trials > 0 ? static_cast<double>(hits) / static_cast<double>(trials)
                 : 0.0;
  report.bound = bound;
  report.tolerance = sigmas * FrequencyStdError(bound, trials);
  report.pass = report.empirical <= report.bound + report.tolerance;
  return report;
}

inline bool AllPass(const std::vector<CheckReport>& reports) {
  for (const CheckReport& r : reports) {
    if (!r.pass) return false;
  }
  return true;
}

}  // namespace private_selection

#endif  // PRIVATE_SELECTION_REPORT_H_
