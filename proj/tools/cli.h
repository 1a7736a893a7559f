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

// Command implementations for the private_select tool. Each command reads a
// JSON config, runs deterministically from the seed, and returns a report.

#ifndef PRIVATE_SELECTION_TOOLS_CLI_H_
#define PRIVATE_SELECTION_TOOLS_CLI_H_

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "json.hpp"

namespace private_selection::cli {

struct CliOptions {
  std::optional<std::string> config_path;
  std::optional<uint64_t> seed;
  std::optional<int64_t> trials;
  std::optional<std::string> out;
  bool debug_unsafe = false;
};

struct CommandResult {
  nlohmann::json report;
  std::vector<std::vector<std::string>> csv;  // header row first
  std::vector<nlohmann::json> jsonl;
  std::vector<std::string> summary;
  bool pass = true;
};

// Reads keys from a JSON object and remembers which ones were used, so
// that leftovers can be rejected.
class ConfigReader {
 public:
  ConfigReader(nlohmann::json obj, std::string where);

  bool Has(const std::string& key) const;
  absl::StatusOr<double> Number(const std::string& key,
                                std::optional<double> fallback = {});
  absl::StatusOr<int64_t> Integer(const std::string& key,
                                  std::optional<int64_t> fallback = {});
  absl::StatusOr<std::string> String(const std::string& key,
                                     std::optional<std::string> fallback = {});
  absl::StatusOr<nlohmann::json> Value(const std::string& key);
  absl::StatusOr<std::vector<double>> NumberList(
      const std::string& key, std::optional<std::vector<double>> fallback = {});
  // Fails when any key was never read.
  absl::Status Finish() const;

  const std::string& where() const { return where_; }

 private:
  nlohmann::json obj_;
  std::string where_;
  std::set<std::string> used_;
};

// Top-level config with the shared "command", "seed" and "trials" keys.
struct LoadedConfig {
  ConfigReader reader;
  uint64_t seed = 1;
  int64_t trials = 0;
};

absl::StatusOr<LoadedConfig> LoadConfig(const CliOptions& options,
                                        const std::string& command,
                                        int64_t default_trials);

absl::StatusOr<CommandResult> RunSelect(const CliOptions& options);
absl::StatusOr<CommandResult> RunFindThreshold(const CliOptions& options);
absl::StatusOr<CommandResult> RunAudit(const CliOptions& options);
absl::StatusOr<CommandResult> RunCounterexample(const std::string& name,
                                                const CliOptions& options);
absl::StatusOr<CommandResult> RunHyperparamExperiment(
    const CliOptions& options);
absl::StatusOr<CommandResult> RunValidateLemmas(const CliOptions& options);

// Writes the report (and the CSV and JSONL side files when --out is set).
absl::Status WriteResult(const CommandResult& result,
                         const CliOptions& options);

std::string CsvEscape(const std::string& field);
std::string FormatDouble(double x);

}  // namespace private_selection::cli

#endif  // PRIVATE_SELECTION_TOOLS_CLI_H_
