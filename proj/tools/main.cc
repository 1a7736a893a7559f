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

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "cli.h"

namespace {

using private_selection::cli::CliOptions;
using private_selection::cli::CommandResult;

void AddCommonFlags(CLI::App* app, CliOptions& options) {
  app->add_option("--config", options.config_path, "JSON config file");
  app->add_option("--seed", options.seed, "random seed");
  app->add_option("--trials", options.trials, "number of trials");
  app->add_option("--out", options.out, "report path");
  app->add_flag("--debug-unsafe", options.debug_unsafe,
                "include private noise values in traces");
}

}  // namespace

int main(int argc, char** argv) {
  namespace cli = private_selection::cli;
  CLI::App app{"Private selection from private candidates"};
  app.require_subcommand(1);
  CliOptions options;
  std::string family;

  CLI::App* select = app.add_subcommand("select", "run a selector");
  CLI::App* find = app.add_subcommand("find-threshold",
                                      "private percentile threshold search");
  CLI::App* audit = app.add_subcommand("audit", "exact privacy audit");
  CLI::App* counter = app.add_subcommand("counterexample",
                                         "reproduce a counterexample family");
  counter->add_option("name", family, "family name")->required();
  CLI::App* experiment = app.add_subcommand("experiment", "run an experiment");
  experiment->require_subcommand(1);
  CLI::App* hyperparam =
      experiment->add_subcommand("hyperparam", "hyperparameter tuning");
  CLI::App* lemmas =
      app.add_subcommand("validate-lemmas", "Monte Carlo lemma validators");
  for (CLI::App* sub : {select, find, audit, counter, hyperparam, lemmas}) {
    AddCommonFlags(sub, options);
  }

  CLI11_PARSE(app, argc, argv);

  absl::StatusOr<CommandResult> result;
  if (select->parsed()) {
    result = cli::RunSelect(options);
  } else if (find->parsed()) {
    result = cli::RunFindThreshold(options);
  } else if (audit->parsed()) {
    result = cli::RunAudit(options);
  } else if (counter->parsed()) {
    result = cli::RunCounterexample(family, options);
  } else if (hyperparam->parsed()) {
    result = cli::RunHyperparamExperiment(options);
  } else {
    result = cli::RunValidateLemmas(options);
  }
  if (!result.ok()) {
    std::cerr << "error: " << result.status().message() << "\n";
    return 2;
  }
  if (absl::Status s = cli::WriteResult(*result, options); !s.ok()) {
    std::cerr << "error: " << s.message() << "\n";
    return 2;
  }
  return result->pass ? 0 : 1;
}
