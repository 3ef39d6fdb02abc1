// Copyright 2026 The fedmia Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// fedmia: federated membership-inference experiments from the command line.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "fedmia/error.h"
#include "fedmia/experiment.h"
#include "fedmia/report.h"
#include "fedmia/stages.h"

namespace {

struct Options {
  std::string config_path;
  std::optional<uint64_t> seed;
  std::optional<std::string> out;
  std::string sweep;
  std::string epoch_sets;
};

fedmia::ExperimentConfig LoadConfig(const Options& opts) {
  fedmia::ExperimentConfig config = fedmia::LoadExperimentConfig(opts.config_path);
  if (opts.seed) config.seed = *opts.seed;
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Passive membership inference against federated learning clients"};
  app.require_subcommand(1);
  Options opts;

  auto add_common = [&](CLI::App* cmd, bool config_required) {
    auto* config = cmd->add_option("--config", opts.config_path, "experiment config (JSON)");
    if (config_required) config->required()->check(CLI::ExistingFile);
    cmd->add_option("--seed", opts.seed, "master seed, overrides the config");
    cmd->add_option("--out", opts.out,
                    "output directory (default: $FEDMIA_OUT_DIR, then config out_dir)");
  };

  auto* fl_train = app.add_subcommand("fl-train", "run FedAvg and record the target trace");
  auto* extract = app.add_subcommand("extract-features", "build attack inputs from the trace");
  auto* attack_train = app.add_subcommand("attack-train", "train the attack model");
  auto* attack_eval = app.add_subcommand("attack-eval", "evaluate the attack, write report.json");
  auto* report = app.add_subcommand("report", "run an accuracy sweep");
  auto* plot = app.add_subcommand("plot", "render SVG plots from report outputs");
  for (CLI::App* cmd : {fl_train, extract, attack_train, attack_eval, report}) {
    add_common(cmd, true);
  }
  add_common(plot, false);
  report->add_option("--sweep", opts.sweep, "observed-epochs | sliding-window")->required();
  report->add_option("--epoch-sets", opts.epoch_sets,
                     "observed epoch sets, e.g. \"5,10,15;60,70,80\" (default: config)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (plot->parsed()) {
      std::string out_dir;
      if (!opts.config_path.empty()) {
        out_dir = fedmia::ResolveOutDir(opts.out, LoadConfig(opts));
      } else {
        fedmia::ExperimentConfig defaults;
        out_dir = fedmia::ResolveOutDir(opts.out, defaults);
      }
      fedmia::RunPlotStage(out_dir, std::cerr);
      return 0;
    }
    fedmia::ExperimentConfig config = LoadConfig(opts);
    const std::string out_dir = fedmia::ResolveOutDir(opts.out, config);
    if (fl_train->parsed()) {
      fedmia::RunFlTrainStage(config, out_dir, std::cerr);
    } else if (extract->parsed()) {
      fedmia::RunExtractFeaturesStage(config, out_dir, std::cerr);
    } else if (attack_train->parsed()) {
      fedmia::RunAttackTrainStage(config, out_dir, std::cerr);
    } else if (attack_eval->parsed()) {
      fedmia::RunAttackEvalStage(config, out_dir, fedmia::UtcTimestamp(), std::cerr);
    } else if (report->parsed()) {
      const fedmia::SweepKind kind = fedmia::ParseSweepKind(opts.sweep);
      if (!opts.epoch_sets.empty()) {
        config.sweep.epoch_sets = fedmia::ParseEpochSets(opts.epoch_sets);
        config.Validate();
      }
      fedmia::RunSweepStage(config, kind, out_dir, std::cerr);
    }
  } catch (const fedmia::Error& e) {
    std::cerr << "fedmia: " << fedmia::ToString(e.kind()) << ": " << e.what() << "\n";
    return fedmia::ExitCodeFor(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "fedmia: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
