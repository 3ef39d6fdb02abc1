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


// CLI pipeline stages. Each stage reads only the config and the files the
// previous stage wrote into the output directory, and checks through a
// manifest that those files came from the same configuration.

#ifndef FEDMIA_STAGES_H_
#define FEDMIA_STAGES_H_

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "fedmia/error.h"
#include "fedmia/experiment.h"

namespace fedmia {

// Output files, relative to the output directory.
inline constexpr const char* kTraceFile = "trace.fltr";
inline constexpr const char* kAccuracyLogFile = "accuracy_log.csv";
inline constexpr const char* kFlManifestFile = "fl_manifest.json";
inline constexpr const char* kFeaturesTrainFile = "features_train.csv";
inline constexpr const char* kFeaturesTestFile = "features_test.csv";
inline constexpr const char* kFeaturesManifestFile = "features_manifest.json";
inline constexpr const char* kAttackModelFile = "attack_model.fltr";
inline constexpr const char* kAttackManifestFile = "attack_manifest.json";
inline constexpr const char* kReportFile = "report.json";
inline constexpr const char* kObservedEpochsFile = "sweep_observed_epochs.csv";
inline constexpr const char* kSlidingWindowFile = "sliding_window.csv";
inline constexpr const char* kAccuracyPlotFile = "accuracy_over_time.svg";
inline constexpr const char* kMemberGapPlotFile = "member_gap.svg";

// 0 success, 2 configuration, 3 data, 4 numeric.
int ExitCodeFor(ErrorKind kind);

// --out, then FEDMIA_OUT_DIR, then the config's out_dir.
std::string ResolveOutDir(const std::optional<std::string>& flag,
                          const ExperimentConfig& config);

void RunFlTrainStage(const ExperimentConfig& config, const std::string& out_dir,
                     std::ostream& log);
void RunExtractFeaturesStage(const ExperimentConfig& config, const std::string& out_dir,
                             std::ostream& log);
void RunAttackTrainStage(const ExperimentConfig& config, const std::string& out_dir,
                         std::ostream& log);
void RunAttackEvalStage(const ExperimentConfig& config, const std::string& out_dir,
                        const std::string& generated_at, std::ostream& log);

enum class SweepKind { kObservedEpochs, kSlidingWindow };
SweepKind ParseSweepKind(std::string_view name);
void RunSweepStage(const ExperimentConfig& config, SweepKind kind,
                   const std::string& out_dir, std::ostream& log);

// Renders whichever plots the available report and sliding-window files
// allow. kDependency when neither exists.
void RunPlotStage(const std::string& out_dir, std::ostream& log);

// "5,10,15;20,25" -> {{5, 10, 15}, {20, 25}}. kConfig on malformed text.
std::vector<std::vector<size_t>> ParseEpochSets(std::string_view text);

}  // namespace fedmia

#endif  // FEDMIA_STAGES_H_
