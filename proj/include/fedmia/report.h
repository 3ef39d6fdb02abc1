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


#ifndef FEDMIA_REPORT_H_
#define FEDMIA_REPORT_H_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fedmia/cost.h"
#include "fedmia/experiment.h"

namespace fedmia {

constexpr int kReportSchemaVersion = 1;

struct AttackEntry {
  AttackKind kind = AttackKind::kTrueLabel;
  std::vector<size_t> epochs;
  size_t input_len = 0;
  Confusion confusion;

  friend bool operator==(const AttackEntry&, const AttackEntry&) = default;
};

// Per-epoch mean feature value of members and non-members.
struct TrajectoryMeans {
  FeatureKind kind = FeatureKind::kTrueLabel;
  std::vector<size_t> epochs;
  std::vector<double> member;
  std::vector<double> nonmember;

  friend bool operator==(const TrajectoryMeans&, const TrajectoryMeans&) = default;
};

// kValidation when either side has no rows.
TrajectoryMeans MeanTrajectories(const FeatureMatrix& features);

struct ExperimentReport {
  int schema_version = kReportSchemaVersion;
  // The only field that differs between identical runs.
  std::string generated_at;
  ExperimentConfig config;
  std::vector<AttackEntry> attacks;
  std::optional<TrajectoryMeans> trajectory_means;
  // a: trajectory attack FCN, b: baseline attack network.
  CostComparison cost;
  std::vector<RoundAccuracy> fl_log;
};

// FCN at |T| observed epochs against the baseline network over the
// I(x, y) length of the configured target model.
CostComparison AttackCostComparison(const ExperimentConfig& config,
                                    const NetworkSpec& target_spec);

// ISO 8601 UTC, second resolution.
std::string UtcTimestamp();

std::string ReportToJson(const ExperimentReport& report);
// kParse on unknown or missing fields, wrong types or a schema version
// other than kReportSchemaVersion.
ExperimentReport ParseReport(std::string_view text);
void WriteReport(const ExperimentReport& report, const std::string& path);
ExperimentReport ReadReport(const std::string& path);

}  // namespace fedmia

#endif  // FEDMIA_REPORT_H_
