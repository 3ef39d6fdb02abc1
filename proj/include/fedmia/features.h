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


#ifndef FEDMIA_FEATURES_H_
#define FEDMIA_FEATURES_H_

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fedmia/dataset.h"
#include "fedmia/fedavg.h"

namespace fedmia {

enum class FeatureKind { kTrueLabel, kEntropy, kMaxScore };

std::string_view ToString(FeatureKind kind);
// "true_label", "entropy" or "max_score"; kConfig otherwise.
FeatureKind ParseFeatureKind(std::string_view name);

// One trajectory per sample over the trace epochs in ascending order.
struct FeatureMatrix {
  FeatureKind kind = FeatureKind::kTrueLabel;
  std::vector<size_t> epochs;
  std::vector<size_t> sample_ids;
  std::vector<bool> member;
  std::vector<double> values;  // rows() x width(), row-major

  size_t rows() const { return sample_ids.size(); }
  size_t width() const { return epochs.size(); }
  std::span<const double> row(size_t i) const {
    return std::span<const double>(values).subspan(i * width(), width());
  }
  // [rows, 1, width] batch for a one-channel series model.
  Tensor AsSeriesBatch() const;
  std::vector<size_t> MemberLabels() const;

  friend bool operator==(const FeatureMatrix&, const FeatureMatrix&) = default;
};

// Per-snapshot trajectories of a single sample. Scores are the snapshots'
// softmax outputs.
std::vector<double> TrueLabelTrajectory(const CheckpointTrace& trace,
                                        std::span<const double> x, size_t y);
// -sum s_i ln s_i in nats with 0 ln 0 = 0.
std::vector<double> EntropyTrajectory(const CheckpointTrace& trace,
                                      std::span<const double> x);
std::vector<double> MaxScoreTrajectory(const CheckpointTrace& trace,
                                       std::span<const double> x);

// Entropy of one probability vector, clamped to [0, ln m].
double ScoreEntropy(std::span<const double> scores);

// Rows follow `samples`. kCapability when kind is true_label and the
// adversary has no labels.
FeatureMatrix ExtractFeatures(const CheckpointTrace& trace,
                              const LabeledDataset& data,
                              std::span<const AuxSample> samples,
                              FeatureKind kind, bool labels_available = true);

// Header sample_id,member,f_1,...,f_k; values printed with 17 significant
// digits. Kind and epochs are not part of the file and must be supplied on
// load.
void SaveFeaturesCsv(const FeatureMatrix& features, const std::string& path);
FeatureMatrix LoadFeaturesCsv(const std::string& path, FeatureKind kind,
                              std::vector<size_t> epochs);

}  // namespace fedmia

#endif  // FEDMIA_FEATURES_H_
