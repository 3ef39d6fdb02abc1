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


// Experiment configuration and the in-memory pipeline shared by the CLI and
// the acceptance tests: data -> FedAvg trace -> auxiliary split -> attack.

#ifndef FEDMIA_EXPERIMENT_H_
#define FEDMIA_EXPERIMENT_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fedmia/attack.h"
#include "fedmia/baseline.h"
#include "fedmia/dataset.h"
#include "fedmia/fedavg.h"
#include "fedmia/features.h"

namespace fedmia {

enum class AttackKind { kTrueLabel, kEntropy, kMaxScore, kBaseline };

std::string_view ToString(AttackKind kind);
AttackKind ParseAttackKind(std::string_view name);
// Empty for the baseline.
std::optional<FeatureKind> TrajectoryFeature(AttackKind kind);

enum class DatasetKind { kSynthetic, kPurchase };

struct DatasetConfig {
  DatasetKind kind = DatasetKind::kSynthetic;
  SyntheticSpec synthetic;  // seed comes from the master seed
  std::string path;         // purchase-style CSV
  size_t feature_dim = 600;
  size_t class_count = 100;
  // Rows withheld from every client; test set and non-member source.
  size_t holdout = 1000;
};

struct SweepConfig {
  std::vector<std::vector<size_t>> epoch_sets;
  bool include_baseline = false;
  // Sliding window T = {t - window + 1, ..., t}.
  size_t window = 10;
  size_t window_stride = 10;
  size_t window_epochs = 30;
};

struct ExperimentConfig {
  uint64_t seed = 1;
  std::string out_dir = "out";
  DatasetConfig dataset;
  std::vector<size_t> hidden = {256};
  // fl.seed is derived, never read from the file. Empty weights mean uniform.
  FLConfig fl = [] {
    FLConfig f;
    f.observed_epochs = {60, 70, 80, 90, 100};
    return f;
  }();
  AuxCounts aux{200, 200, 500, 500};
  bool labels_available = true;
  AttackKind attack = AttackKind::kTrueLabel;
  TrainHyperparams attack_hp;  // seed derived
  AttackFcnSpec fcn;
  BaselineHyperparams baseline_hp;  // seed derived
  BaselineSpec baseline;
  SweepConfig sweep;

  // kConfig on any invalid field.
  void Validate() const;
};

// Strict JSON: unknown keys and wrong types are kConfig errors naming the
// key path. Missing keys keep their defaults. Relative dataset paths are
// resolved against `base_dir`.
ExperimentConfig ParseExperimentConfig(std::string_view json_text,
                                       const std::string& base_dir = "");
ExperimentConfig LoadExperimentConfig(const std::string& path);
// Canonical form (sorted keys); parsing it back gives the same config.
std::string DumpExperimentConfig(const ExperimentConfig& config);

// Stage fingerprints. A stage's digest covers every config field its output
// depends on, including the upstream stages.
std::string TraceDigest(const ExperimentConfig& config);
std::string FeaturesDigest(const ExperimentConfig& config);
std::string ModelDigest(const ExperimentConfig& config);

// Sub-seeds fanned out from the master seed with DeriveSeed(master, label).
struct SubSeeds {
  uint64_t data;
  uint64_t holdout;
  uint64_t fl;
  uint64_t aux;
  uint64_t attack;
  uint64_t baseline;
};
SubSeeds FanOutSeeds(uint64_t master);

struct PreparedData {
  LabeledDataset data;
  HoldoutSplit split;
  std::vector<Partition> partitions;
  NetworkSpec target_spec;
  FLConfig fl;  // with the derived seed
};

PreparedData PrepareData(const ExperimentConfig& config);
// Runs FedAvg, evaluating on the holdout. `observed` replaces the configured
// observed epochs when given.
FedAvgResult TrainTargetModel(const PreparedData& prepared,
                              std::optional<std::vector<size_t>> observed = {});
AuxiliaryDataset DrawAuxiliary(const ExperimentConfig& config,
                               const PreparedData& prepared);

struct AttackResult {
  AttackKind kind = AttackKind::kTrueLabel;
  std::vector<size_t> epochs;
  size_t input_len = 0;
  Confusion confusion;
};

// Feature extraction, training and evaluation in memory. `epochs` overrides
// the configured attack training epochs.
AttackResult RunAttack(const ExperimentConfig& config,
                       const PreparedData& prepared, const CheckpointTrace& trace,
                       const AuxiliaryDataset& aux, AttackKind kind,
                       std::optional<size_t> epochs = {});

struct ObservedEpochsRow {
  std::vector<size_t> epochs;
  double accuracy = 0.0;
  std::optional<double> baseline_accuracy;
};

// One FedAvg run observing the union of the sets, then one attack per set.
// Needs at least two sets, each inside [1, rounds].
std::vector<ObservedEpochsRow> SweepObservedEpochs(const ExperimentConfig& config);

struct SlidingWindowRow {
  size_t t = 0;
  double attack_accuracy = 0.0;
  double train_accuracy = 0.0;
  std::optional<double> test_accuracy;
};

// Attack accuracy with T = {t - window + 1, ..., t}, retrained per window
// with sweep.window_epochs, next to the target's train/test accuracy.
std::vector<SlidingWindowRow> SweepSlidingWindow(const ExperimentConfig& config);

void WriteObservedEpochsCsv(const std::vector<ObservedEpochsRow>& rows,
                            const std::string& path);
void WriteSlidingWindowCsv(const std::vector<SlidingWindowRow>& rows,
                           const std::string& path);
std::vector<SlidingWindowRow> ReadSlidingWindowCsv(const std::string& path);

}  // namespace fedmia

#endif  // FEDMIA_EXPERIMENT_H_
