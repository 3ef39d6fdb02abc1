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


#ifndef FEDMIA_DATASET_H_
#define FEDMIA_DATASET_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fedmia/tensor.h"

namespace fedmia {

// Immutable table of feature vectors with integer class labels. Samples are
// identified by their row index.
struct LabeledDataset {
  std::string name;
  size_t feature_dim = 0;
  size_t class_count = 0;
  std::vector<double> features;  // row-major, size() * feature_dim
  std::vector<size_t> labels;

  size_t size() const { return labels.size(); }
  std::span<const double> row(size_t i) const {
    return std::span<const double>(features).subspan(i * feature_dim,
                                                     feature_dim);
  }
  void Validate() const;
};

// [indices.size(), feature_dim] batch of the selected rows.
Tensor GatherInputs(const LabeledDataset& data,
                    std::span<const size_t> indices);
std::vector<size_t> GatherLabels(const LabeledDataset& data,
                                 std::span<const size_t> indices);

// CSV with one record per line: integer label, then feature_dim 0/1 values.
// Blank lines are skipped.
LabeledDataset LoadPurchaseStyle(const std::string& path, size_t feature_dim,
                                 size_t class_count);

struct SyntheticSpec {
  size_t classes = 20;
  size_t dim = 50;
  size_t per_class = 200;
  double cluster_spread = 3.0;
  uint64_t seed = 0;
};

// Class centers are drawn from N(0, I); each point is its center plus
// cluster_spread * N(0, I). Rows are grouped by class.
LabeledDataset GenerateSynthetic(const SyntheticSpec& spec);

struct Partition {
  size_t client_id = 0;
  std::vector<size_t> indices;
};

// Seeded shuffle of `pool` split into n_clients contiguous chunks whose sizes
// differ by at most one (earlier clients take the remainder).
std::vector<Partition> PartitionUniform(std::span<const size_t> pool,
                                        size_t n_clients, uint64_t seed);
std::vector<Partition> PartitionUniform(const LabeledDataset& data,
                                        size_t n_clients, uint64_t seed);

// Reserves `holdout` random indices that no client trains on. They serve as
// the test set for the federated model and as the non-member source.
struct HoldoutSplit {
  std::vector<size_t> pool;     // ascending
  std::vector<size_t> holdout;  // ascending
};
HoldoutSplit SplitHoldout(size_t dataset_size, size_t holdout, uint64_t seed);

struct AuxSample {
  size_t index = 0;  // row in the source dataset; also the sample id
  size_t label = 0;
  bool member = false;
};

struct AuxCounts {
  size_t member_train = 0;
  size_t nonmember_train = 0;
  size_t member_test = 0;
  size_t nonmember_test = 0;
};

// The adversary's labelled samples. Both splits are sorted by index.
struct AuxiliaryDataset {
  std::vector<AuxSample> attack_train;
  std::vector<AuxSample> attack_test;
  bool labels_available = true;
};

// Members are drawn without replacement from the target partition,
// non-members from `nonmember_candidates` (default: every pool row outside
// the target). Throws kCapacity naming the side that is short.
AuxiliaryDataset BuildAuxiliary(
    const Partition& target, const LabeledDataset& pool,
    const AuxCounts& counts, uint64_t seed,
    std::optional<std::span<const size_t>> nonmember_candidates = {});

}  // namespace fedmia

#endif  // FEDMIA_DATASET_H_
