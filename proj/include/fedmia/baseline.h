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


#ifndef FEDMIA_BASELINE_H_
#define FEDMIA_BASELINE_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fedmia/attack.h"
#include "fedmia/dataset.h"
#include "fedmia/fedavg.h"

namespace fedmia {

// (d + 1 + sum(layer_sizes)) * n_targets + m
size_t BaselineInputSize(size_t d, std::span<const size_t> layer_sizes,
                         size_t n_targets, size_t m);

// White-box input I(x, y) for one sample: for every snapshot in ascending
// epoch order the per-sample loss gradient of every trainable value (layer
// order), the loss, and every stage output; then the one-hot label.
// Snapshots are differentiated in their stored (eval) mode.
std::vector<double> BuildBaselineInput(const CheckpointTrace& trace,
                                       std::span<const double> x, size_t y);

// Rows of I(x, y) kept in 32-bit to bound memory.
struct BaselineInputs {
  size_t width = 0;
  std::vector<size_t> sample_ids;
  std::vector<bool> member;
  std::vector<float> values;

  size_t rows() const { return sample_ids.size(); }
  std::span<const float> row(size_t i) const {
    return std::span<const float>(values).subspan(i * width, width);
  }
};

// kCapability when labels are unavailable.
BaselineInputs BuildBaselineInputs(const CheckpointTrace& trace,
                                   const LabeledDataset& data,
                                   std::span<const AuxSample> samples,
                                   bool labels_available = true);

// Same schema as the trajectory CSV with wide rows: sample_id,member,f_1,...
void SaveBaselineCsv(const BaselineInputs& inputs, const std::string& path);
// kParse with the line number on malformed rows or a header that does not
// list exactly `width` features.
BaselineInputs LoadBaselineCsv(const std::string& path, size_t width);

// Two Conv1D-ReLU-AvgPool blocks over the input as a one-channel series and
// a Dense head with one real output. Pool windows shrink on short inputs so
// every block keeps at least one position.
struct BaselineSpec {
  size_t channels = 4;
  size_t kernel = 3;
  size_t pool = 16;
};

NetworkSpec MakeBaselineSpec(size_t input_len, const BaselineSpec& spec = {});

struct BaselineHyperparams {
  size_t batch_size = 32;
  double learning_rate = 0.001;
  size_t epochs = 30;
  uint64_t seed = 0;
};

// Adam on the mean squared error against membership in {0, 1}. Returns the
// network in eval mode. kValidation when only one class is present.
Network TrainBaselineAttack(const BaselineInputs& train,
                            const BaselineHyperparams& hp,
                            const BaselineSpec& spec = {},
                            std::vector<double>* loss_log = nullptr);

// Raw regression outputs; >= 0.5 means member.
std::vector<double> PredictBaseline(const Network& model,
                                    const BaselineInputs& inputs);
Confusion EvaluateBaseline(const Network& model, const BaselineInputs& test);

}  // namespace fedmia

#endif  // FEDMIA_BASELINE_H_
