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


#ifndef FEDMIA_COST_H_
#define FEDMIA_COST_H_

#include <cstddef>

#include "fedmia/network_spec.h"

namespace fedmia {

constexpr size_t kBytesPerStoredValue = 4;

struct CostReport {
  size_t input_len = 0;
  size_t trainable_count = 0;
  // Trainable values plus batch-norm running statistics.
  size_t param_count = 0;
  size_t memory_bytes = 0;
  // One forward pass of one sample.
  size_t macs = 0;
};

size_t CountParams(const NetworkSpec& spec);

// Dense: in * out. Conv1D: output length * out * in * kernel. Batch-norm,
// activations, pooling and softmax count 0. For [channels, length] inputs
// the length axis is replaced by `input_len`; for flat inputs `input_len`
// must equal the feature count.
size_t CountMacs(const NetworkSpec& spec, size_t input_len);
size_t CountMacs(const NetworkSpec& spec);

CostReport MeasureCost(const NetworkSpec& spec, size_t input_len);

// Ratios are b / a; 1 when both sides are equal (including 0 / 0) and
// +infinity when only a is 0.
struct CostComparison {
  CostReport a;
  CostReport b;
  double param_ratio = 1.0;
  double memory_ratio = 1.0;
  double mac_ratio = 1.0;
};

CostComparison CompareCosts(const NetworkSpec& a, size_t input_len_a,
                            const NetworkSpec& b, size_t input_len_b);

}  // namespace fedmia

#endif  // FEDMIA_COST_H_
