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

#ifndef FEDMIA_LOSS_H_
#define FEDMIA_LOSS_H_

#include <cstddef>
#include <span>

#include "fedmia/tensor.h"

namespace fedmia {

// True-class probabilities are clamped to this floor before the log.
inline constexpr double kProbabilityFloor = 1e-12;

// Mean of -log(p[y]) over rows of a [batch, classes] probability tensor.
double CrossEntropyLoss(const Tensor& probs, std::span<const size_t> labels);

// Mean of squared elementwise differences.
double MseLoss(const Tensor& predictions, const Tensor& targets);

}  // namespace fedmia

#endif  // FEDMIA_LOSS_H_
