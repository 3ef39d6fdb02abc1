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

#ifndef FEDMIA_OPTIMIZER_H_
#define FEDMIA_OPTIMIZER_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "fedmia/network.h"

namespace fedmia {

enum class OptimizerKind { kSgd, kAdam };

std::string_view ToString(OptimizerKind kind);
OptimizerKind ParseOptimizerKind(std::string_view name);

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Plain SGD (theta -= lr * g) or bias-corrected Adam. Moment buffers are
// allocated on the first step to match the network's parameters.
class Optimizer {
 public:
  Optimizer(OptimizerKind kind, double learning_rate, AdamConfig adam = {});

  OptimizerKind kind() const { return kind_; }
  double learning_rate() const { return learning_rate_; }
  void set_learning_rate(double lr);
  uint64_t step_count() const { return step_count_; }

  // Throws kNumeric before touching any parameter if a gradient is not
  // finite, kInputShape if shapes disagree.
  void Step(Network& net, const Gradients& grads);

 private:
  OptimizerKind kind_;
  double learning_rate_;
  AdamConfig adam_;
  uint64_t step_count_ = 0;
  std::vector<Tensor> first_moment_;
  std::vector<Tensor> second_moment_;
};

}  // namespace fedmia

#endif  // FEDMIA_OPTIMIZER_H_
