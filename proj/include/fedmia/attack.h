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


#ifndef FEDMIA_ATTACK_H_
#define FEDMIA_ATTACK_H_

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "fedmia/features.h"
#include "fedmia/network.h"
#include "fedmia/optimizer.h"

namespace fedmia {

struct ConvBlock {
  size_t channels = 0;
  size_t kernel = 0;

  friend bool operator==(const ConvBlock&, const ConvBlock&) = default;
};

// Three Conv1D(same)-BatchNorm1D-ReLU blocks, global average pooling, a
// two-way Dense head and softmax over {non-member, member}.
struct AttackFcnSpec {
  std::array<ConvBlock, 3> blocks = {{{128, 8}, {256, 5}, {128, 3}}};

  friend bool operator==(const AttackFcnSpec&, const AttackFcnSpec&) = default;
};

// Throws kSpec for zero channels or kernels or input_len == 0.
NetworkSpec MakeAttackFcnSpec(size_t input_len, const AttackFcnSpec& fcn = {});
Network BuildAttackFcn(size_t input_len, const AttackFcnSpec& fcn,
                       uint64_t seed);

struct TrainHyperparams {
  OptimizerKind optimizer = OptimizerKind::kAdam;
  size_t batch_size = 100;
  double learning_rate = 0.001;
  size_t epochs = 100;
  uint64_t seed = 0;

  void Validate() const;
};

// Trains `net` in place with cross-entropy on class labels, reshuffling each
// epoch, and leaves it in eval mode. Returns the mean loss of every epoch.
std::vector<double> TrainClassifier(Network& net, const Tensor& inputs,
                                    std::span<const size_t> labels,
                                    const TrainHyperparams& hp);

// Builds and trains the FCN on membership labels. kValidation when only one
// class is present.
Network TrainAttack(const FeatureMatrix& train, const TrainHyperparams& hp,
                    const AttackFcnSpec& fcn = {},
                    std::vector<double>* loss_log = nullptr);

// Member probability of a single trajectory; kInputShape on length mismatch.
double PredictMembership(const Network& model, std::span<const double> row);
std::vector<double> PredictMembership(const Network& model,
                                      const FeatureMatrix& features);

struct Confusion {
  size_t true_positive = 0;   // member predicted member
  size_t false_positive = 0;  // non-member predicted member
  size_t true_negative = 0;
  size_t false_negative = 0;

  size_t total() const {
    return true_positive + false_positive + true_negative + false_negative;
  }
  double accuracy() const;

  friend bool operator==(const Confusion&, const Confusion&) = default;
};

// A sample is predicted member when its probability is >= 0.5.
Confusion ScoreDecisions(std::span<const double> member_probability,
                         const std::vector<bool>& is_member);
Confusion EvaluateAttack(const Network& model, const FeatureMatrix& test);

}  // namespace fedmia

#endif  // FEDMIA_ATTACK_H_
