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

#ifndef FEDMIA_NETWORK_H_
#define FEDMIA_NETWORK_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <vector>

#include "fedmia/network_spec.h"
#include "fedmia/tensor.h"

namespace fedmia {

enum class Mode { kTrain, kEval };

// Gradient tensors, one per trainable parameter tensor, same order.
using Gradients = std::vector<Tensor>;

struct ForwardResult {
  Tensor scores;
  // Keyed by 1-based stage index (see NetworkSpec).
  std::map<size_t, Tensor> taps;
};

struct BackwardResult {
  double loss = 0.0;
  Gradients gradients;
};

// A feed-forward network with its parameters and batch-norm statistics.
//
// Forward() records a tape that Backward*() consumes; the tape is not
// copied with the network. Evaluate() is const, always uses running
// statistics, and touches no member state, so a frozen network may be
// evaluated from several threads at once.
class Network {
 public:
  // Zero weights and biases; batch-norm gamma = 1, running variance = 1.
  explicit Network(NetworkSpec spec);

  // Weights drawn uniformly in +-sqrt(6 / (fan_in + fan_out)), biases zero.
  static Network Initialized(NetworkSpec spec, uint64_t seed);

  Network(const Network& other);
  Network& operator=(const Network& other);
  Network(Network&&) noexcept = default;
  Network& operator=(Network&&) noexcept = default;

  const NetworkSpec& spec() const { return spec_; }
  Mode mode() const { return mode_; }
  void set_mode(Mode mode) { mode_ = mode; }

  // Trainable tensors in layer order (Dense/Conv1D: weight, bias;
  // BatchNorm1D: gamma, beta).
  std::vector<Tensor>& params() { return params_; }
  const std::vector<Tensor>& params() const { return params_; }
  // Running mean and variance of every BatchNorm1D, in layer order.
  std::vector<Tensor>& state() { return state_; }
  const std::vector<Tensor>& state() const { return state_; }

  // Every stored value of one layer: its params then its state tensors.
  std::vector<const Tensor*> LayerValues(size_t layer) const;
  std::vector<Tensor*> LayerValues(size_t layer);

  size_t StoredValueCount() const;

  // Runs the batch ([batch] + input_shape) and records the tape. In train
  // mode batch-norm uses batch statistics and updates its running ones.
  ForwardResult Forward(const Tensor& batch, const std::set<size_t>& taps = {});

  // Side-effect free inference with running statistics.
  ForwardResult Evaluate(const Tensor& batch,
                         const std::set<size_t>& taps = {}) const;

  // Mean cross-entropy against class labels, backpropagated. When the last
  // layer is Softmax the gradient is taken directly at the logits.
  BackwardResult BackwardCrossEntropy(std::span<const size_t> labels);

  // Mean squared error against `targets` (same shape as the scores).
  BackwardResult BackwardMse(const Tensor& targets);

  // Backpropagates an arbitrary gradient with respect to the scores.
  Gradients Backward(const Tensor& grad_scores);

  bool has_tape() const { return !tape_.empty(); }

  friend bool operator==(const Network& a, const Network& b) {
    return a.spec_ == b.spec_ && a.params_ == b.params_ &&
           a.state_ == b.state_;
  }

 private:
  struct LayerCache {
    Tensor input;
    Tensor output;
    std::vector<double> aux;  // batch-norm: normalized input
    std::vector<double> inv_std;
  };

  ForwardResult Run(const Tensor& batch, const std::set<size_t>& taps,
                    bool training, std::vector<Tensor>* state_out,
                    std::vector<LayerCache>* tape) const;
  Gradients BackwardFrom(size_t last_layer, Tensor grad);

  NetworkSpec spec_;
  Mode mode_ = Mode::kTrain;
  std::vector<Tensor> params_;
  std::vector<Tensor> state_;
  std::vector<size_t> param_offset_;  // first params_ index per layer
  std::vector<size_t> state_offset_;
  std::vector<Shape> output_shapes_;
  std::vector<LayerCache> tape_;
  bool tape_training_ = false;
  Tensor tape_scores_;
};

}  // namespace fedmia

#endif  // FEDMIA_NETWORK_H_
