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

#include "fedmia/loss.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "fedmia/error.h"

namespace fedmia {

double CrossEntropyLoss(const Tensor& probs, std::span<const size_t> labels) {
  Require(probs.rank() == 2, ErrorKind::kInputShape,
          "cross-entropy expects [batch, classes], got " +
              ShapeToString(probs.shape()));
  const size_t batch = probs.dim(0);
  const size_t classes = probs.dim(1);
  Require(labels.size() == batch, ErrorKind::kInputShape,
          "label count " + std::to_string(labels.size()) +
              " differs from batch " + std::to_string(batch));
  double total = 0.0;
  for (size_t b = 0; b < batch; ++b) {
    Require(labels[b] < classes, ErrorKind::kValidation,
            "label " + std::to_string(labels[b]) + " outside [0, " +
                std::to_string(classes) + ")");
    const double p = std::max(probs[b * classes + labels[b]], kProbabilityFloor);
    total -= std::log(p);
  }
  return total / static_cast<double>(batch);
}

double MseLoss(const Tensor& predictions, const Tensor& targets) {
  Require(predictions.shape() == targets.shape(), ErrorKind::kInputShape,
          "mse shape mismatch: " + ShapeToString(predictions.shape()) +
              " vs " + ShapeToString(targets.shape()));
  double total = 0.0;
  for (size_t i = 0; i < predictions.size(); ++i) {
    const double d = predictions[i] - targets[i];
    total += d * d;
  }
  return total / static_cast<double>(predictions.size());
}

}  // namespace fedmia
