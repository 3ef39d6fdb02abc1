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

#include "fedmia/optimizer.h"

#include <cmath>

#include "fedmia/error.h"

namespace fedmia {

std::string_view ToString(OptimizerKind kind) {
  return kind == OptimizerKind::kSgd ? "sgd" : "adam";
}

OptimizerKind ParseOptimizerKind(std::string_view name) {
  if (name == "sgd") return OptimizerKind::kSgd;
  if (name == "adam") return OptimizerKind::kAdam;
  Fail(ErrorKind::kConfig,
       "unknown optimizer '" + std::string(name) + "' (expected sgd|adam)");
}

Optimizer::Optimizer(OptimizerKind kind, double learning_rate, AdamConfig adam)
    : kind_(kind), learning_rate_(learning_rate), adam_(adam) {
  set_learning_rate(learning_rate);
}

void Optimizer::set_learning_rate(double lr) {
  Require(std::isfinite(lr) && lr >= 0.0, ErrorKind::kValidation,
          "learning rate must be finite and non-negative");
  learning_rate_ = lr;
}

void Optimizer::Step(Network& net, const Gradients& grads) {
  std::vector<Tensor>& params = net.params();
  Require(grads.size() == params.size(), ErrorKind::kInputShape,
          "gradient count " + std::to_string(grads.size()) +
              " differs from parameter count " +
              std::to_string(params.size()));
  for (size_t i = 0; i < params.size(); ++i) {
    Require(grads[i].shape() == params[i].shape(), ErrorKind::kInputShape,
            "gradient " + std::to_string(i) + " has shape " +
                ShapeToString(grads[i].shape()) + ", parameter has " +
                ShapeToString(params[i].shape()));
    Require(grads[i].AllFinite(), ErrorKind::kNumeric,
            "non-finite gradient for parameter tensor " + std::to_string(i));
  }
  ++step_count_;

  if (kind_ == OptimizerKind::kSgd) {
    for (size_t i = 0; i < params.size(); ++i) {
      double* p = params[i].raw();
      const double* g = grads[i].raw();
      for (size_t j = 0; j < params[i].size(); ++j) p[j] -= learning_rate_ * g[j];
    }
    return;
  }

  if (first_moment_.empty()) {
    for (const Tensor& p : params) {
      first_moment_.emplace_back(p.shape());
      second_moment_.emplace_back(p.shape());
    }
  }
  const double t = static_cast<double>(step_count_);
  const double correction1 = 1.0 - std::pow(adam_.beta1, t);
  const double correction2 = 1.0 - std::pow(adam_.beta2, t);
  for (size_t i = 0; i < params.size(); ++i) {
    double* p = params[i].raw();
    double* m = first_moment_[i].raw();
    double* v = second_moment_[i].raw();
    const double* g = grads[i].raw();
    for (size_t j = 0; j < params[i].size(); ++j) {
      m[j] = adam_.beta1 * m[j] + (1.0 - adam_.beta1) * g[j];
      v[j] = adam_.beta2 * v[j] + (1.0 - adam_.beta2) * g[j] * g[j];
      const double m_hat = m[j] / correction1;
      const double v_hat = v[j] / correction2;
      p[j] -= learning_rate_ * m_hat / (std::sqrt(v_hat) + adam_.epsilon);
    }
  }
}

}  // namespace fedmia
