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

#include "fedmia/tensor.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "fedmia/error.h"

namespace fedmia {

size_t ShapeSize(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), size_t{1},
                         std::multiplies<>());
}

std::string ShapeToString(const Shape& shape) {
  std::string out = "[";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i > 0) out += ",";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

Tensor::Tensor(Shape shape, double fill)
    : shape_(std::move(shape)), data_(ShapeSize(shape_), fill) {
  for (size_t d : shape_) {
    Require(d > 0, ErrorKind::kInputShape,
            "tensor dimensions must be positive, got " +
                ShapeToString(shape_));
  }
}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : Tensor(Adopt{}, std::move(shape), AlignedVector(data.begin(), data.end())) {}

Tensor::Tensor(Adopt, Shape shape, AlignedVector data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  for (size_t d : shape_) {
    Require(d > 0, ErrorKind::kInputShape,
            "tensor dimensions must be positive, got " +
                ShapeToString(shape_));
  }
  Require(ShapeSize(shape_) == data_.size(), ErrorKind::kInputShape,
          "tensor data length " + std::to_string(data_.size()) +
              " does not match shape " + ShapeToString(shape_));
}

Tensor Tensor::Reshaped(Shape shape) const& {
  return Tensor(Adopt{}, std::move(shape), data_);
}

Tensor Tensor::Reshaped(Shape shape) && {
  return Tensor(Adopt{}, std::move(shape), std::move(data_));
}

void Tensor::Fill(double value) { std::fill(data_.begin(), data_.end(), value); }

bool Tensor::AllFinite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v); });
}

}  // namespace fedmia
