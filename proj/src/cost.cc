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


#include "fedmia/cost.h"

#include <limits>
#include <string>
#include <type_traits>

#include "fedmia/error.h"

namespace fedmia {
namespace {

double Ratio(size_t a, size_t b) {
  if (a == b) return 1.0;
  if (a == 0) return std::numeric_limits<double>::infinity();
  return static_cast<double>(b) / static_cast<double>(a);
}

NetworkSpec AtLength(const NetworkSpec& spec, size_t input_len) {
  if (spec.input_shape.size() == 2) return spec.WithSeriesLength(input_len);
  Require(ShapeSize(spec.input_shape) == input_len, ErrorKind::kInputShape,
          "input length " + std::to_string(input_len) + " for a network expecting " +
              ShapeToString(spec.input_shape));
  return spec;
}

}  // namespace

size_t CountParams(const NetworkSpec& spec) {
  size_t total = 0;
  for (const LayerSpec& layer : spec.layers) {
    total += LayerTrainableCount(layer) + LayerStateCount(layer);
  }
  return total;
}

size_t CountMacs(const NetworkSpec& spec) {
  spec.Validate();
  const std::vector<Shape> outputs = spec.LayerOutputShapes();
  size_t total = 0;
  for (size_t i = 0; i < spec.layers.size(); ++i) {
    std::visit(
        [&](const auto& layer) {
          using T = std::decay_t<decltype(layer)>;
          if constexpr (std::is_same_v<T, Dense>) {
            total += layer.in * layer.out;
          } else if constexpr (std::is_same_v<T, Conv1D>) {
            total += outputs[i][1] * layer.out_channels * layer.in_channels *
                     layer.kernel;
          }
        },
        spec.layers[i]);
  }
  return total;
}

size_t CountMacs(const NetworkSpec& spec, size_t input_len) {
  return CountMacs(AtLength(spec, input_len));
}

CostReport MeasureCost(const NetworkSpec& spec, size_t input_len) {
  const NetworkSpec sized = AtLength(spec, input_len);
  CostReport r;
  r.input_len = input_len;
  r.trainable_count = sized.TrainableParamCount();
  r.param_count = CountParams(sized);
  r.memory_bytes = kBytesPerStoredValue * r.param_count;
  r.macs = CountMacs(sized);
  return r;
}

CostComparison CompareCosts(const NetworkSpec& a, size_t input_len_a,
                            const NetworkSpec& b, size_t input_len_b) {
  CostComparison c;
  c.a = MeasureCost(a, input_len_a);
  c.b = MeasureCost(b, input_len_b);
  c.param_ratio = Ratio(c.a.param_count, c.b.param_count);
  c.memory_ratio = Ratio(c.a.memory_bytes, c.b.memory_bytes);
  c.mac_ratio = Ratio(c.a.macs, c.b.macs);
  return c;
}

}  // namespace fedmia
