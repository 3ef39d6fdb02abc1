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


#include <cmath>
#include <functional>
#include <memory>

#include "fedmia/attack.h"
#include "fedmia/baseline.h"
#include "fedmia/cost.h"
#include "fedmia/error.h"
#include "fedmia/rng.h"
#include "fedmia/trace_io.h"
#include "gtest/gtest.h"

namespace fedmia {
namespace {

ErrorKind KindOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected fedmia::Error";
  return ErrorKind::kIo;
}

NetworkSpec DenseSpec(size_t in, size_t out) {
  return NetworkSpec{{in}, {Dense{in, out}}, 0};
}

TEST(CountParamsTest, LayerFormulas) {
  EXPECT_EQ(CountParams(DenseSpec(10, 5)), 55u);
  EXPECT_EQ(CountParams(NetworkSpec{{1, 5}, {Conv1D{1, 8, 3}}, 0}), 32u);
  EXPECT_EQ(CountParams(NetworkSpec{{3, 5}, {BatchNorm1D{3}, ReLU{}, AvgPool1D{5}}, 0}),
            12u);
}

TEST(CountParamsTest, DefaultAttackFcn) {
  // conv 1->128 k8, bn, conv 128->256 k5, bn, conv 256->128 k3, bn, dense 128->2
  const size_t expected = (128 * 8 + 128) + 4 * 128 + (256 * 128 * 5 + 256) +
                          4 * 256 + (128 * 256 * 3 + 128) + 4 * 128 + (128 * 2 + 2);
  EXPECT_EQ(expected, 265986u);
  for (size_t len : {5u, 30u}) {
    const CostReport r = MeasureCost(MakeAttackFcnSpec(len), len);
    EXPECT_EQ(r.param_count, 265986u);
    EXPECT_EQ(r.memory_bytes, 1063944u);
    EXPECT_NEAR(r.memory_bytes / 1e6, 1.06, 0.0106);
  }
}

TEST(CountMacsTest, LayerFormulas) {
  EXPECT_EQ(CountMacs(DenseSpec(10, 5)), 50u);
  EXPECT_EQ(CountMacs(NetworkSpec{{1, 5}, {Conv1D{1, 8, 3}}, 0}), 120u);
  // valid padding shrinks the output: (5 - 3 + 1) * 8 * 3
  EXPECT_EQ(CountMacs(NetworkSpec{{1, 5}, {Conv1D{1, 8, 3, Padding::kValid}}, 0}), 72u);
  EXPECT_EQ(CountMacs(NetworkSpec{{2, 4}, {BatchNorm1D{2}, ReLU{}, GlobalAvgPool1D{},
                                           Dense{2, 2}, Softmax{}}, 2}),
            4u);
}

TEST(CountMacsTest, DefaultAttackFcnHandSum) {
  const size_t at5 = 5 * 128 * 1 * 8 + 5 * 256 * 128 * 5 + 5 * 128 * 256 * 3 + 128 * 2;
  EXPECT_EQ(at5, 1316096u);
  EXPECT_EQ(CountMacs(MakeAttackFcnSpec(5), 5), at5);
  EXPECT_EQ(CountMacs(MakeAttackFcnSpec(5), 30),
            30 * (128 * 8 + 256 * 128 * 5 + 128 * 256 * 3) + 256u);
}

TEST(CountMacsTest, LinearInLengthForConvPrefix) {
  Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const size_t a = 1 + rng.Below(4), b = 1 + rng.Below(4), k = 1 + rng.Below(5);
    NetworkSpec spec{{a, 1}, {Conv1D{a, b, k}, BatchNorm1D{b}, ReLU{},
                              Conv1D{b, a, k}}, 0};
    const size_t l1 = 1 + rng.Below(50), l2 = 1 + rng.Below(50);
    const size_t m1 = CountMacs(spec, l1), m2 = CountMacs(spec, l2);
    EXPECT_EQ(m1 * l2, m2 * l1);
    EXPECT_EQ(m1, l1 * (a * b * k + b * a * k));
  }
}

TEST(CountMacsTest, RejectsWrongFlatLength) {
  EXPECT_EQ(KindOf([] { CountMacs(DenseSpec(10, 5), 9); }), ErrorKind::kInputShape);
}

TEST(CompareCostsTest, Ratios) {
  const CostComparison same = CompareCosts(MakeAttackFcnSpec(5), 5, MakeAttackFcnSpec(5), 5);
  EXPECT_EQ(same.param_ratio, 1.0);
  EXPECT_EQ(same.memory_ratio, 1.0);
  EXPECT_EQ(same.mac_ratio, 1.0);

  const CostComparison dense = CompareCosts(DenseSpec(10, 5), 10, DenseSpec(100, 50), 100);
  EXPECT_EQ(dense.a.param_count, 55u);
  EXPECT_EQ(dense.b.param_count, 5050u);
  EXPECT_DOUBLE_EQ(dense.memory_ratio, 5050.0 / 55.0);

  const CostComparison none = CompareCosts(NetworkSpec{{3}, {ReLU{}}, 0}, 3, DenseSpec(3, 1), 3);
  EXPECT_TRUE(std::isinf(none.param_ratio));
}

TEST(CompareCostsTest, BaselineInputDrivesMoreMacs) {
  // Criterion-4 sized MLP with five observed epochs.
  const NetworkSpec target = MakeMlpSpec(50, {256}, 20);
  const size_t len = BaselineInputSize(target.TrainableParamCount(),
                                       target.StageOutputSizes(), 5, 20);
  const CostComparison c = CompareCosts(MakeAttackFcnSpec(5), 5, MakeBaselineSpec(len), len);
  EXPECT_GT(c.b.macs, c.a.macs);
}

TEST(CountParamsTest, MatchesSerializedValueCount) {
  Rng rng(2);
  for (const NetworkSpec& spec : std::vector<NetworkSpec>
       {MakeMlpSpec(7, {5, 3}, 4), MakeAttackFcnSpec(6, AttackFcnSpec{{{{4, 3}, {3, 2}, {2, 2}}}}),
        MakeBaselineSpec(100)}) {
    CheckpointTrace one, two;
    one.spec = two.spec = spec;
    auto net = std::make_shared<Network>(Network::Initialized(spec, rng.NextU64()));
    one.snapshots.emplace(1, net);
    two.snapshots.emplace(1, net);
    two.snapshots.emplace(2, net);
    // Each extra snapshot adds its epoch (u32) and 4 bytes per stored value.
    const size_t delta = EncodeTrace(two).size() - EncodeTrace(one).size();
    EXPECT_EQ(delta, 4 + kBytesPerStoredValue * CountParams(spec));
  }
}

}  // namespace
}  // namespace fedmia
