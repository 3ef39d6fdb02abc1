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


#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>

#include "fedmia/error.h"
#include "fedmia/features.h"
#include "fedmia/rng.h"
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

// Dense(in -> m) + softmax snapshots with the given weights.
CheckpointTrace LinearTrace(size_t in, size_t m,
                            const std::vector<std::vector<double>>& weights,
                            const std::vector<std::vector<double>>& biases) {
  CheckpointTrace t;
  t.spec = NetworkSpec{{in}, {Dense{in, m}, Softmax{}}, m};
  for (size_t k = 0; k < weights.size(); ++k) {
    auto net = std::make_shared<Network>(t.spec);
    net->params()[0] = Tensor({m, in}, weights[k]);
    net->params()[1] = Tensor({m}, biases[k]);
    net->set_mode(Mode::kEval);
    t.snapshots.emplace(10 * (k + 1), std::move(net));
  }
  return t;
}

TEST(TrajectoryTest, OneHotScorerGivesOnes) {
  // Huge bias on class 1 makes the scores one-hot to double precision.
  CheckpointTrace t = LinearTrace(2, 3, {std::vector<double>(6, 0.0)},
                                  {{-800.0, 800.0, -800.0}});
  std::vector<double> x{0.3, -0.1};
  EXPECT_EQ(TrueLabelTrajectory(t, x, 1), (std::vector<double>{1.0}));
  EXPECT_EQ(MaxScoreTrajectory(t, x), (std::vector<double>{1.0}));
  EXPECT_EQ(EntropyTrajectory(t, x), (std::vector<double>{0.0}));
}

TEST(TrajectoryTest, UniformScorer) {
  std::vector<std::vector<double>> w(3, std::vector<double>(20, 0.0));
  std::vector<std::vector<double>> b(3, std::vector<double>(10, 0.5));
  CheckpointTrace t = LinearTrace(2, 10, w, b);
  std::vector<double> x{1.0, 2.0};
  for (double v : TrueLabelTrajectory(t, x, 4)) EXPECT_NEAR(v, 0.1, 1e-15);
  for (double v : MaxScoreTrajectory(t, x)) EXPECT_NEAR(v, 0.1, 1e-15);
  for (double v : EntropyTrajectory(t, x)) EXPECT_NEAR(v, std::log(10.0), 1e-14);
}

TEST(TrajectoryTest, HandComputedTwoClassSoftmax) {
  // z = W x + b with x = (1, 2).
  CheckpointTrace t = LinearTrace(2, 2, {{1, 0, 0, 1}, {0.5, -0.5, 2, 0}},
                                  {{0, 0}, {0, 1}});
  std::vector<double> x{1.0, 2.0};
  auto p1 = [](double z0, double z1) { return 1.0 / (1.0 + std::exp(z0 - z1)); };
  std::vector<double> got = TrueLabelTrajectory(t, x, 1);
  ASSERT_EQ(got.size(), 2u);
  EXPECT_NEAR(got[0], p1(1.0, 2.0), 1e-15);
  EXPECT_NEAR(got[1], p1(-0.5, 3.0), 1e-15);
  EXPECT_EQ(KindOf([&] { TrueLabelTrajectory(t, x, 2); }), ErrorKind::kValidation);
}

TEST(EntropyTest, AnalyticValues) {
  EXPECT_EQ(ScoreEntropy(std::vector<double>{0, 1, 0}), 0.0);
  EXPECT_NEAR(ScoreEntropy(std::vector<double>(4, 0.25)), std::log(4.0), 1e-15);
  EXPECT_NEAR(ScoreEntropy(std::vector<double>{0.5, 0.5, 0, 0}), std::log(2.0),
              1e-15);
}

TEST(MaxScoreTest, PicksLargest) {
  CheckpointTrace t = LinearTrace(1, 3, {{0, 0, 0}},
                                  {{std::log(0.7), std::log(0.2), std::log(0.1)}});
  std::vector<double> x{1.0};
  EXPECT_NEAR(MaxScoreTrajectory(t, x)[0], 0.7, 1e-15);
}

struct Scenario {
  LabeledDataset data;
  CheckpointTrace trace;
  std::vector<AuxSample> samples;
};

Scenario RandomSetup(uint64_t seed) {
  Scenario s;
  s.data = GenerateSynthetic({5, 3, 8, 1.0, seed});
  s.trace.spec = MakeMlpSpec(3, {6}, 5);
  for (size_t e : {3, 7, 9, 12, 20}) {
    auto net = std::make_shared<Network>(Network::Initialized(s.trace.spec, seed * 31 + e));
    net->set_mode(Mode::kEval);
    s.trace.snapshots.emplace(e, std::move(net));
  }
  for (size_t i = 0; i < s.data.size(); i += 3) {
    s.samples.push_back({i, s.data.labels[i], i % 2 == 0});
  }
  return s;
}

TEST(ExtractFeaturesTest, ShapeAndInvariants) {
  for (uint64_t seed = 1; seed <= 10; ++seed) {
    Scenario s = RandomSetup(seed);
    FeatureMatrix tl = ExtractFeatures(s.trace, s.data, s.samples, FeatureKind::kTrueLabel);
    FeatureMatrix en = ExtractFeatures(s.trace, s.data, s.samples, FeatureKind::kEntropy);
    FeatureMatrix mx = ExtractFeatures(s.trace, s.data, s.samples, FeatureKind::kMaxScore);
    ASSERT_EQ(tl.rows(), s.samples.size());
    EXPECT_EQ(tl.width(), 5u);
    EXPECT_EQ(tl.epochs, (std::vector<size_t>{3, 7, 9, 12, 20}));
    for (size_t i = 0; i < tl.values.size(); ++i) {
      EXPECT_GE(tl.values[i], 0.0);
      EXPECT_LE(tl.values[i], mx.values[i]);
      EXPECT_LE(mx.values[i], 1.0);
      EXPECT_GE(en.values[i], 0.0);
      EXPECT_LE(en.values[i], std::log(5.0));
    }
    for (size_t r = 0; r < tl.rows(); ++r) {
      EXPECT_EQ(tl.sample_ids[r], s.samples[r].index);
      EXPECT_EQ(tl.member[r], s.samples[r].member);
      const std::vector<double> single =
          TrueLabelTrajectory(s.trace, s.data.row(s.samples[r].index), s.samples[r].label);
      ASSERT_EQ(single.size(), tl.width());
      for (size_t k = 0; k < single.size(); ++k) {
        EXPECT_NEAR(tl.row(r)[k], single[k], 1e-12);
      }
    }
  }
}

TEST(ExtractFeaturesTest, OrderInvariantAndTraceUntouched) {
  Scenario s = RandomSetup(4);
  const Tensor probe = GatherInputs(s.data, std::vector<size_t>{0, 1, 2});
  const Tensor before = s.trace.at(9).Evaluate(probe).scores;
  FeatureMatrix a = ExtractFeatures(s.trace, s.data, s.samples, FeatureKind::kEntropy);
  std::vector<AuxSample> reversed(s.samples.rbegin(), s.samples.rend());
  FeatureMatrix b = ExtractFeatures(s.trace, s.data, reversed, FeatureKind::kEntropy);
  const size_t n = a.rows();
  for (size_t r = 0; r < n; ++r) {
    EXPECT_EQ(std::vector<double>(a.row(r).begin(), a.row(r).end()),
              std::vector<double>(b.row(n - 1 - r).begin(), b.row(n - 1 - r).end()));
  }
  EXPECT_EQ(s.trace.at(9).Evaluate(probe).scores, before);
}

TEST(ExtractFeaturesTest, LabelFreeAdversaryCannotUseTrueLabel) {
  Scenario s = RandomSetup(2);
  EXPECT_EQ(KindOf([&] {
              ExtractFeatures(s.trace, s.data, s.samples, FeatureKind::kTrueLabel,
                              false);
            }),
            ErrorKind::kCapability);
  EXPECT_NO_THROW(ExtractFeatures(s.trace, s.data, s.samples,
                                  FeatureKind::kMaxScore, false));
}

TEST(FeatureCsvTest, RoundTripIsLossless) {
  Scenario s = RandomSetup(6);
  FeatureMatrix f = ExtractFeatures(s.trace, s.data, s.samples, FeatureKind::kTrueLabel);
  f.values[0] = 1.0 / 3.0;
  f.values[1] = 5e-320;  // subnormal
  const auto path = (std::filesystem::temp_directory_path() / "fedmia_f.csv").string();
  SaveFeaturesCsv(f, path);
  FeatureMatrix back = LoadFeaturesCsv(path, f.kind, f.epochs);
  EXPECT_EQ(back, f);
  EXPECT_EQ(KindOf([&] { LoadFeaturesCsv(path, f.kind, {1, 2}); }), ErrorKind::kParse);
}

TEST(FeatureKindTest, ParseAndPrint) {
  for (FeatureKind k : {FeatureKind::kTrueLabel, FeatureKind::kEntropy,
                        FeatureKind::kMaxScore}) {
    EXPECT_EQ(ParseFeatureKind(ToString(k)), k);
  }
  EXPECT_EQ(KindOf([] { ParseFeatureKind("loss"); }), ErrorKind::kConfig);
}

}  // namespace
}  // namespace fedmia
