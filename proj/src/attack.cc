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


#include "fedmia/attack.h"

#include <algorithm>
#include <cmath>

#include "fedmia/error.h"
#include "fedmia/loss.h"
#include "fedmia/rng.h"

namespace fedmia {
namespace {

constexpr size_t kEvalChunk = 512;

Tensor RowsOf(const Tensor& inputs, std::span<const size_t> rows) {
  Shape shape = inputs.shape();
  shape[0] = rows.size();
  Tensor out(shape);
  const size_t width = inputs.row_size();
  for (size_t r = 0; r < rows.size(); ++r) {
    std::span<const double> src = inputs.row(rows[r]);
    std::copy(src.begin(), src.end(), out.raw() + r * width);
  }
  return out;
}

void RequireBothClasses(const std::vector<bool>& member) {
  const size_t members = std::count(member.begin(), member.end(), true);
  Require(members > 0 && members < member.size(), ErrorKind::kValidation,
          "training set needs both members and non-members (got " +
              std::to_string(members) + " of " + std::to_string(member.size()) +
              ")");
}

}  // namespace

NetworkSpec MakeAttackFcnSpec(size_t input_len, const AttackFcnSpec& fcn) {
  Require(input_len >= 1, ErrorKind::kSpec, "attack input length must be >= 1");
  NetworkSpec spec;
  spec.input_shape = {1, input_len};
  size_t in = 1;
  for (const ConvBlock& b : fcn.blocks) {
    Require(b.channels > 0 && b.kernel > 0, ErrorKind::kSpec,
            "conv block needs positive channels and kernel");
    spec.layers.push_back(Conv1D{in, b.channels, b.kernel, Padding::kSame});
    spec.layers.push_back(BatchNorm1D{b.channels});
    spec.layers.push_back(ReLU{});
    in = b.channels;
  }
  spec.layers.push_back(GlobalAvgPool1D{});
  spec.layers.push_back(Dense{in, 2});
  spec.layers.push_back(Softmax{});
  spec.class_count = 2;
  spec.Validate();
  return spec;
}

Network BuildAttackFcn(size_t input_len, const AttackFcnSpec& fcn,
                       uint64_t seed) {
  return Network::Initialized(MakeAttackFcnSpec(input_len, fcn), seed);
}

void TrainHyperparams::Validate() const {
  Require(batch_size > 0 && epochs > 0, ErrorKind::kConfig,
          "batch_size and epochs must be positive");
  Require(std::isfinite(learning_rate) && learning_rate > 0.0,
          ErrorKind::kConfig, "learning_rate must be positive");
}

std::vector<double> TrainClassifier(Network& net, const Tensor& inputs,
                                    std::span<const size_t> labels,
                                    const TrainHyperparams& hp) {
  hp.Validate();
  Require(inputs.rows() == labels.size() && !labels.empty(),
          ErrorKind::kInputShape,
          std::to_string(inputs.rows()) + " inputs for " +
              std::to_string(labels.size()) + " labels");
  net.set_mode(Mode::kTrain);
  Optimizer opt(hp.optimizer, hp.learning_rate);
  std::vector<size_t> order(labels.size());
  std::vector<size_t> batch_labels;
  std::vector<double> losses;
  for (size_t epoch = 1; epoch <= hp.epochs; ++epoch) {
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(DeriveSeed(hp.seed, "train-shuffle", epoch));
    rng.Shuffle(std::span<size_t>(order));
    double total = 0.0;
    for (size_t start = 0; start < order.size(); start += hp.batch_size) {
      const size_t end = std::min(order.size(), start + hp.batch_size);
      std::span<const size_t> rows(order.data() + start, end - start);
      batch_labels.clear();
      for (size_t r : rows) batch_labels.push_back(labels[r]);
      net.Forward(RowsOf(inputs, rows));
      BackwardResult r = net.BackwardCrossEntropy(batch_labels);
      opt.Step(net, r.gradients);
      total += r.loss * static_cast<double>(rows.size());
    }
    losses.push_back(total / static_cast<double>(order.size()));
  }
  net.set_mode(Mode::kEval);
  return losses;
}

Network TrainAttack(const FeatureMatrix& train, const TrainHyperparams& hp,
                    const AttackFcnSpec& fcn, std::vector<double>* loss_log) {
  Require(train.rows() > 0 && train.width() > 0, ErrorKind::kValidation,
          "empty attack training set");
  RequireBothClasses(train.member);
  Network net = BuildAttackFcn(train.width(), fcn, DeriveSeed(hp.seed, "attack-init"));
  std::vector<double> losses =
      TrainClassifier(net, train.AsSeriesBatch(), train.MemberLabels(), hp);
  if (loss_log) *loss_log = std::move(losses);
  return net;
}

double PredictMembership(const Network& model, std::span<const double> row) {
  const Shape& in = model.spec().input_shape;
  Require(in.size() == 2 && in[0] == 1 && row.size() == in[1],
          ErrorKind::kInputShape,
          "trajectory of length " + std::to_string(row.size()) +
              " for a model expecting " + ShapeToString(in));
  const Tensor batch({1, 1, row.size()}, std::vector<double>(row.begin(), row.end()));
  return model.Evaluate(batch).scores[1];
}

std::vector<double> PredictMembership(const Network& model,
                                      const FeatureMatrix& features) {
  const Shape& in = model.spec().input_shape;
  Require(in.size() == 2 && in[0] == 1 && features.width() == in[1],
          ErrorKind::kInputShape,
          "features of width " + std::to_string(features.width()) +
              " for a model expecting " + ShapeToString(in));
  std::vector<double> out;
  out.reserve(features.rows());
  const size_t w = features.width();
  for (size_t start = 0; start < features.rows(); start += kEvalChunk) {
    const size_t n = std::min(features.rows() - start, kEvalChunk);
    Tensor batch({n, 1, w},
                 std::vector<double>(features.values.begin() + start * w,
                                     features.values.begin() + (start + n) * w));
    const Tensor scores = model.Evaluate(batch).scores;
    for (size_t r = 0; r < n; ++r) out.push_back(scores[r * 2 + 1]);
  }
  return out;
}

double Confusion::accuracy() const {
  Require(total() > 0, ErrorKind::kValidation, "accuracy of an empty test set");
  return static_cast<double>(true_positive + true_negative) /
         static_cast<double>(total());
}

Confusion ScoreDecisions(std::span<const double> member_probability,
                         const std::vector<bool>& is_member) {
  Require(member_probability.size() == is_member.size(), ErrorKind::kInputShape,
          "prediction and label counts differ");
  Require(!is_member.empty(), ErrorKind::kValidation, "empty test set");
  Confusion c;
  for (size_t i = 0; i < is_member.size(); ++i) {
    const bool predicted = member_probability[i] >= 0.5;
    if (is_member[i]) {
      ++(predicted ? c.true_positive : c.false_negative);
    } else {
      ++(predicted ? c.false_positive : c.true_negative);
    }
  }
  return c;
}

Confusion EvaluateAttack(const Network& model, const FeatureMatrix& test) {
  return ScoreDecisions(PredictMembership(model, test), test.member);
}

}  // namespace fedmia
