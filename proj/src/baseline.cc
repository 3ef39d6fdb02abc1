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


#include "fedmia/baseline.h"

#include <algorithm>
#include <cerrno>
#include <cstdlib>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>

#include "fedmia/error.h"
#include "fedmia/optimizer.h"
#include "fedmia/rng.h"

namespace fedmia {
namespace {

constexpr size_t kEvalChunk = 32;

Tensor SeriesBatch(const BaselineInputs& in, std::span<const size_t> rows) {
  Tensor out({rows.size(), 1, in.width});
  double* dst = out.raw();
  for (size_t r : rows) {
    for (float v : in.row(r)) *dst++ = v;
  }
  return out;
}

}  // namespace

size_t BaselineInputSize(size_t d, std::span<const size_t> layer_sizes,
                         size_t n_targets, size_t m) {
  Require(n_targets >= 1, ErrorKind::kValidation, "need at least one target model");
  const size_t per_model =
      d + 1 + std::accumulate(layer_sizes.begin(), layer_sizes.end(), size_t{0});
  return per_model * n_targets + m;
}

std::vector<double> BuildBaselineInput(const CheckpointTrace& trace,
                                       std::span<const double> x, size_t y) {
  Require(!trace.snapshots.empty(), ErrorKind::kValidation, "trace is empty");
  const NetworkSpec& spec = trace.spec;
  const size_t m = spec.class_count;
  Require(m > 0, ErrorKind::kSpec, "trace models are not classifiers");
  Require(y < m, ErrorKind::kValidation,
          "label " + std::to_string(y) + " outside [0, " + std::to_string(m) + ")");
  Require(x.size() == ShapeSize(spec.input_shape), ErrorKind::kInputShape,
          "sample has " + std::to_string(x.size()) + " features, model expects " +
              ShapeToString(spec.input_shape));
  const std::vector<size_t> stage_sizes = spec.StageOutputSizes();
  std::set<size_t> taps;
  for (size_t s = 1; s <= stage_sizes.size(); ++s) taps.insert(s);

  Shape shape{1};
  shape.insert(shape.end(), spec.input_shape.begin(), spec.input_shape.end());
  const Tensor batch(shape, std::vector<double>(x.begin(), x.end()));
  const size_t labels[1] = {y};

  std::vector<double> out;
  out.reserve(BaselineInputSize(spec.TrainableParamCount(), stage_sizes,
                                trace.snapshots.size(), m));
  for (const auto& [epoch, snapshot] : trace.snapshots) {
    Network net = *snapshot;
    ForwardResult fwd = net.Forward(batch, taps);
    BackwardResult bwd = net.BackwardCrossEntropy(labels);
    for (const Tensor& g : bwd.gradients) {
      out.insert(out.end(), g.data().begin(), g.data().end());
    }
    out.push_back(bwd.loss);
    for (const auto& [stage, t] : fwd.taps) {
      out.insert(out.end(), t.data().begin(), t.data().end());
    }
  }
  for (size_t c = 0; c < m; ++c) out.push_back(c == y ? 1.0 : 0.0);
  return out;
}

BaselineInputs BuildBaselineInputs(const CheckpointTrace& trace,
                                   const LabeledDataset& data,
                                   std::span<const AuxSample> samples,
                                   bool labels_available) {
  if (!labels_available) {
    Fail(ErrorKind::kCapability,
         "the white-box baseline needs sample labels, which this adversary lacks");
  }
  Require(!samples.empty(), ErrorKind::kValidation, "no samples for the baseline");
  BaselineInputs out;
  out.width = BaselineInputSize(trace.spec.TrainableParamCount(),
                                trace.spec.StageOutputSizes(),
                                trace.snapshots.size(), trace.spec.class_count);
  out.values.reserve(out.width * samples.size());
  for (const AuxSample& s : samples) {
    Require(s.index < data.size(), ErrorKind::kValidation,
            "sample " + std::to_string(s.index) + " outside the dataset");
    const std::vector<double> row = BuildBaselineInput(trace, data.row(s.index), s.label);
    for (double v : row) out.values.push_back(static_cast<float>(v));
    out.sample_ids.push_back(s.index);
    out.member.push_back(s.member);
  }
  return out;
}

void SaveBaselineCsv(const BaselineInputs& inputs, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  Require(out.good(), ErrorKind::kIo, "cannot write " + path);
  out << "sample_id,member";
  for (size_t k = 1; k <= inputs.width; ++k) out << ",f_" << k;
  out << '\n';
  char buf[32];
  for (size_t r = 0; r < inputs.rows(); ++r) {
    out << inputs.sample_ids[r] << ',' << (inputs.member[r] ? 1 : 0);
    for (float v : inputs.row(r)) {
      std::snprintf(buf, sizeof(buf), "%.9g", static_cast<double>(v));
      out << ',' << buf;
    }
    out << '\n';
  }
  Require(out.good(), ErrorKind::kIo, "failed writing " + path);
}

BaselineInputs LoadBaselineCsv(const std::string& path, size_t width) {
  std::ifstream in(path, std::ios::binary);
  Require(in.good(), ErrorKind::kIo, "cannot open baseline file " + path);
  BaselineInputs out;
  out.width = width;
  std::string line;
  std::getline(in, line);
  std::string expected = "sample_id,member";
  for (size_t k = 1; k <= width; ++k) expected += ",f_" + std::to_string(k);
  Require(line == expected, ErrorKind::kParse,
          path + ":1: header does not list " + std::to_string(width) + " features");
  for (size_t line_no = 2; std::getline(in, line); ++line_no) {
    if (line.empty()) continue;
    auto fail = [&](const std::string& what) {
      Fail(ErrorKind::kParse, path + ":" + std::to_string(line_no) + ": " + what);
    };
    const char* p = line.c_str();
    char* end = nullptr;
    errno = 0;
    const unsigned long long id = std::strtoull(p, &end, 10);
    if (end == p || *end != ',' || errno != 0) fail("bad sample_id");
    p = end + 1;
    if ((p[0] != '0' && p[0] != '1') || p[1] != ',') fail("member must be 0 or 1");
    out.sample_ids.push_back(static_cast<size_t>(id));
    out.member.push_back(p[0] == '1');
    p += 2;
    for (size_t k = 0; k < width; ++k) {
      const float v = std::strtof(p, &end);
      if (end == p) fail("bad value in field " + std::to_string(k + 3));
      out.values.push_back(v);
      p = end;
      if (k + 1 < width) {
        if (*p != ',') fail("wrong field count");
        ++p;
      }
    }
    if (*p != '\0') fail("wrong field count");
  }
  return out;
}

NetworkSpec MakeBaselineSpec(size_t input_len, const BaselineSpec& b) {
  Require(input_len >= 1 && b.channels > 0 && b.kernel > 0 && b.pool > 0,
          ErrorKind::kSpec, "baseline network needs positive sizes");
  NetworkSpec spec;
  spec.input_shape = {1, input_len};
  size_t len = input_len;
  size_t in = 1;
  for (int block = 0; block < 2; ++block) {
    spec.layers.push_back(Conv1D{in, b.channels, b.kernel, Padding::kSame});
    spec.layers.push_back(ReLU{});
    const size_t window = std::min(b.pool, len);
    spec.layers.push_back(AvgPool1D{window});
    len /= window;
    in = b.channels;
  }
  spec.layers.push_back(Dense{in * len, 1});
  spec.Validate();
  return spec;
}

Network TrainBaselineAttack(const BaselineInputs& train,
                            const BaselineHyperparams& hp,
                            const BaselineSpec& spec,
                            std::vector<double>* loss_log) {
  Require(hp.batch_size > 0 && hp.epochs > 0 && hp.learning_rate > 0.0,
          ErrorKind::kConfig, "baseline hyperparameters must be positive");
  const size_t members = std::count(train.member.begin(), train.member.end(), true);
  Require(members > 0 && members < train.rows(), ErrorKind::kValidation,
          "baseline training set needs both members and non-members");
  Network net = Network::Initialized(MakeBaselineSpec(train.width, spec),
                                     DeriveSeed(hp.seed, "baseline-init"));
  Optimizer opt(OptimizerKind::kAdam, hp.learning_rate);
  std::vector<size_t> order(train.rows());
  std::vector<double> losses;
  for (size_t epoch = 1; epoch <= hp.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), size_t{0});
    Rng rng(DeriveSeed(hp.seed, "baseline-shuffle", epoch));
    rng.Shuffle(std::span<size_t>(order));
    double total = 0.0;
    for (size_t start = 0; start < order.size(); start += hp.batch_size) {
      const size_t n = std::min(hp.batch_size, order.size() - start);
      std::span<const size_t> rows(order.data() + start, n);
      Tensor target({n, 1});
      for (size_t i = 0; i < n; ++i) target[i] = train.member[rows[i]] ? 1.0 : 0.0;
      net.Forward(SeriesBatch(train, rows));
      BackwardResult r = net.BackwardMse(target);
      opt.Step(net, r.gradients);
      total += r.loss * static_cast<double>(n);
    }
    losses.push_back(total / static_cast<double>(order.size()));
  }
  net.set_mode(Mode::kEval);
  if (loss_log) *loss_log = std::move(losses);
  return net;
}

std::vector<double> PredictBaseline(const Network& model,
                                    const BaselineInputs& inputs) {
  Require(model.spec().input_shape == Shape{1, inputs.width},
          ErrorKind::kInputShape,
          "baseline rows of width " + std::to_string(inputs.width) +
              " for a model expecting " + ShapeToString(model.spec().input_shape));
  std::vector<double> out;
  std::vector<size_t> rows;
  for (size_t start = 0; start < inputs.rows(); start += kEvalChunk) {
    const size_t n = std::min(kEvalChunk, inputs.rows() - start);
    rows.resize(n);
    std::iota(rows.begin(), rows.end(), start);
    const Tensor scores = model.Evaluate(SeriesBatch(inputs, rows)).scores;
    out.insert(out.end(), scores.data().begin(), scores.data().end());
  }
  return out;
}

Confusion EvaluateBaseline(const Network& model, const BaselineInputs& test) {
  return ScoreDecisions(PredictBaseline(model, test), test.member);
}

}  // namespace fedmia
