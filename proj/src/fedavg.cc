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


#include "fedmia/fedavg.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "fedmia/error.h"
#include "fedmia/rng.h"

namespace fedmia {
namespace {

constexpr size_t kEvalChunk = 1024;

std::string FormatReal(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void FLConfig::Validate() const {
  auto check = [](bool ok, const std::string& msg) {
    Require(ok, ErrorKind::kConfig, msg);
  };
  check(n_clients >= 1, "n_clients must be >= 1");
  check(weights.size() == n_clients,
        "expected " + std::to_string(n_clients) + " client weights, got " +
            std::to_string(weights.size()));
  double total = 0.0;
  for (double w : weights) {
    check(std::isfinite(w) && w > 0.0, "client weights must be positive");
    total += w;
  }
  check(std::abs(total - 1.0) <= 1e-12,
        "client weights sum to " + FormatReal(total) + ", expected 1");
  check(rounds >= 1, "rounds must be >= 1");
  check(local_epochs >= 1, "local_epochs must be >= 1");
  check(batch_size >= 1, "batch_size must be >= 1");
  check(!lr_schedule.empty(), "lr_schedule is empty");
  check(lr_schedule.front().from_epoch == 1,
        "lr_schedule must start at epoch 1");
  for (size_t i = 0; i < lr_schedule.size(); ++i) {
    check(std::isfinite(lr_schedule[i].learning_rate) &&
              lr_schedule[i].learning_rate >= 0.0,
          "learning rates must be finite and non-negative");
    if (i > 0) {
      check(lr_schedule[i].from_epoch > lr_schedule[i - 1].from_epoch,
            "lr_schedule epochs must be strictly increasing");
    }
  }
  check(!observed_epochs.empty(), "observed_epochs is empty");
  for (size_t i = 0; i < observed_epochs.size(); ++i) {
    check(observed_epochs[i] >= 1 && observed_epochs[i] <= rounds,
          "observed epoch " + std::to_string(observed_epochs[i]) +
              " outside [1, " + std::to_string(rounds) + "]");
    if (i > 0) {
      check(observed_epochs[i] > observed_epochs[i - 1],
            "observed_epochs must be strictly increasing");
    }
  }
  check(target_client < n_clients, "target_client out of range");
}

double FLConfig::LearningRateAt(size_t round) const {
  double lr = lr_schedule.front().learning_rate;
  for (const LrStage& s : lr_schedule) {
    if (s.from_epoch <= round) lr = s.learning_rate;
  }
  return lr;
}

std::vector<double> FLConfig::UniformWeights(size_t n) {
  return std::vector<double>(n, 1.0 / static_cast<double>(n));
}

uint64_t LocalShuffleSeed(uint64_t seed, size_t round, size_t client,
                          size_t epoch) {
  return DeriveSeed(
      DeriveSeed(DeriveSeed(seed, "round", round), "client", client), "epoch",
      epoch);
}

Network LocalUpdate(const LabeledDataset& data,
                    std::span<const size_t> indices, const Network& global,
                    const FLConfig& config, size_t round, size_t client) {
  Require(!indices.empty(), ErrorKind::kValidation,
          "client " + std::to_string(client) + " has no data");
  Require(config.batch_size >= 1, ErrorKind::kConfig, "batch_size must be >= 1");
  Network net = global;
  const Mode original_mode = net.mode();
  net.set_mode(Mode::kTrain);
  Optimizer opt(config.optimizer, config.LearningRateAt(round));
  std::vector<size_t> order;
  for (size_t epoch = 1; epoch <= config.local_epochs; ++epoch) {
    order.assign(indices.begin(), indices.end());
    Rng rng(LocalShuffleSeed(config.seed, round, client, epoch));
    rng.Shuffle(std::span<size_t>(order));
    for (size_t start = 0; start < order.size(); start += config.batch_size) {
      const size_t end = std::min(order.size(), start + config.batch_size);
      std::span<const size_t> batch(order.data() + start, end - start);
      net.Forward(GatherInputs(data, batch));
      BackwardResult r = net.BackwardCrossEntropy(GatherLabels(data, batch));
      opt.Step(net, r.gradients);
    }
  }
  net.set_mode(original_mode);
  return net;
}

Network Aggregate(std::span<const Network> models,
                  std::span<const double> weights) {
  Require(!models.empty(), ErrorKind::kValidation, "nothing to aggregate");
  Require(models.size() == weights.size(), ErrorKind::kValidation,
          "got " + std::to_string(models.size()) + " models and " +
              std::to_string(weights.size()) + " weights");
  double total = 0.0;
  for (double w : weights) {
    Require(std::isfinite(w) && w > 0.0, ErrorKind::kValidation,
            "aggregation weights must be positive");
    total += w;
  }
  Require(std::abs(total - 1.0) <= 1e-12, ErrorKind::kValidation,
          "aggregation weights sum to " + FormatReal(total) + ", expected 1");
  for (const Network& m : models) {
    Require(m.spec() == models[0].spec(), ErrorKind::kSpec,
            "cannot aggregate models with different specs");
  }
  Network out = models[0];
  auto accumulate = [&](auto get) {
    std::vector<Tensor>& dst = get(out);
    for (size_t t = 0; t < dst.size(); ++t) {
      double* d = dst[t].raw();
      const double* first = get(models[0])[t].raw();
      for (size_t j = 0; j < dst[t].size(); ++j) d[j] = weights[0] * first[j];
      for (size_t k = 1; k < models.size(); ++k) {
        const double* src = get(models[k])[t].raw();
        for (size_t j = 0; j < dst[t].size(); ++j) d[j] += weights[k] * src[j];
      }
    }
  };
  accumulate([](auto& n) -> auto& { return n.params(); });
  accumulate([](auto& n) -> auto& { return n.state(); });
  return out;
}

double ClassificationAccuracy(const Network& net, const LabeledDataset& data,
                              std::span<const size_t> indices) {
  Require(!indices.empty(), ErrorKind::kValidation,
          "accuracy over an empty set");
  size_t correct = 0;
  for (size_t start = 0; start < indices.size(); start += kEvalChunk) {
    const size_t end = std::min(indices.size(), start + kEvalChunk);
    std::span<const size_t> chunk = indices.subspan(start, end - start);
    const Tensor scores = net.Evaluate(GatherInputs(data, chunk)).scores;
    for (size_t r = 0; r < chunk.size(); ++r) {
      std::span<const double> row = scores.row(r);
      const size_t pred = static_cast<size_t>(
          std::max_element(row.begin(), row.end()) - row.begin());
      if (pred == data.labels[chunk[r]]) ++correct;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(indices.size());
}

std::vector<size_t> CheckpointTrace::epochs() const {
  std::vector<size_t> out;
  for (const auto& [epoch, net] : snapshots) out.push_back(epoch);
  return out;
}

const Network& CheckpointTrace::at(size_t epoch) const {
  auto it = snapshots.find(epoch);
  Require(it != snapshots.end(), ErrorKind::kValidation,
          "trace has no snapshot for epoch " + std::to_string(epoch));
  return *it->second;
}

CheckpointTrace CheckpointTrace::Select(std::span<const size_t> epochs) const {
  CheckpointTrace out;
  out.target_client = target_client;
  out.spec = spec;
  for (size_t e : epochs) {
    auto it = snapshots.find(e);
    Require(it != snapshots.end(), ErrorKind::kValidation,
            "trace has no snapshot for epoch " + std::to_string(e));
    out.snapshots.emplace(e, it->second);
  }
  return out;
}

FedAvgResult RunFedAvg(const FLConfig& config, const LabeledDataset& data,
                       std::span<const Partition> partitions,
                       const NetworkSpec& spec,
                       std::span<const size_t> test_indices) {
  config.Validate();
  spec.Validate();
  Require(partitions.size() == config.n_clients, ErrorKind::kConfig,
          std::to_string(partitions.size()) + " partitions for " +
              std::to_string(config.n_clients) + " clients");
  Require(spec.input_shape == Shape{data.feature_dim}, ErrorKind::kSpec,
          "model input " + ShapeToString(spec.input_shape) +
              " does not match feature dimension " +
              std::to_string(data.feature_dim));

  FedAvgResult result{Network::Initialized(spec, DeriveSeed(config.seed, "init")),
                      {}, {}};
  result.trace.target_client = config.target_client;
  result.trace.spec = spec;
  std::vector<size_t> observed = config.observed_epochs;

  std::vector<Network> updated;
  updated.reserve(config.n_clients);
  for (size_t round = 1; round <= config.rounds; ++round) {
    updated.clear();
    for (size_t c = 0; c < config.n_clients; ++c) {
      updated.push_back(LocalUpdate(data, partitions[c].indices, result.global,
                                    config, round, c));
    }
    const Network& target = updated[config.target_client];
    if (std::binary_search(observed.begin(), observed.end(), round)) {
      auto snapshot = std::make_shared<Network>(target);
      snapshot->set_mode(Mode::kEval);
      result.trace.snapshots.emplace(round, std::move(snapshot));
    }
    RoundAccuracy acc;
    acc.round = round;
    acc.train_acc = ClassificationAccuracy(
        target, data, partitions[config.target_client].indices);
    if (!test_indices.empty()) {
      acc.test_acc = ClassificationAccuracy(target, data, test_indices);
    }
    result.log.push_back(acc);
    result.global = Aggregate(updated, config.weights);
  }
  return result;
}

void WriteAccuracyLog(const std::string& path,
                      std::span<const RoundAccuracy> log) {
  std::ofstream out(path, std::ios::binary);
  Require(out.good(), ErrorKind::kIo, "cannot write " + path);
  out << "round,train_acc,test_acc\n";
  for (const RoundAccuracy& r : log) {
    out << r.round << ',' << FormatReal(r.train_acc) << ','
        << (r.test_acc ? FormatReal(*r.test_acc) : "") << '\n';
  }
  Require(out.good(), ErrorKind::kIo, "failed writing " + path);
}

std::vector<RoundAccuracy> ReadAccuracyLog(const std::string& path) {
  std::ifstream in(path);
  Require(in.good(), ErrorKind::kIo, "cannot open accuracy log " + path);
  std::string line;
  std::getline(in, line);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  Require(line == "round,train_acc,test_acc", ErrorKind::kParse,
          path + ": unexpected header '" + line + "'");
  std::vector<RoundAccuracy> log;
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string round, train, test;
    std::getline(ss, round, ',');
    std::getline(ss, train, ',');
    std::getline(ss, test);
    RoundAccuracy r;
    try {
      size_t pos = 0;
      r.round = std::stoul(round, &pos);
      r.train_acc = std::stod(train);
      if (!test.empty()) r.test_acc = std::stod(test);
    } catch (const std::exception&) {
      Fail(ErrorKind::kParse, path + ":" + std::to_string(line_no) +
                                  ": malformed accuracy row");
    }
    log.push_back(r);
  }
  return log;
}

}  // namespace fedmia
