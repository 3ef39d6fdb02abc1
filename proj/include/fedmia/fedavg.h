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


#ifndef FEDMIA_FEDAVG_H_
#define FEDMIA_FEDAVG_H_

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fedmia/dataset.h"
#include "fedmia/network.h"
#include "fedmia/optimizer.h"

namespace fedmia {

// Learning rate used from round `from_epoch` (1-based) until the next stage.
struct LrStage {
  size_t from_epoch = 1;
  double learning_rate = 0.001;

  friend bool operator==(const LrStage&, const LrStage&) = default;
};

struct FLConfig {
  size_t n_clients = 4;
  std::vector<double> weights;  // p_c, one per client
  size_t rounds = 100;
  size_t local_epochs = 1;
  size_t batch_size = 100;
  std::vector<LrStage> lr_schedule = {{1, 0.001}};
  OptimizerKind optimizer = OptimizerKind::kAdam;
  std::vector<size_t> observed_epochs;
  size_t target_client = 0;
  uint64_t seed = 0;

  // kConfig on any violated invariant.
  void Validate() const;
  double LearningRateAt(size_t round) const;

  // Equal weights for n clients.
  static std::vector<double> UniformWeights(size_t n);
};

// Seed of the shuffle used by `client` in local epoch `epoch` of `round`.
uint64_t LocalShuffleSeed(uint64_t seed, size_t round, size_t client,
                          size_t epoch);

// local_epochs passes of mini-batch training on `indices`, starting from a
// copy of `global` with a fresh optimizer. Every epoch visits `indices` in
// the order given by shuffling the list as passed with
// LocalShuffleSeed(seed, round, client, epoch). The last batch of an epoch
// may be smaller than batch_size. The result keeps the mode of `global`.
Network LocalUpdate(const LabeledDataset& data,
                    std::span<const size_t> indices, const Network& global,
                    const FLConfig& config, size_t round, size_t client);

// Weighted parameter-wise average, accumulated in the given order. Running
// statistics are averaged the same way.
Network Aggregate(std::span<const Network> models,
                  std::span<const double> weights);

// Fraction of `indices` whose arg-max score equals the label.
double ClassificationAccuracy(const Network& net, const LabeledDataset& data,
                              std::span<const size_t> indices);

// Frozen eval-mode copies of the target client's uplink models.
struct CheckpointTrace {
  size_t target_client = 0;
  NetworkSpec spec;
  std::map<size_t, std::shared_ptr<const Network>> snapshots;

  std::vector<size_t> epochs() const;
  const Network& at(size_t epoch) const;
  // Restriction to a subset of the captured epochs.
  CheckpointTrace Select(std::span<const size_t> epochs) const;
};

struct RoundAccuracy {
  size_t round = 0;
  double train_acc = 0.0;
  std::optional<double> test_acc;
};

struct FedAvgResult {
  Network global;
  CheckpointTrace trace;
  std::vector<RoundAccuracy> log;
};

// FedAvg over `partitions` (client id = position). Each round broadcasts the
// global model, runs every client's LocalUpdate in ascending id order,
// snapshots the target client's model when the round is observed, and
// averages. Train accuracy is the target model on its own partition, test
// accuracy is the target model on `test_indices` when given.
FedAvgResult RunFedAvg(const FLConfig& config, const LabeledDataset& data,
                       std::span<const Partition> partitions,
                       const NetworkSpec& spec,
                       std::span<const size_t> test_indices = {});

// CSV with header round,train_acc,test_acc.
void WriteAccuracyLog(const std::string& path,
                      std::span<const RoundAccuracy> log);
std::vector<RoundAccuracy> ReadAccuracyLog(const std::string& path);

}  // namespace fedmia

#endif  // FEDMIA_FEDAVG_H_
