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


#include "fedmia/experiment.h"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "fedmia/error.h"
#include "fedmia/rng.h"
#include "json.hpp"
#include "json_reader.h"

namespace fedmia {
namespace {

using nlohmann::json;
using internal::ObjectReader;

template <typename F>
auto Reparse(const std::string& where, F&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kConfig) throw;
    Fail(ErrorKind::kConfig, where + ": " + e.what());
  }
}

json DatasetJson(const DatasetConfig& d) {
  json j;
  j["kind"] = d.kind == DatasetKind::kSynthetic ? "synthetic" : "purchase";
  j["holdout"] = d.holdout;
  if (d.kind == DatasetKind::kSynthetic) {
    j["classes"] = d.synthetic.classes;
    j["dim"] = d.synthetic.dim;
    j["per_class"] = d.synthetic.per_class;
    j["cluster_spread"] = d.synthetic.cluster_spread;
  } else {
    j["path"] = d.path;
    j["feature_dim"] = d.feature_dim;
    j["class_count"] = d.class_count;
  }
  return j;
}

json FlJson(const FLConfig& fl) {
  json j;
  j["n_clients"] = fl.n_clients;
  j["weights"] = fl.weights;
  j["rounds"] = fl.rounds;
  j["local_epochs"] = fl.local_epochs;
  j["batch_size"] = fl.batch_size;
  json stages = json::array();
  for (const LrStage& s : fl.lr_schedule) {
    stages.push_back({{"from_epoch", s.from_epoch}, {"learning_rate", s.learning_rate}});
  }
  j["lr_schedule"] = stages;
  j["optimizer"] = std::string(ToString(fl.optimizer));
  j["observed_epochs"] = fl.observed_epochs;
  j["target_client"] = fl.target_client;
  return j;
}

json ConfigJson(const ExperimentConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["out_dir"] = c.out_dir;
  j["dataset"] = DatasetJson(c.dataset);
  j["target_model"] = {{"hidden", c.hidden}};
  j["fl"] = FlJson(c.fl);
  j["auxiliary"] = {{"member_train", c.aux.member_train},
                    {"nonmember_train", c.aux.nonmember_train},
                    {"member_test", c.aux.member_test},
                    {"nonmember_test", c.aux.nonmember_test},
                    {"labels_available", c.labels_available}};
  json blocks = json::array();
  for (const ConvBlock& b : c.fcn.blocks) {
    blocks.push_back({{"channels", b.channels}, {"kernel", b.kernel}});
  }
  j["attack"] = {{"kind", std::string(ToString(c.attack))},
                 {"optimizer", std::string(ToString(c.attack_hp.optimizer))},
                 {"batch_size", c.attack_hp.batch_size},
                 {"learning_rate", c.attack_hp.learning_rate},
                 {"epochs", c.attack_hp.epochs},
                 {"blocks", blocks}};
  j["baseline"] = {{"batch_size", c.baseline_hp.batch_size},
                   {"learning_rate", c.baseline_hp.learning_rate},
                   {"epochs", c.baseline_hp.epochs},
                   {"channels", c.baseline.channels},
                   {"kernel", c.baseline.kernel},
                   {"pool", c.baseline.pool}};
  j["sweep"] = {{"epoch_sets", c.sweep.epoch_sets},
                {"include_baseline", c.sweep.include_baseline},
                {"window", c.sweep.window},
                {"window_stride", c.sweep.window_stride},
                {"window_epochs", c.sweep.window_epochs}};
  return j;
}

std::string Digest(const json& j) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, DeriveSeed(0, j.dump()));
  return buf;
}

void ParseDataset(ObjectReader r, DatasetConfig& d, const std::string& base_dir) {
  std::string kind = "synthetic";
  r.Read("kind", kind);
  if (kind == "synthetic") {
    d.kind = DatasetKind::kSynthetic;
    r.Read("classes", d.synthetic.classes);
    r.Read("dim", d.synthetic.dim);
    r.Read("per_class", d.synthetic.per_class);
    r.Read("cluster_spread", d.synthetic.cluster_spread);
  } else if (kind == "purchase") {
    d.kind = DatasetKind::kPurchase;
    r.Read("path", d.path);
    Require(!d.path.empty(), ErrorKind::kConfig, "dataset.path is required for purchase data");
    if (!base_dir.empty() && std::filesystem::path(d.path).is_relative()) {
      d.path = (std::filesystem::path(base_dir) / d.path).lexically_normal().string();
    }
    r.Read("feature_dim", d.feature_dim);
    r.Read("class_count", d.class_count);
  } else {
    Fail(ErrorKind::kConfig,
         "dataset.kind '" + kind + "' is not one of synthetic|purchase");
  }
  r.Read("holdout", d.holdout);
  r.Finish();
}

void ParseFl(ObjectReader r, FLConfig& fl) {
  r.Read("n_clients", fl.n_clients);
  r.Read("weights", fl.weights);
  r.Read("rounds", fl.rounds);
  r.Read("local_epochs", fl.local_epochs);
  r.Read("batch_size", fl.batch_size);
  if (r.Has("lr_schedule")) {
    const json& stages = r.Raw("lr_schedule");
    Require(stages.is_array(), ErrorKind::kConfig, "fl.lr_schedule must be an array");
    fl.lr_schedule.clear();
    for (size_t i = 0; i < stages.size(); ++i) {
      ObjectReader s(stages[i], "fl.lr_schedule[" + std::to_string(i) + "]");
      LrStage stage;
      s.Read("from_epoch", stage.from_epoch);
      s.Read("learning_rate", stage.learning_rate);
      s.Finish();
      fl.lr_schedule.push_back(stage);
    }
  }
  if (r.Has("optimizer")) {
    std::string name;
    r.Read("optimizer", name);
    fl.optimizer = ParseOptimizerKind(name);
  }
  r.Read("observed_epochs", fl.observed_epochs);
  r.Read("target_client", fl.target_client);
  r.Finish();
}

void ParseAttack(ObjectReader r, ExperimentConfig& c) {
  if (r.Has("kind")) {
    std::string kind;
    r.Read("kind", kind);
    c.attack = ParseAttackKind(kind);
  }
  if (r.Has("optimizer")) {
    std::string name;
    r.Read("optimizer", name);
    c.attack_hp.optimizer = ParseOptimizerKind(name);
  }
  r.Read("batch_size", c.attack_hp.batch_size);
  r.Read("learning_rate", c.attack_hp.learning_rate);
  r.Read("epochs", c.attack_hp.epochs);
  if (r.Has("blocks")) {
    const json& blocks = r.Raw("blocks");
    Require(blocks.is_array() && blocks.size() == c.fcn.blocks.size(), ErrorKind::kConfig,
            "attack.blocks must list exactly " + std::to_string(c.fcn.blocks.size()) +
                " blocks");
    for (size_t i = 0; i < blocks.size(); ++i) {
      ObjectReader b(blocks[i], "attack.blocks[" + std::to_string(i) + "]");
      b.Read("channels", c.fcn.blocks[i].channels);
      b.Read("kernel", c.fcn.blocks[i].kernel);
      b.Finish();
    }
  }
  r.Finish();
}

FLConfig ResolvedFl(const ExperimentConfig& c) {
  FLConfig fl = c.fl;
  if (fl.weights.empty()) fl.weights = FLConfig::UniformWeights(fl.n_clients);
  fl.seed = FanOutSeeds(c.seed).fl;
  return fl;
}

std::vector<size_t> UnionOf(const std::vector<std::vector<size_t>>& sets) {
  std::set<size_t> all;
  for (const auto& s : sets) all.insert(s.begin(), s.end());
  return {all.begin(), all.end()};
}

std::string JoinEpochs(std::span<const size_t> epochs) {
  std::string out;
  for (size_t e : epochs) out += (out.empty() ? "" : " ") + std::to_string(e);
  return out;
}

std::string FormatReal(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string_view ToString(AttackKind kind) {
  switch (kind) {
    case AttackKind::kTrueLabel: return "true_label";
    case AttackKind::kEntropy: return "entropy";
    case AttackKind::kMaxScore: return "max_score";
    case AttackKind::kBaseline: return "baseline";
  }
  return "?";
}

AttackKind ParseAttackKind(std::string_view name) {
  for (AttackKind k : {AttackKind::kTrueLabel, AttackKind::kEntropy,
                       AttackKind::kMaxScore, AttackKind::kBaseline}) {
    if (ToString(k) == name) return k;
  }
  Fail(ErrorKind::kConfig, "unknown attack kind '" + std::string(name) +
                               "' (expected true_label|entropy|max_score|baseline)");
}

std::optional<FeatureKind> TrajectoryFeature(AttackKind kind) {
  switch (kind) {
    case AttackKind::kTrueLabel: return FeatureKind::kTrueLabel;
    case AttackKind::kEntropy: return FeatureKind::kEntropy;
    case AttackKind::kMaxScore: return FeatureKind::kMaxScore;
    case AttackKind::kBaseline: return std::nullopt;
  }
  return std::nullopt;
}

void ExperimentConfig::Validate() const {
  Reparse("fl", [&] { ResolvedFl(*this).Validate(); return 0; });
  Reparse("attack", [&] { attack_hp.Validate(); return 0; });
  Reparse("attack.blocks", [&] { MakeAttackFcnSpec(5, fcn); return 0; });
  Require(baseline_hp.batch_size > 0 && baseline_hp.epochs > 0 &&
              baseline_hp.learning_rate > 0.0,
          ErrorKind::kConfig, "baseline hyperparameters must be positive");
  Require(baseline.channels > 0 && baseline.kernel > 0 && baseline.pool > 0,
          ErrorKind::kConfig, "baseline network sizes must be positive");
  if (dataset.kind == DatasetKind::kSynthetic) {
    const SyntheticSpec& s = dataset.synthetic;
    Require(s.classes >= 2 && s.dim > 0 && s.per_class > 0 && s.cluster_spread > 0.0,
            ErrorKind::kConfig, "synthetic dataset needs >= 2 classes and positive sizes");
  } else {
    Require(dataset.feature_dim > 0 && dataset.class_count >= 2, ErrorKind::kConfig,
            "purchase dataset needs feature_dim > 0 and >= 2 classes");
  }
  Require(dataset.holdout > 0, ErrorKind::kConfig, "dataset.holdout must be positive");
  for (size_t h : hidden) {
    Require(h > 0, ErrorKind::kConfig, "target_model.hidden widths must be positive");
  }
  Require(aux.member_train > 0 && aux.nonmember_train > 0 && aux.member_test > 0 &&
              aux.nonmember_test > 0,
          ErrorKind::kConfig, "auxiliary split counts must be positive");
  Require(sweep.window > 0 && sweep.window <= fl.rounds, ErrorKind::kConfig,
          "sweep.window must lie in [1, rounds]");
  Require(sweep.window_stride > 0 && sweep.window_epochs > 0, ErrorKind::kConfig,
          "sweep.window_stride and sweep.window_epochs must be positive");
  for (const auto& set : sweep.epoch_sets) {
    Require(!set.empty(), ErrorKind::kConfig, "sweep.epoch_sets entries must be non-empty");
    for (size_t e : set) {
      Require(e >= 1 && e <= fl.rounds, ErrorKind::kConfig,
              "sweep epoch " + std::to_string(e) + " outside [1, " +
                  std::to_string(fl.rounds) + "]");
    }
  }
}

ExperimentConfig ParseExperimentConfig(std::string_view json_text,
                                       const std::string& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    Fail(ErrorKind::kConfig, std::string("config is not valid JSON: ") + e.what());
  }
  ExperimentConfig c;
  ObjectReader r(j, "");
  r.Read("seed", c.seed);
  r.Read("out_dir", c.out_dir);
  if (r.Has("dataset")) ParseDataset(r.Object("dataset"), c.dataset, base_dir);
  if (r.Has("target_model")) {
    ObjectReader t = r.Object("target_model");
    t.Read("hidden", c.hidden);
    t.Finish();
  }
  if (r.Has("fl")) ParseFl(r.Object("fl"), c.fl);
  if (r.Has("auxiliary")) {
    ObjectReader a = r.Object("auxiliary");
    a.Read("member_train", c.aux.member_train);
    a.Read("nonmember_train", c.aux.nonmember_train);
    a.Read("member_test", c.aux.member_test);
    a.Read("nonmember_test", c.aux.nonmember_test);
    a.Read("labels_available", c.labels_available);
    a.Finish();
  }
  if (r.Has("attack")) ParseAttack(r.Object("attack"), c);
  if (r.Has("baseline")) {
    ObjectReader b = r.Object("baseline");
    b.Read("batch_size", c.baseline_hp.batch_size);
    b.Read("learning_rate", c.baseline_hp.learning_rate);
    b.Read("epochs", c.baseline_hp.epochs);
    b.Read("channels", c.baseline.channels);
    b.Read("kernel", c.baseline.kernel);
    b.Read("pool", c.baseline.pool);
    b.Finish();
  }
  if (r.Has("sweep")) {
    ObjectReader s = r.Object("sweep");
    s.Read("epoch_sets", c.sweep.epoch_sets);
    s.Read("include_baseline", c.sweep.include_baseline);
    s.Read("window", c.sweep.window);
    s.Read("window_stride", c.sweep.window_stride);
    s.Read("window_epochs", c.sweep.window_epochs);
    s.Finish();
  }
  r.Finish();
  c.Validate();
  return c;
}

ExperimentConfig LoadExperimentConfig(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  Require(in.good(), ErrorKind::kIo, "cannot read config " + path);
  std::stringstream text;
  text << in.rdbuf();
  return ParseExperimentConfig(text.str(),
                               std::filesystem::path(path).parent_path().string());
}

std::string DumpExperimentConfig(const ExperimentConfig& config) {
  return ConfigJson(config).dump(2) + "\n";
}

std::string TraceDigest(const ExperimentConfig& c) {
  const json all = ConfigJson(c);
  return Digest({{"seed", c.seed}, {"dataset", all["dataset"]},
                 {"target_model", all["target_model"]}, {"fl", all["fl"]}});
}

std::string FeaturesDigest(const ExperimentConfig& c) {
  const json all = ConfigJson(c);
  return Digest({{"trace", TraceDigest(c)}, {"auxiliary", all["auxiliary"]},
                 {"kind", all["attack"]["kind"]}});
}

std::string ModelDigest(const ExperimentConfig& c) {
  json all = ConfigJson(c);
  all["attack"].erase("kind");
  return Digest({{"features", FeaturesDigest(c)}, {"attack", all["attack"]},
                 {"baseline", all["baseline"]}});
}

SubSeeds FanOutSeeds(uint64_t master) {
  return {DeriveSeed(master, "data"),   DeriveSeed(master, "holdout"),
          DeriveSeed(master, "fl"),     DeriveSeed(master, "aux"),
          DeriveSeed(master, "attack"), DeriveSeed(master, "baseline")};
}

PreparedData PrepareData(const ExperimentConfig& config) {
  config.Validate();
  const SubSeeds seeds = FanOutSeeds(config.seed);
  PreparedData p;
  if (config.dataset.kind == DatasetKind::kSynthetic) {
    SyntheticSpec spec = config.dataset.synthetic;
    spec.seed = seeds.data;
    p.data = GenerateSynthetic(spec);
  } else {
    p.data = LoadPurchaseStyle(config.dataset.path, config.dataset.feature_dim,
                               config.dataset.class_count);
  }
  Require(config.dataset.holdout < p.data.size(), ErrorKind::kCapacity,
          "holdout of " + std::to_string(config.dataset.holdout) +
              " leaves no rows for clients in a dataset of " +
              std::to_string(p.data.size()));
  p.split = SplitHoldout(p.data.size(), config.dataset.holdout, seeds.holdout);
  p.fl = ResolvedFl(config);
  p.partitions = PartitionUniform(std::span<const size_t>(p.split.pool),
                                  p.fl.n_clients, p.fl.seed);
  p.target_spec = MakeMlpSpec(p.data.feature_dim, config.hidden, p.data.class_count);
  return p;
}

FedAvgResult TrainTargetModel(const PreparedData& prepared,
                              std::optional<std::vector<size_t>> observed) {
  FLConfig fl = prepared.fl;
  if (observed) fl.observed_epochs = *observed;
  return RunFedAvg(fl, prepared.data, prepared.partitions, prepared.target_spec,
                   prepared.split.holdout);
}

AuxiliaryDataset DrawAuxiliary(const ExperimentConfig& config,
                               const PreparedData& prepared) {
  AuxiliaryDataset aux =
      BuildAuxiliary(prepared.partitions[prepared.fl.target_client], prepared.data,
                     config.aux, FanOutSeeds(config.seed).aux,
                     std::span<const size_t>(prepared.split.holdout));
  aux.labels_available = config.labels_available;
  return aux;
}

AttackResult RunAttack(const ExperimentConfig& config, const PreparedData& prepared,
                       const CheckpointTrace& trace, const AuxiliaryDataset& aux,
                       AttackKind kind, std::optional<size_t> epochs) {
  const SubSeeds seeds = FanOutSeeds(config.seed);
  AttackResult result;
  result.kind = kind;
  result.epochs = trace.epochs();
  if (const auto feature = TrajectoryFeature(kind)) {
    const FeatureMatrix train = ExtractFeatures(trace, prepared.data, aux.attack_train,
                                                *feature, aux.labels_available);
    const FeatureMatrix test = ExtractFeatures(trace, prepared.data, aux.attack_test,
                                               *feature, aux.labels_available);
    TrainHyperparams hp = config.attack_hp;
    hp.seed = seeds.attack;
    if (epochs) hp.epochs = *epochs;
    const Network model = TrainAttack(train, hp, config.fcn);
    result.input_len = train.width();
    result.confusion = EvaluateAttack(model, test);
  } else {
    const BaselineInputs train = BuildBaselineInputs(trace, prepared.data, aux.attack_train,
                                                     aux.labels_available);
    const BaselineInputs test = BuildBaselineInputs(trace, prepared.data, aux.attack_test,
                                                    aux.labels_available);
    BaselineHyperparams hp = config.baseline_hp;
    hp.seed = seeds.baseline;
    if (epochs) hp.epochs = *epochs;
    const Network model = TrainBaselineAttack(train, hp, config.baseline);
    result.input_len = train.width;
    result.confusion = EvaluateBaseline(model, test);
  }
  return result;
}

std::vector<ObservedEpochsRow> SweepObservedEpochs(const ExperimentConfig& config) {
  const auto& sets = config.sweep.epoch_sets;
  Require(sets.size() >= 2, ErrorKind::kConfig,
          "an observed-epochs sweep needs at least two epoch sets, got " +
              std::to_string(sets.size()));
  const PreparedData prepared = PrepareData(config);
  const FedAvgResult fl = TrainTargetModel(prepared, UnionOf(sets));
  const AuxiliaryDataset aux = DrawAuxiliary(config, prepared);
  const AttackKind ours =
      config.attack == AttackKind::kBaseline ? AttackKind::kTrueLabel : config.attack;
  std::vector<ObservedEpochsRow> rows;
  for (const auto& set : sets) {
    std::vector<size_t> sorted(set);
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    const CheckpointTrace trace = fl.trace.Select(sorted);
    ObservedEpochsRow row;
    row.epochs = sorted;
    row.accuracy = RunAttack(config, prepared, trace, aux, ours).confusion.accuracy();
    if (config.sweep.include_baseline) {
      row.baseline_accuracy =
          RunAttack(config, prepared, trace, aux, AttackKind::kBaseline).confusion.accuracy();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<SlidingWindowRow> SweepSlidingWindow(const ExperimentConfig& config) {
  Require(TrajectoryFeature(config.attack).has_value(), ErrorKind::kConfig,
          "the sliding-window sweep runs trajectory attacks only");
  const PreparedData prepared = PrepareData(config);
  const size_t window = config.sweep.window;
  std::vector<size_t> ends;
  for (size_t t = window; t <= prepared.fl.rounds; t += config.sweep.window_stride) {
    ends.push_back(t);
  }
  std::vector<size_t> observed;
  for (size_t e = ends.front() - window + 1; e <= ends.back(); ++e) observed.push_back(e);
  const FedAvgResult fl = TrainTargetModel(prepared, observed);
  const AuxiliaryDataset aux = DrawAuxiliary(config, prepared);
  std::vector<SlidingWindowRow> rows;
  for (size_t t : ends) {
    std::vector<size_t> set;
    for (size_t e = t - window + 1; e <= t; ++e) set.push_back(e);
    SlidingWindowRow row;
    row.t = t;
    row.attack_accuracy = RunAttack(config, prepared, fl.trace.Select(set), aux,
                                    config.attack, config.sweep.window_epochs)
                              .confusion.accuracy();
    const RoundAccuracy& acc = fl.log.at(t - 1);
    row.train_accuracy = acc.train_acc;
    row.test_accuracy = acc.test_acc;
    rows.push_back(row);
  }
  return rows;
}

void WriteObservedEpochsCsv(const std::vector<ObservedEpochsRow>& rows,
                            const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  Require(out.good(), ErrorKind::kIo, "cannot write " + path);
  out << "epochs,accuracy,baseline_accuracy\n";
  for (const ObservedEpochsRow& r : rows) {
    out << JoinEpochs(r.epochs) << ',' << FormatReal(r.accuracy) << ','
        << (r.baseline_accuracy ? FormatReal(*r.baseline_accuracy) : "") << '\n';
  }
  Require(out.good(), ErrorKind::kIo, "failed writing " + path);
}

void WriteSlidingWindowCsv(const std::vector<SlidingWindowRow>& rows,
                           const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  Require(out.good(), ErrorKind::kIo, "cannot write " + path);
  out << "t,attack_acc,train_acc,test_acc\n";
  for (const SlidingWindowRow& r : rows) {
    out << r.t << ',' << FormatReal(r.attack_accuracy) << ','
        << FormatReal(r.train_accuracy) << ','
        << (r.test_accuracy ? FormatReal(*r.test_accuracy) : "") << '\n';
  }
  Require(out.good(), ErrorKind::kIo, "failed writing " + path);
}

std::vector<SlidingWindowRow> ReadSlidingWindowCsv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  Require(in.good(), ErrorKind::kIo, "cannot read " + path);
  std::string line;
  std::getline(in, line);
  Require(line == "t,attack_acc,train_acc,test_acc", ErrorKind::kParse,
          path + ":1: unexpected header '" + line + "'");
  std::vector<SlidingWindowRow> rows;
  for (size_t lineno = 2; std::getline(in, line); ++lineno) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.push_back("");
    const std::string where = path + ":" + std::to_string(lineno) + ": ";
    Require(cells.size() == 4, ErrorKind::kParse, where + "expected 4 fields");
    try {
      SlidingWindowRow r;
      r.t = std::stoul(cells[0]);
      r.attack_accuracy = std::stod(cells[1]);
      r.train_accuracy = std::stod(cells[2]);
      if (!cells[3].empty()) r.test_accuracy = std::stod(cells[3]);
      rows.push_back(r);
    } catch (const std::logic_error&) {
      Fail(ErrorKind::kParse, where + "malformed number");
    }
  }
  return rows;
}

}  // namespace fedmia
