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


#include "fedmia/stages.h"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fedmia/baseline.h"
#include "fedmia/report.h"
#include "fedmia/svg.h"
#include "fedmia/trace_io.h"
#include "json.hpp"
#include "json_reader.h"

namespace fedmia {
namespace {

namespace fs = std::filesystem;
using internal::ObjectReader;
using nlohmann::json;

constexpr int kManifestVersion = 1;

std::string PathIn(const std::string& dir, const char* file) {
  return (fs::path(dir) / file).string();
}

void EnsureDir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  Require(!ec, ErrorKind::kIo, "cannot create output directory " + dir + ": " + ec.message());
}

// Fails with a stage-dependency error when an upstream file is absent.
void RequireUpstream(const std::string& path, const char* producer, const char* consumer) {
  Require(fs::exists(path), ErrorKind::kDependency,
          std::string(consumer) + " needs " + path + "; run " + producer + " first");
}

void WriteJson(const json& j, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  Require(out.good(), ErrorKind::kIo, "cannot write " + path);
  out << j.dump(2) << "\n";
  Require(out.good(), ErrorKind::kIo, "failed writing " + path);
}

json ReadJson(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  Require(in.good(), ErrorKind::kIo, "cannot read " + path);
  std::stringstream text;
  text << in.rdbuf();
  try {
    return json::parse(text.str());
  } catch (const json::exception& e) {
    Fail(ErrorKind::kParse, path + ": not valid JSON: " + e.what());
  }
}

struct Manifest {
  std::string stage;
  std::string digest;
  std::string kind;
  std::vector<size_t> epochs;
  bool labels_available = true;
  size_t input_len = 0;
};

void WriteManifest(const Manifest& m, const std::string& path) {
  WriteJson({{"schema_version", kManifestVersion},
             {"stage", m.stage},
             {"digest", m.digest},
             {"kind", m.kind},
             {"epochs", m.epochs},
             {"labels_available", m.labels_available},
             {"input_len", m.input_len}},
            path);
}

Manifest ReadManifest(const std::string& path) {
  const json j = ReadJson(path);
  ObjectReader r(j, path, ErrorKind::kParse);
  int version = 0;
  Manifest m;
  r.Read("schema_version", version);
  Require(version == kManifestVersion, ErrorKind::kParse,
          path + ": unsupported manifest version " + std::to_string(version));
  r.Read("stage", m.stage);
  r.Read("digest", m.digest);
  r.Read("kind", m.kind);
  r.Read("epochs", m.epochs);
  r.Read("labels_available", m.labels_available);
  r.Read("input_len", m.input_len);
  r.Finish();
  return m;
}

void RequireDigest(const Manifest& m, const std::string& expected, const std::string& path,
                   const char* producer) {
  Require(m.digest == expected, ErrorKind::kDependency,
          path + " was produced by a different configuration; rerun " +
              std::string(producer));
}

bool NeedsLabels(AttackKind kind) {
  return kind == AttackKind::kTrueLabel || kind == AttackKind::kBaseline;
}

}  // namespace

int ExitCodeFor(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfig:
    case ErrorKind::kSpec:
      return 2;
    case ErrorKind::kNumeric:
      return 4;
    default:
      return 3;
  }
}

std::string ResolveOutDir(const std::optional<std::string>& flag,
                          const ExperimentConfig& config) {
  if (flag && !flag->empty()) return *flag;
  if (const char* env = std::getenv("FEDMIA_OUT_DIR"); env && *env) return env;
  return config.out_dir;
}

void RunFlTrainStage(const ExperimentConfig& config, const std::string& out_dir,
                     std::ostream& log) {
  const PreparedData prepared = PrepareData(config);
  const FedAvgResult result = TrainTargetModel(prepared);
  EnsureDir(out_dir);
  SaveTrace(result.trace, PathIn(out_dir, kTraceFile));
  WriteAccuracyLog(PathIn(out_dir, kAccuracyLogFile), result.log);
  WriteManifest({"fl-train", TraceDigest(config), "", result.trace.epochs(), true, 0},
                PathIn(out_dir, kFlManifestFile));
  const RoundAccuracy& last = result.log.back();
  log << "fl-train: " << result.trace.snapshots.size() << " snapshots of client "
      << prepared.fl.target_client << " -> " << PathIn(out_dir, kTraceFile)
      << "; final train acc " << last.train_acc;
  if (last.test_acc) log << ", test acc " << *last.test_acc;
  log << "\n";
}

void RunExtractFeaturesStage(const ExperimentConfig& config, const std::string& out_dir,
                             std::ostream& log) {
  const std::string trace_path = PathIn(out_dir, kTraceFile);
  const std::string manifest_path = PathIn(out_dir, kFlManifestFile);
  RequireUpstream(trace_path, "fl-train", "extract-features");
  RequireUpstream(manifest_path, "fl-train", "extract-features");
  RequireDigest(ReadManifest(manifest_path), TraceDigest(config), trace_path, "fl-train");

  const CheckpointTrace trace = LoadTrace(trace_path);
  const PreparedData prepared = PrepareData(config);
  const AuxiliaryDataset aux = DrawAuxiliary(config, prepared);
  Manifest m{"extract-features", FeaturesDigest(config), std::string(ToString(config.attack)),
             trace.epochs(), aux.labels_available, 0};
  if (const auto feature = TrajectoryFeature(config.attack)) {
    const FeatureMatrix train = ExtractFeatures(trace, prepared.data, aux.attack_train,
                                                *feature, aux.labels_available);
    const FeatureMatrix test = ExtractFeatures(trace, prepared.data, aux.attack_test,
                                               *feature, aux.labels_available);
    SaveFeaturesCsv(train, PathIn(out_dir, kFeaturesTrainFile));
    SaveFeaturesCsv(test, PathIn(out_dir, kFeaturesTestFile));
    m.input_len = train.width();
  } else {
    const BaselineInputs train = BuildBaselineInputs(trace, prepared.data, aux.attack_train,
                                                     aux.labels_available);
    const BaselineInputs test = BuildBaselineInputs(trace, prepared.data, aux.attack_test,
                                                    aux.labels_available);
    SaveBaselineCsv(train, PathIn(out_dir, kFeaturesTrainFile));
    SaveBaselineCsv(test, PathIn(out_dir, kFeaturesTestFile));
    m.input_len = train.width;
  }
  WriteManifest(m, PathIn(out_dir, kFeaturesManifestFile));
  log << "extract-features: " << m.kind << " inputs of length " << m.input_len << " for "
      << aux.attack_train.size() << " train / " << aux.attack_test.size()
      << " test samples -> " << PathIn(out_dir, kFeaturesTrainFile) << "\n";
}

void RunAttackTrainStage(const ExperimentConfig& config, const std::string& out_dir,
                         std::ostream& log) {
  const std::string manifest_path = PathIn(out_dir, kFeaturesManifestFile);
  const std::string train_path = PathIn(out_dir, kFeaturesTrainFile);
  RequireUpstream(manifest_path, "extract-features", "attack-train");
  RequireUpstream(train_path, "extract-features", "attack-train");
  const Manifest features = ReadManifest(manifest_path);
  if (NeedsLabels(config.attack) && !features.labels_available) {
    Fail(ErrorKind::kCapability,
         "attack kind " + std::string(ToString(config.attack)) + " needs labels, but " +
             train_path + " was extracted without them");
  }
  RequireDigest(features, FeaturesDigest(config), train_path, "extract-features");

  const SubSeeds seeds = FanOutSeeds(config.seed);
  Manifest m{"attack-train", ModelDigest(config), features.kind, features.epochs,
             features.labels_available, features.input_len};
  std::vector<double> losses;
  if (const auto feature = TrajectoryFeature(config.attack)) {
    const FeatureMatrix train = LoadFeaturesCsv(train_path, *feature, features.epochs);
    TrainHyperparams hp = config.attack_hp;
    hp.seed = seeds.attack;
    SaveModel(TrainAttack(train, hp, config.fcn, &losses), PathIn(out_dir, kAttackModelFile));
  } else {
    const BaselineInputs train = LoadBaselineCsv(train_path, features.input_len);
    BaselineHyperparams hp = config.baseline_hp;
    hp.seed = seeds.baseline;
    SaveModel(TrainBaselineAttack(train, hp, config.baseline, &losses),
              PathIn(out_dir, kAttackModelFile));
  }
  WriteManifest(m, PathIn(out_dir, kAttackManifestFile));
  log << "attack-train: " << m.kind << " model, loss " << losses.front() << " -> "
      << losses.back() << " over " << losses.size() << " epochs -> "
      << PathIn(out_dir, kAttackModelFile) << "\n";
}

void RunAttackEvalStage(const ExperimentConfig& config, const std::string& out_dir,
                        const std::string& generated_at, std::ostream& log) {
  const std::string model_path = PathIn(out_dir, kAttackModelFile);
  const std::string manifest_path = PathIn(out_dir, kAttackManifestFile);
  const std::string test_path = PathIn(out_dir, kFeaturesTestFile);
  const std::string log_path = PathIn(out_dir, kAccuracyLogFile);
  RequireUpstream(model_path, "attack-train", "attack-eval");
  RequireUpstream(manifest_path, "attack-train", "attack-eval");
  RequireUpstream(test_path, "extract-features", "attack-eval");
  RequireUpstream(log_path, "fl-train", "attack-eval");
  const Manifest model_manifest = ReadManifest(manifest_path);
  RequireDigest(model_manifest, ModelDigest(config), model_path, "attack-train");
  const std::string features_manifest_path = PathIn(out_dir, kFeaturesManifestFile);
  RequireUpstream(features_manifest_path, "extract-features", "attack-eval");
  RequireDigest(ReadManifest(features_manifest_path), FeaturesDigest(config), test_path,
                "extract-features");

  const Network model = LoadModel(model_path);
  ExperimentReport report;
  report.generated_at = generated_at;
  report.config = config;
  AttackEntry entry;
  entry.kind = config.attack;
  entry.epochs = model_manifest.epochs;
  entry.input_len = model_manifest.input_len;
  if (const auto feature = TrajectoryFeature(config.attack)) {
    const FeatureMatrix test = LoadFeaturesCsv(test_path, *feature, model_manifest.epochs);
    entry.confusion = EvaluateAttack(model, test);
    report.trajectory_means = MeanTrajectories(test);
  } else {
    entry.confusion =
        EvaluateBaseline(model, LoadBaselineCsv(test_path, model_manifest.input_len));
  }
  report.attacks.push_back(entry);
  report.fl_log = ReadAccuracyLog(log_path);
  const PreparedData prepared = PrepareData(config);
  ExperimentConfig sized = config;
  sized.fl.observed_epochs = model_manifest.epochs;
  report.cost = AttackCostComparison(sized, prepared.target_spec);
  WriteReport(report, PathIn(out_dir, kReportFile));
  log << "attack-eval: " << ToString(entry.kind) << " accuracy "
      << entry.confusion.accuracy() << " on " << entry.confusion.total() << " samples -> "
      << PathIn(out_dir, kReportFile) << "\n";
}

SweepKind ParseSweepKind(std::string_view name) {
  if (name == "observed-epochs") return SweepKind::kObservedEpochs;
  if (name == "sliding-window") return SweepKind::kSlidingWindow;
  Fail(ErrorKind::kConfig, "unknown sweep '" + std::string(name) +
                               "' (expected observed-epochs|sliding-window)");
}

void RunSweepStage(const ExperimentConfig& config, SweepKind kind,
                   const std::string& out_dir, std::ostream& log) {
  EnsureDir(out_dir);
  if (kind == SweepKind::kObservedEpochs) {
    const std::vector<ObservedEpochsRow> rows = SweepObservedEpochs(config);
    WriteObservedEpochsCsv(rows, PathIn(out_dir, kObservedEpochsFile));
    for (const ObservedEpochsRow& r : rows) {
      log << "report: epochs";
      for (size_t e : r.epochs) log << ' ' << e;
      log << " -> accuracy " << r.accuracy;
      if (r.baseline_accuracy) log << ", baseline " << *r.baseline_accuracy;
      log << "\n";
    }
    log << "report: wrote " << PathIn(out_dir, kObservedEpochsFile) << "\n";
  } else {
    const std::vector<SlidingWindowRow> rows = SweepSlidingWindow(config);
    WriteSlidingWindowCsv(rows, PathIn(out_dir, kSlidingWindowFile));
    log << "report: " << rows.size() << " windows -> " << PathIn(out_dir, kSlidingWindowFile)
        << "\n";
  }
}

void RunPlotStage(const std::string& out_dir, std::ostream& log) {
  const std::string report_path = PathIn(out_dir, kReportFile);
  const std::string sliding_path = PathIn(out_dir, kSlidingWindowFile);
  const bool have_report = fs::exists(report_path);
  const bool have_sliding = fs::exists(sliding_path);
  Require(have_report || have_sliding, ErrorKind::kDependency,
          "plot needs " + report_path + " (attack-eval) or " + sliding_path +
              " (report --sweep sliding-window)");
  if (have_sliding) {
    size_t window = 10;
    if (have_report) window = ReadReport(report_path).config.sweep.window;
    WriteSvg(RenderSvg(AccuracyOverTimePlot(ReadSlidingWindowCsv(sliding_path), window)),
             PathIn(out_dir, kAccuracyPlotFile));
    log << "plot: wrote " << PathIn(out_dir, kAccuracyPlotFile) << "\n";
  }
  if (have_report) {
    const ExperimentReport report = ReadReport(report_path);
    Require(report.trajectory_means.has_value(), ErrorKind::kValidation,
            report_path + " has no trajectory means to plot");
    WriteSvg(RenderSvg(MemberGapPlot(*report.trajectory_means)),
             PathIn(out_dir, kMemberGapPlotFile));
    log << "plot: wrote " << PathIn(out_dir, kMemberGapPlotFile) << "\n";
  }
}

std::vector<std::vector<size_t>> ParseEpochSets(std::string_view text) {
  // Splits keeping empty pieces so "5;" and "5,,6" are caught.
  auto split = [](std::string_view s, char sep) {
    std::vector<std::string> parts(1);
    for (char c : s) {
      if (c == sep) {
        parts.emplace_back();
      } else {
        parts.back() += c;
      }
    }
    return parts;
  };
  std::vector<std::vector<size_t>> sets;
  for (const std::string& set : split(text, ';')) {
    Require(!set.empty(), ErrorKind::kConfig,
            "empty epoch set in '" + std::string(text) + "'");
    std::vector<size_t> epochs;
    for (const std::string& item : split(set, ',')) {
      const bool digits = !item.empty() && std::all_of(item.begin(), item.end(), [](char c) {
        return c >= '0' && c <= '9';
      });
      Require(digits && item.size() < 10, ErrorKind::kConfig,
              "bad epoch '" + item + "' in epoch sets '" + std::string(text) + "'");
      epochs.push_back(std::stoul(item));
    }
    sets.push_back(std::move(epochs));
  }
  return sets;
}

}  // namespace fedmia
