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


// Acceptance run: one PASS/FAIL line per criterion. Arguments select a
// subset of criteria by number; no arguments runs all of them.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fedmia/attack.h"
#include "fedmia/baseline.h"
#include "fedmia/cost.h"
#include "fedmia/experiment.h"
#include "fedmia/fedavg.h"
#include "fedmia/features.h"
#include "fedmia/stages.h"
#include "fedmia/trace_io.h"
#include "gradient_check.h"
#include "training_oracle.h"

namespace fedmia {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

std::string Fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), format, v);
  return buf;
}

double Median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v.size() % 2 ? v[v.size() / 2] : 0.5 * (v[v.size() / 2 - 1] + v[v.size() / 2]);
}

std::string List(const std::vector<double>& v) {
  std::string out;
  for (double x : v) out += (out.empty() ? "" : " ") + Fmt("%.4f", x);
  return out;
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

ExperimentConfig DeskConfig() {
  return LoadExperimentConfig(FEDMIA_SOURCE_DIR "/configs/desk.json");
}

const std::vector<size_t> kEarly{2, 4, 6, 8, 10};
const std::vector<size_t> kMiddle{21, 24, 27, 30, 33};
const std::vector<size_t> kLate{60, 70, 80, 90, 100};
constexpr int kSeeds = 5;

// Everything criteria 4-7 and 10 need from one seed of the desk setup.
struct SeedRun {
  uint64_t seed = 0;
  double train_acc = 0.0;
  double test_acc = 0.0;
  std::map<AttackKind, double> late;  // attack accuracy per kind on kLate
  double early = 0.0;                 // true-label accuracy on kEarly
  double middle = 0.0;                // and on kMiddle
  double member_score = 0.0;          // final-epoch mean true-label score
  double nonmember_score = 0.0;
  double criterion4_seconds = 0.0;    // FedAvg + true-label attack on kLate
  std::shared_ptr<PreparedData> prepared;
  std::shared_ptr<FedAvgResult> fl;
  std::shared_ptr<AuxiliaryDataset> aux;
};

SeedRun RunSeed(uint64_t seed) {
  ExperimentConfig config = DeskConfig();
  config.seed = seed;
  SeedRun run;
  run.seed = seed;
  const Clock::time_point start = Clock::now();
  run.prepared = std::make_shared<PreparedData>(PrepareData(config));
  std::set<size_t> observed(kLate.begin(), kLate.end());
  observed.insert(kEarly.begin(), kEarly.end());
  observed.insert(kMiddle.begin(), kMiddle.end());
  run.fl = std::make_shared<FedAvgResult>(
      TrainTargetModel(*run.prepared, std::vector<size_t>(observed.begin(), observed.end())));
  run.aux = std::make_shared<AuxiliaryDataset>(DrawAuxiliary(config, *run.prepared));
  run.train_acc = run.fl->log.back().train_acc;
  run.test_acc = run.fl->log.back().test_acc.value_or(NAN);
  const CheckpointTrace late = run.fl->trace.Select(kLate);
  run.late[AttackKind::kTrueLabel] =
      RunAttack(config, *run.prepared, late, *run.aux, AttackKind::kTrueLabel)
          .confusion.accuracy();
  run.criterion4_seconds = Seconds(start);
  for (AttackKind kind : {AttackKind::kEntropy, AttackKind::kMaxScore}) {
    run.late[kind] = RunAttack(config, *run.prepared, late, *run.aux, kind).confusion.accuracy();
  }
  run.early = RunAttack(config, *run.prepared, run.fl->trace.Select(kEarly), *run.aux,
                        AttackKind::kTrueLabel)
                  .confusion.accuracy();
  run.middle = RunAttack(config, *run.prepared, run.fl->trace.Select(kMiddle), *run.aux,
                         AttackKind::kTrueLabel)
                   .confusion.accuracy();

  // Final observed epoch, every auxiliary sample.
  const std::vector<size_t> last{kLate.back()};
  const CheckpointTrace final_model = run.fl->trace.Select(last);
  double sums[2] = {0, 0};
  size_t counts[2] = {0, 0};
  for (const auto* split : {&run.aux->attack_train, &run.aux->attack_test}) {
    const FeatureMatrix f = ExtractFeatures(final_model, run.prepared->data, *split,
                                            FeatureKind::kTrueLabel);
    for (size_t r = 0; r < f.rows(); ++r) {
      sums[f.member[r]] += f.row(r)[0];
      ++counts[f.member[r]];
    }
  }
  run.member_score = sums[1] / static_cast<double>(counts[1]);
  run.nonmember_score = sums[0] / static_cast<double>(counts[0]);
  std::printf("  seed %llu: train %.4f test %.4f | true_label %.4f entropy %.4f max_score "
              "%.4f | early %.4f middle %.4f | scores %.4f vs %.4f | %.1f s\n",
              static_cast<unsigned long long>(seed), run.train_acc, run.test_acc,
              run.late[AttackKind::kTrueLabel], run.late[AttackKind::kEntropy],
              run.late[AttackKind::kMaxScore], run.early, run.middle, run.member_score,
              run.nonmember_score, Seconds(start));
  std::fflush(stdout);
  return run;
}

const std::vector<SeedRun>& SeedRuns() {
  static const std::vector<SeedRun> runs = [] {
    std::vector<SeedRun> r;
    for (int s = 1; s <= kSeeds; ++s) r.push_back(RunSeed(static_cast<uint64_t>(s)));
    return r;
  }();
  return runs;
}

Outcome Criterion1() {
  const Clock::time_point start = Clock::now();
  double worst = 0.0;
  size_t kinked = 0, values = 0, nets = 0;
  std::set<std::string> layers;
  for (int variant = 0; variant < 5; ++variant) {
    for (uint64_t i = 0; i < 5; ++i) {
      testing::GradientCase c = testing::RandomGradientCase(1000 + 17 * i + variant, variant);
      for (const LayerSpec& l : c.net.spec().layers) {
        const std::string name = LayerName(l);
        layers.insert(name.substr(0, name.find('(')));
      }
      const Gradients analytic = testing::AnalyticGradients(c);
      const testing::NumericalResult num =
          testing::NumericalGradientsWithKinks(c.net, c.batch, c.target, 1e-3);
      worst = std::max(worst, testing::RelativeError(testing::Masked(analytic, num.kinked),
                                                     testing::Masked(num.gradients, num.kinked)));
      kinked += num.kinked_count;
      values += c.net.spec().TrainableParamCount();
      ++nets;
    }
  }
  const double secs = Seconds(start);
  std::string names;
  for (const std::string& n : layers) names += (names.empty() ? "" : ",") + n;
  return {worst < 1e-4 && secs < 60.0 && 2 * kinked < values,
          std::to_string(nets) + " networks <= 500 params covering {" + names +
              "}, max rel err " + Fmt("%.2e", worst) + " (h=1e-3, " + std::to_string(kinked) +
              "/" + std::to_string(values) + " kink-crossing coordinates excluded), " +
              Fmt("%.1f s", secs)};
}

Outcome Criterion2() {
  const Clock::time_point start = Clock::now();
  SyntheticSpec s;
  s.classes = 5;
  s.dim = 10;
  s.per_class = 40;
  s.seed = 3;
  const LabeledDataset data = GenerateSynthetic(s);
  const NetworkSpec spec = MakeMlpSpec(10, {16}, 5);
  bool identical = true;
  for (OptimizerKind kind : {OptimizerKind::kSgd, OptimizerKind::kAdam}) {
    FLConfig cfg;
    cfg.n_clients = 1;
    cfg.weights = {1.0};
    cfg.rounds = 20;
    cfg.local_epochs = 1;
    cfg.batch_size = 32;
    cfg.optimizer = kind;
    cfg.lr_schedule = {{1, 0.05}, {11, 0.01}};
    cfg.observed_epochs.clear();
    for (size_t e = 1; e <= 20; ++e) cfg.observed_epochs.push_back(e);
    cfg.seed = 42;
    const FedAvgResult fl = RunFedAvg(cfg, data, PartitionUniform(data, 1, 0), spec);
    std::vector<Network> central_ckpt;
    const Network central =
        testing::CentralizedTraining(data, spec, cfg, 20, &central_ckpt);
    identical = identical && fl.global == central;
    for (size_t e = 1; e <= 20; ++e) {
      Network snapshot = fl.trace.at(e);
      identical = identical && snapshot.params() == central_ckpt[e - 1].params() &&
                  snapshot.state() == central_ckpt[e - 1].state();
    }
  }
  const double secs = Seconds(start);
  return {identical && secs < 30.0,
          std::string(identical ? "bitwise identical" : "DIFFERENT") +
              " global model and all 20 per-round models (sgd and adam), " +
              Fmt("%.2f s", secs)};
}

Outcome Criterion3() {
  const Clock::time_point start = Clock::now();
  double worst = 0.0;
  for (size_t k : {1u, 2u, 3u, 4u, 7u}) {
    for (const NetworkSpec& spec :
         {MakeMlpSpec(6, {9}, 4), MakeAttackFcnSpec(5, AttackFcnSpec{{{{6, 3}, {5, 3}, {4, 2}}}})}) {
      Network base = Network::Initialized(spec, 100 + k);
      for (Tensor* t : base.LayerValues(0)) {
        for (double& v : t->data()) v *= 1e3;  // exercise large magnitudes too
      }
      std::vector<Network> copies(k, base);
      std::vector<double> w(k);
      Rng rng(k);
      double total = 0.0;
      for (double& x : w) total += (x = 0.1 + rng.Uniform());
      for (double& x : w) x /= total;
      const Network avg = Aggregate(copies, w);
      for (size_t i = 0; i < spec.layers.size(); ++i) {
        const auto a = avg.LayerValues(i);
        const auto b = base.LayerValues(i);
        for (size_t j = 0; j < a.size(); ++j) {
          for (size_t n = 0; n < a[j]->size(); ++n) {
            worst = std::max(worst, std::abs((*a[j])[n] - (*b[j])[n]));
          }
        }
      }
    }
  }
  const NetworkSpec spec = MakeMlpSpec(3, {4}, 2);
  Network zero(spec), two(spec);
  for (Tensor& p : two.params()) p.Fill(2.0);
  const std::vector<Network> pair{zero, two};
  const std::vector<double> half{0.5, 0.5};
  const Network mid = Aggregate(pair, half);
  bool exact = true;
  for (const Tensor& p : mid.params()) {
    for (double v : p.data()) exact = exact && v == 1.0;
  }
  const double secs = Seconds(start);
  return {worst <= 1e-12 && exact && secs < 5.0,
          "identical-model aggregate max deviation " + Fmt("%.1e", worst) +
              " (k in {1,2,3,4,7}), {0,2} at 0.5/0.5 -> " + (exact ? "exactly 1" : "NOT 1") +
              ", " + Fmt("%.2f s", secs)};
}

Outcome Criterion4() {
  const auto& runs = SeedRuns();
  bool overfit = true;
  std::vector<double> acc;
  double secs = 0.0;
  for (const SeedRun& r : runs) {
    overfit = overfit && r.train_acc >= 0.95 && r.test_acc <= 0.70;
    acc.push_back(r.late.at(AttackKind::kTrueLabel));
    secs += r.criterion4_seconds;
  }
  const double median = Median(acc);
  std::vector<double> train, test;
  for (const SeedRun& r : runs) {
    train.push_back(r.train_acc);
    test.push_back(r.test_acc);
  }
  return {overfit && median >= 0.70 && secs < 600.0,
          "target train acc [" + List(train) + "], test acc [" + List(test) +
              "]; true-label attack on T={60..100 step 10} [" + List(acc) + "], median " +
              Fmt("%.4f", median) + " (>= 0.70); " + Fmt("%.1f s", secs) +
              " for training and attacks"};
}

Outcome Criterion5() {
  const auto& runs = SeedRuns();
  double min_gap = INFINITY;
  std::vector<double> gaps;
  for (const SeedRun& r : runs) {
    gaps.push_back(r.member_score - r.nonmember_score);
    min_gap = std::min(min_gap, gaps.back());
  }
  return {min_gap >= 0.10, "final-epoch mean true-label score gap (members - non-members) [" +
                               List(gaps) + "], min " + Fmt("%.4f", min_gap) + " (>= 0.10)"};
}

Outcome Criterion6() {
  const auto& runs = SeedRuns();
  std::vector<double> t, e, m;
  for (const SeedRun& r : runs) {
    t.push_back(r.late.at(AttackKind::kTrueLabel));
    e.push_back(r.late.at(AttackKind::kEntropy));
    m.push_back(r.late.at(AttackKind::kMaxScore));
  }
  const double mt = Median(t), me = Median(e), mm = Median(m);
  return {mt >= me - 0.02 && mt >= mm - 0.02,
          "median accuracy true_label " + Fmt("%.4f", mt) + ", entropy " + Fmt("%.4f", me) +
              " [" + List(e) + "], max_score " + Fmt("%.4f", mm) + " [" + List(m) + "]"};
}

Outcome Criterion7() {
  const auto& runs = SeedRuns();
  std::vector<double> early, middle, late;
  for (const SeedRun& r : runs) {
    early.push_back(r.early);
    middle.push_back(r.middle);
    late.push_back(r.late.at(AttackKind::kTrueLabel));
  }
  const std::vector<double> medians{Median(early), Median(middle), Median(late)};
  int inversions = 0;
  bool small = true;
  for (size_t i = 1; i < medians.size(); ++i) {
    if (medians[i] < medians[i - 1]) {
      ++inversions;
      small = small && medians[i - 1] - medians[i] <= 0.02;
    }
  }
  return {inversions == 0 || (inversions == 1 && small),
          "median accuracy early {2..10} " + Fmt("%.4f", medians[0]) + ", middle {21..33} " +
              Fmt("%.4f", medians[1]) + ", late {60..100} " + Fmt("%.4f", medians[2]) + ", " +
              std::to_string(inversions) + " inversion(s)"};
}

Outcome Criterion8() {
  const Clock::time_point start = Clock::now();
  const CostReport at5 = MeasureCost(MakeAttackFcnSpec(5), 5);
  const CostReport at30 = MeasureCost(MakeAttackFcnSpec(30), 30);
  const double mb = at5.memory_bytes / 1e6;
  const double secs = Seconds(start);
  const bool pass = at5.param_count == 265986 && at5.memory_bytes == 1063944 &&
                    std::abs(mb - 1.06) <= 0.0106 && at30.param_count == at5.param_count &&
                    at30.memory_bytes == at5.memory_bytes && secs < 1.0;
  return {pass, std::to_string(at5.param_count) + " stored values, " +
                    std::to_string(at5.memory_bytes) + " bytes = " + Fmt("%.4f MB", mb) +
                    " at |T|=5; " + std::to_string(at30.memory_bytes) + " bytes at |T|=30; " +
                    Fmt("%.3f s", secs)};
}

// Independent count of (d, s(l)) for the classifiers built below.
Outcome Criterion9() {
  Rng rng(2024);
  size_t matched = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const size_t classes = 2 + rng.Below(7);
    const size_t epochs = 1 + rng.Below(6);
    NetworkSpec spec;
    size_t d = 0;
    std::vector<size_t> s;
    if (trial % 2 == 0) {
      const size_t in = 1 + rng.Below(8);
      std::vector<size_t> hidden(rng.Below(4));
      size_t width = in;
      for (size_t& h : hidden) {
        h = 1 + rng.Below(16);
        d += width * h + h;
        s.push_back(h);
        width = h;
      }
      d += width * classes + classes;
      s.push_back(classes);
      spec = MakeMlpSpec(in, hidden, classes);
    } else {
      const size_t ch = 1 + rng.Below(3), len = 3 + rng.Below(6);
      const size_t co = 1 + rng.Below(5), k = 1 + rng.Below(3);
      spec.input_shape = {ch, len};
      spec.layers = {Conv1D{ch, co, k}, ReLU{}, GlobalAvgPool1D{}, Dense{co, classes},
                     Softmax{}};
      spec.class_count = classes;
      d = co * ch * k + co + co * classes + classes;
      s = {co, classes};  // pooled conv stage, then the scores
    }
    CheckpointTrace trace;
    trace.spec = spec;
    for (size_t e = 1; e <= epochs; ++e) {
      auto net = std::make_shared<Network>(Network::Initialized(spec, rng.NextU64()));
      net->set_mode(Mode::kEval);
      trace.snapshots.emplace(e, std::move(net));
    }
    std::vector<double> x(ShapeSize(spec.input_shape));
    for (double& v : x) v = rng.Normal();
    size_t sum_s = 0;
    for (size_t v : s) sum_s += v;
    const size_t expected = (d + 1 + sum_s) * epochs + classes;
    if (BuildBaselineInput(trace, x, rng.Below(classes)).size() == expected &&
        BaselineInputSize(d, s, epochs, classes) == expected) {
      ++matched;
    }
  }
  const NetworkSpec mlp = MakeMlpSpec(50, {256}, 20);
  const size_t baseline_len = BaselineInputSize(mlp.TrainableParamCount(),
                                                mlp.StageOutputSizes(), kLate.size(), 20);
  const double ratio = static_cast<double>(baseline_len) / static_cast<double>(kLate.size());
  return {matched == 100 && ratio >= 100.0,
          std::to_string(matched) + "/100 random targets build inputs of exactly "
                                    "(d+1+sum s)|T|+m values; criterion-4 MLP: " +
              std::to_string(baseline_len) + " vs " + std::to_string(kLate.size()) +
              " inputs, ratio " + Fmt("%.0f", ratio) + " (>= 100)"};
}

Outcome Criterion10() {
  const Clock::time_point start = Clock::now();
  const SeedRun& run = SeedRuns().front();
  ExperimentConfig config = DeskConfig();
  config.seed = run.seed;
  const AttackResult r = RunAttack(config, *run.prepared, run.fl->trace.Select(kLate),
                                   *run.aux, AttackKind::kBaseline);
  const double acc = r.confusion.accuracy();
  return {acc > 0.55, "MSE-trained baseline on seed " + std::to_string(run.seed) +
                          " (input length " + std::to_string(r.input_len) + ", " +
                          std::to_string(r.confusion.total()) + " test samples): accuracy " +
                          Fmt("%.4f", acc) + " (> 0.55), " + Fmt("%.1f s", Seconds(start))};
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome Criterion11() {
  const Clock::time_point start = Clock::now();
  const ExperimentConfig config = DeskConfig();
  const fs::path root = fs::temp_directory_path() / "fedmia_acceptance_c11";
  fs::remove_all(root);
  std::ostringstream log;
  const char* stamps[2] = {"2026-01-01T00:00:00Z", "2026-12-31T23:59:59Z"};
  for (int i = 0; i < 2; ++i) {
    const std::string dir = (root / std::to_string(i)).string();
    RunFlTrainStage(config, dir, log);
    RunExtractFeaturesStage(config, dir, log);
    RunAttackTrainStage(config, dir, log);
    RunAttackEvalStage(config, dir, stamps[i], log);
  }
  bool same_files = true;
  for (const char* f : {kTraceFile, kFeaturesTrainFile, kFeaturesTestFile, kAttackModelFile}) {
    same_files = same_files && Slurp(root / "0" / f) == Slurp(root / "1" / f);
  }
  const std::regex stamp("\"generated_at\": \"[^\"]*\"");
  const std::string r0 = Slurp(root / "0" / kReportFile), r1 = Slurp(root / "1" / kReportFile);
  const bool same_report = r0 != r1 && std::regex_replace(r0, stamp, "") ==
                                           std::regex_replace(r1, stamp, "");

  // FLTR round trip of the seed-1 desk trace: every value is the 32-bit
  // rounding of the original, nothing else changes.
  const CheckpointTrace& trace = SeedRuns().front().fl->trace;
  const CheckpointTrace back = DecodeTrace(EncodeTrace(trace));
  bool rounding_only = back.spec == trace.spec && back.epochs() == trace.epochs() &&
                       back.target_client == trace.target_client;
  size_t checked = 0;
  double max_change = 0.0;
  for (const auto& [epoch, net] : trace.snapshots) {
    const Network& got = *back.snapshots.at(epoch);
    for (size_t i = 0; i < net->spec().layers.size(); ++i) {
      const auto a = net->LayerValues(i);
      const auto b = got.LayerValues(i);
      for (size_t j = 0; j < a.size(); ++j) {
        for (size_t n = 0; n < a[j]->size(); ++n) {
          const double orig = (*a[j])[n];
          rounding_only = rounding_only &&
                          (*b[j])[n] == static_cast<double>(static_cast<float>(orig));
          max_change = std::max(max_change, std::abs((*b[j])[n] - orig));
          ++checked;
        }
      }
    }
  }
  fs::remove_all(root);
  return {same_files && same_report && rounding_only,
          std::string("two desk pipelines: trace/features/model ") +
              (same_files ? "byte-identical" : "DIFFER") + ", report " +
              (same_report ? "identical apart from generated_at" : "DIFFERS") + "; FLTR " +
              std::to_string(checked) + " values " +
              (rounding_only ? "equal their float32 rounding" : "NOT float32 roundings") +
              " (max change " + Fmt("%.1e", max_change) + "), " +
              Fmt("%.1f s", Seconds(start))};
}

}  // namespace
}  // namespace fedmia

int main(int argc, char** argv) {
  using fedmia::Outcome;
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"gradient correctness", fedmia::Criterion1},
      {"FedAvg degeneracy", fedmia::Criterion2},
      {"aggregation identities", fedmia::Criterion3},
      {"desk-scale attack efficacy", fedmia::Criterion4},
      {"member/non-member gap", fedmia::Criterion5},
      {"label-free ordering", fedmia::Criterion6},
      {"observed-epoch monotonicity", fedmia::Criterion7},
      {"memory accounting", fedmia::Criterion8},
      {"baseline input size", fedmia::Criterion9},
      {"baseline attack at desk scale", fedmia::Criterion10},
      {"determinism and persistence", fedmia::Criterion11},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  int failed = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    const int n = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(n)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    std::printf("%s criterion %d (%s): %s\n", o.pass ? "PASS" : "FAIL", n, criteria[i].first,
                o.detail.c_str());
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  std::printf("%d criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
