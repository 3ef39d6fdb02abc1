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


#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <regex>
#include <sstream>

#include "fedmia/error.h"
#include "fedmia/experiment.h"
#include "fedmia/report.h"
#include "fedmia/stages.h"
#include "fedmia/svg.h"
#include "gtest/gtest.h"

namespace fedmia {
namespace {

namespace fs = std::filesystem;

const std::string kConfigs = FEDMIA_SOURCE_DIR "/configs/";

ErrorKind KindOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected fedmia::Error";
  return ErrorKind::kIo;
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path FreshDir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("fedmia_cli_" + name);
  fs::remove_all(dir);
  return dir;
}

ExperimentConfig Smoke() { return LoadExperimentConfig(kConfigs + "smoke.json"); }

void RunPipeline(const ExperimentConfig& c, const fs::path& dir, const std::string& stamp) {
  std::ostringstream log;
  RunFlTrainStage(c, dir.string(), log);
  RunExtractFeaturesStage(c, dir.string(), log);
  RunAttackTrainStage(c, dir.string(), log);
  RunAttackEvalStage(c, dir.string(), stamp, log);
}

TEST(ConfigTest, ShippedConfigsParse) {
  for (const char* name : {"desk.json", "smoke.json", "purchase.json"}) {
    EXPECT_NO_THROW(LoadExperimentConfig(kConfigs + name)) << name;
  }
  const ExperimentConfig p = LoadExperimentConfig(kConfigs + "purchase.json");
  EXPECT_EQ(p.fl.optimizer, OptimizerKind::kAdam);
  EXPECT_EQ(p.fl.batch_size, 100u);
  EXPECT_EQ(p.fl.lr_schedule, (std::vector<LrStage>{{1, 0.001}}));
  EXPECT_EQ(p.fl.observed_epochs, (std::vector<size_t>{100, 150, 200, 250, 300}));
  EXPECT_TRUE(fs::path(p.dataset.path).is_absolute());
}

TEST(ConfigTest, UnknownKeysAndBadTypesAreRejected) {
  auto message = [](const std::string& text) {
    try {
      ParseExperimentConfig(text);
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::kConfig);
      return std::string(e.what());
    }
    ADD_FAILURE() << "accepted " << text;
    return std::string();
  };
  EXPECT_NE(message(R"({"sed": 1})").find("'sed'"), std::string::npos);
  EXPECT_NE(message(R"({"fl": {"rounds": 10, "round": 3}})").find("fl.round"),
            std::string::npos);
  EXPECT_NE(message(R"({"fl": {"lr_schedule": [{"from_epoch": 1, "lr": 0.1}]}})")
                .find("fl.lr_schedule[0].lr"),
            std::string::npos);
  EXPECT_NE(message(R"({"fl": {"rounds": "ten"}})").find("fl.rounds"), std::string::npos);
  EXPECT_NE(message(R"({"seed": -4})").find("seed"), std::string::npos);
  message(R"({"attack": {"kind": "loss"}})");
  message(R"({"dataset": {"kind": "images"}})");
  message("{not json");
}

TEST(ConfigTest, WeightsMustSumToOne) {
  EXPECT_EQ(KindOf([] {
              ParseExperimentConfig(R"({"fl": {"n_clients": 2, "weights": [0.5, 0.6]}})");
            }),
            ErrorKind::kConfig);
  EXPECT_NO_THROW(
      ParseExperimentConfig(R"({"fl": {"n_clients": 2, "weights": [0.25, 0.75]}})"));
}

TEST(ConfigTest, DumpRoundTrips) {
  for (const char* name : {"desk.json", "smoke.json", "purchase.json"}) {
    const ExperimentConfig c = LoadExperimentConfig(kConfigs + name);
    const std::string dump = DumpExperimentConfig(c);
    EXPECT_EQ(DumpExperimentConfig(ParseExperimentConfig(dump)), dump) << name;
  }
}

TEST(ConfigTest, SeedsFanOutAndDigestsTrackStages) {
  const SubSeeds a = FanOutSeeds(1), b = FanOutSeeds(2);
  const std::set<uint64_t> distinct{a.data, a.holdout, a.fl, a.aux, a.attack, a.baseline};
  EXPECT_EQ(distinct.size(), 6u);
  EXPECT_NE(a.fl, b.fl);

  const ExperimentConfig base = Smoke();
  ExperimentConfig c = base;
  c.attack_hp.epochs += 1;
  EXPECT_EQ(TraceDigest(c), TraceDigest(base));
  EXPECT_EQ(FeaturesDigest(c), FeaturesDigest(base));
  EXPECT_NE(ModelDigest(c), ModelDigest(base));
  c = base;
  c.attack = AttackKind::kEntropy;
  EXPECT_EQ(TraceDigest(c), TraceDigest(base));
  EXPECT_NE(FeaturesDigest(c), FeaturesDigest(base));
  c = base;
  c.seed += 1;
  EXPECT_NE(TraceDigest(c), TraceDigest(base));
  EXPECT_NE(ModelDigest(c), ModelDigest(base));
}

TEST(StagesTest, OutDirPrecedence) {
  ExperimentConfig c;
  c.out_dir = "from_config";
  unsetenv("FEDMIA_OUT_DIR");
  EXPECT_EQ(ResolveOutDir(std::nullopt, c), "from_config");
  setenv("FEDMIA_OUT_DIR", "from_env", 1);
  EXPECT_EQ(ResolveOutDir(std::nullopt, c), "from_env");
  EXPECT_EQ(ResolveOutDir(std::string("from_flag"), c), "from_flag");
  unsetenv("FEDMIA_OUT_DIR");
}

TEST(StagesTest, ExitCodes) {
  EXPECT_EQ(ExitCodeFor(ErrorKind::kConfig), 2);
  EXPECT_EQ(ExitCodeFor(ErrorKind::kNumeric), 4);
  for (ErrorKind k : {ErrorKind::kParse, ErrorKind::kIo, ErrorKind::kCapacity,
                      ErrorKind::kCapability, ErrorKind::kDependency, ErrorKind::kFormat}) {
    EXPECT_EQ(ExitCodeFor(k), 3);
  }
}

TEST(StagesTest, EpochSets) {
  EXPECT_EQ(ParseEpochSets("5,10,15;20,25"),
            (std::vector<std::vector<size_t>>{{5, 10, 15}, {20, 25}}));
  for (const char* bad : {"", "5,,6", "5;", "a,b", "-1,2", "3.5"}) {
    EXPECT_EQ(KindOf([&] { ParseEpochSets(bad); }), ErrorKind::kConfig) << bad;
  }
  ExperimentConfig c = Smoke();
  c.sweep.epoch_sets = {{26, 28, 30}};
  EXPECT_EQ(KindOf([&] { SweepObservedEpochs(c); }), ErrorKind::kConfig);
  c.sweep.epoch_sets = {{2, 4}, {30, 31}};
  EXPECT_EQ(KindOf([&] { c.Validate(); }), ErrorKind::kConfig);
}

TEST(PipelineTest, RepeatedRunsAreByteIdentical) {
  const ExperimentConfig c = Smoke();
  const fs::path one = FreshDir("repeat1"), two = FreshDir("repeat2");
  RunPipeline(c, one, "2026-01-01T00:00:00Z");
  RunPipeline(c, two, "2026-06-30T12:34:56Z");
  for (const char* file : {kTraceFile, kAccuracyLogFile, kFeaturesTrainFile,
                           kFeaturesTestFile, kAttackModelFile}) {
    EXPECT_EQ(Slurp(one / file), Slurp(two / file)) << file;
  }
  const std::string r1 = Slurp(one / kReportFile), r2 = Slurp(two / kReportFile);
  EXPECT_NE(r1, r2);
  const std::regex stamp("\"generated_at\": \"[^\"]*\"");
  EXPECT_EQ(std::regex_replace(r1, stamp, ""), std::regex_replace(r2, stamp, ""));

  const ExperimentReport report = ReadReport((one / kReportFile).string());
  ASSERT_EQ(report.attacks.size(), 1u);
  EXPECT_EQ(report.attacks[0].epochs, c.fl.observed_epochs);
  EXPECT_EQ(report.attacks[0].confusion.total(), 60u);
  EXPECT_TRUE(report.trajectory_means.has_value());
  EXPECT_EQ(report.fl_log.size(), c.fl.rounds);
  EXPECT_EQ(report.cost.a.input_len, 5u);
  EXPECT_GT(report.cost.b.input_len, 100 * report.cost.a.input_len);
  fs::remove_all(one);
  fs::remove_all(two);
}

TEST(PipelineTest, StagesRefuseMissingOrForeignUpstream) {
  const ExperimentConfig c = Smoke();
  const fs::path dir = FreshDir("deps");
  std::ostringstream log;
  EXPECT_EQ(KindOf([&] { RunExtractFeaturesStage(c, dir.string(), log); }),
            ErrorKind::kDependency);
  EXPECT_EQ(KindOf([&] { RunAttackTrainStage(c, dir.string(), log); }),
            ErrorKind::kDependency);
  EXPECT_EQ(KindOf([&] { RunAttackEvalStage(c, dir.string(), "", log); }),
            ErrorKind::kDependency);
  EXPECT_EQ(KindOf([&] { RunPlotStage(dir.string(), log); }), ErrorKind::kDependency);
  RunFlTrainStage(c, dir.string(), log);
  ExperimentConfig other = c;
  other.seed += 1;
  try {
    RunExtractFeaturesStage(other, dir.string(), log);
    ADD_FAILURE() << "foreign trace accepted";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kDependency);
    EXPECT_NE(std::string(e.what()).find("rerun fl-train"), std::string::npos);
  }
  fs::remove_all(dir);
}

TEST(PipelineTest, LabelFreeFeaturesRefuseTrueLabelAttack) {
  ExperimentConfig c = Smoke();
  c.labels_available = false;
  const fs::path dir = FreshDir("labels");
  std::ostringstream log;
  RunFlTrainStage(c, dir.string(), log);
  EXPECT_EQ(KindOf([&] { RunExtractFeaturesStage(c, dir.string(), log); }),
            ErrorKind::kCapability);
  c.attack = AttackKind::kEntropy;
  RunExtractFeaturesStage(c, dir.string(), log);
  c.attack = AttackKind::kTrueLabel;
  EXPECT_EQ(KindOf([&] { RunAttackTrainStage(c, dir.string(), log); }),
            ErrorKind::kCapability);
  c.attack = AttackKind::kMaxScore;
  EXPECT_EQ(KindOf([&] { RunAttackTrainStage(c, dir.string(), log); }),
            ErrorKind::kDependency);
  fs::remove_all(dir);
}

TEST(PipelineTest, BaselineThroughStages) {
  ExperimentConfig c = Smoke();
  c.attack = AttackKind::kBaseline;
  const fs::path dir = FreshDir("baseline");
  RunPipeline(c, dir, "t");
  const ExperimentReport report = ReadReport((dir / kReportFile).string());
  ASSERT_EQ(report.attacks.size(), 1u);
  EXPECT_EQ(report.attacks[0].kind, AttackKind::kBaseline);
  // hidden 32, 20 features, 5 classes: d = 20*32+32 + 32*5+5 = 837
  EXPECT_EQ(report.attacks[0].input_len, (837 + 1 + 37) * 5 + 5u);
  EXPECT_FALSE(report.trajectory_means.has_value());
  fs::remove_all(dir);
}

// Tag balance and attribute quoting, enough to catch broken markup.
bool WellFormedXml(const std::string& s) {
  std::vector<std::string> stack;
  size_t i = s.find("?>");
  if (s.rfind("<?xml", 0) != 0 || i == std::string::npos) return false;
  for (i += 2; (i = s.find('<', i)) != std::string::npos;) {
    const size_t end = s.find('>', i);
    if (end == std::string::npos) return false;
    std::string tag = s.substr(i + 1, end - i - 1);
    if (std::count(tag.begin(), tag.end(), '"') % 2 != 0) return false;
    if (tag[0] == '/') {
      if (stack.empty() || stack.back() != tag.substr(1)) return false;
      stack.pop_back();
    } else if (tag.back() != '/') {
      stack.push_back(tag.substr(0, tag.find(' ')));
    }
    i = end + 1;
  }
  return stack.empty();
}

size_t Count(const std::string& s, const std::string& what) {
  size_t n = 0;
  for (size_t i = 0; (i = s.find(what, i)) != std::string::npos; i += what.size()) ++n;
  return n;
}

TEST(PlotTest, FiguresAreValidDeterministicSvg) {
  std::vector<SlidingWindowRow> rows;
  for (size_t t = 10; t <= 50; t += 10) {
    rows.push_back({t, 0.5 + t / 200.0, 0.6 + t / 150.0, 0.5});
  }
  const std::string fig3 = RenderSvg(AccuracyOverTimePlot(rows, 10));
  EXPECT_TRUE(WellFormedXml(fig3));
  EXPECT_EQ(Count(fig3, "class=\"series\""), 3u);
  EXPECT_NE(fig3.find("window of 10"), std::string::npos);
  EXPECT_EQ(fig3, RenderSvg(AccuracyOverTimePlot(rows, 10)));

  const TrajectoryMeans means{FeatureKind::kTrueLabel, {60, 70, 80}, {0.8, 0.9, 0.95},
                              {0.5, 0.52, 0.5}};
  const std::string fig4 = RenderSvg(MemberGapPlot(means));
  EXPECT_TRUE(WellFormedXml(fig4));
  EXPECT_EQ(Count(fig4, "class=\"series\""), 2u);

  EXPECT_EQ(KindOf([] { AccuracyOverTimePlot({}, 10); }), ErrorKind::kValidation);
  EXPECT_EQ(KindOf([] { RenderSvg(LinePlot{}); }), ErrorKind::kValidation);
  LinePlot escaped{"a < b & \"c\"", "x", "y", {{"s<1>", {1}, {2}}}, std::nullopt};
  EXPECT_TRUE(WellFormedXml(RenderSvg(escaped)));
}

TEST(PlotTest, SlidingWindowUsesTenEpochWindows) {
  ExperimentConfig c = Smoke();
  c.sweep.window = 10;
  c.sweep.window_stride = 10;
  const std::vector<SlidingWindowRow> rows = SweepSlidingWindow(c);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].t, 10u);
  EXPECT_EQ(rows[2].t, 30u);

  // Same accuracy as a direct attack on T = {21, ..., 30}.
  const PreparedData prepared = PrepareData(c);
  std::vector<size_t> window;
  for (size_t e = 21; e <= 30; ++e) window.push_back(e);
  const FedAvgResult fl = TrainTargetModel(prepared, window);
  const AttackResult direct = RunAttack(c, prepared, fl.trace, DrawAuxiliary(c, prepared),
                                        c.attack, c.sweep.window_epochs);
  EXPECT_EQ(direct.epochs, window);
  EXPECT_EQ(rows[2].attack_accuracy, direct.confusion.accuracy());
  EXPECT_EQ(rows[2].train_accuracy, fl.log[29].train_acc);
}

TEST(PlotTest, PlotStageWritesBothFigures) {
  const ExperimentConfig c = Smoke();
  const fs::path dir = FreshDir("plot");
  RunPipeline(c, dir, "t");
  std::ostringstream log;
  RunSweepStage(c, SweepKind::kSlidingWindow, dir.string(), log);
  RunPlotStage(dir.string(), log);
  EXPECT_TRUE(WellFormedXml(Slurp(dir / kAccuracyPlotFile)));
  EXPECT_TRUE(WellFormedXml(Slurp(dir / kMemberGapPlotFile)));
  fs::remove_all(dir);
}

TEST(ReportTest, RoundTripAndStrictness) {
  const ExperimentConfig c = Smoke();
  const fs::path dir = FreshDir("report");
  RunPipeline(c, dir, "2026-01-01T00:00:00Z");
  const std::string text = Slurp(dir / kReportFile);
  const ExperimentReport r = ParseReport(text);
  EXPECT_EQ(ReportToJson(r), text);
  EXPECT_EQ(r.generated_at, "2026-01-01T00:00:00Z");

  auto edit = [&](const std::string& from, const std::string& to) {
    std::string t = text;
    const size_t at = t.find(from);
    EXPECT_NE(at, std::string::npos) << from;
    return t.replace(at, from.size(), to);
  };
  EXPECT_EQ(KindOf([&] { ParseReport(edit("\"schema_version\": 1", "\"schema_version\": 2")); }),
            ErrorKind::kParse);
  EXPECT_EQ(KindOf([&] { ParseReport(edit("{\n", "{\n  \"extra\": 1,\n")); }),
            ErrorKind::kParse);
  EXPECT_EQ(KindOf([&] { ParseReport(edit("\"tp\":", "\"hits\": 0, \"tp\":")); }),
            ErrorKind::kParse);
  EXPECT_EQ(KindOf([&] { ParseReport(edit("\"macs\":", "\"flops\": 0, \"macs\":")); }),
            ErrorKind::kParse);
  EXPECT_EQ(KindOf([&] { ParseReport(edit("\"seed\":", "\"colour\": 0, \"seed\":")); }),
            ErrorKind::kParse);
  fs::remove_all(dir);
}

int RunCli(const std::string& args) {
  const int status = std::system((std::string(FEDMIA_CLI) + " " + args + " 2>/dev/null").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(CliTest, ExitCodesAndFlags) {
  const fs::path dir = FreshDir("exe");
  fs::create_directories(dir);
  const std::string out = " --out " + dir.string();
  const std::string smoke = " --config " + kConfigs + "smoke.json";
  EXPECT_EQ(RunCli("attack-eval" + smoke + out), 3);
  EXPECT_EQ(RunCli("fl-train" + smoke + out), 0);
  EXPECT_TRUE(fs::exists(dir / kTraceFile));
  EXPECT_EQ(RunCli("extract-features" + smoke + out + " --seed 99"), 3);

  const fs::path bad = dir / "bad.json";
  std::ofstream(bad) << R"({"fl": {"n_clients": 2, "weights": [0.4, 0.4]}})";
  EXPECT_EQ(RunCli("fl-train --config " + bad.string() + out), 2);
  EXPECT_EQ(RunCli("report --sweep observed-epochs --epoch-sets 26,28,30" + smoke + out), 2);
  EXPECT_EQ(RunCli("report --sweep diagonal" + smoke + out), 2);
  EXPECT_EQ(RunCli("no-such-command"), 2);
  EXPECT_EQ(RunCli("fl-train --config /nonexistent.json"), 2);

  const fs::path env_dir = dir / "env";
  const std::string cmd = "FEDMIA_OUT_DIR=" + env_dir.string() + " " + std::string(FEDMIA_CLI) +
                          " fl-train" + smoke + " 2>/dev/null";
  EXPECT_EQ(std::system(cmd.c_str()), 0);
  EXPECT_TRUE(fs::exists(env_dir / kTraceFile));
  fs::remove_all(dir);
}

}  // namespace
}  // namespace fedmia
