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


#include "fedmia/report.h"

#include <cmath>
#include <ctime>
#include <fstream>
#include <sstream>

#include "fedmia/error.h"
#include "json.hpp"
#include "json_reader.h"

namespace fedmia {
namespace {

using internal::ObjectReader;
using nlohmann::json;

json CostJson(const CostReport& c) {
  return {{"input_len", c.input_len},       {"trainable_count", c.trainable_count},
          {"param_count", c.param_count},   {"memory_bytes", c.memory_bytes},
          {"macs", c.macs}};
}

json RatioJson(double r) { return std::isinf(r) ? json(nullptr) : json(r); }

CostReport ReadCost(ObjectReader r) {
  CostReport c;
  for (auto [key, field] : {std::pair{"input_len", &c.input_len},
                            {"trainable_count", &c.trainable_count},
                            {"param_count", &c.param_count},
                            {"memory_bytes", &c.memory_bytes},
                            {"macs", &c.macs}}) {
    Require(r.Has(key), ErrorKind::kParse, "missing key '" + r.Child(key) + "'");
    r.Read(key, *field);
  }
  r.Finish();
  return c;
}

double ReadRatio(const json& j, const std::string& where) {
  if (j.is_null()) return INFINITY;
  Require(j.is_number(), ErrorKind::kParse, where + " must be a number or null");
  return j.get<double>();
}

// Reads every listed key, failing on absent ones.
template <typename T>
void Need(ObjectReader& r, const std::string& key, T& out) {
  Require(r.Has(key), ErrorKind::kParse, "missing key '" + r.Child(key) + "'");
  r.Read(key, out);
}

ObjectReader NeedObject(ObjectReader& r, const std::string& key) {
  Require(r.Has(key), ErrorKind::kParse, "missing key '" + r.Child(key) + "'");
  return r.Object(key);
}

}  // namespace

TrajectoryMeans MeanTrajectories(const FeatureMatrix& f) {
  TrajectoryMeans m;
  m.kind = f.kind;
  m.epochs = f.epochs;
  m.member.assign(f.width(), 0.0);
  m.nonmember.assign(f.width(), 0.0);
  size_t members = 0;
  for (size_t r = 0; r < f.rows(); ++r) {
    std::vector<double>& sum = f.member[r] ? m.member : m.nonmember;
    members += f.member[r] ? 1 : 0;
    for (size_t k = 0; k < f.width(); ++k) sum[k] += f.row(r)[k];
  }
  const size_t nonmembers = f.rows() - members;
  Require(members > 0 && nonmembers > 0, ErrorKind::kValidation,
          "mean trajectories need both members and non-members");
  for (double& v : m.member) v /= static_cast<double>(members);
  for (double& v : m.nonmember) v /= static_cast<double>(nonmembers);
  return m;
}

CostComparison AttackCostComparison(const ExperimentConfig& config,
                                    const NetworkSpec& target_spec) {
  const size_t n_epochs = config.fl.observed_epochs.size();
  const size_t len = BaselineInputSize(target_spec.TrainableParamCount(),
                                       target_spec.StageOutputSizes(), n_epochs,
                                       target_spec.class_count);
  return CompareCosts(MakeAttackFcnSpec(n_epochs, config.fcn), n_epochs,
                      MakeBaselineSpec(len, config.baseline), len);
}

std::string UtcTimestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm utc{};
  gmtime_r(&now, &utc);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &utc);
  return buf;
}

std::string ReportToJson(const ExperimentReport& r) {
  json j;
  j["schema_version"] = r.schema_version;
  j["generated_at"] = r.generated_at;
  j["config"] = json::parse(DumpExperimentConfig(r.config));
  json attacks = json::array();
  for (const AttackEntry& a : r.attacks) {
    attacks.push_back({{"kind", std::string(ToString(a.kind))},
                       {"epochs", a.epochs},
                       {"input_len", a.input_len},
                       {"accuracy", a.confusion.accuracy()},
                       {"confusion",
                        {{"tp", a.confusion.true_positive},
                         {"fp", a.confusion.false_positive},
                         {"tn", a.confusion.true_negative},
                         {"fn", a.confusion.false_negative}}}});
  }
  j["attacks"] = attacks;
  if (r.trajectory_means) {
    const TrajectoryMeans& m = *r.trajectory_means;
    j["trajectory_means"] = {{"kind", std::string(ToString(m.kind))},
                             {"epochs", m.epochs},
                             {"member", m.member},
                             {"nonmember", m.nonmember}};
  } else {
    j["trajectory_means"] = nullptr;
  }
  j["cost"] = {{"attack_fcn", CostJson(r.cost.a)},
               {"baseline", CostJson(r.cost.b)},
               {"ratios",
                {{"params", RatioJson(r.cost.param_ratio)},
                 {"memory", RatioJson(r.cost.memory_ratio)},
                 {"macs", RatioJson(r.cost.mac_ratio)}}}};
  json log = json::array();
  for (const RoundAccuracy& a : r.fl_log) {
    log.push_back({{"round", a.round},
                   {"train_acc", a.train_acc},
                   {"test_acc", a.test_acc ? json(*a.test_acc) : json(nullptr)}});
  }
  j["fl_log"] = log;
  return j.dump(2) + "\n";
}

ExperimentReport ParseReport(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    Fail(ErrorKind::kParse, std::string("report is not valid JSON: ") + e.what());
  }
  ExperimentReport r;
  ObjectReader top(j, "", ErrorKind::kParse);
  int version = 0;
  Need(top, "schema_version", version);
  Require(version == kReportSchemaVersion, ErrorKind::kParse,
          "report schema version " + std::to_string(version) + " is not supported (expected " +
              std::to_string(kReportSchemaVersion) + ")");
  Need(top, "generated_at", r.generated_at);
  Require(top.Has("config"), ErrorKind::kParse, "missing key 'config'");
  try {
    r.config = ParseExperimentConfig(top.Raw("config").dump());
  } catch (const Error& e) {
    Fail(ErrorKind::kParse, std::string("report config: ") + e.what());
  }

  Require(top.Has("attacks") && j["attacks"].is_array(), ErrorKind::kParse,
          "'attacks' must be an array");
  const json& attacks = top.Raw("attacks");
  for (size_t i = 0; i < attacks.size(); ++i) {
    ObjectReader a(attacks[i], "attacks[" + std::to_string(i) + "]", ErrorKind::kParse);
    AttackEntry e;
    std::string kind;
    Need(a, "kind", kind);
    try {
      e.kind = ParseAttackKind(kind);
    } catch (const Error& err) {
      Fail(ErrorKind::kParse, a.Child("kind") + ": " + err.what());
    }
    Need(a, "epochs", e.epochs);
    Need(a, "input_len", e.input_len);
    double accuracy = 0.0;
    Need(a, "accuracy", accuracy);
    ObjectReader c = NeedObject(a, "confusion");
    Need(c, "tp", e.confusion.true_positive);
    Need(c, "fp", e.confusion.false_positive);
    Need(c, "tn", e.confusion.true_negative);
    Need(c, "fn", e.confusion.false_negative);
    c.Finish();
    a.Finish();
    Require(accuracy == e.confusion.accuracy(), ErrorKind::kParse,
            a.Child("accuracy") + " disagrees with the confusion counts");
    r.attacks.push_back(std::move(e));
  }

  Require(top.Has("trajectory_means"), ErrorKind::kParse, "missing key 'trajectory_means'");
  if (const json& tm = top.Raw("trajectory_means"); !tm.is_null()) {
    ObjectReader m(tm, "trajectory_means", ErrorKind::kParse);
    TrajectoryMeans means;
    std::string kind;
    Need(m, "kind", kind);
    try {
      means.kind = ParseFeatureKind(kind);
    } catch (const Error& err) {
      Fail(ErrorKind::kParse, m.Child("kind") + ": " + err.what());
    }
    Need(m, "epochs", means.epochs);
    Need(m, "member", means.member);
    Need(m, "nonmember", means.nonmember);
    m.Finish();
    Require(means.member.size() == means.epochs.size() &&
                means.nonmember.size() == means.epochs.size(),
            ErrorKind::kParse, "trajectory_means series lengths differ from epochs");
    r.trajectory_means = std::move(means);
  }

  ObjectReader cost = NeedObject(top, "cost");
  r.cost.a = ReadCost(NeedObject(cost, "attack_fcn"));
  r.cost.b = ReadCost(NeedObject(cost, "baseline"));
  ObjectReader ratios = NeedObject(cost, "ratios");
  for (auto [key, field] : {std::pair{"params", &r.cost.param_ratio},
                            {"memory", &r.cost.memory_ratio},
                            {"macs", &r.cost.mac_ratio}}) {
    Require(ratios.Has(key), ErrorKind::kParse, "missing key 'cost.ratios." +
                                                     std::string(key) + "'");
    *field = ReadRatio(ratios.Raw(key), "cost.ratios." + std::string(key));
  }
  ratios.Finish();
  cost.Finish();

  Require(top.Has("fl_log") && j["fl_log"].is_array(), ErrorKind::kParse,
          "'fl_log' must be an array");
  const json& log = top.Raw("fl_log");
  for (size_t i = 0; i < log.size(); ++i) {
    ObjectReader a(log[i], "fl_log[" + std::to_string(i) + "]", ErrorKind::kParse);
    RoundAccuracy acc;
    Need(a, "round", acc.round);
    Need(a, "train_acc", acc.train_acc);
    Require(a.Has("test_acc"), ErrorKind::kParse, "missing key '" + a.Child("test_acc") + "'");
    if (const json& t = a.Raw("test_acc"); !t.is_null()) {
      Require(t.is_number(), ErrorKind::kParse, a.Child("test_acc") + " must be a number");
      acc.test_acc = t.get<double>();
    }
    a.Finish();
    r.fl_log.push_back(acc);
  }
  top.Finish();
  return r;
}

void WriteReport(const ExperimentReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  Require(out.good(), ErrorKind::kIo, "cannot write " + path);
  out << ReportToJson(report);
  Require(out.good(), ErrorKind::kIo, "failed writing " + path);
}

ExperimentReport ReadReport(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  Require(in.good(), ErrorKind::kIo, "cannot read " + path);
  std::stringstream text;
  text << in.rdbuf();
  return ParseReport(text.str());
}

}  // namespace fedmia
