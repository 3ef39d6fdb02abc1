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


#include "fedmia/features.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

#include "fedmia/error.h"

namespace fedmia {
namespace {

constexpr size_t kChunk = 1024;

// Full-string decimal parse; subnormal results are accepted.
bool ParseReal(const std::string& text, double& out) {
  if (text.empty()) return false;
  char* end = nullptr;
  out = std::strtod(text.c_str(), &end);
  return end == text.c_str() + text.size() && std::isfinite(out);
}

void RequireClassifier(const CheckpointTrace& trace) {
  Require(!trace.snapshots.empty(), ErrorKind::kValidation, "trace is empty");
  Require(trace.spec.class_count > 0 &&
              std::holds_alternative<Softmax>(trace.spec.layers.back()),
          ErrorKind::kSpec, "trace models must end in a softmax classifier");
}

// Applies `fn(sample_position, epoch_index, score_row)` for every sample and
// snapshot. Samples are evaluated in chunks in ascending sample-id order so
// that a sample's scores do not depend on the order it was requested in.
template <typename Fn>
void ForEachScore(const CheckpointTrace& trace, const LabeledDataset& data,
                  std::span<const AuxSample> samples, Fn fn) {
  std::vector<size_t> order(samples.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return samples[a].index < samples[b].index;
  });
  std::vector<size_t> idx;
  size_t e = 0;
  for (const auto& [epoch, net] : trace.snapshots) {
    for (size_t start = 0; start < order.size(); start += kChunk) {
      const size_t end = std::min(order.size(), start + kChunk);
      idx.clear();
      for (size_t i = start; i < end; ++i) idx.push_back(samples[order[i]].index);
      const Tensor scores = net->Evaluate(GatherInputs(data, idx)).scores;
      for (size_t i = start; i < end; ++i) fn(order[i], e, scores.row(i - start));
    }
    ++e;
  }
}

std::vector<double> SingleTrajectory(
    const CheckpointTrace& trace, std::span<const double> x,
    const std::function<double(std::span<const double>)>& reduce) {
  RequireClassifier(trace);
  Shape shape{1};
  shape.insert(shape.end(), trace.spec.input_shape.begin(),
               trace.spec.input_shape.end());
  Require(x.size() == ShapeSize(trace.spec.input_shape), ErrorKind::kInputShape,
          "sample has " + std::to_string(x.size()) + " features, model expects " +
              ShapeToString(trace.spec.input_shape));
  const Tensor batch(shape, std::vector<double>(x.begin(), x.end()));
  std::vector<double> out;
  for (const auto& [epoch, net] : trace.snapshots) {
    out.push_back(reduce(net->Evaluate(batch).scores.row(0)));
  }
  return out;
}

double MaxOf(std::span<const double> s) {
  return *std::max_element(s.begin(), s.end());
}

}  // namespace

std::string_view ToString(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::kTrueLabel:
      return "true_label";
    case FeatureKind::kEntropy:
      return "entropy";
    case FeatureKind::kMaxScore:
      return "max_score";
  }
  return "?";
}

FeatureKind ParseFeatureKind(std::string_view name) {
  if (name == "true_label") return FeatureKind::kTrueLabel;
  if (name == "entropy") return FeatureKind::kEntropy;
  if (name == "max_score") return FeatureKind::kMaxScore;
  Fail(ErrorKind::kConfig, "unknown feature kind '" + std::string(name) +
                               "' (expected true_label|entropy|max_score)");
}

Tensor FeatureMatrix::AsSeriesBatch() const {
  Require(rows() > 0 && width() > 0, ErrorKind::kValidation,
          "empty feature matrix");
  return Tensor({rows(), 1, width()}, values);
}

std::vector<size_t> FeatureMatrix::MemberLabels() const {
  std::vector<size_t> out;
  out.reserve(member.size());
  for (bool m : member) out.push_back(m ? 1 : 0);
  return out;
}

double ScoreEntropy(std::span<const double> scores) {
  double h = 0.0;
  for (double s : scores) {
    if (s > 0.0) h -= s * std::log(s);
  }
  return std::clamp(h, 0.0, std::log(static_cast<double>(scores.size())));
}

std::vector<double> TrueLabelTrajectory(const CheckpointTrace& trace,
                                        std::span<const double> x, size_t y) {
  Require(y < trace.spec.class_count, ErrorKind::kValidation,
          "label " + std::to_string(y) + " outside [0, " +
              std::to_string(trace.spec.class_count) + ")");
  return SingleTrajectory(trace, x,
                          [y](std::span<const double> s) { return s[y]; });
}

std::vector<double> EntropyTrajectory(const CheckpointTrace& trace,
                                      std::span<const double> x) {
  return SingleTrajectory(trace, x, ScoreEntropy);
}

std::vector<double> MaxScoreTrajectory(const CheckpointTrace& trace,
                                       std::span<const double> x) {
  return SingleTrajectory(trace, x, MaxOf);
}

FeatureMatrix ExtractFeatures(const CheckpointTrace& trace,
                              const LabeledDataset& data,
                              std::span<const AuxSample> samples,
                              FeatureKind kind, bool labels_available) {
  if (kind == FeatureKind::kTrueLabel && !labels_available) {
    Fail(ErrorKind::kCapability,
         "true_label features need sample labels, which this adversary lacks");
  }
  RequireClassifier(trace);
  Require(trace.spec.input_shape == Shape{data.feature_dim},
          ErrorKind::kInputShape,
          "trace model input " + ShapeToString(trace.spec.input_shape) +
              " does not match dataset dimension " +
              std::to_string(data.feature_dim));
  Require(!samples.empty(), ErrorKind::kValidation, "no samples to featurize");
  FeatureMatrix out;
  out.kind = kind;
  out.epochs = trace.epochs();
  const size_t width = out.epochs.size();
  out.values.assign(samples.size() * width, 0.0);
  for (const AuxSample& s : samples) {
    if (kind == FeatureKind::kTrueLabel) {
      Require(s.label < trace.spec.class_count, ErrorKind::kValidation,
              "sample " + std::to_string(s.index) + " label out of range");
    }
    out.sample_ids.push_back(s.index);
    out.member.push_back(s.member);
  }
  ForEachScore(trace, data, samples,
               [&](size_t i, size_t e, std::span<const double> scores) {
                 double v = 0.0;
                 switch (kind) {
                   case FeatureKind::kTrueLabel:
                     v = scores[samples[i].label];
                     break;
                   case FeatureKind::kEntropy:
                     v = ScoreEntropy(scores);
                     break;
                   case FeatureKind::kMaxScore:
                     v = MaxOf(scores);
                     break;
                 }
                 out.values[i * width + e] = v;
               });
  return out;
}

void SaveFeaturesCsv(const FeatureMatrix& f, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  Require(out.good(), ErrorKind::kIo, "cannot write " + path);
  out << "sample_id,member";
  for (size_t k = 1; k <= f.width(); ++k) out << ",f_" << k;
  out << '\n';
  char buf[32];
  for (size_t r = 0; r < f.rows(); ++r) {
    out << f.sample_ids[r] << ',' << (f.member[r] ? 1 : 0);
    for (double v : f.row(r)) {
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      out << ',' << buf;
    }
    out << '\n';
  }
  Require(out.good(), ErrorKind::kIo, "failed writing " + path);
}

FeatureMatrix LoadFeaturesCsv(const std::string& path, FeatureKind kind,
                              std::vector<size_t> epochs) {
  std::ifstream in(path);
  Require(in.good(), ErrorKind::kIo, "cannot open feature file " + path);
  FeatureMatrix f;
  f.kind = kind;
  f.epochs = std::move(epochs);
  std::string line;
  std::getline(in, line);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::string expected = "sample_id,member";
  for (size_t k = 1; k <= f.epochs.size(); ++k) {
    expected += ",f_" + std::to_string(k);
  }
  Require(line == expected, ErrorKind::kParse,
          path + ":1: header does not match " + std::to_string(f.epochs.size()) +
              " epochs");
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    auto fail = [&](const std::string& what) {
      Fail(ErrorKind::kParse, path + ":" + std::to_string(line_no) + ": " + what);
    };
    if (fields.size() != 2 + f.epochs.size()) fail("wrong field count");
    try {
      size_t pos = 0;
      const unsigned long long id = std::stoull(fields[0], &pos);
      if (pos != fields[0].size()) fail("bad sample_id");
      f.sample_ids.push_back(static_cast<size_t>(id));
      if (fields[1] != "0" && fields[1] != "1") fail("member must be 0 or 1");
      f.member.push_back(fields[1] == "1");
      for (size_t k = 2; k < fields.size(); ++k) {
        double v = 0.0;
        if (!ParseReal(fields[k], v)) fail("bad value '" + fields[k] + "'");
        f.values.push_back(v);
      }
    } catch (const std::logic_error&) {
      fail("malformed number");
    }
  }
  return f;
}

}  // namespace fedmia
