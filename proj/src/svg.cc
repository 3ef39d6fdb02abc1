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


#include "fedmia/svg.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "fedmia/error.h"

namespace fedmia {
namespace {

constexpr double kWidth = 640, kHeight = 400;
constexpr double kLeft = 70, kRight = 170, kTop = 40, kBottom = 60;
constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                   "#9467bd", "#8c564b"};

std::string Num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string Tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

std::string Escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::pair<double, double> Padded(double lo, double hi) {
  if (lo == hi) return {lo - 0.5, hi + 0.5};
  return {lo, hi};
}

}  // namespace

std::string RenderSvg(const LinePlot& plot) {
  Require(!plot.series.empty(), ErrorKind::kValidation, "plot has no series");
  double x_lo = INFINITY, x_hi = -INFINITY, y_lo = INFINITY, y_hi = -INFINITY;
  for (const PlotSeries& s : plot.series) {
    Require(!s.x.empty() && s.x.size() == s.y.size(), ErrorKind::kValidation,
            "series '" + s.name + "' is empty or has mismatched x/y lengths");
    for (size_t i = 0; i < s.x.size(); ++i) {
      Require(std::isfinite(s.x[i]) && std::isfinite(s.y[i]), ErrorKind::kValidation,
              "series '" + s.name + "' has a non-finite point");
      x_lo = std::min(x_lo, s.x[i]);
      x_hi = std::max(x_hi, s.x[i]);
      y_lo = std::min(y_lo, s.y[i]);
      y_hi = std::max(y_hi, s.y[i]);
    }
  }
  std::tie(x_lo, x_hi) = Padded(x_lo, x_hi);
  std::tie(y_lo, y_hi) = plot.y_range ? *plot.y_range : Padded(y_lo, y_hi);
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - x_lo) / (x_hi - x_lo) * pw; };
  auto py = [&](double y) { return kTop + (1.0 - (y - y_lo) / (y_hi - y_lo)) * ph; };

  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + Num(kWidth) +
         "\" height=\"" + Num(kHeight) + "\" viewBox=\"0 0 " + Num(kWidth) + " " +
         Num(kHeight) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + Num(kLeft + pw / 2) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">" +
         Escape(plot.title) + "</text>\n";
  svg += "<rect x=\"" + Num(kLeft) + "\" y=\"" + Num(kTop) + "\" width=\"" + Num(pw) +
         "\" height=\"" + Num(ph) + "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double fx = x_lo + (x_hi - x_lo) * i / 4.0;
    const double fy = y_lo + (y_hi - y_lo) * i / 4.0;
    svg += "<text x=\"" + Num(px(fx)) + "\" y=\"" + Num(kTop + ph + 18) +
           "\" text-anchor=\"middle\">" + Tick(fx) + "</text>\n";
    svg += "<text x=\"" + Num(kLeft - 6) + "\" y=\"" + Num(py(fy) + 4) +
           "\" text-anchor=\"end\">" + Tick(fy) + "</text>\n";
    svg += "<line x1=\"" + Num(kLeft) + "\" y1=\"" + Num(py(fy)) + "\" x2=\"" +
           Num(kLeft + pw) + "\" y2=\"" + Num(py(fy)) +
           "\" stroke=\"#dddddd\"/>\n";
  }
  svg += "<text x=\"" + Num(kLeft + pw / 2) + "\" y=\"" + Num(kHeight - 16) +
         "\" text-anchor=\"middle\">" + Escape(plot.x_label) + "</text>\n";
  svg += "<text x=\"18\" y=\"" + Num(kTop + ph / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " +
         Num(kTop + ph / 2) + ")\">" + Escape(plot.y_label) + "</text>\n";
  for (size_t k = 0; k < plot.series.size(); ++k) {
    const PlotSeries& s = plot.series[k];
    const char* color = kColors[k % std::size(kColors)];
    std::string points;
    for (size_t i = 0; i < s.x.size(); ++i) {
      points += (i ? " " : "") + Num(px(s.x[i])) + "," + Num(py(s.y[i]));
    }
    svg += "<polyline class=\"series\" data-name=\"" + Escape(s.name) +
           "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"2\" points=\"" +
           points + "\"/>\n";
    const double ly = kTop + 14 + 20.0 * static_cast<double>(k);
    svg += "<line x1=\"" + Num(kWidth - kRight + 12) + "\" y1=\"" + Num(ly) + "\" x2=\"" +
           Num(kWidth - kRight + 36) + "\" y2=\"" + Num(ly) + "\" stroke=\"" + color +
           "\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"" + Num(kWidth - kRight + 42) + "\" y=\"" + Num(ly + 4) + "\">" +
           Escape(s.name) + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

LinePlot AccuracyOverTimePlot(const std::vector<SlidingWindowRow>& rows, size_t window) {
  Require(!rows.empty(), ErrorKind::kValidation, "no sliding-window rows to plot");
  LinePlot plot;
  plot.title = "Attack and client model accuracy (window of " + std::to_string(window) +
               " epochs)";
  plot.x_label = "epoch t";
  plot.y_label = "accuracy";
  plot.y_range = std::pair{0.0, 1.0};
  PlotSeries attack{"attack", {}, {}}, train{"train", {}, {}}, test{"test", {}, {}};
  for (const SlidingWindowRow& r : rows) {
    const double t = static_cast<double>(r.t);
    attack.x.push_back(t);
    attack.y.push_back(r.attack_accuracy);
    train.x.push_back(t);
    train.y.push_back(r.train_accuracy);
    if (r.test_accuracy) {
      test.x.push_back(t);
      test.y.push_back(*r.test_accuracy);
    }
  }
  Require(!test.x.empty(), ErrorKind::kValidation, "sliding-window rows carry no test accuracy");
  plot.series = {std::move(attack), std::move(train), std::move(test)};
  return plot;
}

LinePlot MemberGapPlot(const TrajectoryMeans& means) {
  Require(!means.epochs.empty(), ErrorKind::kValidation, "no observed epochs to plot");
  LinePlot plot;
  plot.title = "Mean " + std::string(ToString(means.kind)) + " value per epoch";
  plot.x_label = "epoch";
  plot.y_label = std::string(ToString(means.kind));
  if (means.kind != FeatureKind::kEntropy) plot.y_range = std::pair{0.0, 1.0};
  PlotSeries member{"members", {}, means.member}, nonmember{"non-members", {}, means.nonmember};
  for (size_t e : means.epochs) {
    member.x.push_back(static_cast<double>(e));
    nonmember.x.push_back(static_cast<double>(e));
  }
  plot.series = {std::move(member), std::move(nonmember)};
  return plot;
}

void WriteSvg(const std::string& svg, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  Require(out.good(), ErrorKind::kIo, "cannot write " + path);
  out << svg;
  Require(out.good(), ErrorKind::kIo, "failed writing " + path);
}

}  // namespace fedmia
