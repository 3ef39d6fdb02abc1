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


#ifndef FEDMIA_SVG_H_
#define FEDMIA_SVG_H_

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fedmia/experiment.h"
#include "fedmia/report.h"

namespace fedmia {

struct PlotSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct LinePlot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<PlotSeries> series;
  // Fixed y range; fitted to the data when empty.
  std::optional<std::pair<double, double>> y_range;
};

// Standalone SVG document with one polyline per series and a legend.
// kValidation when there is no series or a series has no points.
std::string RenderSvg(const LinePlot& plot);

// Attack accuracy over sliding windows with the target's train and test
// accuracy at the window end.
LinePlot AccuracyOverTimePlot(const std::vector<SlidingWindowRow>& rows, size_t window);
// Mean member and non-member feature value per observed epoch.
LinePlot MemberGapPlot(const TrajectoryMeans& means);

void WriteSvg(const std::string& svg, const std::string& path);

}  // namespace fedmia

#endif  // FEDMIA_SVG_H_
