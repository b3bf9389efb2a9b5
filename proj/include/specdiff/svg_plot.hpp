// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

namespace specdiff {

struct PlotSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotOptions {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  int width = 640;
  int height = 420;
};

/// Static SVG line chart. Points that are non-finite, or non-positive on a
/// log axis, are skipped.
std::string line_chart_svg(const std::vector<PlotSeries>& series, const PlotOptions& options);
void write_line_chart(const std::string& path, const std::vector<PlotSeries>& series,
                      const PlotOptions& options);

}  // namespace specdiff
