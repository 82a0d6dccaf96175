#pragma once

#include <string>
#include <utility>
#include <vector>

namespace qgcn::train {

struct PlotSeries {
  std::string label;
  std::vector<std::pair<double, double>> points;  // (x, y), drawn in order
};

struct PlotOptions {
  std::string title;
  std::string x_label = "quality factor";
  std::string y_label = "IPSNR (dB)";
  int width = 640;
  int height = 400;
};

// Standalone SVG document with axes, ticks, a zero line when y spans 0, one
// polyline with markers per series and a legend.
std::string render_line_plot(const std::vector<PlotSeries>& series, const PlotOptions& opts = {});

}  // namespace qgcn::train
