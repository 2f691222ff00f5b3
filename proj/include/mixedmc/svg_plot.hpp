#pragma once

#include <string>
#include <vector>

namespace mixedmc {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct LinePlot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<PlotSeries> series;
};

/// Standalone SVG document: axes with ticks and labels, one polyline with
/// markers per series, and a legend keyed by series label.
std::string render_svg(const LinePlot& plot);

}  // namespace mixedmc
