#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace dtr {

/// One polyline of a plot.
struct PlotSeries {
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f77b4";
  std::string label;
};

/// A shaded region between two curves (confidence band).
struct PlotBand {
  std::vector<double> x;
  std::vector<double> lower;
  std::vector<double> upper;
  std::string color = "#1f77b4";
};

/// Self-contained SVG line plot; no external assets or fonts beyond the SVG
/// `sans-serif` default.
struct LinePlot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<PlotSeries> series;
  std::vector<PlotBand> bands;
  std::vector<std::pair<std::string, std::string>> comments;

  void write(const std::filesystem::path& path) const;
};

}  // namespace dtr
