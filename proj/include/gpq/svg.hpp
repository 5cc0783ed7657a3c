#pragma once

// Minimal self-contained SVG plots: line charts with optional horizontal
// reference lines, and heatmaps of 2D fields.  Output depends only on the
// data, so identical inputs give identical files.

#include <optional>
#include <string>
#include <vector>

#include "gpq/field2d.hpp"

namespace gpq::svg {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f77b4";
  bool markers = true;
};

struct Reference {
  std::string label;
  double y;
  std::string color = "#d62728";
};

struct LineChart {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
  std::vector<Reference> references;
};

std::string render(const LineChart& chart, int width = 640, int height = 420);

struct Marker {
  double x;
  double y;
  std::string color = "#ffffff";
};

/// Heatmap of f (cells down-sampled to at most `max_cells` per axis), with
/// optional point markers joined by a polyline in the given order.
std::string heatmap(const Field2D& f, const std::string& title, const std::vector<Marker>& path = {},
                    bool log_scale = false, std::size_t max_cells = 128, int size = 520);

}  // namespace gpq::svg
