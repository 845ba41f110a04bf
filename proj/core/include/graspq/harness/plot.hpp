#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace graspq::harness {

struct Series {
  std::string label;
  std::vector<double> values;
};

/// Trailing moving average; the first window-1 points average what is available.
std::vector<double> moving_average(std::span<const double> values, std::size_t window);

/// Standalone SVG line chart: one polyline per series over the episode axis,
/// y axis fixed to [0, 1], with a legend.
std::string render_svg(std::span<const Series> series, const std::string& title, const std::string& y_label);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace graspq::harness
