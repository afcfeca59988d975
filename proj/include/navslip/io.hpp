#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace navslip {

struct Column {
  std::string name;
  std::vector<double> values;
};

/// Comma-separated table with a header row; columns must share one length.
/// Values are written with 17 significant digits.
void write_csv(const std::filesystem::path& path, const std::vector<Column>& columns);

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
  bool points = false;  // markers instead of a polyline
};

struct PlotSpec {
  std::string title;
  std::string xlabel;
  std::string ylabel;
  bool log_y = false;
  int width = 640;
  int height = 400;
};

/// Minimal SVG line chart: axes with 5 ticks, one colored polyline per
/// series and a legend. Non-finite points (and y ≤ 0 with log_y) are skipped.
std::string svg_line_chart(const PlotSpec& spec, const std::vector<Series>& series);
void write_svg(const std::filesystem::path& path, const PlotSpec& spec, const std::vector<Series>& series);

/// Writes `text`, creating parent directories. Throws ConfigInvalid on I/O failure.
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace navslip
