#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "zopn/solver.hpp"

namespace zopn {

inline constexpr const char* kTraceHeader = "k,nf,F,gap,d_norm,t,delta,inner_iters,unit_step";
inline constexpr double kGapClamp = 1e-18;

/// One row per record with gap = F - F_star. Numbers use the shortest
/// round-trip representation, so output bytes depend only on the values.
std::string trace_csv(const std::vector<IterationRecord>& trace, double F_star);

struct PlotSeries {
  std::string label;
  std::vector<std::pair<double, double>> points;  // (x, y) with y plotted as log10
};

struct PlotOptions {
  std::string title;
  std::string x_label = "NF";
  std::string y_label = "log10(F - F*)";
  double clamp = kGapClamp;  // y values below this are drawn at the clamp
  int width = 720;
  int height = 480;
};

/// Line chart with log10(y) against x, one polyline and legend entry per series.
std::string render_svg(const std::vector<PlotSeries>& series, const PlotOptions& options = {});

/// Writes the whole string, throwing std::runtime_error when the path is unwritable.
void write_text_file(const std::filesystem::path& path, const std::string& content);

/// Shortest round-trip decimal form ("nan", "inf", "-inf" for non-finite).
std::string format_number(double value);

}  // namespace zopn
