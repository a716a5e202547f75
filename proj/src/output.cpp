#include "zopn/output.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

namespace zopn {

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  return fmt::format("{}", value);
}

std::string trace_csv(const std::vector<IterationRecord>& trace, double F_star) {
  std::string out = kTraceHeader;
  out += '\n';
  for (const IterationRecord& r : trace) {
    out += fmt::format("{},{},{},{},{},{},{},{},{}\n", r.k, r.nf_total, format_number(r.F),
                       format_number(r.F - F_star), format_number(r.d_norm), format_number(r.t),
                       format_number(r.radius), r.inner_iters, r.unit_step ? 1 : 0);
  }
  return out;
}

namespace {

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

}  // namespace

std::string render_svg(const std::vector<PlotSeries>& series, const PlotOptions& options) {
  const double left = 70, right = 170, top = 40, bottom = 50;
  const double W = options.width, Hgt = options.height;
  const double plot_w = W - left - right, plot_h = Hgt - top - bottom;

  std::size_t clamped = 0;
  double x_min = std::numeric_limits<double>::infinity(), x_max = -x_min;
  double y_min = x_min, y_max = -x_min;
  std::vector<std::vector<std::pair<double, double>>> logged(series.size());
  for (std::size_t s = 0; s < series.size(); ++s) {
    for (const auto& [x, y] : series[s].points) {
      if (!std::isfinite(x) || std::isnan(y)) continue;
      double v = y;
      if (!(v >= options.clamp)) {
        v = options.clamp;
        ++clamped;
      }
      if (std::isinf(v)) continue;
      const double ly = std::log10(v);
      logged[s].emplace_back(x, ly);
      x_min = std::min(x_min, x);
      x_max = std::max(x_max, x);
      y_min = std::min(y_min, ly);
      y_max = std::max(y_max, ly);
    }
  }
  if (!std::isfinite(x_min)) {
    x_min = 0;
    x_max = 1;
    y_min = 0;
    y_max = 1;
  }
  if (x_max == x_min) x_max = x_min + 1;
  y_min = std::floor(y_min);
  y_max = std::ceil(y_max);
  if (y_max == y_min) y_max = y_min + 1;

  auto px = [&](double x) { return left + (x - x_min) / (x_max - x_min) * plot_w; };
  auto py = [&](double y) { return top + (y_max - y) / (y_max - y_min) * plot_h; };

  std::string out;
  out += fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n",
      options.width, options.height, options.width, options.height);
  out += fmt::format("<!-- y axis is log10 of the plotted value; values below {} are drawn at {} ({} points) -->\n",
                     format_number(options.clamp), format_number(options.clamp), clamped);
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!options.title.empty()) {
    out += fmt::format("<text x=\"{:.2f}\" y=\"22\" font-size=\"15\" text-anchor=\"middle\">{}</text>\n",
                       left + plot_w / 2, escape_xml(options.title));
  }
  out += fmt::format("<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"none\" stroke=\"black\"/>\n",
                     left, top, plot_w, plot_h);

  const int y_ticks = static_cast<int>(y_max - y_min);
  const int y_step = std::max(1, y_ticks / 8);
  for (int i = 0; i <= y_ticks; i += y_step) {
    const double y = y_min + i;
    out += fmt::format("<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"#dddddd\"/>\n", left,
                       py(y), left + plot_w, py(y));
    out += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" font-size=\"11\" text-anchor=\"end\">{}</text>\n",
                       left - 6, py(y) + 4, static_cast<int>(y));
  }
  for (int i = 0; i <= 5; ++i) {
    const double x = x_min + (x_max - x_min) * i / 5.0;
    out += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" font-size=\"11\" text-anchor=\"middle\">{}</text>\n", px(x),
                       top + plot_h + 16, fmt::format("{:.4g}", x));
  }
  out += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" font-size=\"12\" text-anchor=\"middle\">{}</text>\n",
                     left + plot_w / 2, Hgt - 12, escape_xml(options.x_label));
  out += fmt::format(
      "<text x=\"16\" y=\"{:.2f}\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.2f})\">{}</text>\n",
      top + plot_h / 2, top + plot_h / 2, escape_xml(options.y_label));

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kPalette[s % std::size(kPalette)];
    std::string pts;
    for (const auto& [x, y] : logged[s]) pts += fmt::format("{:.2f},{:.2f} ", px(x), py(y));
    if (!pts.empty()) pts.pop_back();
    out += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n", color, pts);
    const double ly = top + 14 + 18.0 * static_cast<double>(s);
    out += fmt::format("<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"{}\" stroke-width=\"2\"/>\n",
                       left + plot_w + 12, ly, left + plot_w + 32, ly, color);
    out += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" font-size=\"11\">{}</text>\n", left + plot_w + 38, ly + 4,
                       escape_xml(series[s].label));
  }
  out += "</svg>\n";
  return out;
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
  out << content;
  if (!out) throw std::runtime_error(fmt::format("write to '{}' failed", path.string()));
}

}  // namespace zopn
