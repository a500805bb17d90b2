#include "pilotwave/plot.hpp"

#include <algorithm>
#include <array>
#include <cstdio>

namespace pilotwave {

namespace {

constexpr int kMargin = 20;
constexpr int kTextLine = 16;
constexpr std::array<const char*, 6> kColors = {"#1f4e9c", "#c2410c", "#15803d", "#7e22ce", "#b91c1c", "#0f766e"};

std::string fixed2(double v) {
  std::array<char, 32> buf{};
  std::snprintf(buf.data(), buf.size(), "%.2f", v);
  return buf.data();
}

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Frame {
  double half_width;
  int pixels;
  int height;

  double x(double q1) const { return kMargin + (q1 + half_width) / (2.0 * half_width) * pixels; }
  double y(double q2) const { return kMargin + (half_width - q2) / (2.0 * half_width) * pixels; }
};

std::string open_svg(const PlotSpec& plot, Frame& frame) {
  frame.half_width = plot.half_width;
  frame.pixels = plot.pixels;
  frame.height = plot.pixels + 2 * kMargin + static_cast<int>(plot.annotations.size()) * kTextLine;
  const int width = plot.pixels + 2 * kMargin;
  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) + "\" height=\"" +
                  std::to_string(frame.height) + "\" viewBox=\"0 0 " + std::to_string(width) + " " +
                  std::to_string(frame.height) + "\">\n";
  s += "<rect x=\"0\" y=\"0\" width=\"" + std::to_string(width) + "\" height=\"" + std::to_string(frame.height) +
       "\" fill=\"white\"/>\n";
  if (!plot.description.empty()) s += "<desc>" + escape(plot.description) + "</desc>\n";
  return s;
}

std::string axes_and_text(const PlotSpec& plot, const Frame& frame) {
  std::string s;
  s += "<rect x=\"" + std::to_string(kMargin) + "\" y=\"" + std::to_string(kMargin) + "\" width=\"" +
       std::to_string(plot.pixels) + "\" height=\"" + std::to_string(plot.pixels) +
       "\" fill=\"none\" stroke=\"#444\" stroke-width=\"1\"/>\n";
  s += "<line x1=\"" + fixed2(frame.x(-plot.half_width)) + "\" y1=\"" + fixed2(frame.y(0)) + "\" x2=\"" +
       fixed2(frame.x(plot.half_width)) + "\" y2=\"" + fixed2(frame.y(0)) + "\" stroke=\"#bbb\" stroke-width=\"0.5\"/>\n";
  s += "<line x1=\"" + fixed2(frame.x(0)) + "\" y1=\"" + fixed2(frame.y(-plot.half_width)) + "\" x2=\"" +
       fixed2(frame.x(0)) + "\" y2=\"" + fixed2(frame.y(plot.half_width)) + "\" stroke=\"#bbb\" stroke-width=\"0.5\"/>\n";
  int line_y = 2 * kMargin + plot.pixels - 4;
  for (const auto& text : plot.annotations) {
    s += "<text x=\"" + std::to_string(kMargin) + "\" y=\"" + std::to_string(line_y) +
         "\" font-family=\"monospace\" font-size=\"11\">" + escape(text) + "</text>\n";
    line_y += kTextLine;
  }
  return s;
}

}  // namespace

void PlotSpec::validate() const {
  if (stride < 1) throw InvalidArgument("plot stride must be at least 1");
  if (!(half_width > 0.0)) throw InvalidArgument("plot bounds must be positive");
  if (pixels < 10) throw InvalidArgument("plot too small");
  if (!(stroke_width > 0.0)) throw InvalidArgument("stroke width must be positive");
}

std::string trajectory_svg(std::span<const Trajectory> trajectories, const PlotSpec& plot) {
  plot.validate();
  Frame frame{};
  std::string s = open_svg(plot, frame);
  for (std::size_t k = 0; k < trajectories.size(); ++k) {
    const auto& samples = trajectories[k].samples;
    s += "<polyline fill=\"none\" stroke=\"" + std::string(kColors[k % kColors.size()]) + "\" stroke-width=\"" +
         fixed2(plot.stroke_width) + "\" stroke-opacity=\"0.8\" points=\"";
    for (std::size_t i = 0; i < samples.size(); i += static_cast<std::size_t>(plot.stride)) {
      if (i > 0) s += ' ';
      s += fixed2(frame.x(samples[i].q1));
      s += ',';
      s += fixed2(frame.y(samples[i].q2));
    }
    s += "\"/>\n";
    if (!samples.empty()) {
      s += "<circle cx=\"" + fixed2(frame.x(samples.front().q1)) + "\" cy=\"" + fixed2(frame.y(samples.front().q2)) +
           "\" r=\"3\" fill=\"black\"/>\n";
    }
  }
  s += axes_and_text(plot, frame);
  s += "</svg>\n";
  return s;
}

std::string density_svg(std::span<const double> cells, const GridSpec& grid, const PlotSpec& plot) {
  plot.validate();
  grid.validate();
  if (cells.size() != grid.cell_count()) throw InvalidArgument("cell values do not match the grid");
  Frame frame{};
  std::string s = open_svg(plot, frame);
  const double peak = cells.empty() ? 0.0 : *std::max_element(cells.begin(), cells.end());
  const double w = grid.cell_width();
  const double px = w / (2.0 * plot.half_width) * plot.pixels;
  for (int iy = 0; iy < grid.resolution; ++iy) {
    for (int ix = 0; ix < grid.resolution; ++ix) {
      const double v = cells[static_cast<std::size_t>(iy) * grid.resolution + ix];
      if (!(v > 0.0) || peak <= 0.0) continue;
      const int shade = 255 - static_cast<int>(std::clamp(v / peak, 0.0, 1.0) * 255.0 + 0.5);
      const double x0 = -grid.half_width + ix * w;
      const double y1 = -grid.half_width + (iy + 1) * w;
      s += "<rect x=\"" + fixed2(frame.x(x0)) + "\" y=\"" + fixed2(frame.y(y1)) + "\" width=\"" + fixed2(px) +
           "\" height=\"" + fixed2(px) + "\" fill=\"rgb(" + std::to_string(shade) + "," + std::to_string(shade) + "," +
           std::to_string(shade) + ")\"/>\n";
    }
  }
  s += axes_and_text(plot, frame);
  s += "</svg>\n";
  return s;
}

}  // namespace pilotwave
