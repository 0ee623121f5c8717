#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "hf/bench/synthetic.hpp"
#include "hf/geometry.hpp"
#include "hf/pipeline.hpp"

namespace hf::bench {

namespace detail {

inline const char* label_color(int label) {
  static constexpr std::array<const char*, 10> palette = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                                                         "#8c564b", "#e377c2", "#17becf", "#bcbd22", "#393b79"};
  if (label <= 0) return "#b0b0b0";
  return palette[static_cast<std::size_t>(label - 1) % palette.size()];
}

}  // namespace detail

/// Scatter plot of the data (first view for correspondences) colored by
/// label, with line and circle structures drawn over it.
inline std::string render_svg(const DataSet& data, const FitResult& result, int width = 640, int height = 640) {
  double x0 = std::numeric_limits<double>::infinity(), y0 = x0;
  double x1 = -x0, y1 = -x0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto p = data.point(i);
    x0 = std::min(x0, p[0]);
    x1 = std::max(x1, p[0]);
    y0 = std::min(y0, p[1]);
    y1 = std::max(y1, p[1]);
  }
  if (!(x1 > x0)) x1 = x0 + 1.0;
  if (!(y1 > y0)) y1 = y0 + 1.0;
  const double pad = 0.05 * std::max(x1 - x0, y1 - y0);
  x0 -= pad, x1 += pad, y0 -= pad, y1 += pad;
  const double sx = width / (x1 - x0), sy = height / (y1 - y0);
  auto px = [&](double x) { return (x - x0) * sx; };
  auto py = [&](double y) { return height - (y - y0) * sy; };

  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"%d\" viewBox=\"0 0 %d %d\">\n", width,
                height, width, height);
  out += buf;
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto p = data.point(i);
    const int label = i < result.labels.size() ? result.labels[i] : 0;
    std::snprintf(buf, sizeof buf, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"%.1f\" fill=\"%s\"/>\n", px(p[0]), py(p[1]),
                  label > 0 ? 2.5 : 1.5, detail::label_color(label));
    out += buf;
  }
  for (std::size_t s = 0; s < result.structures.size(); ++s) {
    const auto& h = result.structures[s].hypothesis;
    const char* color = detail::label_color(static_cast<int>(s) + 1);
    if (h.kind() == ModelKind::Line2D) {
      const auto l = h.param_vector();
      const auto seg = detail::clip_line({l[0], l[1], l[2]}, Box{x0, x1, y0, y1});
      if (!seg) continue;
      std::snprintf(buf, sizeof buf,
                    "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"%s\" stroke-width=\"1.5\"/>\n",
                    px(seg->first.x()), py(seg->first.y()), px(seg->second.x()), py(seg->second.y()), color);
      out += buf;
    } else if (h.kind() == ModelKind::Circle2D) {
      const auto c = h.param_vector();
      std::snprintf(buf, sizeof buf,
                    "<ellipse cx=\"%.2f\" cy=\"%.2f\" rx=\"%.2f\" ry=\"%.2f\" fill=\"none\" stroke=\"%s\" "
                    "stroke-width=\"1.5\"/>\n",
                    px(c[0]), py(c[1]), c[2] * sx, c[2] * sy, color);
      out += buf;
    }
  }
  out += "</svg>\n";
  return out;
}

}  // namespace hf::bench
