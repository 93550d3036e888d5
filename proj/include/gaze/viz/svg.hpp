#pragma once

// SVG plot rendering: colormapped heatmap cells with a scale legend, and
// time-colored trace plots of the raw scanpath. Output is plain SVG 1.1
// text, built purely from the input data — no timestamps, locale effects or
// randomness — so identical input yields byte-identical files.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>

#include "gaze/core.hpp"
#include "gaze/detail/strings.hpp"
#include "gaze/error.hpp"
#include "gaze/viz/heatmap.hpp"

namespace gaze {

namespace detail_svg {

struct Rgb {
  int r = 0, g = 0, b = 0;
};

/// Piecewise-linear colormaps over fixed control tables; t in [0, 1].
inline Rgb colormap_color(Colormap map, double t) {
  struct Stop {
    double t;
    Rgb c;
  };
  // black -> red -> yellow -> white
  static constexpr Stop heat[] = {{0.0, {0, 0, 0}},
                                  {1.0 / 3.0, {220, 30, 20}},
                                  {2.0 / 3.0, {250, 210, 40}},
                                  {1.0, {255, 255, 255}}};
  static constexpr Stop gray[] = {{0.0, {0, 0, 0}}, {1.0, {255, 255, 255}}};

  const Stop* stops = map == Colormap::Heat ? heat : gray;
  const std::size_t n = map == Colormap::Heat ? 4 : 2;
  t = std::clamp(t, 0.0, 1.0);
  for (std::size_t i = 1; i < n; ++i) {
    if (t <= stops[i].t) {
      const double span = stops[i].t - stops[i - 1].t;
      const double a = span > 0.0 ? (t - stops[i - 1].t) / span : 0.0;
      auto lerp = [a](int lo, int hi) {
        return static_cast<int>(std::lround(lo + a * (hi - lo)));
      };
      return {lerp(stops[i - 1].c.r, stops[i].c.r),
              lerp(stops[i - 1].c.g, stops[i].c.g),
              lerp(stops[i - 1].c.b, stops[i].c.b)};
    }
  }
  return stops[n - 1].c;
}

inline std::string hex_color(const Rgb& c) {
  static const char digits[] = "0123456789abcdef";
  std::string s = "#000000";
  const int parts[3] = {c.r, c.g, c.b};
  for (int i = 0; i < 3; ++i) {
    s[1 + 2 * i] = digits[(parts[i] >> 4) & 0xf];
    s[2 + 2 * i] = digits[parts[i] & 0xf];
  }
  return s;
}

/// Fixed-precision coordinate formatting (3 decimals, trailing zeros
/// trimmed): deterministic and short, and plenty for a 640px canvas.
inline std::string coord(double v) {
  const double r = std::round(v * 1000.0) / 1000.0;
  std::string s = gaze::detail::format_double(r == 0.0 ? 0.0 : r);
  return s;
}

inline void write_text_file(const std::filesystem::path& path,
                            const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.close();
  if (!out)
    detail::raise(ErrorKind::Io, "cannot write " + path.string());
}

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace detail_svg

/// Render a (typically blurred) histogram grid to an SVG heatmap with a
/// vertical scale legend. Row iy = 0 of the grid is drawn at the top edge,
/// matching screen pixel coordinates where y grows downward.
inline std::string render_heatmap_svg(const Grid& grid,
                                      const HeatmapSpec& spec) {
  using detail_svg::coord;
  const double plot_w = 512.0, plot_h = 512.0;
  const double margin = 48.0, legend_w = 24.0, legend_gap = 16.0;
  const double width = margin * 2 + plot_w + legend_gap + legend_w + 56.0;
  const double height = margin * 2 + plot_h;

  const double peak = grid.max_value();
  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + coord(width) +
         "\" height=\"" + coord(height) + "\" viewBox=\"0 0 " + coord(width) +
         " " + coord(height) + "\">\n";
  svg += "<rect width=\"" + coord(width) + "\" height=\"" + coord(height) +
         "\" fill=\"white\"/>\n";

  const double cell_w = plot_w / static_cast<double>(grid.nx());
  const double cell_h = plot_h / static_cast<double>(grid.ny());
  for (std::size_t iy = 0; iy < grid.ny(); ++iy) {
    for (std::size_t ix = 0; ix < grid.nx(); ++ix) {
      const double value = grid.at(ix, iy);
      const double t = peak > 0.0 ? value / peak : 0.0;
      const auto color = detail_svg::colormap_color(spec.colormap, t);
      svg += "<rect x=\"" +
             coord(margin + static_cast<double>(ix) * cell_w) + "\" y=\"" +
             coord(margin + static_cast<double>(iy) * cell_h) + "\" width=\"" +
             coord(cell_w + 0.01) + "\" height=\"" + coord(cell_h + 0.01) +
             "\" fill=\"" + detail_svg::hex_color(color) + "\"/>\n";
    }
  }
  svg += "<rect x=\"" + coord(margin) + "\" y=\"" + coord(margin) +
         "\" width=\"" + coord(plot_w) + "\" height=\"" + coord(plot_h) +
         "\" fill=\"none\" stroke=\"#333333\"/>\n";

  // Legend: discrete swatches from high (top) to low (bottom) plus extrema.
  const double lx = margin + plot_w + legend_gap;
  const int steps = 16;
  const double seg_h = plot_h / steps;
  for (int i = 0; i < steps; ++i) {
    const double t = 1.0 - (static_cast<double>(i) + 0.5) / steps;
    const auto color = detail_svg::colormap_color(spec.colormap, t);
    svg += "<rect x=\"" + coord(lx) + "\" y=\"" +
           coord(margin + i * seg_h) + "\" width=\"" + coord(legend_w) +
           "\" height=\"" + coord(seg_h + 0.01) + "\" fill=\"" +
           detail_svg::hex_color(color) + "\"/>\n";
  }
  svg += "<rect x=\"" + coord(lx) + "\" y=\"" + coord(margin) +
         "\" width=\"" + coord(legend_w) + "\" height=\"" + coord(plot_h) +
         "\" fill=\"none\" stroke=\"#333333\"/>\n";
  const std::string font =
      "font-family=\"monospace\" font-size=\"12\" fill=\"#333333\"";
  svg += "<text x=\"" + coord(lx + legend_w + 6) + "\" y=\"" +
         coord(margin + 10) + "\" " + font + ">" +
         detail_svg::xml_escape(gaze::detail::format_double(peak)) +
         "</text>\n";
  svg += "<text x=\"" + coord(lx + legend_w + 6) + "\" y=\"" +
         coord(margin + plot_h) + "\" " + font + ">0</text>\n";
  svg += "</svg>\n";
  return svg;
}

inline void render_heatmap(const Grid& grid, const HeatmapSpec& spec,
                           const std::filesystem::path& path) {
  detail_svg::write_text_file(path, render_heatmap_svg(grid, spec));
}

/// Trace plot: chronological (x, y) path, colored from early (blue) to late
/// (red); not-a-value samples break the path. Pixel positions when present
/// sensible, but any frame renders — coordinates are taken from x_px/y_px.
inline std::string render_traceplot_svg(const GazeFrame& f) {
  using detail_svg::coord;
  const double plot_w = 560.0, plot_h = 560.0;
  const double margin = 40.0;
  const double width = plot_w + 2 * margin, height = plot_h + 2 * margin;

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + coord(width) +
         "\" height=\"" + coord(height) + "\" viewBox=\"0 0 " + coord(width) +
         " " + coord(height) + "\">\n";
  svg += "<rect width=\"" + coord(width) + "\" height=\"" + coord(height) +
         "\" fill=\"white\"/>\n";
  svg += "<rect x=\"" + coord(margin) + "\" y=\"" + coord(margin) +
         "\" width=\"" + coord(plot_w) + "\" height=\"" + coord(plot_h) +
         "\" fill=\"none\" stroke=\"#333333\"/>\n";

  const auto& xs = f.x_px();
  const auto& ys = f.y_px();
  const auto& ts = f.time();
  const std::size_t n = f.size();

  // Data bounds over valid samples; y_min maps to the top edge (screen-like).
  bool any = false;
  double x_lo = 0, x_hi = 0, y_lo = 0, y_hi = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::isnan(xs[i]) || std::isnan(ys[i])) continue;
    if (!any) {
      x_lo = x_hi = xs[i];
      y_lo = y_hi = ys[i];
      any = true;
    } else {
      x_lo = std::min(x_lo, xs[i]);
      x_hi = std::max(x_hi, xs[i]);
      y_lo = std::min(y_lo, ys[i]);
      y_hi = std::max(y_hi, ys[i]);
    }
  }
  if (any) {
    if (!(x_hi > x_lo)) {
      x_lo -= 0.5;
      x_hi += 0.5;
    }
    if (!(y_hi > y_lo)) {
      y_lo -= 0.5;
      y_hi += 0.5;
    }
    const double t0 = ts.front();
    const double t1 = ts.back();
    const double t_span = t1 > t0 ? t1 - t0 : 1.0;
    auto px = [&](double x) {
      return margin + (x - x_lo) / (x_hi - x_lo) * plot_w;
    };
    auto py = [&](double y) {
      return margin + (y - y_lo) / (y_hi - y_lo) * plot_h;
    };
    auto segment_color = [&](double t_mid) {
      const double a = (t_mid - t0) / t_span;
      auto lerp = [a](int lo, int hi) {
        return static_cast<int>(std::lround(lo + a * (hi - lo)));
      };
      // early blue -> late red
      return detail_svg::hex_color(
          {lerp(38, 198), lerp(84, 45), lerp(166, 49)});
    };
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (std::isnan(xs[i]) || std::isnan(ys[i]) || std::isnan(xs[i + 1]) ||
          std::isnan(ys[i + 1]))
        continue;
      svg += "<line x1=\"" + coord(px(xs[i])) + "\" y1=\"" +
             coord(py(ys[i])) + "\" x2=\"" + coord(px(xs[i + 1])) +
             "\" y2=\"" + coord(py(ys[i + 1])) + "\" stroke=\"" +
             segment_color((ts[i] + ts[i + 1]) / 2.0) +
             "\" stroke-width=\"1.5\" stroke-linecap=\"round\"/>\n";
    }
    const std::string font =
        "font-family=\"monospace\" font-size=\"12\" fill=\"#333333\"";
    svg += "<text x=\"" + coord(margin) + "\" y=\"" +
           coord(height - margin + 16) + "\" " + font + ">x: [" +
           detail_svg::xml_escape(gaze::detail::format_double(x_lo)) + ", " +
           detail_svg::xml_escape(gaze::detail::format_double(x_hi)) +
           "]</text>\n";
    svg += "<text x=\"" + coord(margin) + "\" y=\"" + coord(margin - 8) +
           "\" " + font + ">y: [" +
           detail_svg::xml_escape(gaze::detail::format_double(y_lo)) + ", " +
           detail_svg::xml_escape(gaze::detail::format_double(y_hi)) +
           "]</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

inline void render_traceplot(const GazeFrame& f,
                             const std::filesystem::path& path) {
  detail_svg::write_text_file(path, render_traceplot_svg(f));
}

}  // namespace gaze
