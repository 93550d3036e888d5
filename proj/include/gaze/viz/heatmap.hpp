#pragma once

// Heatmap substrate: 2-D histogram over a bounding box plus separable
// Gaussian smoothing. Binning drops not-a-value samples and samples outside
// the extent, and accounts for every input sample (binned + dropped =
// total). Blurring conserves total mass by renormalising the truncated
// kernel at the edges.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "gaze/core.hpp"
#include "gaze/error.hpp"

namespace gaze {

/// Closed bounding box. The maximum edges are inclusive so that samples
/// sitting exactly on them land in the last bin instead of vanishing.
struct Extent {
  double x_min = 0.0;
  double x_max = 0.0;
  double y_min = 0.0;
  double y_max = 0.0;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }

  void validate() const {
    if (!std::isfinite(x_min) || !std::isfinite(x_max) ||
        !std::isfinite(y_min) || !std::isfinite(y_max))
      detail::raise(ErrorKind::Extent, "extent must be finite");
    if (!(width() > 0.0) || !(height() > 0.0))
      detail::raise(ErrorKind::Extent, "extent has zero area");
  }
};

enum class Colormap { Grayscale, Heat };

/// Which position columns feed the histogram.
enum class CoordSpace { Pixels, Degrees };

struct HeatmapSpec {
  std::size_t bins_x = 64;
  std::size_t bins_y = 64;
  double smoothing_sigma_bins = 1.0;
  Colormap colormap = Colormap::Heat;
  CoordSpace space = CoordSpace::Pixels;
  /// When unset, derived from the data (tight bounds over valid samples).
  std::optional<Extent> extent;

  void validate() const {
    if (bins_x < 1 || bins_y < 1)
      detail::raise(ErrorKind::InvalidArgument, "bins must be >= 1");
    if (!(smoothing_sigma_bins >= 0.0) ||
        !std::isfinite(smoothing_sigma_bins))
      detail::raise(ErrorKind::InvalidArgument,
                    "smoothing_sigma_bins must be >= 0");
    if (extent) extent->validate();
  }
};

/// Dense row-major grid; row iy = 0 is the y_min edge.
class Grid {
 public:
  Grid(std::size_t nx, std::size_t ny)
      : nx_(nx), ny_(ny), cells_(nx * ny, 0.0) {
    if (nx < 1 || ny < 1)
      detail::raise(ErrorKind::InvalidArgument, "grid must be at least 1x1");
  }

  std::size_t nx() const { return nx_; }
  std::size_t ny() const { return ny_; }

  double& at(std::size_t ix, std::size_t iy) { return cells_[iy * nx_ + ix]; }
  double at(std::size_t ix, std::size_t iy) const {
    return cells_[iy * nx_ + ix];
  }

  const std::vector<double>& cells() const { return cells_; }

  double total() const {
    double s = 0.0;
    for (double c : cells_) s += c;
    return s;
  }

  double max_value() const {
    double m = 0.0;
    for (double c : cells_) m = std::max(m, c);
    return m;
  }

 private:
  std::size_t nx_, ny_;
  std::vector<double> cells_;
};

struct HistogramResult {
  Grid grid;
  Extent extent;            // the extent actually used (given or derived)
  std::size_t binned = 0;   // valid samples inside the extent
  std::size_t dropped = 0;  // not-a-value or outside; binned + dropped = n
};

namespace detail_viz {

inline std::pair<std::span<const double>, std::span<const double>>
position_columns(const GazeFrame& f, CoordSpace space) {
  if (space == CoordSpace::Degrees) {
    if (!f.has_degrees())
      detail::raise(ErrorKind::Schema,
                    "heatmap over degrees requires columns x_dva, y_dva");
    return {f.x_dva(), f.y_dva()};
  }
  return {f.x_px(), f.y_px()};
}

inline Extent derive_extent(std::span<const double> xs,
                            std::span<const double> ys) {
  Extent e;
  bool any = false;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (std::isnan(xs[i]) || std::isnan(ys[i])) continue;
    if (!any) {
      e = {xs[i], xs[i], ys[i], ys[i]};
      any = true;
    } else {
      e.x_min = std::min(e.x_min, xs[i]);
      e.x_max = std::max(e.x_max, xs[i]);
      e.y_min = std::min(e.y_min, ys[i]);
      e.y_max = std::max(e.y_max, ys[i]);
    }
  }
  if (!any)
    detail::raise(ErrorKind::Extent,
                  "cannot derive an extent: no valid samples");
  // Degenerate spans (all mass on one line/point) get padded so the box has
  // area and binning stays well defined.
  if (!(e.width() > 0.0)) {
    e.x_min -= 0.5;
    e.x_max += 0.5;
  }
  if (!(e.height() > 0.0)) {
    e.y_min -= 0.5;
    e.y_max += 0.5;
  }
  return e;
}

inline std::size_t bin_index(double v, double lo, double hi, std::size_t n) {
  // Caller guarantees lo <= v <= hi and hi > lo.
  if (v == hi) return n - 1;
  const double fraction = (v - lo) / (hi - lo);
  auto ix = static_cast<std::size_t>(fraction * static_cast<double>(n));
  return ix < n ? ix : n - 1;
}

}  // namespace detail_viz

/// Count valid samples per cell over the spec's extent.
inline HistogramResult histogram2d(const GazeFrame& f,
                                   const HeatmapSpec& spec) {
  spec.validate();
  const auto [xs, ys] = detail_viz::position_columns(f, spec.space);
  const Extent extent =
      spec.extent ? *spec.extent : detail_viz::derive_extent(xs, ys);
  extent.validate();

  HistogramResult result{Grid(spec.bins_x, spec.bins_y), extent, 0, 0};
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double x = xs[i];
    const double y = ys[i];
    if (std::isnan(x) || std::isnan(y) || x < extent.x_min ||
        x > extent.x_max || y < extent.y_min || y > extent.y_max) {
      ++result.dropped;
      continue;
    }
    const auto ix =
        detail_viz::bin_index(x, extent.x_min, extent.x_max, spec.bins_x);
    const auto iy =
        detail_viz::bin_index(y, extent.y_min, extent.y_max, spec.bins_y);
    result.grid.at(ix, iy) += 1.0;
    ++result.binned;
  }
  return result;
}

/// Separable Gaussian blur, kernel radius ceil(3 sigma). Near the borders
/// the kernel is truncated and renormalised per source cell, so each cell
/// redistributes exactly its own mass and the grid total is preserved.
inline Grid gaussian_blur(const Grid& grid, double sigma_bins) {
  if (!(sigma_bins >= 0.0) || !std::isfinite(sigma_bins))
    detail::raise(ErrorKind::InvalidArgument, "sigma must be >= 0");
  if (sigma_bins == 0.0) return grid;
  const auto radius = static_cast<std::ptrdiff_t>(std::ceil(3.0 * sigma_bins));
  if (radius == 0) return grid;

  std::vector<double> weights(static_cast<std::size_t>(2 * radius + 1));
  for (std::ptrdiff_t k = -radius; k <= radius; ++k)
    weights[static_cast<std::size_t>(k + radius)] =
        std::exp(-static_cast<double>(k * k) /
                 (2.0 * sigma_bins * sigma_bins));

  const auto nx = static_cast<std::ptrdiff_t>(grid.nx());
  const auto ny = static_cast<std::ptrdiff_t>(grid.ny());

  auto pass = [&](const Grid& src, bool horizontal) {
    Grid dst(src.nx(), src.ny());
    const std::ptrdiff_t limit = horizontal ? nx : ny;
    for (std::ptrdiff_t iy = 0; iy < ny; ++iy) {
      for (std::ptrdiff_t ix = 0; ix < nx; ++ix) {
        const double mass =
            src.at(static_cast<std::size_t>(ix), static_cast<std::size_t>(iy));
        if (mass == 0.0) continue;
        const std::ptrdiff_t center = horizontal ? ix : iy;
        double norm = 0.0;
        for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
          const std::ptrdiff_t j = center + k;
          if (j >= 0 && j < limit)
            norm += weights[static_cast<std::size_t>(k + radius)];
        }
        for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
          const std::ptrdiff_t j = center + k;
          if (j < 0 || j >= limit) continue;
          const double w = weights[static_cast<std::size_t>(k + radius)] / norm;
          if (horizontal)
            dst.at(static_cast<std::size_t>(j),
                   static_cast<std::size_t>(iy)) += mass * w;
          else
            dst.at(static_cast<std::size_t>(ix),
                   static_cast<std::size_t>(j)) += mass * w;
        }
      }
    }
    return dst;
  };

  return pass(pass(grid, true), false);
}

}  // namespace gaze
