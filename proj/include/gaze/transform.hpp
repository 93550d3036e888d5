#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "gaze/core.hpp"
#include "gaze/error.hpp"

namespace gaze {

/// Differentiation kernel for position -> velocity conversion.
///
/// Preceding: v[i] = (p[i] - p[i-1]) * fs
/// Neighbors: v[i] = (p[i+1] - p[i-1]) * fs / 2
/// FivePoint: v[i] = fs * (p[i+2] + p[i+1] - p[i-1] - p[i-2]) / 6,
///            the smoothed filter customary in microsaccade work.
enum class VelocityMethod { Preceding, Neighbors, FivePoint };

namespace detail {

inline constexpr double deg_per_rad = 180.0 / std::numbers::pi;

inline void require_axis_geometry(double axis_px, double axis_cm,
                                  double distance_cm) {
  if (!(axis_px > 0.0) || !std::isfinite(axis_px) || !(axis_cm > 0.0) ||
      !std::isfinite(axis_cm) || !(distance_cm > 0.0) ||
      !std::isfinite(distance_cm))
    raise(ErrorKind::InvalidArgument,
          "axis geometry must be positive and finite (axis_px, axis_cm, "
          "distance_cm)");
}

}  // namespace detail

/// Pixel coordinate -> degrees of visual angle along one axis. With origin
/// UpperLeft the screen center (axis_px - 1) / 2 maps to 0 degrees; with
/// origin Center the input is already relative to the center. Missing input
/// passes through as missing.
inline double pix2deg(double p, double axis_px, double axis_cm,
                      double distance_cm, Origin origin) {
  detail::require_axis_geometry(axis_px, axis_cm, distance_cm);
  if (is_missing(p)) return missing;
  const double centered =
      origin == Origin::UpperLeft ? p - (axis_px - 1.0) / 2.0 : p;
  const double offset_cm = centered * (axis_cm / axis_px);
  return std::atan(offset_cm / distance_cm) * detail::deg_per_rad;
}

/// Exact inverse of pix2deg under the same geometry. Requires |theta| < 90.
inline double deg2pix(double theta_deg, double axis_px, double axis_cm,
                      double distance_cm, Origin origin) {
  detail::require_axis_geometry(axis_px, axis_cm, distance_cm);
  if (is_missing(theta_deg)) return missing;
  if (!(std::abs(theta_deg) < 90.0))
    detail::raise(ErrorKind::Domain,
                  "deg2pix requires |theta| < 90 degrees, got " +
                      std::to_string(theta_deg));
  const double offset_cm =
      distance_cm * std::tan(theta_deg / detail::deg_per_rad);
  const double centered = offset_cm * (axis_px / axis_cm);
  return origin == Origin::UpperLeft ? centered + (axis_px - 1.0) / 2.0
                                     : centered;
}

/// Positions (dva) -> velocities (dva/s). Output has the same length as the
/// input; samples whose kernel window is incomplete or touches a missing
/// value come out missing. The window is the set of taps the kernel actually
/// reads, so Neighbors and FivePoint do not look at the center sample.
inline std::vector<double> pos2vel(std::span<const double> positions, double fs,
                                   VelocityMethod method) {
  if (!(fs > 0.0) || !std::isfinite(fs))
    detail::raise(ErrorKind::InvalidArgument,
                  "sampling rate must be positive and finite");
  const std::size_t n = positions.size();
  const std::size_t kernel_width =
      method == VelocityMethod::Preceding
          ? 1
          : (method == VelocityMethod::Neighbors ? 3 : 5);
  if (n < kernel_width)
    detail::raise(ErrorKind::InvalidArgument,
                  "pos2vel needs at least " + std::to_string(kernel_width) +
                      " samples, got " + std::to_string(n));
  std::vector<double> v(n, missing);
  switch (method) {
    case VelocityMethod::Preceding:
      for (std::size_t i = 1; i < n; ++i)
        v[i] = (positions[i] - positions[i - 1]) * fs;
      break;
    case VelocityMethod::Neighbors:
      for (std::size_t i = 1; i + 1 < n; ++i)
        v[i] = (positions[i + 1] - positions[i - 1]) * fs / 2.0;
      break;
    case VelocityMethod::FivePoint:
      for (std::size_t i = 2; i + 2 < n; ++i)
        v[i] = fs *
               (positions[i + 2] + positions[i + 1] - positions[i - 1] -
                positions[i - 2]) /
               6.0;
      break;
  }
  return v;
}

/// Attach x_dva / y_dva columns computed from the pixel columns.
inline GazeFrame positions_to_degrees(const GazeFrame& f,
                                      const ExperimentGeometry& g) {
  require_valid_geometry(g);
  std::vector<double> x(f.size()), y(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    x[i] = pix2deg(f.x_px()[i], g.screen_width_px, g.screen_width_cm,
                   g.distance_cm, g.origin);
    y[i] = pix2deg(f.y_px()[i], g.screen_height_px, g.screen_height_cm,
                   g.distance_cm, g.origin);
  }
  return f.with_degrees(std::move(x), std::move(y));
}

/// Attach vx / vy columns differentiated from the degree columns.
inline GazeFrame degrees_to_velocity(const GazeFrame& f, double fs,
                                     VelocityMethod method) {
  return f.with_velocity(pos2vel(f.x_dva(), fs, method),
                         pos2vel(f.y_dva(), fs, method));
}

}  // namespace gaze
