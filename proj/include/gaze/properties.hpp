#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gaze/core.hpp"
#include "gaze/error.hpp"

namespace gaze {

/// Per-event properties this toolkit can compute. Position expands to the
/// two map keys position_x and position_y.
enum class Property { Duration, Amplitude, Dispersion, PeakVelocity, Position };

inline const char* property_name(Property p) {
  switch (p) {
    case Property::Duration: return "duration";
    case Property::Amplitude: return "amplitude";
    case Property::Dispersion: return "dispersion";
    case Property::PeakVelocity: return "peak_velocity";
    case Property::Position: return "position";
  }
  return "?";
}

/// Non-empty, duplicate-free selection of properties to compute.
class PropertySpec {
 public:
  explicit PropertySpec(std::vector<Property> props) : props_(std::move(props)) {
    if (props_.empty())
      detail::raise(ErrorKind::InvalidArgument,
                    "property spec must name at least one property");
    for (std::size_t i = 0; i < props_.size(); ++i)
      for (std::size_t j = i + 1; j < props_.size(); ++j)
        if (props_[i] == props_[j])
          detail::raise(ErrorKind::InvalidArgument,
                        std::string("duplicate property '") +
                            property_name(props_[i]) + "' in spec");
  }

  static PropertySpec all() {
    return PropertySpec({Property::Duration, Property::Amplitude,
                         Property::Dispersion, Property::PeakVelocity,
                         Property::Position});
  }

  bool contains(Property p) const {
    return std::find(props_.begin(), props_.end(), p) != props_.end();
  }

  const std::vector<Property>& list() const noexcept { return props_; }

 private:
  std::vector<Property> props_;
};

namespace detail {

struct AxisExtrema {
  double min, max;
};

inline std::optional<AxisExtrema> axis_extrema(std::span<const double> v) {
  std::optional<AxisExtrema> e;
  for (double x : v) {
    if (is_missing(x)) continue;
    if (!e)
      e = AxisExtrema{x, x};
    else {
      e->min = std::min(e->min, x);
      e->max = std::max(e->max, x);
    }
  }
  return e;
}

inline std::optional<double> axis_mean(std::span<const double> v) {
  double sum = 0.0;
  std::size_t count = 0;
  for (double x : v) {
    if (is_missing(x)) continue;
    sum += x;
    ++count;
  }
  if (count == 0) return std::nullopt;
  return sum / static_cast<double>(count);
}

}  // namespace detail

/// Pure timestamp arithmetic: offset_t - onset_t. Tracker-rate independent.
inline double event_duration_ms(const EventRecord& e) {
  return e.offset_t() - e.onset_t();
}

/// Euclidean norm of the per-axis position ranges over non-missing samples.
inline double event_amplitude(const GazeFrame& segment) {
  auto ex = detail::axis_extrema(segment.x_dva());
  auto ey = detail::axis_extrema(segment.y_dva());
  if (!ex || !ey)
    detail::raise(ErrorKind::EmptyData,
                  std::string("amplitude: all ") + (!ex ? "x" : "y") +
                      " samples missing");
  return std::hypot(ex->max - ex->min, ey->max - ey->min);
}

/// Sum of per-axis position ranges; missing samples are ignored, unlike the
/// detector-side dispersion which they poison.
inline double event_dispersion(const GazeFrame& segment) {
  auto ex = detail::axis_extrema(segment.x_dva());
  auto ey = detail::axis_extrema(segment.y_dva());
  if (!ex || !ey)
    detail::raise(ErrorKind::EmptyData,
                  std::string("dispersion: all ") + (!ex ? "x" : "y") +
                      " samples missing");
  return (ex->max - ex->min) + (ey->max - ey->min);
}

/// Maximum speed over samples with both velocity components present.
inline double event_peak_velocity(const GazeFrame& segment) {
  const auto vx = segment.vx();
  const auto vy = segment.vy();
  std::optional<double> peak;
  for (std::size_t i = 0; i < vx.size(); ++i) {
    if (is_missing(vx[i]) || is_missing(vy[i])) continue;
    const double speed = std::hypot(vx[i], vy[i]);
    if (!peak || speed > *peak) peak = speed;
  }
  if (!peak)
    detail::raise(ErrorKind::EmptyData,
                  "peak_velocity: all velocity samples missing");
  return *peak;
}

/// Arithmetic mean of non-missing x and y positions, independently per axis.
inline std::pair<double, double> event_centroid(const GazeFrame& segment) {
  auto mx = detail::axis_mean(segment.x_dva());
  auto my = detail::axis_mean(segment.y_dva());
  if (!mx || !my)
    detail::raise(ErrorKind::EmptyData,
                  std::string("position: all ") + (!mx ? "x" : "y") +
                      " samples missing");
  return {*mx, *my};
}

/// Events with their property maps populated for every requested property.
/// Existing entries are preserved (recomputed keys overwrite), the input list
/// itself is not modified.
inline EventList compute_properties(const GazeFrame& f, const EventList& events,
                                    const PropertySpec& spec) {
  auto require_degrees = [&](Property p) {
    if (!f.has_degrees())
      detail::raise(ErrorKind::Schema,
                    std::string("property ") + property_name(p) +
                        " requires columns x_dva, y_dva");
  };
  for (Property p : spec.list()) {
    if (p == Property::Amplitude || p == Property::Dispersion ||
        p == Property::Position)
      require_degrees(p);
    if (p == Property::PeakVelocity && !f.has_velocity())
      detail::raise(ErrorKind::Schema,
                    "property peak_velocity requires columns vx, vy");
  }
  const bool needs_segment = spec.contains(Property::Amplitude) ||
                             spec.contains(Property::Dispersion) ||
                             spec.contains(Property::PeakVelocity) ||
                             spec.contains(Property::Position);
  std::vector<EventRecord> out;
  out.reserve(events.size());
  for (const EventRecord& e : events) {
    std::map<std::string, double> props = e.properties();
    std::optional<GazeFrame> segment;
    if (needs_segment) segment = f.slice(e.onset_i(), e.offset_i());
    for (Property p : spec.list()) {
      switch (p) {
        case Property::Duration:
          props["duration"] = event_duration_ms(e);
          break;
        case Property::Amplitude:
          props["amplitude"] = event_amplitude(*segment);
          break;
        case Property::Dispersion:
          props["dispersion"] = event_dispersion(*segment);
          break;
        case Property::PeakVelocity:
          props["peak_velocity"] = event_peak_velocity(*segment);
          break;
        case Property::Position: {
          auto [cx, cy] = event_centroid(*segment);
          props["position_x"] = cx;
          props["position_y"] = cy;
          break;
        }
      }
    }
    out.push_back(e.with_properties(std::move(props)));
  }
  return EventList(std::move(out));
}

}  // namespace gaze
