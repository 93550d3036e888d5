#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gaze/error.hpp"

namespace gaze {

/// Sentinel for missing measurements (tracking loss, blinks). Time stamps are
/// never missing; position, velocity and pupil samples may be.
inline constexpr double missing = std::numeric_limits<double>::quiet_NaN();

inline bool is_missing(double v) noexcept { return std::isnan(v); }

/// Coordinate origin of raw pixel data.
enum class Origin { UpperLeft, Center };

/// Recording session parameters needed for angle conversion and timing.
struct ExperimentGeometry {
  double screen_width_px{};
  double screen_height_px{};
  double screen_width_cm{};
  double screen_height_cm{};
  double distance_cm{};
  double sampling_rate_hz{};
  Origin origin{Origin::UpperLeft};
};

/// Returns every violated invariant, not only the first. Empty result = valid.
inline std::vector<std::string> validate_geometry(const ExperimentGeometry& g) {
  std::vector<std::string> violations;
  auto positive = [&](double v, const char* field) {
    if (!(v > 0.0) || !std::isfinite(v))
      violations.push_back(std::string(field) + " must be > 0");
  };
  positive(g.screen_width_px, "screen_width_px");
  positive(g.screen_height_px, "screen_height_px");
  positive(g.screen_width_cm, "screen_width_cm");
  positive(g.screen_height_cm, "screen_height_cm");
  positive(g.distance_cm, "distance_cm");
  positive(g.sampling_rate_hz, "sampling_rate_hz");
  return violations;
}

inline void require_valid_geometry(const ExperimentGeometry& g) {
  auto violations = validate_geometry(g);
  if (violations.empty()) return;
  std::string msg = "invalid geometry:";
  for (const auto& v : violations) msg += " " + v + ";";
  msg.pop_back();
  detail::raise(ErrorKind::InvalidArgument, msg);
}

/// Columnar time series of gaze samples. Immutable after construction; the
/// constructor rejects input violating column-length or time-monotonicity
/// invariants. Optional columns come in pairs: degrees (x_dva, y_dva) and
/// velocities (vx, vy) are either both present or both absent.
class GazeFrame {
 public:
  struct Columns {
    std::vector<double> time;  // ms, strictly increasing
    std::vector<double> x_px;
    std::vector<double> y_px;
    std::optional<std::vector<double>> x_dva;
    std::optional<std::vector<double>> y_dva;
    std::optional<std::vector<double>> vx;  // dva/s
    std::optional<std::vector<double>> vy;  // dva/s
    std::optional<std::vector<double>> pupil;
  };

  /// Empty frame: zero samples, core columns only.
  GazeFrame() = default;

  explicit GazeFrame(Columns cols) : c_(std::move(cols)) {
    const std::size_t n = c_.time.size();
    auto check_len = [&](const std::vector<double>& col, const char* name) {
      if (col.size() != n)
        detail::raise(ErrorKind::InvalidArgument,
                      std::string("column ") + name + " has length " +
                          std::to_string(col.size()) + ", expected " +
                          std::to_string(n));
    };
    check_len(c_.x_px, "x_px");
    check_len(c_.y_px, "y_px");
    auto check_opt = [&](const std::optional<std::vector<double>>& col,
                         const char* name) {
      if (col) check_len(*col, name);
    };
    check_opt(c_.x_dva, "x_dva");
    check_opt(c_.y_dva, "y_dva");
    check_opt(c_.vx, "vx");
    check_opt(c_.vy, "vy");
    check_opt(c_.pupil, "pupil");
    if (c_.x_dva.has_value() != c_.y_dva.has_value())
      detail::raise(ErrorKind::InvalidArgument,
                    "x_dva and y_dva must be present together");
    if (c_.vx.has_value() != c_.vy.has_value())
      detail::raise(ErrorKind::InvalidArgument,
                    "vx and vy must be present together");
    for (std::size_t i = 1; i < n; ++i) {
      if (!(c_.time[i] > c_.time[i - 1]))
        detail::raise(ErrorKind::InvalidArgument,
                      "time must be strictly increasing (violated at sample " +
                          std::to_string(i) + ")");
    }
  }

  std::size_t size() const noexcept { return c_.time.size(); }
  bool empty() const noexcept { return c_.time.empty(); }

  std::span<const double> time() const noexcept { return c_.time; }
  std::span<const double> x_px() const noexcept { return c_.x_px; }
  std::span<const double> y_px() const noexcept { return c_.y_px; }

  bool has_degrees() const noexcept { return c_.x_dva.has_value(); }
  bool has_velocity() const noexcept { return c_.vx.has_value(); }
  bool has_pupil() const noexcept { return c_.pupil.has_value(); }

  std::span<const double> x_dva() const { return require(c_.x_dva, "x_dva"); }
  std::span<const double> y_dva() const { return require(c_.y_dva, "y_dva"); }
  std::span<const double> vx() const { return require(c_.vx, "vx"); }
  std::span<const double> vy() const { return require(c_.vy, "vy"); }
  std::span<const double> pupil() const { return require(c_.pupil, "pupil"); }

  const Columns& columns() const noexcept { return c_; }

  /// New frame with degree columns attached.
  GazeFrame with_degrees(std::vector<double> x, std::vector<double> y) const {
    Columns c = c_;
    c.x_dva = std::move(x);
    c.y_dva = std::move(y);
    return GazeFrame(std::move(c));
  }

  /// New frame with velocity columns attached.
  GazeFrame with_velocity(std::vector<double> vx, std::vector<double> vy) const {
    Columns c = c_;
    c.vx = std::move(vx);
    c.vy = std::move(vy);
    return GazeFrame(std::move(c));
  }

  /// Samples onset_i..offset_i inclusive, all columns preserved.
  GazeFrame slice(std::size_t onset_i, std::size_t offset_i) const {
    if (onset_i > offset_i || offset_i >= size())
      detail::raise(ErrorKind::OutOfRange,
                    "slice [" + std::to_string(onset_i) + ", " +
                        std::to_string(offset_i) + "] out of range for " +
                        std::to_string(size()) + " samples");
    auto cut = [&](const std::vector<double>& col) {
      return std::vector<double>(col.begin() + static_cast<std::ptrdiff_t>(onset_i),
                                 col.begin() + static_cast<std::ptrdiff_t>(offset_i) + 1);
    };
    Columns c;
    c.time = cut(c_.time);
    c.x_px = cut(c_.x_px);
    c.y_px = cut(c_.y_px);
    auto cut_opt = [&](const std::optional<std::vector<double>>& col)
        -> std::optional<std::vector<double>> {
      if (!col) return std::nullopt;
      return cut(*col);
    };
    c.x_dva = cut_opt(c_.x_dva);
    c.y_dva = cut_opt(c_.y_dva);
    c.vx = cut_opt(c_.vx);
    c.vy = cut_opt(c_.vy);
    c.pupil = cut_opt(c_.pupil);
    return GazeFrame(std::move(c));
  }

 private:
  std::span<const double> require(const std::optional<std::vector<double>>& col,
                                  const char* name) const {
    if (!col)
      detail::raise(ErrorKind::Schema,
                    std::string("column ") + name + " not present");
    return *col;
  }

  Columns c_;
};

inline GazeFrame slice_gaze(const GazeFrame& f, std::size_t onset_i,
                            std::size_t offset_i) {
  return f.slice(onset_i, offset_i);
}

namespace event_name {
inline constexpr const char* fixation = "fixation";
inline constexpr const char* saccade = "saccade";
inline constexpr const char* microsaccade = "microsaccade";
}  // namespace event_name

/// One detected gaze event. Sample indices are inclusive on both ends and the
/// times must correspond to the indexed samples of the originating frame.
class EventRecord {
 public:
  EventRecord(std::string name, double onset_t, double offset_t,
              std::size_t onset_i, std::size_t offset_i,
              std::map<std::string, double> properties = {})
      : name_(std::move(name)),
        onset_t_(onset_t),
        offset_t_(offset_t),
        onset_i_(onset_i),
        offset_i_(offset_i),
        properties_(std::move(properties)) {
    if (name_.empty())
      detail::raise(ErrorKind::InvalidArgument, "event name must be non-empty");
    if (!(onset_t_ <= offset_t_))
      detail::raise(ErrorKind::InvalidArgument,
                    "event onset_t must not exceed offset_t");
    if (onset_i_ > offset_i_)
      detail::raise(ErrorKind::InvalidArgument,
                    "event onset_i must not exceed offset_i");
  }

  const std::string& name() const noexcept { return name_; }
  double onset_t() const noexcept { return onset_t_; }
  double offset_t() const noexcept { return offset_t_; }
  std::size_t onset_i() const noexcept { return onset_i_; }
  std::size_t offset_i() const noexcept { return offset_i_; }
  const std::map<std::string, double>& properties() const noexcept {
    return properties_;
  }

  /// Copy of this event with the given entries merged into its property map;
  /// keys present in both take the new value.
  EventRecord with_properties(std::map<std::string, double> props) const {
    std::map<std::string, double> merged = properties_;
    for (auto& [key, value] : props) merged[key] = value;
    return EventRecord(name_, onset_t_, offset_t_, onset_i_, offset_i_,
                       std::move(merged));
  }

 private:
  std::string name_;
  double onset_t_;
  double offset_t_;
  std::size_t onset_i_;
  std::size_t offset_i_;
  std::map<std::string, double> properties_;
};

/// Events sorted by onset time; ties broken by offset time, then name.
class EventList {
 public:
  EventList() = default;

  explicit EventList(std::vector<EventRecord> events)
      : events_(std::move(events)) {
    std::stable_sort(events_.begin(), events_.end(),
                     [](const EventRecord& a, const EventRecord& b) {
                       if (a.onset_t() != b.onset_t())
                         return a.onset_t() < b.onset_t();
                       if (a.offset_t() != b.offset_t())
                         return a.offset_t() < b.offset_t();
                       return a.name() < b.name();
                     });
  }

  std::size_t size() const noexcept { return events_.size(); }
  bool empty() const noexcept { return events_.empty(); }
  const EventRecord& operator[](std::size_t i) const { return events_.at(i); }
  auto begin() const noexcept { return events_.begin(); }
  auto end() const noexcept { return events_.end(); }
  const std::vector<EventRecord>& records() const noexcept { return events_; }

 private:
  std::vector<EventRecord> events_;
};

/// All events of both lists, re-sorted into canonical order. No deduplication.
inline EventList merge_events(const EventList& a, const EventList& b) {
  std::vector<EventRecord> all;
  all.reserve(a.size() + b.size());
  all.insert(all.end(), a.begin(), a.end());
  all.insert(all.end(), b.begin(), b.end());
  return EventList(std::move(all));
}

/// Session key/value annotations (subject, session, trial, ...) extracted from
/// filenames or supplied by the user. Keys unique, values non-empty.
class SessionMeta {
 public:
  SessionMeta() = default;

  explicit SessionMeta(std::map<std::string, std::string> items)
      : items_(std::move(items)) {
    for (const auto& [k, v] : items_) {
      if (k.empty())
        detail::raise(ErrorKind::InvalidArgument, "session key must be non-empty");
      if (v.empty())
        detail::raise(ErrorKind::InvalidArgument,
                      "session value for key '" + k + "' must be non-empty");
    }
  }

  void set(const std::string& key, const std::string& value) {
    if (key.empty())
      detail::raise(ErrorKind::InvalidArgument, "session key must be non-empty");
    if (value.empty())
      detail::raise(ErrorKind::InvalidArgument,
                    "session value for key '" + key + "' must be non-empty");
    items_[key] = value;
  }

  bool contains(const std::string& key) const {
    return items_.count(key) != 0;
  }

  const std::string& at(const std::string& key) const {
    auto it = items_.find(key);
    if (it == items_.end())
      detail::raise(ErrorKind::OutOfRange, "no session key '" + key + "'");
    return it->second;
  }

  std::size_t size() const noexcept { return items_.size(); }
  bool empty() const noexcept { return items_.empty(); }
  const std::map<std::string, std::string>& items() const noexcept {
    return items_;
  }

  /// Stable identifier used in output file names: "k1-v1_k2-v2" over sorted
  /// keys, or "session" when no keys exist.
  std::string id() const {
    if (items_.empty()) return "session";
    std::string out;
    for (const auto& [k, v] : items_) {
      if (!out.empty()) out += '_';
      out += k + "-" + v;
    }
    return out;
  }

 private:
  std::map<std::string, std::string> items_;
};

}  // namespace gaze
