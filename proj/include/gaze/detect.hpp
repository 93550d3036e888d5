#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <span>
#include <string>
#include <vector>

#include "gaze/core.hpp"
#include "gaze/error.hpp"

namespace gaze {

/// Velocity-threshold identification (I-VT).
struct IvtParams {
  double velocity_threshold = 20.0;  // dva/s
  double min_duration_ms = 100.0;

  void validate() const {
    if (!(velocity_threshold > 0.0))
      detail::raise(ErrorKind::InvalidArgument,
                    "velocity_threshold must be > 0");
    if (!(min_duration_ms > 0.0))
      detail::raise(ErrorKind::InvalidArgument, "min_duration_ms must be > 0");
  }
};

/// Dispersion-threshold identification (I-DT).
struct IdtParams {
  double dispersion_threshold = 1.0;  // dva
  double min_duration_ms = 100.0;

  void validate() const {
    if (!(dispersion_threshold > 0.0))
      detail::raise(ErrorKind::InvalidArgument,
                    "dispersion_threshold must be > 0");
    if (!(min_duration_ms > 0.0))
      detail::raise(ErrorKind::InvalidArgument, "min_duration_ms must be > 0");
  }
};

/// Median-noise-multiplier microsaccade detection. The thresholds are
/// eta_c = lambda * sigma_c per velocity component, where sigma_c is the
/// median-based deviation sqrt(median((v - median(v))^2)).
struct MicrosaccadeParams {
  double lambda = 6.0;
  std::size_t min_duration_samples = 6;
  double sigma_floor = 1e-10;  // dva/s

  void validate() const {
    if (!(lambda > 0.0))
      detail::raise(ErrorKind::InvalidArgument, "lambda must be > 0");
    if (min_duration_samples < 1)
      detail::raise(ErrorKind::InvalidArgument,
                    "min_duration_samples must be >= 1");
    if (!(sigma_floor > 0.0))
      detail::raise(ErrorKind::InvalidArgument, "sigma_floor must be > 0");
  }
};

/// Spatial spread of a sample window: (max x - min x) + (max y - min y).
/// Any missing value in the window makes the result missing.
inline double dispersion(std::span<const double> xs,
                         std::span<const double> ys) {
  if (xs.empty())
    detail::raise(ErrorKind::InvalidArgument, "dispersion of empty window");
  if (xs.size() != ys.size())
    detail::raise(ErrorKind::InvalidArgument,
                  "dispersion requires equal-length x and y windows");
  double min_x = xs[0], max_x = xs[0], min_y = ys[0], max_y = ys[0];
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (is_missing(xs[i]) || is_missing(ys[i])) return missing;
    min_x = std::min(min_x, xs[i]);
    max_x = std::max(max_x, xs[i]);
    min_y = std::min(min_y, ys[i]);
    max_y = std::max(max_y, ys[i]);
  }
  return (max_x - min_x) + (max_y - min_y);
}

namespace detail {

/// Number of samples corresponding to a minimum duration: ceil(ms * fs / 1000).
/// An event is never accepted shorter than requested.
inline std::size_t min_duration_samples(double min_duration_ms, double fs) {
  if (!(fs > 0.0) || !std::isfinite(fs))
    raise(ErrorKind::InvalidArgument, "sampling rate must be positive and finite");
  return static_cast<std::size_t>(std::ceil(min_duration_ms * fs / 1000.0));
}

/// Monotone min/max deques over a forward-sliding window. Missing values are
/// tracked by count and poison the window instead of entering the deques.
class WindowExtrema {
 public:
  explicit WindowExtrema(std::span<const double> v) : v_(v) {}

  void push_right() {
    const std::size_t i = right_++;
    const double x = v_[i];
    if (is_missing(x)) {
      ++missing_count_;
      return;
    }
    while (!min_.empty() && v_[min_.back()] >= x) min_.pop_back();
    min_.push_back(i);
    while (!max_.empty() && v_[max_.back()] <= x) max_.pop_back();
    max_.push_back(i);
  }

  void pop_left() {
    const std::size_t i = left_++;
    if (is_missing(v_[i])) {
      --missing_count_;
      return;
    }
    if (!min_.empty() && min_.front() == i) min_.pop_front();
    if (!max_.empty() && max_.front() == i) max_.pop_front();
  }

  void reset(std::size_t pos) {
    left_ = right_ = pos;
    missing_count_ = 0;
    min_.clear();
    max_.clear();
  }

  bool poisoned() const noexcept { return missing_count_ > 0; }

  double range() const {
    if (poisoned() || min_.empty()) return missing;
    return v_[max_.front()] - v_[min_.front()];
  }

  /// Range of the current window extended by v[j], without committing.
  double range_with(std::size_t j) const {
    const double x = v_[j];
    if (poisoned() || is_missing(x)) return missing;
    if (min_.empty()) return 0.0;
    return std::max(v_[max_.front()], x) - std::min(v_[min_.front()], x);
  }

 private:
  std::span<const double> v_;
  std::deque<std::size_t> min_;
  std::deque<std::size_t> max_;
  std::size_t left_ = 0;
  std::size_t right_ = 0;
  std::size_t missing_count_ = 0;
};

inline double robust_sigma(std::span<const double> v, const char* axis) {
  std::vector<double> vals;
  vals.reserve(v.size());
  for (double x : v)
    if (!is_missing(x)) vals.push_back(x);
  if (vals.empty())
    raise(ErrorKind::DegenerateSignal,
          std::string("no non-missing ") + axis + " velocity samples");
  auto median_inplace = [](std::vector<double>& w) {
    const std::size_t n = w.size();
    auto mid = w.begin() + static_cast<std::ptrdiff_t>(n / 2);
    std::nth_element(w.begin(), mid, w.end());
    const double hi = *mid;
    if (n % 2 == 1) return hi;
    const double lo = *std::max_element(w.begin(), mid);
    return (lo + hi) / 2.0;
  };
  const double med = median_inplace(vals);
  for (double& x : vals) x = (x - med) * (x - med);
  return std::sqrt(median_inplace(vals));
}

}  // namespace detail

/// Classical dispersion-threshold fixation sweep over the degree columns.
/// A window of min-duration size is grown to the right while its dispersion
/// stays at or below the threshold; windows touching missing samples count as
/// exceeding it. Needs the sampling rate to size the minimum window.
inline EventList detect_idt(const GazeFrame& f, const IdtParams& p, double fs) {
  p.validate();
  const auto xs = f.x_dva();
  const auto ys = f.y_dva();
  const std::size_t w = detail::min_duration_samples(p.min_duration_ms, fs);
  if (w < 2)
    detail::raise(ErrorKind::InvalidArgument,
                  "I-DT minimum window must cover at least 2 samples; "
                  "min_duration_ms " +
                      std::to_string(p.min_duration_ms) + " at " +
                      std::to_string(fs) + " Hz covers " + std::to_string(w));
  const std::size_t n = f.size();
  const auto t = f.time();
  std::vector<EventRecord> events;
  detail::WindowExtrema wx(xs), wy(ys);
  std::size_t left = 0, right = 0;
  while (left + w <= n) {
    while (right < left + w) {
      wx.push_right();
      wy.push_right();
      ++right;
    }
    const double d = wx.range() + wy.range();
    if (d <= p.dispersion_threshold) {
      while (right < n) {
        const double grown = wx.range_with(right) + wy.range_with(right);
        if (!(grown <= p.dispersion_threshold)) break;
        wx.push_right();
        wy.push_right();
        ++right;
      }
      events.emplace_back(event_name::fixation, t[left], t[right - 1], left,
                          right - 1);
      left = right;
      wx.reset(left);
      wy.reset(left);
    } else {
      wx.pop_left();
      wy.pop_left();
      ++left;
    }
  }
  return EventList(std::move(events));
}

/// Velocity-threshold fixation detection: maximal runs of speed strictly
/// below the threshold, kept when they span at least the minimum duration.
/// Missing velocities terminate a run.
inline EventList detect_ivt(const GazeFrame& f, const IvtParams& p, double fs) {
  p.validate();
  const auto vx = f.vx();
  const auto vy = f.vy();
  const std::size_t w =
      std::max<std::size_t>(1, detail::min_duration_samples(p.min_duration_ms, fs));
  const std::size_t n = f.size();
  const auto t = f.time();
  std::vector<EventRecord> events;
  std::size_t run_start = 0;
  bool in_run = false;
  auto close_run = [&](std::size_t end_exclusive) {
    if (!in_run) return;
    if (end_exclusive - run_start >= w)
      events.emplace_back(event_name::fixation, t[run_start],
                          t[end_exclusive - 1], run_start, end_exclusive - 1);
    in_run = false;
  };
  for (std::size_t i = 0; i < n; ++i) {
    const double speed = std::hypot(vx[i], vy[i]);
    const bool slow = speed < p.velocity_threshold;  // false for missing
    if (slow && !in_run) {
      in_run = true;
      run_start = i;
    } else if (!slow) {
      close_run(i);
    }
  }
  close_run(n);
  return EventList(std::move(events));
}

/// Median-noise-multiplier (micro)saccade detection on velocity columns.
/// Candidate samples satisfy (vx/eta_x)^2 + (vy/eta_y)^2 > 1; events are
/// maximal candidate runs of at least min_duration_samples samples.
inline EventList detect_microsaccades(const GazeFrame& f,
                                      const MicrosaccadeParams& p) {
  p.validate();
  const auto vx = f.vx();
  const auto vy = f.vy();
  const double sigma_x = detail::robust_sigma(vx, "x");
  const double sigma_y = detail::robust_sigma(vy, "y");
  if (sigma_x < p.sigma_floor || sigma_y < p.sigma_floor)
    detail::raise(ErrorKind::DegenerateSignal,
                  "velocity variance too small for a noise-relative threshold "
                  "(sigma_x=" +
                      std::to_string(sigma_x) + ", sigma_y=" +
                      std::to_string(sigma_y) + ")");
  const double eta_x = p.lambda * sigma_x;
  const double eta_y = p.lambda * sigma_y;
  const std::size_t n = f.size();
  const auto t = f.time();
  std::vector<EventRecord> events;
  std::size_t run_start = 0;
  bool in_run = false;
  auto close_run = [&](std::size_t end_exclusive) {
    if (!in_run) return;
    if (end_exclusive - run_start >= p.min_duration_samples)
      events.emplace_back(event_name::microsaccade, t[run_start],
                          t[end_exclusive - 1], run_start, end_exclusive - 1);
    in_run = false;
  };
  for (std::size_t i = 0; i < n; ++i) {
    const double rx = vx[i] / eta_x;
    const double ry = vy[i] / eta_y;
    const bool candidate = rx * rx + ry * ry > 1.0;  // false for missing
    if (candidate && !in_run) {
      in_run = true;
      run_start = i;
    } else if (!candidate) {
      close_run(i);
    }
  }
  close_run(n);
  return EventList(std::move(events));
}

}  // namespace gaze
