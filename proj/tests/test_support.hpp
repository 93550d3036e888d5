#pragma once

// Shared fixtures: deterministic generators and independent naive-scan
// oracles the detector and property tests compare against. The oracles are
// literal transcriptions kept free of the library's sweep machinery.

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gaze/core.hpp"
#include "gaze/detect.hpp"

namespace testsup {

/// Unique directory under the system temp root, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<unsigned> counter{0};
    dir_ = std::filesystem::temp_directory_path() /
           ("gazekit-test-" + std::to_string(::getpid()) + "-" +
            std::to_string(counter.fetch_add(1)));
    std::filesystem::create_directories(dir_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(dir_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return dir_; }
  std::filesystem::path file(const std::string& name) const {
    return dir_ / name;
  }

 private:
  std::filesystem::path dir_;
};

inline void write_file(const std::filesystem::path& p,
                       std::string_view content) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

class Rng {
 public:
  explicit Rng(std::uint32_t seed) : gen_(seed) {}

  double uniform(double lo, double hi) {
    return lo + (hi - lo) * std::generate_canonical<double, 53>(gen_);
  }

  std::size_t index(std::size_t n) {
    return static_cast<std::size_t>(gen_() % n);
  }

  bool chance(double p) { return uniform(0.0, 1.0) < p; }

  std::mt19937& raw() { return gen_; }

 private:
  std::mt19937 gen_;
};

/// Frame with time 0..n-1 ms and random-walk positions/velocities. Degree and
/// velocity columns are independent random data; nan_prob injects missing
/// values into both members of a pair or a single axis at random.
inline gaze::GazeFrame random_frame(Rng& rng, std::size_t n, double nan_prob,
                                    double pos_scale = 2.0,
                                    double vel_scale = 40.0) {
  gaze::GazeFrame::Columns c;
  c.time.resize(n);
  c.x_px.assign(n, 0.0);
  c.y_px.assign(n, 0.0);
  std::vector<double> xd(n), yd(n), vx(n), vy(n);
  double x = 0.0, y = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    c.time[i] = static_cast<double>(i);
    x += rng.uniform(-pos_scale, pos_scale);
    y += rng.uniform(-pos_scale, pos_scale);
    xd[i] = x;
    yd[i] = y;
    vx[i] = rng.uniform(-vel_scale, vel_scale);
    vy[i] = rng.uniform(-vel_scale, vel_scale);
    c.x_px[i] = 100.0 + 10.0 * x;
    c.y_px[i] = 100.0 + 10.0 * y;
    if (rng.chance(nan_prob)) {
      if (rng.chance(0.5)) xd[i] = gaze::missing;
      if (rng.chance(0.5)) yd[i] = gaze::missing;
      if (rng.chance(0.5)) vx[i] = gaze::missing;
      if (rng.chance(0.5)) vy[i] = gaze::missing;
    }
  }
  c.x_dva = std::move(xd);
  c.y_dva = std::move(yd);
  c.vx = std::move(vx);
  c.vy = std::move(vy);
  return gaze::GazeFrame(std::move(c));
}

// ---- independent oracles -------------------------------------------------

inline double oracle_dispersion(std::span<const double> xs,
                                std::span<const double> ys, std::size_t lo,
                                std::size_t hi) {
  double mnx = xs[lo], mxx = xs[lo], mny = ys[lo], mxy = ys[lo];
  for (std::size_t k = lo; k <= hi; ++k) {
    if (std::isnan(xs[k]) || std::isnan(ys[k]))
      return std::numeric_limits<double>::quiet_NaN();
    mnx = std::min(mnx, xs[k]);
    mxx = std::max(mxx, xs[k]);
    mny = std::min(mny, ys[k]);
    mxy = std::max(mxy, ys[k]);
  }
  return (mxx - mnx) + (mxy - mny);
}

struct OracleEvent {
  std::size_t onset;
  std::size_t offset;
};

inline std::vector<OracleEvent> oracle_idt(const gaze::GazeFrame& f,
                                           double threshold, double min_ms,
                                           double fs) {
  const auto xs = f.x_dva();
  const auto ys = f.y_dva();
  const std::size_t n = f.size();
  const auto w = static_cast<std::size_t>(std::ceil(min_ms * fs / 1000.0));
  std::vector<OracleEvent> out;
  std::size_t i = 0;
  while (i + w <= n) {
    if (oracle_dispersion(xs, ys, i, i + w - 1) <= threshold) {
      std::size_t j = i + w - 1;
      while (j + 1 < n && oracle_dispersion(xs, ys, i, j + 1) <= threshold) ++j;
      out.push_back({i, j});
      i = j + 1;
    } else {
      ++i;
    }
  }
  return out;
}

inline std::vector<OracleEvent> oracle_ivt(const gaze::GazeFrame& f,
                                           double threshold, double min_ms,
                                           double fs) {
  const auto vx = f.vx();
  const auto vy = f.vy();
  const std::size_t n = f.size();
  const auto w = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(min_ms * fs / 1000.0)));
  std::vector<bool> slow(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    const double s = std::sqrt(vx[i] * vx[i] + vy[i] * vy[i]);
    slow[i] = !std::isnan(s) && s < threshold;
  }
  std::vector<OracleEvent> out;
  std::size_t i = 0;
  while (i < n) {
    if (!slow[i]) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < n && slow[j + 1]) ++j;
    if (j - i + 1 >= w) out.push_back({i, j});
    i = j + 1;
  }
  return out;
}

/// Sort-based median (the library uses nth_element), averaging the two middle
/// values for even counts.
inline double oracle_median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

struct OracleMicro {
  bool degenerate = false;
  double sigma_x = 0.0, sigma_y = 0.0;
  std::vector<OracleEvent> events;
};

inline OracleMicro oracle_microsaccades(const gaze::GazeFrame& f, double lambda,
                                        std::size_t min_samples,
                                        double sigma_floor) {
  const auto vx = f.vx();
  const auto vy = f.vy();
  const std::size_t n = f.size();
  OracleMicro r;
  auto sigma = [](std::span<const double> v) -> std::optional<double> {
    std::vector<double> vals;
    for (double x : v)
      if (!std::isnan(x)) vals.push_back(x);
    if (vals.empty()) return std::nullopt;
    const double med = oracle_median(vals);
    std::vector<double> d2;
    d2.reserve(vals.size());
    for (double x : vals) d2.push_back((x - med) * (x - med));
    return std::sqrt(oracle_median(d2));
  };
  auto sx = sigma(vx), sy = sigma(vy);
  if (!sx || !sy || *sx < sigma_floor || *sy < sigma_floor) {
    r.degenerate = true;
    return r;
  }
  r.sigma_x = *sx;
  r.sigma_y = *sy;
  const double ex = lambda * *sx, ey = lambda * *sy;
  std::vector<bool> cand(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    const double q = (vx[i] / ex) * (vx[i] / ex) + (vy[i] / ey) * (vy[i] / ey);
    cand[i] = !std::isnan(q) && q > 1.0;
  }
  std::size_t i = 0;
  while (i < n) {
    if (!cand[i]) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < n && cand[j + 1]) ++j;
    if (j - i + 1 >= min_samples) r.events.push_back({i, j});
    i = j + 1;
  }
  return r;
}

inline bool events_equal(const gaze::EventList& got,
                         const std::vector<OracleEvent>& expected) {
  if (got.size() != expected.size()) return false;
  for (std::size_t k = 0; k < expected.size(); ++k)
    if (got[k].onset_i() != expected[k].onset ||
        got[k].offset_i() != expected[k].offset)
      return false;
  return true;
}

}  // namespace testsup
