#pragma once

// The bundled "toy" dataset: two synthetic CSV recordings generated
// deterministically (fixed LCG seeds, pure arithmetic — no platform RNG),
// packed into a stored zip with fixed timestamps. The definition pins the
// archive's SHA-256, so any accidental change to the generator is caught by
// digest verification. Session 1 holds three fixation clusters joined by
// fast ramps; session 2 adds a 60-sample blink inside its middle cluster,
// splitting it — a velocity-threshold pass finds 3 fixations in session 1
// and 4 in session 2.

#include <cstdint>
#include <string>
#include <vector>

#include "gaze/dataset/archive.hpp"
#include "gaze/dataset/definition.hpp"
#include "gaze/detail/strings.hpp"

namespace gaze::toy {

namespace detail_toy {

/// 64-bit LCG (Knuth's MMIX multiplier); top bits drive every draw.
class Lcg {
 public:
  explicit Lcg(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next() {
    state_ = state_ * 6364136223846793005ULL + 1442695040888963407ULL;
    return state_ >> 33;
  }
  /// Uniform integer in [lo, hi].
  int range(int lo, int hi) {
    return lo + static_cast<int>(next() % static_cast<std::uint64_t>(
                                     hi - lo + 1));
  }

 private:
  std::uint64_t state_;
};

struct Writer {
  std::string text = "time,x,y,pupil\n";
  long t = 0;

  void sample(double x, double y, int pupil) {
    text += std::to_string(t++);
    text += ',';
    text += gaze::detail::format_double(x);
    text += ',';
    text += gaze::detail::format_double(y);
    text += ',';
    text += std::to_string(pupil);
    text += '\n';
  }

  void missing() {
    text += std::to_string(t++);
    text += ",.,.,.\n";
  }
};

/// n samples jittering around (cx, cy) by at most ±0.1 px — far below any
/// saccade threshold at 1000 Hz with this geometry.
inline void fixation(Writer& w, Lcg& rng, int n, double cx, double cy) {
  for (int i = 0; i < n; ++i) {
    const double dx = rng.range(-100, 100) / 1000.0;
    const double dy = rng.range(-100, 100) / 1000.0;
    w.sample(cx + dx, cy + dy, 800 + rng.range(-10, 10));
  }
}

/// n-sample linear ramp from (x0, y0) to (x1, y1), endpoints exclusive —
/// several hundred dva/s, comfortably a saccade.
inline void ramp(Writer& w, Lcg& rng, int n, double x0, double y0, double x1,
                 double y1) {
  for (int i = 1; i <= n; ++i) {
    const double a = static_cast<double>(i) / (n + 1);
    w.sample(x0 + a * (x1 - x0), y0 + a * (y1 - y0),
             800 + rng.range(-10, 10));
  }
}

inline void blink(Writer& w, int n) {
  for (int i = 0; i < n; ++i) w.missing();
}

}  // namespace detail_toy

/// Number of bundled sessions and their expected I-VT fixation counts
/// (threshold 20 dva/s, minimum duration 100 ms, five-point velocities).
inline constexpr int kSessionCount = 2;
inline constexpr int kExpectedFixations[kSessionCount] = {3, 4};

inline std::string session_csv(int index) {
  using namespace detail_toy;
  if (index < 0 || index >= kSessionCount)
    detail::raise(ErrorKind::OutOfRange, "toy session index out of range");
  Lcg rng(0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(index + 1));
  Writer w;
  if (index == 0) {
    fixation(w, rng, 300, 400, 300);
    ramp(w, rng, 40, 400, 300, 800, 600);
    fixation(w, rng, 300, 800, 600);
    ramp(w, rng, 40, 800, 600, 300, 800);
    fixation(w, rng, 300, 300, 800);
  } else {
    fixation(w, rng, 300, 500, 260);
    ramp(w, rng, 40, 500, 260, 900, 500);
    fixation(w, rng, 150, 900, 500);
    blink(w, 60);
    fixation(w, rng, 150, 900, 500);
    ramp(w, rng, 40, 900, 500, 640, 820);
    fixation(w, rng, 300, 640, 820);
  }
  return w.text;
}

inline std::string session_filename(int index) {
  return "sub_" + std::to_string(index + 1) + ".csv";
}

/// The zip that `download_resource` materialises for the toy dataset.
inline std::vector<unsigned char> archive_bytes() {
  ZipWriter zip;
  for (int i = 0; i < kSessionCount; ++i)
    zip.add(session_filename(i), session_csv(i));
  return zip.finish();
}

/// SHA-256 of archive_bytes(), pinned. Regenerating the archive must
/// reproduce this digest bit for bit.
inline constexpr char kArchiveSha256[] =
    "fa246504cb904ebb1be66dc4c4a1e6591aeda9b988aad3a690f79f8657783dd0";

inline std::string definition_text() {
  return std::string("name = \"toy\"\n"
                     "filename_pattern = \"sub_(?P<subject>[0-9]+)\\\\.csv\"\n"
                     "\n"
                     "[[resource]]\n"
                     "mirrors = [\"https://datasets.gazekit.invalid/toy/"
                     "toy_sessions.zip\"]\n"
                     "filename = \"toy_sessions.zip\"\n"
                     "sha256 = \"") +
         kArchiveSha256 +
         "\"\n"
         "archive = \"zip\"\n"
         "\n"
         "[geometry]\n"
         "screen_width_px = 1280.0\n"
         "screen_height_px = 1024.0\n"
         "screen_width_cm = 38.0\n"
         "screen_height_cm = 30.2\n"
         "distance_cm = 68.0\n"
         "sampling_rate_hz = 1000.0\n"
         "origin = \"upper-left\"\n"
         "\n"
         "[schema]\n"
         "kind = \"csv\"\n"
         "separator = \",\"\n"
         "time = \"time\"\n"
         "x_px = \"x\"\n"
         "y_px = \"y\"\n"
         "pupil = \"pupil\"\n"
         "time_unit = \"ms\"\n"
         "missing = [\".\"]\n";
}

inline DatasetDefinition definition() {
  return parse_definition(definition_text());
}

}  // namespace gaze::toy
