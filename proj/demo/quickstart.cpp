// Minimal end-to-end walk-through: synthesize a short recording, convert it
// to degrees and velocities, run two detectors, and print the events with
// their properties.

#include <cstdio>
#include <vector>

#include "gaze/core.hpp"
#include "gaze/detect.hpp"
#include "gaze/properties.hpp"
#include "gaze/transform.hpp"

int main() {
  // Two fixation clusters joined by a fast sweep, sampled at 1000 Hz.
  gaze::GazeFrame::Columns c;
  for (int i = 0; i < 300; ++i) {
    c.time.push_back(static_cast<double>(i));
    double x = 600.0, y = 500.0;
    if (i >= 140 && i < 160) {
      x = 600.0 + (i - 140) * 15.0;
      y = 500.0;
    } else if (i >= 160) {
      x = 900.0;
      y = 500.0;
    }
    c.x_px.push_back(x);
    c.y_px.push_back(y);
  }
  gaze::GazeFrame raw(std::move(c));

  gaze::ExperimentGeometry geometry{1280.0, 1024.0, 38.0,   30.2,
                                    68.0,   1000.0, gaze::Origin::UpperLeft};
  auto frame = gaze::degrees_to_velocity(
      gaze::positions_to_degrees(raw, geometry), geometry.sampling_rate_hz,
      gaze::VelocityMethod::FivePoint);

  auto fixations =
      gaze::detect_ivt(frame, gaze::IvtParams{}, geometry.sampling_rate_hz);
  auto enriched = gaze::compute_properties(frame, fixations,
                                           gaze::PropertySpec::all());

  std::printf("%zu fixation(s)\n", enriched.size());
  for (const auto& e : enriched) {
    std::printf("  %s  t=[%.0f, %.0f] ms  samples [%zu, %zu]\n",
                e.name().c_str(), e.onset_t(), e.offset_t(), e.onset_i(),
                e.offset_i());
    for (const auto& [key, value] : e.properties())
      std::printf("    %-13s %10.4f\n", key.c_str(), value);
  }
  return 0;
}
