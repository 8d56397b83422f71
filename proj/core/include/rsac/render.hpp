#pragma once

#include <cstdint>
#include <vector>

#include "rsac/camera.hpp"
#include "rsac/grid.hpp"
#include "rsac/scene.hpp"
#include "rsac/signal.hpp"

namespace rsac {

/// Image-domain motion trace, one sample per timing step: X/Y translation
/// in pixels and an isotropic scale about the frame center (Z axis).
struct PixelMotion {
  std::vector<double> x_px, y_px, scale;
  double step_s = 0.0;

  size_t size() const { return x_px.size(); }
  static PixelMotion still(size_t samples, double step_s);
};

/// Applies the projection law samplewise: X/Y scale by (1 + f/d)/pitch,
/// Z displacement becomes the thin-lens magnification d / (d - z).
PixelMotion motion_to_pixels(const LensMotion& motion, const SensorGeometry& geometry);

struct FrameSequence {
  std::vector<Grid> frames;
  ShutterTiming timing;
  ScheduleMode schedule_mode = ScheduleMode::Sequential;
  uint64_t schedule_seed = 0;

  int count() const { return static_cast<int>(frames.size()); }
};

/// Renders one rolling-shutter frame: the row exposed in readout slot p
/// integrates (averages, exposure_steps + 1 samples incl. both endpoints)
/// the transformed scene over [frame_start + p*T_r, ... + T_e].
Grid render_frame(const Scene& scene, const PixelMotion& motion,
                  const ShutterSchedule& schedule, const ShutterTiming& timing,
                  int frame_index);

FrameSequence render_video(const Scene& scene, const PixelMotion& motion,
                           const ShutterSchedule& schedule, const ShutterTiming& timing,
                           int frame_count);

} // namespace rsac
