#pragma once

#include <cstdint>

#include "rsac/grid.hpp"

namespace rsac {

/// Reference view of a static scene. The grid is larger than the frame by
/// `margin` pixels on every side so translated/scaled views stay inside it.
struct Scene {
  Grid intensity; // (rows + 2*margin) x (cols + 2*margin), values in [0, 1]
  int margin = 0;

  int frame_rows() const { return intensity.rows() - 2 * margin; }
  int frame_cols() const { return intensity.cols() - 2 * margin; }

  void validate() const;
  /// The central frame-sized crop (what a motionless camera records).
  Grid reference_frame() const;
};

struct SceneSpec {
  int rows = 0;   // frame rows (without margin)
  int cols = 0;   // frame cols (without margin)
  int margin = 16;
  uint64_t seed = 1;
  double blur_px = 2.0;      // texture correlation scale
  double ramp_weight = 0.0;  // 0 = pure texture, 1 = pure horizontal ramp
  double low = 0.05;
  double high = 0.95;
};

/// Seeded band-limited noise texture, optionally mixed with a horizontal
/// intensity ramp. Registration needs texture; the ramp makes row centroids
/// analytically trackable.
Scene generate_scene(const SceneSpec& spec);

Scene scene_from_grid(Grid grid, int margin);

} // namespace rsac
