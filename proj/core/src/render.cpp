#include "rsac/render.hpp"

#include <algorithm>
#include <cmath>

#include "rsac/error.hpp"

namespace rsac {

PixelMotion PixelMotion::still(size_t samples, double step_s) {
  PixelMotion m;
  m.step_s = step_s;
  m.x_px.assign(samples, 0.0);
  m.y_px.assign(samples, 0.0);
  m.scale.assign(samples, 1.0);
  return m;
}

PixelMotion motion_to_pixels(const LensMotion& motion, const SensorGeometry& geometry) {
  geometry.validate();
  if (motion.step_s <= 0.0) fail(ErrorKind::Input, "motion_to_pixels: step must be positive");
  const double factor =
      (1.0 + geometry.focal_mm / geometry.distance_mm) / geometry.pixel_pitch_um();
  const double distance_um = geometry.distance_mm * 1000.0;

  PixelMotion out;
  out.step_s = motion.step_s;
  out.x_px.resize(motion.size());
  out.y_px.resize(motion.size());
  out.scale.resize(motion.size());
  for (size_t i = 0; i < motion.size(); ++i) {
    out.x_px[i] = factor * motion.x_um[i];
    out.y_px[i] = factor * motion.y_um[i];
    const double z = motion.z_um[i];
    if (z >= distance_um)
      fail(ErrorKind::Range, "motion_to_pixels: axial travel reaches the scene distance");
    out.scale[i] = distance_um / (distance_um - z);
  }
  return out;
}

namespace {

struct FrameSpan {
  long first_step = 0;
  long last_step = 0; // inclusive
};

FrameSpan frame_span(const ShutterTiming& timing, int rows, int frame_index) {
  const long fs = timing.frame_start_step(frame_index);
  const long L = timing.exposure_steps();
  FrameSpan span;
  span.first_step = fs;
  span.last_step = fs + static_cast<long>(rows - 1) * timing.delta_div + L;
  return span;
}

void check_motion(const Scene& scene, const PixelMotion& motion, const FrameSpan& span) {
  if (span.first_step < 0 || static_cast<size_t>(span.last_step) >= motion.size())
    fail(ErrorKind::Coverage, "render: motion trace does not cover the frame's exposure span");
  const double half_rows = scene.frame_rows() / 2.0;
  const double half_cols = scene.frame_cols() / 2.0;
  double worst = 0.0;
  for (long n = span.first_step; n <= span.last_step; ++n) {
    const size_t i = static_cast<size_t>(n);
    const double zoom = std::abs(1.0 / motion.scale[i] - 1.0);
    worst = std::max(worst, std::abs(motion.x_px[i]) + zoom * half_cols);
    worst = std::max(worst, std::abs(motion.y_px[i]) + zoom * half_rows);
  }
  if (worst + 1.0 > static_cast<double>(scene.margin))
    fail(ErrorKind::Margin, "render: displacement exceeds the scene margin");
}

} // namespace

Grid render_frame(const Scene& scene, const PixelMotion& motion,
                  const ShutterSchedule& schedule, const ShutterTiming& timing,
                  int frame_index) {
  scene.validate();
  const int rows = scene.frame_rows();
  const int cols = scene.frame_cols();
  if (schedule.rows() != rows) fail(ErrorKind::Input, "render: schedule rows mismatch");
  timing.validate(rows);
  if (motion.step_s <= 0.0 || std::abs(motion.step_s - timing.step_s()) > 1e-12)
    fail(ErrorKind::Input, "render: motion step does not match the timing step");

  const FrameSpan span = frame_span(timing, rows, frame_index);
  check_motion(scene, motion, span);

  const long L = timing.exposure_steps();
  const int q = timing.delta_div;
  const Grid& sg = scene.intensity;
  const int srows = sg.rows();
  const int scols = sg.cols();
  const double cy = (rows - 1) / 2.0;
  const double cx = (cols - 1) / 2.0;
  const double m = static_cast<double>(scene.margin);
  const double inv_count = 1.0 / static_cast<double>(L + 1);

  const std::vector<int> perm = schedule.permutation(frame_index);
  Grid out(rows, cols);
  std::vector<double> acc(static_cast<size_t>(cols));

  for (int slot = 0; slot < rows; ++slot) {
    const int row = perm[static_cast<size_t>(slot)];
    std::fill(acc.begin(), acc.end(), 0.0);
    const long n0 = span.first_step + static_cast<long>(slot) * q;

    // Time-invariant window: sample the single transformed view once so
    // static and integer-shift cases stay bit-exact.
    bool constant_window = true;
    for (long n = n0 + 1; n <= n0 + L && constant_window; ++n) {
      const size_t i = static_cast<size_t>(n);
      const size_t i0 = static_cast<size_t>(n0);
      constant_window = motion.x_px[i] == motion.x_px[i0] &&
                        motion.y_px[i] == motion.y_px[i0] &&
                        motion.scale[i] == motion.scale[i0];
    }
    const long last = constant_window ? n0 : n0 + L;
    const double inv_used = constant_window ? 1.0 : inv_count;

    for (long n = n0; n <= last; ++n) {
      const size_t i = static_cast<size_t>(n);
      const double dx = motion.x_px[i];
      const double dy = motion.y_px[i];
      const double s = motion.scale[i];
      const double inv_s = 1.0 / s;

      // Sample position is linear in the column index; the row coordinate is
      // constant across the row.
      double sr = cy + (static_cast<double>(row) - cy) * inv_s + m - dy;
      sr = std::clamp(sr, 0.0, static_cast<double>(srows - 1));
      int r0 = static_cast<int>(sr);
      r0 = std::min(r0, srows - 2);
      const double wr = sr - r0;
      const double* rowA = sg.row(r0);
      const double* rowB = sg.row(r0 + 1);

      const double base = cx - cx * inv_s + m - dx;
      for (int c = 0; c < cols; ++c) {
        double sc = base + static_cast<double>(c) * inv_s;
        sc = std::clamp(sc, 0.0, static_cast<double>(scols - 1));
        int c0 = static_cast<int>(sc);
        c0 = std::min(c0, scols - 2);
        const double wc = sc - c0;
        const double top = rowA[c0] + wc * (rowA[c0 + 1] - rowA[c0]);
        const double bot = rowB[c0] + wc * (rowB[c0 + 1] - rowB[c0]);
        acc[static_cast<size_t>(c)] += top + wr * (bot - top);
      }
    }
    double* out_row = out.row(row);
    for (int c = 0; c < cols; ++c) out_row[c] = acc[static_cast<size_t>(c)] * inv_used;
  }
  return out;
}

FrameSequence render_video(const Scene& scene, const PixelMotion& motion,
                           const ShutterSchedule& schedule, const ShutterTiming& timing,
                           int frame_count) {
  if (frame_count < 1) fail(ErrorKind::Input, "render_video: frame_count must be >= 1");
  // Validate coverage for the whole clip before rendering anything.
  scene.validate();
  const FrameSpan last = frame_span(timing, scene.frame_rows(), frame_count - 1);
  if (static_cast<size_t>(last.last_step) >= motion.size())
    fail(ErrorKind::Coverage, "render_video: motion trace shorter than the clip");

  FrameSequence seq;
  seq.timing = timing;
  seq.schedule_mode = schedule.mode();
  seq.schedule_seed = schedule.seed();
  seq.frames.reserve(static_cast<size_t>(frame_count));
  for (int k = 0; k < frame_count; ++k)
    seq.frames.push_back(render_frame(scene, motion, schedule, timing, k));
  return seq;
}

} // namespace rsac
