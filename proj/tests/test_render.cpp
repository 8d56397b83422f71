#include <doctest.h>

#include <cmath>

#include "rsac/camera.hpp"
#include "rsac/dsp.hpp"
#include "rsac/error.hpp"
#include "rsac/recovery.hpp"
#include "rsac/render.hpp"
#include "rsac/rng.hpp"
#include "rsac/scene.hpp"

using namespace rsac;

namespace {

constexpr double kPi = 3.14159265358979323846;

ShutterTiming small_timing(int rows, double fps = 40.0, double readout_s = 20e-6,
                           double exposure_s = 1e-3) {
  return make_timing(exposure_s, readout_s, fps, 4, rows);
}

PixelMotion sine_motion_x(double freq_hz, double amplitude_px, double step_s, size_t samples) {
  PixelMotion m = PixelMotion::still(samples, step_s);
  for (size_t i = 0; i < samples; ++i)
    m.x_px[i] = amplitude_px * std::sin(2.0 * kPi * freq_hz * static_cast<double>(i) * step_s);
  return m;
}

size_t steps_for(const ShutterTiming& t, int rows, int frames) {
  return static_cast<size_t>(t.frame_start_step(frames - 1) +
                             static_cast<long>(rows - 1) * t.delta_div + t.exposure_steps() + 2);
}

Scene ramp_scene(int rows, int cols, int margin) {
  const int gr = rows + 2 * margin, gc = cols + 2 * margin;
  Grid g(gr, gc);
  for (int r = 0; r < gr; ++r)
    for (int c = 0; c < gc; ++c)
      g.at(r, c) = 0.1 + 0.8 * static_cast<double>(c) / (gc - 1);
  return scene_from_grid(std::move(g), margin);
}

} // namespace

TEST_SUITE("render") {

TEST_CASE("zero motion reproduces the scene crop exactly") {
  const Scene scene = generate_scene({64, 64, 8, 5, 2.0, 0.0, 0.05, 0.95});
  const ShutterTiming t = small_timing(64);
  const ShutterSchedule s = make_schedule(t, 64, ScheduleMode::Sequential, 0);
  const PixelMotion still = PixelMotion::still(steps_for(t, 64, 1), t.step_s());
  const Grid frame = render_frame(scene, still, s, t, 0);
  const Grid crop = scene.reference_frame();
  for (int r = 0; r < 64; ++r)
    for (int c = 0; c < 64; ++c) CHECK(frame.at(r, c) == crop.at(r, c));
}

TEST_CASE("constant integer shift moves every row exactly") {
  const Scene scene = generate_scene({48, 48, 8, 11, 2.0, 0.0, 0.05, 0.95});
  const ShutterTiming t = small_timing(48);
  const ShutterSchedule s = make_schedule(t, 48, ScheduleMode::Sequential, 0);
  PixelMotion m = PixelMotion::still(steps_for(t, 48, 1), t.step_s());
  for (auto& v : m.x_px) v = 3.0;
  const Grid frame = render_frame(scene, m, s, t, 0);
  for (int r = 0; r < 48; ++r)
    for (int c = 0; c < 48; ++c)
      CHECK(frame.at(r, c) == scene.intensity.at(r + 8, c + 8 - 3));
}

TEST_CASE("brightness is conserved") {
  const ShutterTiming t = small_timing(64);
  const ShutterSchedule s = make_schedule(t, 64, ScheduleMode::Sequential, 0);

  // Exact for zero motion.
  const Scene textured = generate_scene({64, 64, 8, 3, 2.0, 0.0, 0.05, 0.95});
  const PixelMotion still = PixelMotion::still(steps_for(t, 64, 1), t.step_s());
  CHECK(render_frame(textured, still, s, t, 0).mean() ==
        doctest::Approx(textured.reference_frame().mean()).epsilon(1e-12));

  // Within bilinear tolerance under motion, constant-intensity border.
  Scene flat_border = textured;
  for (int r = 0; r < flat_border.intensity.rows(); ++r)
    for (int c = 0; c < flat_border.intensity.cols(); ++c)
      if (r < 12 || c < 12 || r >= flat_border.intensity.rows() - 12 ||
          c >= flat_border.intensity.cols() - 12)
        flat_border.intensity.at(r, c) = 0.5;
  const PixelMotion wobble = sine_motion_x(500.0, 2.0, t.step_s(), steps_for(t, 64, 1));
  const double moved = render_frame(flat_border, wobble, s, t, 0).mean();
  const double still_mean = flat_border.reference_frame().mean();
  CHECK(std::abs(moved - still_mean) < 1e-3);
}

TEST_CASE("render is linear in the scene") {
  const Scene scene = generate_scene({40, 40, 8, 17, 2.0, 0.0, 0.1, 0.9});
  Scene half = scene;
  for (auto& v : half.intensity.raw()) v *= 0.5;
  const ShutterTiming t = small_timing(40);
  const ShutterSchedule s = make_schedule(t, 40, ScheduleMode::Sequential, 0);
  const PixelMotion m = sine_motion_x(300.0, 1.5, t.step_s(), steps_for(t, 40, 1));
  const Grid a = render_frame(scene, m, s, t, 0);
  const Grid b = render_frame(half, m, s, t, 0);
  for (int r = 0; r < 40; ++r)
    for (int c = 0; c < 40; ++c)
      CHECK(b.at(r, c) == doctest::Approx(0.5 * a.at(r, c)).epsilon(1e-12));
}

TEST_CASE("row content depends only on its exposure slot (X-only motion)") {
  const int rows = 32, cols = 32, margin = 8;
  const Scene scene = generate_scene({rows, cols, margin, 23, 2.0, 0.0, 0.05, 0.95});
  const ShutterTiming t = small_timing(rows);
  const ShutterSchedule coded = make_schedule(t, rows, ScheduleMode::RandomCoded, 5);
  const ShutterSchedule seq = make_schedule(t, rows, ScheduleMode::Sequential, 0);
  const PixelMotion m = sine_motion_x(700.0, 2.5, t.step_s(), steps_for(t, rows, 1));

  const Grid coded_frame = render_frame(scene, m, coded, t, 0);

  // Rendering with a permuted schedule equals rendering the row-permuted
  // scene sequentially, after regrouping rows by readout slot.
  const std::vector<int> perm = coded.permutation(0);
  Scene permuted = scene;
  for (int p = 0; p < rows; ++p)
    for (int c = 0; c < scene.intensity.cols(); ++c)
      permuted.intensity.at(p + margin, c) =
          scene.intensity.at(perm[static_cast<size_t>(p)] + margin, c);
  const Grid seq_frame = render_frame(permuted, m, seq, t, 0);

  for (int p = 0; p < rows; ++p)
    for (int c = 0; c < cols; ++c)
      CHECK(coded_frame.at(perm[static_cast<size_t>(p)], c) ==
            doctest::Approx(seq_frame.at(p, c)).epsilon(1e-12));
}

TEST_CASE("ramp-scene centroid shift equals the exposure-window mean") {
  const int rows = 100, cols = 64, margin = 12;
  const Scene scene = ramp_scene(rows, cols, margin);
  const ShutterTiming t = small_timing(rows);
  const ShutterSchedule s = make_schedule(t, rows, ScheduleMode::Sequential, 0);
  const PixelMotion m = sine_motion_x(430.0, 3.0, t.step_s(), steps_for(t, rows, 2));
  const Grid frame = render_frame(scene, m, s, t, 1);
  const Grid ref = scene.reference_frame();
  const double slope = 0.8 / (scene.intensity.cols() - 1);

  for (int r = 0; r < rows; ++r) {
    // Use interior columns; edge clamping breaks the pure ramp.
    double diff = 0.0;
    int used = 0;
    for (int c = 8; c < cols - 8; ++c) {
      diff += ref.at(r, c) - frame.at(r, c);
      ++used;
    }
    const double measured_shift = diff / used / slope;
    const double expected = exposure_mean_oracle(m.x_px, t, s, r, 1);
    CHECK(std::abs(measured_shift - expected) < 0.05);
  }
}

TEST_CASE("wobble stripes have the predicted row period") {
  // 500 Hz, readout 20 us -> one period every 100 rows, 2.5 periods/frame.
  const int rows = 250, cols = 32, margin = 12;
  const Scene scene = ramp_scene(rows, cols, margin);
  const ShutterTiming t = small_timing(rows);
  const ShutterSchedule s = make_schedule(t, rows, ScheduleMode::Sequential, 0);
  const PixelMotion m = sine_motion_x(500.0, 3.0, t.step_s(), steps_for(t, rows, 1));
  const Grid frame = render_frame(scene, m, s, t, 0);
  const Grid ref = scene.reference_frame();
  const double slope = 0.8 / (scene.intensity.cols() - 1);

  std::vector<double> row_shift(static_cast<size_t>(rows));
  for (int r = 0; r < rows; ++r) {
    double diff = 0.0;
    int used = 0;
    for (int c = 8; c < cols - 8; ++c) {
      diff += ref.at(r, c) - frame.at(r, c);
      ++used;
    }
    row_shift[static_cast<size_t>(r)] = diff / used / slope;
  }
  const auto spec = dsp::rfft(row_shift, 256);
  size_t best = 1;
  for (size_t k = 1; k < spec.size(); ++k)
    if (std::abs(spec[k]) > std::abs(spec[best])) best = k;
  // 0.01 cycles/row on a 256-point grid lands at bin 2.56.
  CHECK(best >= 2);
  CHECK(best <= 3);

  // Blur attenuates the stripe amplitude by the exposure-mean response.
  const double amp = dsp::sine_fit_amplitude(row_shift, 1.0 / t.row_readout_s, 500.0);
  const double expected = 3.0 * moving_mean_response(t.exposure_s, t.step_s(), 500.0);
  CHECK(amp == doctest::Approx(expected).epsilon(0.03));
}

TEST_CASE("coverage and margin errors") {
  const Scene scene = generate_scene({32, 32, 4, 3, 2.0, 0.0, 0.05, 0.95});
  const ShutterTiming t = small_timing(32);
  const ShutterSchedule s = make_schedule(t, 32, ScheduleMode::Sequential, 0);

  PixelMotion short_motion = PixelMotion::still(10, t.step_s());
  CHECK_THROWS_AS((void)render_frame(scene, short_motion, s, t, 0), Error);

  PixelMotion wide = sine_motion_x(300.0, 6.0, t.step_s(), steps_for(t, 32, 1));
  CHECK_THROWS_AS((void)render_frame(scene, wide, s, t, 0), Error);
}

TEST_CASE("render_video: single frame reduces to render_frame, static clip is constant") {
  const Scene scene = generate_scene({48, 48, 8, 29, 2.0, 0.0, 0.05, 0.95});
  const ShutterTiming t = small_timing(48);
  const ShutterSchedule s = make_schedule(t, 48, ScheduleMode::Sequential, 0);
  const PixelMotion m = sine_motion_x(200.0, 1.0, t.step_s(), steps_for(t, 48, 3));

  const FrameSequence one = render_video(scene, m, s, t, 1);
  const Grid direct = render_frame(scene, m, s, t, 0);
  for (int r = 0; r < 48; ++r)
    for (int c = 0; c < 48; ++c) CHECK(one.frames[0].at(r, c) == direct.at(r, c));

  const PixelMotion still = PixelMotion::still(steps_for(t, 48, 3), t.step_s());
  const FrameSequence clip = render_video(scene, still, s, t, 3);
  for (int k = 1; k < 3; ++k)
    for (int r = 0; r < 48; ++r)
      for (int c = 0; c < 48; ++c)
        CHECK(clip.frames[static_cast<size_t>(k)].at(r, c) == clip.frames[0].at(r, c));
}

TEST_CASE("motion_to_pixels scaling and axial zoom") {
  SensorGeometry g;
  g.rows = 1080;
  g.cols = 1920;
  g.sensor_width_mm = 5.544;
  g.focal_mm = 5.0;
  g.distance_mm = 100.0;

  LensMotion lm;
  lm.step_s = 1e-5;
  lm.x_um = {0.0, 22.0, -22.0};
  lm.y_um = {0.0, 0.0, 0.0};
  lm.z_um = {0.0, 50.0, -50.0};
  const PixelMotion pm = motion_to_pixels(lm, g);
  CHECK(pm.x_px[0] == 0.0);
  CHECK(pm.x_px[1] == doctest::Approx(8.0).epsilon(1e-9));
  CHECK(pm.scale[0] == 1.0);
  CHECK(pm.scale[1] == doctest::Approx(1e5 / (1e5 - 50.0)).epsilon(1e-12));
  CHECK(pm.scale[2] == doctest::Approx(1e5 / (1e5 + 50.0)).epsilon(1e-12));

  // Doubling the column count doubles the translation amplitude.
  SensorGeometry g2 = g;
  g2.cols *= 2;
  const PixelMotion pm2 = motion_to_pixels(lm, g2);
  CHECK(pm2.x_px[1] == doctest::Approx(2.0 * pm.x_px[1]).epsilon(1e-12));
}

TEST_CASE("axial zoom produces opposite column shifts left and right of center") {
  const int rows = 60, cols = 60, margin = 10;
  const Scene scene = ramp_scene(rows, cols, margin);
  const ShutterTiming t = small_timing(rows);
  const ShutterSchedule s = make_schedule(t, rows, ScheduleMode::Sequential, 0);
  PixelMotion m = PixelMotion::still(steps_for(t, rows, 1), t.step_s());
  for (auto& v : m.scale) v = 1.02; // constant zoom-in
  const Grid frame = render_frame(scene, m, s, t, 0);
  const Grid ref = scene.reference_frame();
  const double slope = 0.8 / (scene.intensity.cols() - 1);
  // Content magnified about the center: samples left of center come from
  // further right (ref - frame < 0), and vice versa.
  const double left = (ref.at(30, 6) - frame.at(30, 6)) / slope;
  const double right = (ref.at(30, 53) - frame.at(30, 53)) / slope;
  CHECK(left < -0.3);
  CHECK(right > 0.3);
}

} // TEST_SUITE
