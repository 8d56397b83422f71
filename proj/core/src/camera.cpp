#include "rsac/camera.hpp"

#include <cfenv>
#include <cmath>

#include "rsac/config.hpp"
#include "rsac/error.hpp"
#include "rsac/rng.hpp"

namespace rsac {

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;
} // namespace

void SensorGeometry::validate() const {
  if (rows < 2 || cols < 2) fail(ErrorKind::Config, "sensor: rows and cols must be >= 2");
  if (sensor_width_mm <= 0.0 || focal_mm <= 0.0 || distance_mm <= 0.0)
    fail(ErrorKind::Config, "sensor: width, focal length and distance must be positive");
  if (distance_mm <= focal_mm)
    fail(ErrorKind::Config, "sensor: scene distance must exceed the focal length");
}

long ShutterTiming::exposure_steps() const {
  const double ratio = exposure_s / step_s();
  const long rounded = std::lround(ratio);
  if (rounded < 1 || std::abs(ratio - static_cast<double>(rounded)) > 1e-6 * ratio + 1e-9)
    fail(ErrorKind::Config, "timing: exposure is not a whole number of steps");
  return rounded;
}

long ShutterTiming::frame_start_step(int frame) const {
  return std::lround(frame_start_s(frame) / step_s());
}

void ShutterTiming::validate(int rows) const {
  if (exposure_s <= 0.0 || row_readout_s <= 0.0)
    fail(ErrorKind::Config, "timing: exposure and row readout must be positive");
  if (frame_rate_hz <= 0.0) fail(ErrorKind::Config, "timing: frame rate must be positive");
  if (delta_div < 1) fail(ErrorKind::Config, "timing: delta_div must be >= 1");
  (void)exposure_steps();
  if (rows > 0 && rows * row_readout_s > 1.0 / frame_rate_hz + 1e-12)
    fail(ErrorKind::Timing, "timing: M*T_r exceeds the frame period");
}

ShutterTiming make_timing(double exposure_s, double row_readout_s, double frame_rate_hz,
                          int delta_div, int rows) {
  ShutterTiming t;
  t.exposure_s = exposure_s;
  t.row_readout_s = row_readout_s;
  t.frame_rate_hz = frame_rate_hz;
  t.delta_div = delta_div;
  t.validate(rows);
  return t;
}

std::vector<int> ShutterSchedule::permutation(int frame) const {
  if (mode_ == ScheduleMode::Sequential) {
    std::vector<int> p(static_cast<size_t>(rows_));
    for (int i = 0; i < rows_; ++i) p[static_cast<size_t>(i)] = i;
    return p;
  }
  return seeded_permutation(seed_, static_cast<uint64_t>(frame), rows_);
}

std::vector<int> ShutterSchedule::slots_by_row(int frame) const {
  const std::vector<int> p = permutation(frame);
  std::vector<int> inv(p.size());
  for (size_t slot = 0; slot < p.size(); ++slot)
    inv[static_cast<size_t>(p[slot])] = static_cast<int>(slot);
  return inv;
}

ShutterSchedule make_schedule(const ShutterTiming& timing, int rows, ScheduleMode mode,
                              uint64_t seed) {
  timing.validate(rows);
  if (rows < 1) fail(ErrorKind::Config, "schedule: rows must be >= 1");
  return ShutterSchedule(mode, rows, seed);
}

double captured_fraction(const ShutterTiming& timing, int rows) {
  if (rows < 1) fail(ErrorKind::Config, "captured_fraction: rows must be >= 1");
  const double eta = timing.frame_rate_hz * static_cast<double>(rows) * timing.row_readout_s;
  if (eta > 1.0 + 1e-12)
    fail(ErrorKind::Timing, "captured_fraction: f_v*M*T_r exceeds 1, timing inconsistent");
  return std::min(eta, 1.0);
}

int captured_fraction_percent(const ShutterTiming& timing, int rows) {
  double percent = 100.0 * captured_fraction(timing, rows);
  // Snap away double-rounding noise before the ties-to-even integer round,
  // so rationals like 40.5 land exactly on the half.
  percent = std::round(percent * 1e6) / 1e6;
  return static_cast<int>(std::nearbyint(percent));
}

double pixel_displacement(const SensorGeometry& geometry, double amplitude_um,
                          DisplacementMode mode) {
  geometry.validate();
  if (amplitude_um < 0.0) fail(ErrorKind::Range, "pixel_displacement: amplitude must be >= 0");
  const double fd = geometry.focal_mm / geometry.distance_mm;
  const double factor = mode == DisplacementMode::Lens ? 1.0 + fd : fd;
  return factor * amplitude_um / geometry.pixel_pitch_um();
}

double moving_mean_response(double exposure_s, double step_s, double freq_hz) {
  if (exposure_s <= 0.0 || step_s <= 0.0)
    fail(ErrorKind::Config, "moving_mean_response: exposure and step must be positive");
  const double ratio = exposure_s / step_s;
  const long L = std::lround(ratio);
  if (L < 1 || std::abs(ratio - static_cast<double>(L)) > 1e-6 * ratio + 1e-9)
    fail(ErrorKind::Config, "moving_mean_response: exposure/step is not an integer");
  const double nyquist = 0.5 / step_s;
  if (freq_hz < 0.0 || freq_hz > nyquist + 1e-9)
    fail(ErrorKind::Range, "moving_mean_response: frequency outside [0, 1/(2 step)]");
  const double w = 2.0 * kPi * freq_hz * step_s;
  if (std::abs(std::sin(w / 2.0)) < 1e-15) return 1.0; // DC
  const double mag = std::abs(std::sin(w * static_cast<double>(L) / 2.0)) /
                     (static_cast<double>(L) * std::abs(std::sin(w / 2.0)));
  return std::min(mag, 1.0);
}

CameraPreset camera_from_section(const ConfigSection& section) {
  CameraPreset preset;
  preset.name = section.get_string("name", "");
  preset.geometry.rows = section.require_int("rows");
  preset.geometry.cols = section.require_int("cols");
  preset.geometry.sensor_width_mm = section.require_double("sensor_width_mm");
  preset.geometry.focal_mm = section.require_double("focal_mm");
  preset.geometry.distance_mm = section.require_double("distance_mm");
  preset.geometry.validate();

  const double exposure_s = section.require_double("exposure_us") * 1e-6;
  const double row_readout_s = section.require_double("row_readout_ns") * 1e-9;
  const double fps = section.require_double("fps");
  const int delta_div = section.get_int("delta_div", 4);
  preset.timing = make_timing(exposure_s, row_readout_s, fps, delta_div, preset.geometry.rows);

  const std::string mode = section.get_string("schedule_mode", "sequential");
  if (mode == "sequential") {
    preset.schedule_mode = ScheduleMode::Sequential;
  } else if (mode == "random-coded") {
    preset.schedule_mode = ScheduleMode::RandomCoded;
  } else {
    fail(ErrorKind::Config, "camera preset: unknown schedule_mode '" + mode + "'");
  }
  preset.seed = static_cast<uint64_t>(section.get_int("seed", 0));
  return preset;
}

CameraPreset load_camera_preset(const std::string& path) {
  const KeyValueFile kv = KeyValueFile::load(path);
  return camera_from_section(kv.section("")); // presets are flat key-value files
}

} // namespace rsac

