#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace rsac {

/// Sensor pixel array plus the optics facing the scene. sensor_width is the
/// physical extent of the array along the column axis; pixels are square.
struct SensorGeometry {
  int rows = 0;             // M
  int cols = 0;             // N
  double sensor_width_mm = 0.0;
  double focal_mm = 0.0;
  double distance_mm = 0.0; // camera-scene distance

  void validate() const;
  double pixel_pitch_um() const { return sensor_width_mm * 1000.0 / cols; }
};

/// Exposure/readout clocks. The simulation step is row_readout/delta_div so
/// every row slot starts on the step grid; exposure must be a whole number
/// of steps.
struct ShutterTiming {
  double exposure_s = 0.0;    // T_e
  double row_readout_s = 0.0; // T_r
  double frame_rate_hz = 0.0; // f_v
  int delta_div = 4;          // T_r / step

  double step_s() const { return row_readout_s / delta_div; }
  long exposure_steps() const; // T_e / step, validated integer
  double frame_start_s(int frame) const { return frame / frame_rate_hz; }
  /// Frame starts are snapped to the nearest step when 1/f_v is not a step
  /// multiple (error at most step/2, microseconds against millisecond
  /// signal periods).
  long frame_start_step(int frame) const;

  void validate(int rows) const;
};

ShutterTiming make_timing(double exposure_s, double row_readout_s, double frame_rate_hz,
                          int delta_div, int rows);

enum class ScheduleMode { Sequential, RandomCoded };

/// Per-frame exposure order. permutation(k)[p] is the image row whose
/// exposure occupies readout slot p of frame k.
class ShutterSchedule {
public:
  ShutterSchedule() = default;
  ShutterSchedule(ScheduleMode mode, int rows, uint64_t seed)
      : mode_(mode), rows_(rows), seed_(seed) {}

  ScheduleMode mode() const { return mode_; }
  int rows() const { return rows_; }
  uint64_t seed() const { return seed_; }

  std::vector<int> permutation(int frame) const;
  /// Readout slot of a given row within a frame (inverse permutation).
  std::vector<int> slots_by_row(int frame) const;

private:
  ScheduleMode mode_ = ScheduleMode::Sequential;
  int rows_ = 0;
  uint64_t seed_ = 0;
};

ShutterSchedule make_schedule(const ShutterTiming& timing, int rows, ScheduleMode mode,
                              uint64_t seed);

/// Fraction of wall-clock time covered by some row's readout:
/// f_v * M * T_r. Errors when the timing implies a value above 1.
double captured_fraction(const ShutterTiming& timing, int rows);

/// captured_fraction expressed as a whole percent, ties rounded to even.
int captured_fraction_percent(const ShutterTiming& timing, int rows);

enum class DisplacementMode { Lens, Body };

/// Image-domain displacement for a given physical amplitude (um):
/// lens movement projects with (1 + f/d), body movement with f/d.
double pixel_displacement(const SensorGeometry& geometry, double amplitude_um,
                          DisplacementMode mode);

/// Magnitude response of the length-L mean over the exposure window,
/// L = exposure/step: |H| = |sin(w L / 2)| / (L |sin(w / 2)|), w = 2 pi f step.
double moving_mean_response(double exposure_s, double step_s, double freq_hz);

struct CameraPreset {
  std::string name;
  SensorGeometry geometry;
  ShutterTiming timing;
  ScheduleMode schedule_mode = ScheduleMode::Sequential;
  uint64_t seed = 0;
};

class ConfigSection;

/// Builds a camera from a key-value section (rows, cols, sensor_width_mm,
/// focal_mm, distance_mm, exposure_us, row_readout_ns, fps, delta_div,
/// schedule_mode, seed).
CameraPreset camera_from_section(const ConfigSection& section);

/// Loads a plain-text key-value camera description file.
CameraPreset load_camera_preset(const std::string& path);

} // namespace rsac
