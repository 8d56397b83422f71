#include "rsac/defense.hpp"

#include <algorithm>
#include <cmath>

#include "rsac/dsp.hpp"
#include "rsac/error.hpp"
#include "rsac/metrics.hpp"
#include "rsac/recovery.hpp"

namespace rsac {

SampleRateSim simulate_sample_rate(const std::vector<double>& recovered, double base_rate_hz,
                                   double target_rate_hz, int rows, double frame_rate_hz) {
  if (base_rate_hz <= 0.0 || target_rate_hz <= 0.0 || frame_rate_hz <= 0.0 || rows < 1)
    fail(ErrorKind::Input, "simulate_sample_rate: invalid parameters");
  const double duty = static_cast<double>(rows) * frame_rate_hz / target_rate_hz;
  if (duty > 1.0 + 1e-12)
    fail(ErrorKind::InvalidTarget,
         "simulate_sample_rate: target rate below rows*fps implies duty above 1");
  const double upsample = static_cast<double>(rows) * frame_rate_hz / (base_rate_hz * duty);

  SampleRateSim sim;
  sim.sample_rate_hz = target_rate_hz;
  sim.duty = duty;
  sim.upsample_factor = upsample;
  if (recovered.empty()) return sim;

  // Per frame: the source holds `rows` samples at the base rate; the faster
  // shutter reads `rows` samples at 1/target spacing from the start of the
  // same window ("on" run of the duty-cycle square wave, frame aligned).
  const size_t frames = recovered.size() / static_cast<size_t>(rows);
  const double step = base_rate_hz / target_rate_hz; // input samples per output sample
  std::vector<double> positions;
  positions.reserve(static_cast<size_t>(rows));
  sim.samples.reserve(frames * static_cast<size_t>(rows));
  for (size_t k = 0; k < frames; ++k) {
    const double origin = static_cast<double>(k) * rows;
    positions.clear();
    for (int p = 0; p < rows; ++p)
      positions.push_back(origin + static_cast<double>(p) * step);
    const std::vector<double> slice =
        dsp::resample_at(recovered, positions, std::min(1.0, 1.0 / step));
    sim.samples.insert(sim.samples.end(), slice.begin(), slice.end());
  }
  return sim;
}

std::vector<double> expand_to_real_time(const SampleRateSim& sim, int rows,
                                        double frame_rate_hz) {
  if (rows < 1 || frame_rate_hz <= 0.0 || sim.sample_rate_hz <= 0.0)
    fail(ErrorKind::Input, "expand_to_real_time: invalid parameters");
  const long per_frame = std::lround(sim.sample_rate_hz / frame_rate_hz);
  const long gap = per_frame - rows;
  if (gap < 0) fail(ErrorKind::Input, "expand_to_real_time: rows exceed the frame period");
  std::vector<double> out;
  const size_t frames = sim.samples.size() / static_cast<size_t>(rows);
  out.reserve(frames * static_cast<size_t>(per_frame));
  for (size_t k = 0; k < frames; ++k) {
    const auto begin = sim.samples.begin() + static_cast<long>(k) * rows;
    out.insert(out.end(), begin, begin + rows);
    out.insert(out.end(), static_cast<size_t>(gap), 0.0);
  }
  return out;
}

ScheduleComparison evaluate_random_coded(const Scene& scene, const PixelMotion& motion,
                                         const ShutterTiming& timing, int frame_count,
                                         double tone_hz, uint64_t seed,
                                         const DemonsParams& params) {
  ScheduleComparison report;
  const int rows = scene.frame_rows();
  const ShutterSchedule sequential = make_schedule(timing, rows, ScheduleMode::Sequential, 0);
  const ShutterSchedule coded = make_schedule(timing, rows, ScheduleMode::RandomCoded, seed);

  double peak = 0.0;
  for (double v : motion.x_px) peak = std::max(peak, std::abs(v));
  for (double v : motion.y_px) peak = std::max(peak, std::abs(v));

  const int groups = default_channel_groups(rows, scene.frame_cols());
  auto extract_mean_x = [&](const ShutterSchedule& schedule) {
    const FrameSequence frames = render_video(scene, motion, schedule, timing, frame_count);
    const ChannelSet channels = channels_from_video(frames, groups, params);
    std::vector<double> mixed(channels.length(), 0.0);
    for (const auto& ch : channels.x)
      for (size_t i = 0; i < mixed.size(); ++i) mixed[i] += ch[i];
    for (auto& v : mixed) v /= static_cast<double>(channels.x.size());
    return mixed;
  };

  report.channel_rate_hz = 1.0 / timing.row_readout_s;
  report.sequential_signal = extract_mean_x(sequential);
  report.coded_signal = extract_mean_x(coded);

  if (peak < 1e-9) {
    report.applicable = false; // silent drive, peak ratios are meaningless
    return report;
  }
  report.applicable = true;
  report.sequential_peak_db =
      tone_peak_to_background_db(report.sequential_signal, report.channel_rate_hz, tone_hz);
  report.coded_peak_db =
      tone_peak_to_background_db(report.coded_signal, report.channel_rate_hz, tone_hz);
  report.sequential_dominant_hz =
      dominant_frequency(report.sequential_signal, report.channel_rate_hz);
  report.coded_dominant_hz = dominant_frequency(report.coded_signal, report.channel_rate_hz);
  return report;
}

PixelMotion lens_lock(const LensMotion& motion, double residual, double body_scale,
                      const SensorGeometry& geometry) {
  if (residual < 0.0 || residual > 1.0)
    fail(ErrorKind::Range, "lens_lock: residual must lie in [0, 1]");
  if (body_scale < 0.0) fail(ErrorKind::Range, "lens_lock: body_scale must be >= 0");
  geometry.validate();
  if (motion.step_s <= 0.0) fail(ErrorKind::Input, "lens_lock: motion step must be positive");

  const double pitch = geometry.pixel_pitch_um();
  const double fd = geometry.focal_mm / geometry.distance_mm;
  const double lens_factor = (1.0 + fd) / pitch;
  const double body_factor = fd / pitch;
  const double distance_um = geometry.distance_mm * 1000.0;

  PixelMotion out;
  out.step_s = motion.step_s;
  out.x_px.resize(motion.size());
  out.y_px.resize(motion.size());
  out.scale.resize(motion.size());
  for (size_t i = 0; i < motion.size(); ++i) {
    out.x_px[i] = lens_factor * residual * motion.x_um[i] +
                  body_factor * body_scale * motion.x_um[i];
    out.y_px[i] = lens_factor * residual * motion.y_um[i] +
                  body_factor * body_scale * motion.y_um[i];
    const double z = residual * motion.z_um[i];
    out.scale[i] = distance_um / (distance_um - z);
  }
  return out;
}

void VcmDesign::validate() const {
  if (coil_resistance_ohm <= 0.0 || drive_voltage_v <= 0.0 || spring_n_per_m <= 0.0 ||
      mass_kg <= 0.0 || gravity <= 0.0 || windings <= 0.0 || wire_length_m <= 0.0 ||
      flux_density_t <= 0.0 || coil_area_m2 <= 0.0)
    fail(ErrorKind::Config, "vcm: physical quantities must be positive");
  if (friction_n < 0.0 || displacement_m < 0.0)
    fail(ErrorKind::Config, "vcm: friction and displacement must be >= 0");
  if (resistivity_ohm_m <= 0.0 || coil_length_m <= 0.0)
    fail(ErrorKind::Singular, "vcm: resistivity * coil length must be positive");
}

VcmSensitivity vcm_sensitivity(const VcmDesign& d) {
  d.validate();
  VcmSensitivity out;
  const double current = d.drive_voltage_v * d.coil_area_m2 / (d.resistivity_ohm_m * d.coil_length_m);
  out.actuation_force_n = d.windings * current * d.wire_length_m * d.flux_density_t;
  const double net = out.actuation_force_n - d.friction_n - d.displacement_m * d.spring_n_per_m -
                     d.mass_kg * d.gravity;
  out.net_force_positive = net > 0.0;
  const double accel = net / d.mass_kg;
  out.sensitivity = d.coil_resistance_ohm / (d.drive_voltage_v * d.drive_voltage_v) * accel * accel;
  return out;
}

SpringCompensation compensate_stiffer_spring(const VcmDesign& design, double new_spring_n_per_m) {
  design.validate();
  if (new_spring_n_per_m <= 0.0)
    fail(ErrorKind::Range, "compensate_stiffer_spring: target stiffness must be positive");

  SpringCompensation out;
  const VcmSensitivity base = vcm_sensitivity(design);
  // Same sensitivity needs the same net force, so the actuation force must
  // absorb the extra spring load at the working displacement.
  const double required =
      base.actuation_force_n +
      design.displacement_m * (new_spring_n_per_m - design.spring_n_per_m);
  out.required_force_n = required;
  if (required <= 0.0 || base.actuation_force_n <= 0.0) {
    out.feasible = false;
    return out;
  }
  const double ratio = required / base.actuation_force_n;

  out.feasible = true;
  out.windings_design = design;
  out.windings_design.spring_n_per_m = new_spring_n_per_m;
  out.windings_design.windings *= ratio;

  out.wire_length_design = design;
  out.wire_length_design.spring_n_per_m = new_spring_n_per_m;
  out.wire_length_design.wire_length_m *= ratio;

  out.area_design = design;
  out.area_design.spring_n_per_m = new_spring_n_per_m;
  out.area_design.coil_area_m2 *= ratio;

  out.flux_design = design;
  out.flux_design.spring_n_per_m = new_spring_n_per_m;
  out.flux_design.flux_density_t *= ratio;
  return out;
}

} // namespace rsac
