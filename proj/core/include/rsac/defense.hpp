#pragma once

#include <cstdint>
#include <vector>

#include "rsac/camera.hpp"
#include "rsac/registration.hpp"
#include "rsac/render.hpp"
#include "rsac/scene.hpp"
#include "rsac/signal.hpp"

namespace rsac {

struct SampleRateSim {
  std::vector<double> samples;
  double sample_rate_hz = 0.0; // the simulated readout rate
  double duty = 0.0;           // fraction of each frame period kept
  double upsample_factor = 0.0;
};

/// Re-samples a gap-dropped recovered waveform as if the rolling shutter ran
/// at target_rate_hz: duty = M*f_v/target, upsample by target/base, keep the
/// leading duty fraction of every frame period (aligned to frame starts).
SampleRateSim simulate_sample_rate(const std::vector<double>& recovered, double base_rate_hz,
                                   double target_rate_hz, int rows, double frame_rate_hz);

/// Restores the true time base of a gap-dropped simulation output by
/// inserting zeros for the uncaptured part of every frame period. Tones
/// keep their physical frequency on this time base, which makes visibility
/// comparable across different simulated rates.
std::vector<double> expand_to_real_time(const SampleRateSim& sim, int rows,
                                        double frame_rate_hz);

struct ScheduleComparison {
  bool applicable = false;       // false when the drive motion is silent
  double sequential_peak_db = 0.0;
  double coded_peak_db = 0.0;
  double sequential_dominant_hz = 0.0;
  double coded_dominant_hz = 0.0;
  std::vector<double> sequential_signal;
  std::vector<double> coded_signal;
  double channel_rate_hz = 0.0;
};

/// Renders the same scene/motion under sequential and random-coded
/// schedules, extracts both, and reports tone visibility for each.
ScheduleComparison evaluate_random_coded(const Scene& scene, const PixelMotion& motion,
                                         const ShutterTiming& timing, int frame_count,
                                         double tone_hz, uint64_t seed,
                                         const DemonsParams& params = {});

/// Pixel-domain motion of a locked lens: the residual fraction of the lens
/// travel still projects in lens mode, plus body_scale of the same trace
/// projecting in body mode (the leakage a lock cannot remove).
PixelMotion lens_lock(const LensMotion& motion, double residual, double body_scale,
                      const SensorGeometry& geometry);

struct VcmDesign {
  double coil_resistance_ohm = 0.0; // R
  double drive_voltage_v = 0.0;     // V
  double friction_n = 0.0;          // static friction
  double spring_n_per_m = 0.0;      // lens suspension stiffness
  double displacement_m = 0.0;      // working lens travel
  double mass_kg = 0.0;
  double gravity = 9.81;
  double windings = 0.0;            // coil turns
  double wire_length_m = 0.0;       // active length per turn in the gap
  double flux_density_t = 0.0;      // B in the gap
  double coil_area_m2 = 0.0;        // conductor cross-section
  double resistivity_ohm_m = 0.0;
  double coil_length_m = 0.0;       // total conductor length

  void validate() const;
};

struct VcmSensitivity {
  double sensitivity = 0.0;       // S
  double actuation_force_n = 0.0; // F_e
  bool net_force_positive = true;
};

/// S = (R/V^2) * ((F_e - friction - x*c - m*g)/m)^2 with
/// F_e = Nw * (V*A/(rho*Lc)) * lw * B.
VcmSensitivity vcm_sensitivity(const VcmDesign& design);

struct SpringCompensation {
  bool feasible = false;
  double required_force_n = 0.0;
  VcmDesign windings_design;    // solved via the turn count
  VcmDesign wire_length_design; // solved via the active wire length
  VcmDesign area_design;        // solved via the conductor cross-section
  VcmDesign flux_design;        // solved via the gap flux density
};

/// For a stiffer suspension target, returns the per-variable design changes
/// that keep the sensitivity unchanged (one variable adjusted at a time,
/// everything else held fixed).
SpringCompensation compensate_stiffer_spring(const VcmDesign& design, double new_spring_n_per_m);

} // namespace rsac
