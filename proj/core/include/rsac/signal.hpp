#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace rsac {

/// Sampled acoustic waveform, unit amplitude in [-1, 1].
struct AudioSignal {
  std::vector<double> samples;
  double sample_rate = 0.0; // Hz

  double duration() const {
    return sample_rate > 0.0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
  }
};

AudioSignal synth_tone(double freq_hz, double duration_s, double rate_hz, double amplitude);

/// Linear instantaneous-frequency sweep f0 -> f1.
AudioSignal synth_chirp(double f0_hz, double f1_hz, double duration_s, double rate_hz,
                        double amplitude = 1.0);

/// Speaker -> structure -> phone -> lens transfer, either a flat gain or a
/// tabulated frequency response, referenced to a sound pressure level.
struct MechanicalPath {
  enum class Mode { FlatGain, ResponseTable };

  Mode mode = Mode::FlatGain;
  double flat_gain_um = 1.0;   // um of lens travel per unit amplitude at spl_ref_db
  std::vector<std::pair<double, double>> response_table; // (freq Hz, gain um/unit)
  double stroke_limit_um = 100.0;
  double spl_ref_db = 60.0;

  void validate() const;
  /// Interpolated gain at a frequency (flat mode ignores the frequency).
  double gain_at(double freq_hz) const;
};

/// 3-DoF lens displacement trace in micrometers, sampled every step_s.
struct LensMotion {
  std::vector<double> x_um, y_um, z_um;
  double step_s = 0.0;

  size_t size() const { return x_um.size(); }
};

/// Lens amplitude A = sqrt(2*k1*k0*E / c) for source energy E (J) and lens
/// suspension spring constant c (N/m). Returned in micrometers.
double lens_amplitude_from_energy(double energy_j, double k0, double k1,
                                  double lens_spring_n_per_m);

/// Gain-scaled amplitude at a sound pressure level, hard-clipped to the
/// path's stroke limit. Micrometers.
double spl_to_amplitude_um(double spl_db, const MechanicalPath& path);

struct AxisMix {
  double x = 1.0, y = 0.0, z = 0.0;
};

/// Full audio -> lens displacement conversion: resample to the motion step,
/// apply the path's frequency response and SPL scaling, split per axis and
/// hard-clip each sample to the stroke limit.
LensMotion audio_to_lens_motion(const AudioSignal& audio, const MechanicalPath& path,
                                double spl_db, const AxisMix& mix, double step_s);

} // namespace rsac
