#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "rsac/camera.hpp"
#include "rsac/grid.hpp"
#include "rsac/registration.hpp"
#include "rsac/signal.hpp"

namespace rsac {

/// All integer-shifted views of one reference row, shifts -J..+J
/// (edge-clamped). Column j+J holds the view shifted by j pixels.
struct RowViewBank {
  std::vector<double> reference_row;
  int max_shift = 0; // J
  Grid views;        // N x (2J+1)
};

RowViewBank make_row_view_bank(const std::vector<double>& row, int max_shift);

/// Solves observed = views * x / summands for x >= 0 with sum(x) = summands
/// (nonnegative least squares with an equality constraint, active-set QP).
/// Desk-scale only; meant as a correctness oracle, not a production path.
std::vector<double> solve_row_system(const RowViewBank& bank,
                                     const std::vector<double>& observed_row,
                                     int summands);

/// Shift-weighted average sum(j * x_j) / sum(x_j), i.e. the only motion
/// statistic the exposure sum leaves identifiable.
double synthetic_motion(const std::vector<double>& coefficients, int max_shift);

/// Ground-truth mean of the motion signal over one row's exposure window
/// (both endpoints included, matching the renderer).
double exposure_mean_oracle(const std::vector<double>& motion_px, const ShutterTiming& timing,
                            const ShutterSchedule& schedule, int row, int frame);

struct PreprocessConfig {
  bool noise_reduction = true;
  bool liveness = true;
  bool trim = true;
  bool lowpass = true;
  bool normalize = true;

  double noise_seconds = 0.25;   // noise-profile segment at the signal start
  double over_subtraction = 1.5; // spectral subtraction factor
  size_t stft_window = 1024;
  size_t stft_hop = 256;

  double liveness_k = 3.0;       // threshold over the noise-segment median energy
  double liveness_window_s = 0.010;
  double hysteresis_s = 0.050;

  double lowpass_hz = 4000.0;    // skipped when rate <= 2*cutoff
};

struct RecoveredSignal {
  std::vector<double> samples;
  double sample_rate = 0.0;
  std::vector<size_t> frame_starts; // boundaries after trimming
  int gap_samples = 0;              // zeros per boundary for the zero-fill policy
  bool empty_flag = false;          // liveness found no active region
  size_t trim_start = 0, trim_end = 0;
  std::vector<std::string> stages;
};

/// The channel clean-up chain, stages in order: spectral-subtraction noise
/// reduction, amplitude liveness detection (start/end averaged across
/// channels), trimming, 4 kHz low-pass, max-abs normalization.
std::vector<RecoveredSignal> preprocess(const ChannelSet& channels,
                                        const PreprocessConfig& config = {});

enum class GapPolicy { Drop, ZeroFill };

/// Mixes channels (mean, or one selected channel), applies the frame-gap
/// policy and resamples to the target rate.
AudioSignal channels_to_audio(const std::vector<RecoveredSignal>& signals, GapPolicy policy,
                              double target_rate_hz, int mix_channel = -1);

} // namespace rsac
