#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace rsac {

struct Spectrogram {
  std::vector<std::vector<double>> magnitude; // [frame][bin]
  std::vector<double> times_s;
  std::vector<double> freqs_hz;
};

/// Hann-windowed STFT magnitudes.
Spectrogram spectrogram(const std::vector<double>& x, double rate, size_t window, size_t hop);

/// Simplified speech-to-noise estimate: noise power from inactive samples,
/// 10*log10(max(P_active - P_noise, eps)/P_noise) with eps = 1e-12.
double snr_db(const std::vector<double>& x, const std::vector<uint8_t>& active_mask);

struct FreqTrack {
  std::vector<std::pair<double, double>> points; // (time s, Hz), gated frames only
  double dominant_hz = 0.0;                      // mode of the track
  bool empty = true;
  double max_hz = 0.0;
};

/// Per-STFT-frame argmax-bin frequency. Frames whose peak power falls below
/// gate_rel_power times the strongest frame are treated as silent and left
/// out of the track.
FreqTrack dominant_freq_track(const std::vector<double>& x, double rate,
                              size_t window = 4096, size_t hop = 1024,
                              double gate_rel_power = 1e-3);

/// Largest non-DC bin of the whole-signal (zero-padded) spectrum.
double dominant_frequency(const std::vector<double>& x, double rate);

struct EtaCapMeasurement {
  double fraction = 0.0;
  bool found_active = false;
};

/// Measured captured fraction: active length of a recovered tone (on the
/// gap-dropped time base) divided by the tone's true duration.
EtaCapMeasurement measure_eta_cap(const std::vector<double>& recovered_tone, double rate,
                                  double true_duration_s);

/// Empirical advantage over random guessing: accuracy - 1/labels.
double adversary_advantage(double accuracy, int label_count);

/// Power at the tone's bin (+-1 bin) over the median off-tone bin power,
/// in dB. A guard band around the tone is excluded from the background.
/// max_background_hz > 0 restricts the background to that band (use the
/// original signal band when the signal was upsampled).
double tone_peak_to_background_db(const std::vector<double>& x, double rate, double tone_hz,
                                  double max_background_hz = 0.0);

/// Tone-band power over the summed off-tone power within the band, in dB.
/// Unlike the median-based ratio this also registers discrete sideband
/// lines, which is what gap-chopping produces on clean signals.
double tone_band_snr_db(const std::vector<double>& x, double rate, double tone_hz,
                        double max_band_hz = 0.0);

struct MetricsReport {
  double snr_db = 0.0;
  double dominant_hz = 0.0;
  FreqTrack track;
  double eta_cap_measured = -1.0; // negative = not measured
  std::string notes;

  std::vector<std::pair<std::string, std::string>> to_key_values() const;
};

} // namespace rsac
