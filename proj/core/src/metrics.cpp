#include "rsac/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "rsac/dsp.hpp"
#include "rsac/error.hpp"
#include "rsac/recovery.hpp"

namespace rsac {

Spectrogram spectrogram(const std::vector<double>& x, double rate, size_t window, size_t hop) {
  if (window < 16) fail(ErrorKind::Input, "spectrogram: window must be >= 16");
  if (hop < 1) fail(ErrorKind::Input, "spectrogram: hop must be >= 1");
  if (x.size() < window) fail(ErrorKind::Input, "spectrogram: signal shorter than the window");
  const dsp::Stft s = dsp::stft(x, window, hop);
  Spectrogram out;
  out.freqs_hz.resize(window / 2 + 1);
  for (size_t k = 0; k < out.freqs_hz.size(); ++k)
    out.freqs_hz[k] = static_cast<double>(k) * rate / static_cast<double>(window);
  out.magnitude.reserve(s.frames.size());
  for (size_t f = 0; f < s.frames.size(); ++f) {
    out.times_s.push_back((static_cast<double>(f) * hop + window / 2.0) / rate);
    std::vector<double> mags(s.frames[f].size());
    for (size_t k = 0; k < mags.size(); ++k) mags[k] = std::abs(s.frames[f][k]);
    out.magnitude.push_back(std::move(mags));
  }
  return out;
}

double snr_db(const std::vector<double>& x, const std::vector<uint8_t>& active_mask) {
  if (x.size() != active_mask.size()) fail(ErrorKind::Mask, "snr_db: mask length mismatch");
  double active_power = 0.0, noise_power = 0.0;
  size_t active_n = 0, noise_n = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    if (active_mask[i]) {
      active_power += x[i] * x[i];
      ++active_n;
    } else {
      noise_power += x[i] * x[i];
      ++noise_n;
    }
  }
  if (active_n == 0 || noise_n == 0)
    fail(ErrorKind::Mask, "snr_db: mask must contain both active and inactive samples");
  active_power /= static_cast<double>(active_n);
  noise_power /= static_cast<double>(noise_n);
  constexpr double eps = 1e-12;
  if (noise_power <= 0.0) noise_power = eps;
  const double signal = std::max(active_power - noise_power, eps);
  return 10.0 * std::log10(signal / noise_power);
}

FreqTrack dominant_freq_track(const std::vector<double>& x, double rate, size_t window,
                              size_t hop, double gate_rel_power) {
  while (window > 16 && x.size() < window) window /= 2;
  const Spectrogram spec = spectrogram(x, rate, window, hop);

  FreqTrack track;
  std::vector<double> peak_power(spec.magnitude.size(), 0.0);
  std::vector<size_t> peak_bin(spec.magnitude.size(), 0);
  double strongest = 0.0;
  for (size_t f = 0; f < spec.magnitude.size(); ++f) {
    double best = 0.0;
    size_t bin = 0;
    for (size_t k = 1; k < spec.magnitude[f].size(); ++k) {
      const double p = spec.magnitude[f][k] * spec.magnitude[f][k];
      if (p > best) {
        best = p;
        bin = k;
      }
    }
    peak_power[f] = best;
    peak_bin[f] = bin;
    strongest = std::max(strongest, best);
  }
  if (strongest <= 0.0) return track;

  std::map<long, size_t> votes;
  for (size_t f = 0; f < spec.magnitude.size(); ++f) {
    if (peak_power[f] < gate_rel_power * strongest) continue;
    const double freq = spec.freqs_hz[peak_bin[f]];
    track.points.emplace_back(spec.times_s[f], freq);
    track.max_hz = std::max(track.max_hz, freq);
    ++votes[static_cast<long>(peak_bin[f])];
  }
  if (track.points.empty()) return track;
  track.empty = false;

  long mode_bin = 0;
  size_t mode_count = 0;
  for (const auto& [bin, count] : votes) {
    if (count > mode_count) {
      mode_count = count;
      mode_bin = bin;
    }
  }
  track.dominant_hz = spec.freqs_hz[static_cast<size_t>(mode_bin)];
  return track;
}

double dominant_frequency(const std::vector<double>& x, double rate) {
  return dsp::dominant_frequency(x, rate);
}

EtaCapMeasurement measure_eta_cap(const std::vector<double>& recovered_tone, double rate,
                                  double true_duration_s) {
  if (rate <= 0.0 || true_duration_s <= 0.0)
    fail(ErrorKind::Input, "measure_eta_cap: rate and duration must be positive");
  PreprocessConfig cfg;
  EtaCapMeasurement result;
  if (recovered_tone.empty()) return result;

  // Reuse the liveness detector on the gap-dropped time base.
  const size_t window = std::max<size_t>(4, static_cast<size_t>(cfg.liveness_window_s * rate));
  const size_t hop = std::max<size_t>(1, window / 2);
  std::vector<double> env;
  for (size_t start = 0; start + window <= recovered_tone.size(); start += hop) {
    double e = 0.0;
    for (size_t i = 0; i < window; ++i)
      e += recovered_tone[start + i] * recovered_tone[start + i];
    env.push_back(e / static_cast<double>(window));
  }
  if (env.empty()) return result;
  double env_max = 0.0;
  for (double v : env) env_max = std::max(env_max, v);
  if (env_max <= 0.0) return result;

  const double threshold = 0.5 * env_max; // tone on/off is a hard transition
  size_t first = env.size(), last = 0;
  for (size_t i = 0; i < env.size(); ++i) {
    if (env[i] > threshold) {
      if (first == env.size()) first = i;
      last = i;
    }
  }
  if (first == env.size()) return result;
  const double active_samples = static_cast<double>((last - first) * hop + window);
  result.found_active = true;
  result.fraction = std::min(active_samples / rate / true_duration_s, 1.0);
  return result;
}

double adversary_advantage(double accuracy, int label_count) {
  if (label_count < 2) fail(ErrorKind::Range, "adversary_advantage: need at least 2 labels");
  if (accuracy < 0.0 || accuracy > 1.0)
    fail(ErrorKind::Range, "adversary_advantage: accuracy must lie in [0, 1]");
  return accuracy - 1.0 / static_cast<double>(label_count);
}

double tone_peak_to_background_db(const std::vector<double>& x, double rate, double tone_hz,
                                  double max_background_hz) {
  if (x.size() < 32) fail(ErrorKind::Input, "tone_peak_to_background_db: signal too short");
  const size_t nfft = dsp::next_pow2(x.size());
  const auto hann = dsp::hann(x.size());
  std::vector<double> windowed(x.size());
  for (size_t i = 0; i < x.size(); ++i) windowed[i] = x[i] * hann[i];
  const auto spec = dsp::rfft(windowed, nfft);

  const double bin_hz = rate / static_cast<double>(nfft);
  const long tone_bin = std::lround(tone_hz / bin_hz);
  const long guard = std::max<long>(3, std::lround(8.0 / bin_hz)); // +-8 Hz or 3 bins
  long max_bin = static_cast<long>(spec.size()) - 1;
  if (max_background_hz > 0.0)
    max_bin = std::min(max_bin, std::lround(max_background_hz / bin_hz));

  double tone_power = 0.0;
  for (long k = tone_bin - 1; k <= tone_bin + 1; ++k)
    if (k >= 1 && k < static_cast<long>(spec.size()))
      tone_power = std::max(tone_power, std::norm(spec[static_cast<size_t>(k)]));

  std::vector<double> background;
  for (long k = 1; k <= max_bin; ++k) {
    if (std::abs(k - tone_bin) <= guard) continue;
    background.push_back(std::norm(spec[static_cast<size_t>(k)]));
  }
  if (background.empty()) fail(ErrorKind::Input, "tone_peak_to_background_db: no background bins");
  std::nth_element(background.begin(), background.begin() + static_cast<long>(background.size() / 2),
                   background.end());
  const double bg = std::max(background[background.size() / 2], 1e-300);
  return 10.0 * std::log10(std::max(tone_power, 1e-300) / bg);
}

double tone_band_snr_db(const std::vector<double>& x, double rate, double tone_hz,
                        double max_band_hz) {
  if (x.size() < 32) fail(ErrorKind::Input, "tone_band_snr_db: signal too short");
  const size_t nfft = dsp::next_pow2(x.size());
  const auto hann = dsp::hann(x.size());
  std::vector<double> windowed(x.size());
  for (size_t i = 0; i < x.size(); ++i) windowed[i] = x[i] * hann[i];
  const auto spec = dsp::rfft(windowed, nfft);

  const double bin_hz = rate / static_cast<double>(nfft);
  const long tone_bin = std::lround(tone_hz / bin_hz);
  const long guard = std::max<long>(3, std::lround(8.0 / bin_hz));
  long max_bin = static_cast<long>(spec.size()) - 1;
  if (max_band_hz > 0.0) max_bin = std::min(max_bin, std::lround(max_band_hz / bin_hz));

  double tone_power = 0.0, rest = 0.0;
  for (long k = 1; k <= max_bin; ++k) {
    const double p = std::norm(spec[static_cast<size_t>(k)]);
    if (std::abs(k - tone_bin) <= guard) {
      tone_power += p;
    } else {
      rest += p;
    }
  }
  return 10.0 * std::log10(std::max(tone_power, 1e-300) / std::max(rest, 1e-300));
}

std::vector<std::pair<std::string, std::string>> MetricsReport::to_key_values() const {
  auto fmt = [](double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return std::string(buf);
  };
  std::vector<std::pair<std::string, std::string>> kv;
  kv.emplace_back("snr_db", fmt(snr_db));
  kv.emplace_back("dominant_freq_hz", fmt(dominant_hz));
  kv.emplace_back("track_points", std::to_string(track.points.size()));
  kv.emplace_back("track_max_hz", fmt(track.max_hz));
  if (eta_cap_measured >= 0.0) kv.emplace_back("eta_cap_measured", fmt(eta_cap_measured));
  if (!notes.empty()) kv.emplace_back("notes", notes);
  return kv;
}

} // namespace rsac
