#include "rsac/signal.hpp"

#include <algorithm>
#include <cmath>

#include "rsac/dsp.hpp"
#include "rsac/error.hpp"

namespace rsac {

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;
} // namespace

AudioSignal synth_tone(double freq_hz, double duration_s, double rate_hz, double amplitude) {
  if (rate_hz <= 0.0 || duration_s < 0.0)
    fail(ErrorKind::Range, "synth_tone: rate and duration must be positive");
  if (freq_hz <= 0.0 || freq_hz >= rate_hz / 2.0)
    fail(ErrorKind::Range, "synth_tone: frequency must lie in (0, rate/2)");
  AudioSignal out;
  out.sample_rate = rate_hz;
  const size_t n = static_cast<size_t>(std::llround(duration_s * rate_hz));
  out.samples.resize(n);
  for (size_t i = 0; i < n; ++i)
    out.samples[i] = amplitude * std::sin(2.0 * kPi * freq_hz * static_cast<double>(i) / rate_hz);
  return out;
}

AudioSignal synth_chirp(double f0_hz, double f1_hz, double duration_s, double rate_hz,
                        double amplitude) {
  if (rate_hz <= 0.0 || duration_s <= 0.0)
    fail(ErrorKind::Range, "synth_chirp: rate and duration must be positive");
  if (!(0.0 < f0_hz && f0_hz < f1_hz && f1_hz < rate_hz / 2.0))
    fail(ErrorKind::Range, "synth_chirp: need 0 < f0 < f1 < rate/2");
  AudioSignal out;
  out.sample_rate = rate_hz;
  const size_t n = static_cast<size_t>(std::llround(duration_s * rate_hz));
  out.samples.resize(n);
  const double k = (f1_hz - f0_hz) / duration_s; // Hz per second
  for (size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / rate_hz;
    // phase = 2*pi * (f0*t + k*t^2/2) so that f_inst(t) = f0 + k*t
    out.samples[i] = amplitude * std::sin(2.0 * kPi * (f0_hz * t + 0.5 * k * t * t));
  }
  return out;
}

void MechanicalPath::validate() const {
  if (stroke_limit_um <= 0.0)
    fail(ErrorKind::Config, "mechanical path: stroke limit must be positive");
  if (spl_ref_db != spl_ref_db)
    fail(ErrorKind::Config, "mechanical path: spl_ref must be finite");
  if (mode == Mode::FlatGain) {
    if (flat_gain_um < 0.0) fail(ErrorKind::Config, "mechanical path: negative flat gain");
    return;
  }
  if (response_table.empty())
    fail(ErrorKind::Config, "mechanical path: empty response table");
  double prev = -1.0;
  for (const auto& [f, g] : response_table) {
    if (f <= prev)
      fail(ErrorKind::Config, "mechanical path: table frequencies must be strictly increasing");
    if (g < 0.0) fail(ErrorKind::Config, "mechanical path: negative table gain");
    prev = f;
  }
}

double MechanicalPath::gain_at(double freq_hz) const {
  if (mode == Mode::FlatGain) return flat_gain_um;
  if (response_table.empty()) return 0.0;
  if (freq_hz <= response_table.front().first) return response_table.front().second;
  if (freq_hz >= response_table.back().first) return response_table.back().second;
  for (size_t i = 1; i < response_table.size(); ++i) {
    if (freq_hz <= response_table[i].first) {
      const auto& [f0, g0] = response_table[i - 1];
      const auto& [f1, g1] = response_table[i];
      const double t = (freq_hz - f0) / (f1 - f0);
      return g0 + t * (g1 - g0);
    }
  }
  return response_table.back().second;
}

double lens_amplitude_from_energy(double energy_j, double k0, double k1,
                                  double lens_spring_n_per_m) {
  if (energy_j < 0.0 || k0 < 0.0 || k1 < 0.0)
    fail(ErrorKind::Range, "lens_amplitude_from_energy: inputs must be nonnegative");
  if (lens_spring_n_per_m <= 0.0)
    fail(ErrorKind::Singular, "lens_amplitude_from_energy: spring constant must be positive");
  const double meters = std::sqrt(2.0 * k1 * k0 * energy_j / lens_spring_n_per_m);
  return meters * 1e6;
}

double spl_to_amplitude_um(double spl_db, const MechanicalPath& path) {
  path.validate();
  const double base = path.mode == MechanicalPath::Mode::FlatGain
                          ? path.flat_gain_um
                          : [&] {
                              double g = 0.0;
                              for (const auto& [f, v] : path.response_table) {
                                (void)f;
                                g = std::max(g, v);
                              }
                              return g;
                            }();
  const double a = base * std::pow(10.0, (spl_db - path.spl_ref_db) / 20.0);
  return std::min(a, path.stroke_limit_um);
}

LensMotion audio_to_lens_motion(const AudioSignal& audio, const MechanicalPath& path,
                                double spl_db, const AxisMix& mix, double step_s) {
  path.validate();
  if (audio.samples.empty()) fail(ErrorKind::Input, "audio_to_lens_motion: empty audio");
  if (audio.sample_rate <= 0.0) fail(ErrorKind::Input, "audio_to_lens_motion: bad sample rate");
  if (step_s <= 0.0) fail(ErrorKind::Input, "audio_to_lens_motion: step must be positive");

  const double motion_rate = 1.0 / step_s;
  std::vector<double> shaped = audio.samples;

  if (path.mode == MechanicalPath::Mode::ResponseTable) {
    // Linear-phase FIR sampled from the gain table (frequency-sampling
    // design, Blackman window). A raw per-bin gain multiply would act as a
    // brick wall and ring hard at signal onsets.
    const size_t taps = 2049;
    const size_t design_n = 8192;
    std::vector<std::complex<double>> response(design_n / 2 + 1);
    for (size_t k = 0; k < response.size(); ++k) {
      const double f = static_cast<double>(k) * audio.sample_rate / static_cast<double>(design_n);
      response[k] = path.gain_at(f);
    }
    const std::vector<double> zero_phase = dsp::irfft(response, design_n);
    std::vector<double> taps_h(taps);
    const long half = static_cast<long>(taps / 2);
    for (long i = -half; i <= half; ++i) {
      const size_t src = static_cast<size_t>((i + static_cast<long>(design_n)) %
                                             static_cast<long>(design_n));
      const double u = static_cast<double>(i + half) / static_cast<double>(taps - 1);
      const double wnd =
          0.42 - 0.5 * std::cos(2.0 * kPi * u) + 0.08 * std::cos(4.0 * kPi * u);
      taps_h[static_cast<size_t>(i + half)] = zero_phase[src] * wnd;
    }
    // Linear convolution via zero-padded FFT, then drop the group delay.
    const size_t conv_n = dsp::next_pow2(shaped.size() + taps);
    auto xs = dsp::rfft(shaped, conv_n);
    const auto hs = dsp::rfft(taps_h, conv_n);
    for (size_t k = 0; k < xs.size(); ++k) xs[k] *= hs[k];
    const std::vector<double> full = dsp::irfft(xs, conv_n);
    std::vector<double> filtered(shaped.size());
    for (size_t i = 0; i < shaped.size(); ++i) filtered[i] = full[i + static_cast<size_t>(half)];
    shaped = std::move(filtered);
  } else {
    for (auto& v : shaped) v *= path.flat_gain_um;
  }

  std::vector<double> motion = dsp::resample(shaped, audio.sample_rate, motion_rate);

  const double spl_scale = std::pow(10.0, (spl_db - path.spl_ref_db) / 20.0);
  const double limit = path.stroke_limit_um;

  LensMotion out;
  out.step_s = step_s;
  out.x_um.resize(motion.size());
  out.y_um.resize(motion.size());
  out.z_um.resize(motion.size());
  for (size_t i = 0; i < motion.size(); ++i) {
    const double v = motion[i] * spl_scale;
    out.x_um[i] = std::clamp(v * mix.x, -limit, limit);
    out.y_um[i] = std::clamp(v * mix.y, -limit, limit);
    out.z_um[i] = std::clamp(v * mix.z, -limit, limit);
  }
  return out;
}

} // namespace rsac
