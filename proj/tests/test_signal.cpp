#include <doctest.h>

#include <cmath>

#include "rsac/dsp.hpp"
#include "rsac/error.hpp"
#include "rsac/metrics.hpp"
#include "rsac/signal.hpp"

using namespace rsac;

namespace {
constexpr double kPi = 3.14159265358979323846;

MechanicalPath flat_path(double gain_um, double spl_ref, double stroke = 100.0) {
  MechanicalPath p;
  p.mode = MechanicalPath::Mode::FlatGain;
  p.flat_gain_um = gain_um;
  p.spl_ref_db = spl_ref;
  p.stroke_limit_um = stroke;
  return p;
}
} // namespace

TEST_SUITE("signal") {

TEST_CASE("synth_tone sample count and spectral peak") {
  const AudioSignal a = synth_tone(200.0, 3.0, 48000.0, 1.0);
  CHECK(a.samples.size() == 144000);
  const double peak = dominant_frequency(a.samples, a.sample_rate);
  CHECK(peak == doctest::Approx(200.0).epsilon(0.01));
}

TEST_CASE("synth_tone zero amplitude is silence") {
  const AudioSignal a = synth_tone(100.0, 0.5, 8000.0, 0.0);
  for (double v : a.samples) CHECK(v == 0.0);
}

TEST_CASE("synth_tone matches the closed form pointwise") {
  const AudioSignal a = synth_tone(100.0, 1.0, 8000.0, 1.0);
  REQUIRE(a.samples.size() == 8000);
  for (size_t k = 0; k < a.samples.size(); ++k) {
    const double expected = std::sin(2.0 * kPi * 100.0 * static_cast<double>(k) / 8000.0);
    CHECK(a.samples[k] == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("synth_tone rejects frequencies at or above Nyquist") {
  CHECK_THROWS_AS((void)synth_tone(4000.0, 1.0, 8000.0, 1.0), Error);
  CHECK_THROWS_AS((void)synth_tone(5000.0, 1.0, 8000.0, 1.0), Error);
}

TEST_CASE("synth_chirp hits the midpoint frequency and rejects degenerate sweeps") {
  CHECK_THROWS_AS((void)synth_chirp(650.0, 650.0, 7.0, 48000.0), Error);
  CHECK_THROWS_AS((void)synth_chirp(650.0, 50.0, 7.0, 48000.0), Error);

  const AudioSignal c = synth_chirp(50.0, 650.0, 7.0, 48000.0);
  // Instantaneous frequency at t: numerical phase derivative around 3.5 s.
  const auto track = dominant_freq_track(c.samples, c.sample_rate, 8192, 2048);
  REQUIRE(!track.empty);
  double at_mid = 0.0, best = 1e9;
  for (const auto& [t, f] : track.points) {
    if (std::abs(t - 3.5) < best) {
      best = std::abs(t - 3.5);
      at_mid = f;
    }
  }
  CHECK(at_mid == doctest::Approx(350.0).epsilon(0.03));
}

TEST_CASE("synth_chirp ridge slope matches the sweep rate") {
  const AudioSignal c = synth_chirp(50.0, 650.0, 7.0, 48000.0);
  const auto track = dominant_freq_track(c.samples, c.sample_rate, 8192, 2048);
  REQUIRE(track.points.size() > 10);
  // Least-squares slope of (t, f).
  double st = 0, sf = 0, stt = 0, stf = 0, n = 0;
  for (const auto& [t, f] : track.points) {
    st += t; sf += f; stt += t * t; stf += t * f; n += 1;
  }
  const double slope = (n * stf - st * sf) / (n * stt - st * st);
  const double bin_hz = 48000.0 / 8192.0;
  CHECK(std::abs(slope - 600.0 / 7.0) < bin_hz);
}

TEST_CASE("lens_amplitude_from_energy closed form and laws") {
  CHECK(lens_amplitude_from_energy(0.0, 0.5, 0.5, 100.0) == 0.0);
  // sqrt law: quadrupling the energy doubles the amplitude.
  const double a1 = lens_amplitude_from_energy(1e-7, 0.3, 0.7, 50.0);
  const double a4 = lens_amplitude_from_energy(4e-7, 0.3, 0.7, 50.0);
  CHECK(a4 == doctest::Approx(2.0 * a1).epsilon(1e-12));
  // direct arithmetic
  const double a = lens_amplitude_from_energy(1e-6, 0.5, 0.5, 100.0);
  CHECK(a == doctest::Approx(70.71067811865476).epsilon(1e-9));
  CHECK_THROWS_AS((void)lens_amplitude_from_energy(1e-6, 0.5, 0.5, 0.0), Error);
}

TEST_CASE("spl_to_amplitude reference point, 20 dB decades and clipping") {
  const MechanicalPath p = flat_path(2.24, 58.0);
  CHECK(spl_to_amplitude_um(58.0, p) == doctest::Approx(2.24));
  CHECK(spl_to_amplitude_um(78.0, p) == doctest::Approx(22.4).epsilon(1e-9));
  // 2.24 * 10^((s-58)/20) = 100  =>  s ~= 90.99
  CHECK(spl_to_amplitude_um(90.9, p) < 100.0);
  CHECK(spl_to_amplitude_um(91.0, p) == doctest::Approx(100.0));
  CHECK(spl_to_amplitude_um(120.0, p) == doctest::Approx(100.0));
}

TEST_CASE("exponential SPL law below saturation") {
  const MechanicalPath p = flat_path(0.5, 60.0);
  for (double spl : {40.0, 50.0, 60.0}) {
    const double lo = spl_to_amplitude_um(spl, p);
    const double hi = spl_to_amplitude_um(spl + 7.0, p);
    CHECK(hi / lo == doctest::Approx(std::pow(10.0, 7.0 / 20.0)).epsilon(1e-9));
  }
}

TEST_CASE("audio_to_lens_motion: zero audio gives zero motion") {
  AudioSignal silence;
  silence.sample_rate = 48000.0;
  silence.samples.assign(4800, 0.0);
  const LensMotion m =
      audio_to_lens_motion(silence, flat_path(1.0, 60.0), 70.0, AxisMix{}, 1e-5);
  for (double v : m.x_um) CHECK(v == 0.0);
  for (double v : m.y_um) CHECK(v == 0.0);
  for (double v : m.z_um) CHECK(v == 0.0);
}

TEST_CASE("audio_to_lens_motion: flat path scales the resampled tone") {
  const AudioSignal tone = synth_tone(300.0, 0.5, 48000.0, 1.0);
  const MechanicalPath p = flat_path(2.0, 60.0);
  const double step = 1e-5; // 100 kHz motion grid
  const LensMotion m = audio_to_lens_motion(tone, p, 66.0, AxisMix{}, step);
  const double expected = spl_to_amplitude_um(66.0, p);
  const std::vector<double> mid(m.x_um.begin() + 500, m.x_um.end() - 500);
  CHECK(dsp::sine_fit_amplitude(mid, 1.0 / step, 300.0) ==
        doctest::Approx(expected).epsilon(0.02));
  // default axis mix: x only
  for (double v : m.y_um) CHECK(v == 0.0);
}

TEST_CASE("audio_to_lens_motion: hard clipping at the stroke limit") {
  const AudioSignal tone = synth_tone(300.0, 0.25, 48000.0, 1.0);
  MechanicalPath p = flat_path(10.0, 60.0, 25.0);
  const LensMotion m = audio_to_lens_motion(tone, p, 80.0, AxisMix{}, 1e-5);
  double peak = 0.0;
  for (double v : m.x_um) peak = std::max(peak, std::abs(v));
  CHECK(peak == doctest::Approx(25.0));
  for (double v : m.x_um) CHECK(std::abs(v) <= 25.0);
}

TEST_CASE("audio_to_lens_motion: response table suppresses out-of-band tones") {
  MechanicalPath p;
  p.mode = MechanicalPath::Mode::ResponseTable;
  p.response_table = {{0.0, 1.0}, {590.0, 1.0}, {610.0, 0.0}, {24000.0, 0.0}};
  p.spl_ref_db = 60.0;
  p.stroke_limit_um = 100.0;

  const AudioSignal hi = synth_tone(700.0, 0.5, 48000.0, 1.0);
  const AudioSignal lo = synth_tone(300.0, 0.5, 48000.0, 1.0);
  const LensMotion mh = audio_to_lens_motion(hi, p, 60.0, AxisMix{}, 1e-5);
  const LensMotion ml = audio_to_lens_motion(lo, p, 60.0, AxisMix{}, 1e-5);
  // Compare the sustained portions; a hard tone onset rings through the
  // band edge no matter how the filter is realized.
  const size_t guard = 5000; // 50 ms at the motion rate
  double peak_hi = 0.0, peak_lo = 0.0;
  for (size_t i = guard; i + guard < mh.x_um.size(); ++i)
    peak_hi = std::max(peak_hi, std::abs(mh.x_um[i]));
  for (size_t i = guard; i + guard < ml.x_um.size(); ++i)
    peak_lo = std::max(peak_lo, std::abs(ml.x_um[i]));
  CHECK(peak_hi < 0.01 * peak_lo);
}

TEST_CASE("audio_to_lens_motion: resampling keeps the dominant frequency") {
  const AudioSignal tone = synth_tone(440.0, 0.5, 48000.0, 0.5);
  const LensMotion m = audio_to_lens_motion(tone, flat_path(1.0, 60.0), 60.0, AxisMix{}, 5e-6);
  const double f = dominant_frequency(m.x_um, 1.0 / m.step_s);
  const double bin = (1.0 / m.step_s) / static_cast<double>(dsp::next_pow2(m.x_um.size()) * 2);
  CHECK(std::abs(f - 440.0) <= bin + 1e-9);
}

TEST_CASE("audio_to_lens_motion rejects empty audio") {
  AudioSignal empty;
  empty.sample_rate = 48000.0;
  CHECK_THROWS_AS((void)audio_to_lens_motion(empty, flat_path(1.0, 60.0), 60.0, AxisMix{}, 1e-5),
                  Error);
}

TEST_CASE("mechanical path validation") {
  MechanicalPath p;
  p.mode = MechanicalPath::Mode::ResponseTable;
  p.response_table = {{100.0, 1.0}, {50.0, 1.0}};
  CHECK_THROWS_AS(p.validate(), Error);
  p.response_table = {{50.0, 1.0}, {100.0, -1.0}};
  CHECK_THROWS_AS(p.validate(), Error);
  p.response_table = {{50.0, 1.0}, {100.0, 0.5}};
  CHECK_NOTHROW(p.validate());
  CHECK(p.gain_at(75.0) == doctest::Approx(0.75));
  CHECK(p.gain_at(10.0) == doctest::Approx(1.0));
  CHECK(p.gain_at(500.0) == doctest::Approx(0.5));
}

} // TEST_SUITE
