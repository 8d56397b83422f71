#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "rsac/camera.hpp"
#include "rsac/dsp.hpp"
#include "rsac/error.hpp"
#include "rsac/metrics.hpp"
#include "rsac/recovery.hpp"
#include "rsac/rng.hpp"

using namespace rsac;

namespace {

constexpr double kPi = 3.14159265358979323846;

std::vector<double> textured_row(int n, uint64_t seed) {
  SplitMix64 rng(seed);
  std::vector<double> row(static_cast<size_t>(n));
  for (auto& v : row) v = rng.next_double();
  // Light smoothing so neighboring shifts differ but are not white noise.
  std::vector<double> out(row.size());
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    int used = 0;
    for (int d = -1; d <= 1; ++d) {
      const int j = i + d;
      if (j < 0 || j >= n) continue;
      acc += row[static_cast<size_t>(j)];
      ++used;
    }
    out[static_cast<size_t>(i)] = acc / used;
  }
  return out;
}

std::vector<double> observed_from_shifts(const RowViewBank& bank,
                                         const std::vector<int>& shifts) {
  const int n = static_cast<int>(bank.reference_row.size());
  std::vector<double> obs(static_cast<size_t>(n), 0.0);
  for (int s : shifts)
    for (int c = 0; c < n; ++c)
      obs[static_cast<size_t>(c)] += bank.views.at(c, s + bank.max_shift);
  for (auto& v : obs) v /= static_cast<double>(shifts.size());
  return obs;
}

// Synthetic gap-dropped channel for a given timing: samples of signal(t) at
// the instants the shutter actually reads rows.
std::vector<double> glued_tone(const ShutterTiming& t, int rows, double duration_s,
                               double tone_hz, double tone_start_s, double tone_end_s) {
  const int frames = static_cast<int>(duration_s * t.frame_rate_hz);
  std::vector<double> out;
  out.reserve(static_cast<size_t>(frames) * static_cast<size_t>(rows));
  for (int k = 0; k < frames; ++k) {
    for (int i = 0; i < rows; ++i) {
      const double time = t.frame_start_s(k) + i * t.row_readout_s;
      const bool active = time >= tone_start_s && time < tone_end_s;
      out.push_back(active ? std::sin(2.0 * kPi * tone_hz * time) : 0.0);
    }
  }
  return out;
}

ChannelSet one_channel_set(std::vector<double> samples, double step_s, int frame_rows,
                           double fps) {
  ChannelSet set;
  set.groups = 1;
  set.sample_step_s = step_s;
  set.frame_rate_hz = fps;
  set.frame_rows = frame_rows;
  for (size_t s = 0; s < samples.size(); s += static_cast<size_t>(frame_rows))
    set.frame_starts.push_back(s);
  set.x.push_back(std::move(samples));
  set.y.push_back(std::vector<double>(set.x.front().size(), 0.0));
  return set;
}

} // namespace

TEST_SUITE("recovery") {

TEST_CASE("row view bank columns are edge-clamped shifted copies") {
  const std::vector<double> row{0.1, 0.2, 0.3, 0.4, 0.5};
  const RowViewBank bank = make_row_view_bank(row, 2);
  CHECK(bank.views.rows() == 5);
  CHECK(bank.views.cols() == 5);
  // shift +1: content moves right, leading edge clamps.
  CHECK(bank.views.at(0, 3) == doctest::Approx(0.1));
  CHECK(bank.views.at(1, 3) == doctest::Approx(0.1));
  CHECK(bank.views.at(4, 3) == doctest::Approx(0.4));
  // shift 0 column equals the row.
  for (int c = 0; c < 5; ++c) CHECK(bank.views.at(c, 2) == doctest::Approx(row[static_cast<size_t>(c)]));
}

TEST_CASE("solver: motionless exposure puts all mass at shift zero") {
  const auto row = textured_row(48, 11);
  const RowViewBank bank = make_row_view_bank(row, 6);
  const auto x = solve_row_system(bank, row, 5);
  REQUIRE(x.size() == 13);
  CHECK(x[6] == doctest::Approx(5.0).epsilon(1e-6));
  for (size_t j = 0; j < x.size(); ++j)
    if (j != 6) CHECK(x[j] < 1e-6);
}

TEST_CASE("solver: recovers a small composition and matches brute force") {
  const auto row = textured_row(48, 23);
  const RowViewBank bank = make_row_view_bank(row, 4);
  const std::vector<int> truth{1, 1, 2};
  const auto obs = observed_from_shifts(bank, truth);
  const auto x = solve_row_system(bank, obs, 3);

  CHECK(synthetic_motion(x, 4) == doctest::Approx(4.0 / 3.0).epsilon(1e-7));
  CHECK(x[1 + 4] == doctest::Approx(2.0).epsilon(1e-5));
  CHECK(x[2 + 4] == doctest::Approx(1.0).epsilon(1e-5));

  // Brute force over all multisets of 3 shifts in [-4, 4]: the true one is
  // the unique residual minimizer.
  double best = 1e300, second = 1e300;
  std::vector<int> arg;
  for (int a = -4; a <= 4; ++a) {
    for (int b = a; b <= 4; ++b) {
      for (int c = b; c <= 4; ++c) {
        const auto candidate = observed_from_shifts(bank, {a, b, c});
        double ssd = 0.0;
        for (size_t i = 0; i < obs.size(); ++i) {
          const double d = candidate[i] - obs[i];
          ssd += d * d;
        }
        if (ssd < best) {
          second = best;
          best = ssd;
          arg = {a, b, c};
        } else {
          second = std::min(second, ssd);
        }
      }
    }
  }
  CHECK(arg == std::vector<int>{1, 1, 2});
  CHECK(best < 1e-20);
  CHECK(second > 1e-9);
}

TEST_CASE("solver: order of appearance is irrecoverable but the mean survives") {
  const auto row = textured_row(32, 5);
  const RowViewBank bank = make_row_view_bank(row, 3);
  // Two exposures with the same multiset of shifts in different order give
  // the same observation, hence the same coefficients.
  const auto obs_a = observed_from_shifts(bank, {2, -1, 1});
  const auto obs_b = observed_from_shifts(bank, {1, 2, -1});
  for (size_t i = 0; i < obs_a.size(); ++i) CHECK(obs_a[i] == doctest::Approx(obs_b[i]));
  const auto xa = solve_row_system(bank, obs_a, 3);
  const auto xb = solve_row_system(bank, obs_b, 3);
  CHECK(synthetic_motion(xa, 3) == doctest::Approx(synthetic_motion(xb, 3)).epsilon(1e-9));
  CHECK(synthetic_motion(xa, 3) == doctest::Approx(2.0 / 3.0).epsilon(1e-7));
}

TEST_CASE("solver rejects a constant reference row") {
  const std::vector<double> flat(32, 0.5);
  const RowViewBank bank = make_row_view_bank(flat, 3);
  CHECK_THROWS_AS((void)solve_row_system(bank, flat, 3), Error);
}

TEST_CASE("synthetic_motion values and failure") {
  std::vector<double> x(9, 0.0);
  x[7] = 4.0; // all mass at shift +3 (max_shift 4)
  CHECK(synthetic_motion(x, 4) == doctest::Approx(3.0));
  std::vector<double> mix(9, 0.0);
  mix[5] = 2.0; // +1 twice
  mix[6] = 1.0; // +2 once
  CHECK(synthetic_motion(mix, 4) == doctest::Approx(4.0 / 3.0));
  const std::vector<double> zero(9, 0.0);
  CHECK_THROWS_AS((void)synthetic_motion(zero, 4), Error);
}

TEST_CASE("exposure_mean_oracle: closed forms and brute force") {
  const ShutterTiming t = make_timing(1e-3, 20e-6, 40.0, 4, 64);
  const ShutterSchedule s = make_schedule(t, 64, ScheduleMode::Sequential, 0);
  const size_t steps = static_cast<size_t>(t.frame_start_step(2) + 64 * t.delta_div +
                                           t.exposure_steps() + 8);

  const std::vector<double> zeros(steps, 0.0);
  CHECK(exposure_mean_oracle(zeros, t, s, 10, 1) == 0.0);

  // Linear ramp: the window mean is the midpoint value.
  std::vector<double> ramp(steps);
  for (size_t i = 0; i < steps; ++i) ramp[i] = static_cast<double>(i) * t.step_s();
  const long n0 = t.frame_start_step(1) + 12 * t.delta_div;
  const long L = t.exposure_steps();
  const double mid = (static_cast<double>(n0) + static_cast<double>(n0 + L)) / 2.0 * t.step_s();
  CHECK(exposure_mean_oracle(ramp, t, s, 12, 1) == doctest::Approx(mid).epsilon(1e-12));

  // Random motion against a direct sum.
  SplitMix64 rng(3);
  std::vector<double> noise(steps);
  for (auto& v : noise) v = rng.next_double() - 0.5;
  double direct = 0.0;
  for (long n = n0; n <= n0 + L; ++n) direct += noise[static_cast<size_t>(n)];
  direct /= static_cast<double>(L + 1);
  CHECK(exposure_mean_oracle(noise, t, s, 12, 1) == doctest::Approx(direct).epsilon(1e-12));

  // Short trace: coverage error.
  const std::vector<double> tiny(8, 0.0);
  CHECK_THROWS_AS((void)exposure_mean_oracle(tiny, t, s, 12, 1), Error);
}

TEST_CASE("solver/oracle equivalence on randomized desk-scale instances") {
  SplitMix64 rng(2024);
  for (int instance = 0; instance < 25; ++instance) {
    const int n = 24 + static_cast<int>(rng.next_below(41));   // row length <= 64
    const int J = 4 + static_cast<int>(rng.next_below(5));     // max shift <= 8
    const int L = 1 + static_cast<int>(rng.next_below(16));    // summand count <= 16
    const auto row = textured_row(n, 1000 + static_cast<uint64_t>(instance));
    const RowViewBank bank = make_row_view_bank(row, J);
    std::vector<int> shifts(static_cast<size_t>(L));
    double mean = 0.0;
    for (auto& s : shifts) {
      s = static_cast<int>(rng.next_below(static_cast<uint32_t>(2 * J + 1))) - J;
      mean += s;
    }
    mean /= static_cast<double>(L);
    const auto obs = observed_from_shifts(bank, shifts);
    const auto x = solve_row_system(bank, obs, L);
    CHECK(synthetic_motion(x, J) == doctest::Approx(mean).epsilon(1e-6));
  }
}

TEST_CASE("preprocess: pure silence is flagged empty") {
  ChannelSet set = one_channel_set(std::vector<double>(20000, 0.0), 1.0 / 34000.0, 1000, 30.0);
  const auto out = preprocess(set);
  REQUIRE(!out.empty());
  for (const auto& sig : out) CHECK(sig.empty_flag);
}

TEST_CASE("preprocess: tone burst is trimmed to about its length") {
  const double rate = 34000.0;
  const double total = 2.0;
  std::vector<double> burst(static_cast<size_t>(total * rate), 0.0);
  for (size_t i = 0; i < burst.size(); ++i) {
    const double time = static_cast<double>(i) / rate;
    if (time >= 0.5 && time < 1.5) burst[i] = std::sin(2.0 * kPi * 200.0 * time);
  }
  ChannelSet set = one_channel_set(std::move(burst), 1.0 / rate, 1000, 30.0);
  PreprocessConfig cfg;
  cfg.noise_reduction = false;
  cfg.lowpass = false;
  const auto out = preprocess(set, cfg);
  REQUIRE(!out.front().empty_flag);
  const double trimmed = static_cast<double>(out.front().samples.size()) / rate;
  CHECK(trimmed > 0.9);
  CHECK(trimmed < 1.1);
}

TEST_CASE("preprocess: spectral subtraction drops the noise floor, keeps the tone") {
  const double rate = 34000.0;
  SplitMix64 rng(404);
  std::vector<double> x(static_cast<size_t>(2.0 * rate));
  // 0.3 s of hiss, then tone + hiss at -20 dB noise power.
  const double sigma = 0.0707;
  for (size_t i = 0; i < x.size(); ++i) {
    const double time = static_cast<double>(i) / rate;
    x[i] = sigma * rng.next_gaussian();
    if (time >= 0.3) x[i] += std::sin(2.0 * kPi * 500.0 * time);
  }
  ChannelSet set = one_channel_set(x, 1.0 / rate, 1000, 30.0);
  PreprocessConfig cfg;
  cfg.liveness = false;
  cfg.trim = false;
  cfg.lowpass = false;
  cfg.normalize = false;
  const auto out = preprocess(set, cfg);
  const auto& cleaned = out.front().samples;
  REQUIRE(cleaned.size() == x.size());

  // Compare spectra on the tone section.
  const size_t start = static_cast<size_t>(0.5 * rate);
  const size_t nfft = 32768;
  auto spec_before = dsp::rfft(std::vector<double>(x.begin() + start, x.end()), nfft);
  auto spec_after = dsp::rfft(std::vector<double>(cleaned.begin() + start, cleaned.end()), nfft);
  const double bin_hz = rate / static_cast<double>(nfft);
  const long tone_bin = std::lround(500.0 / bin_hz);

  double tone_before = 0.0, tone_after = 0.0;
  for (long k = tone_bin - 2; k <= tone_bin + 2; ++k) {
    tone_before += std::norm(spec_before[static_cast<size_t>(k)]);
    tone_after += std::norm(spec_after[static_cast<size_t>(k)]);
  }
  double floor_before = 0.0, floor_after = 0.0;
  size_t used = 0;
  for (long k = tone_bin + 200; k < tone_bin + 3000; ++k) {
    floor_before += std::norm(spec_before[static_cast<size_t>(k)]);
    floor_after += std::norm(spec_after[static_cast<size_t>(k)]);
    ++used;
  }
  const double tone_change_db = 10.0 * std::log10(tone_after / tone_before);
  const double floor_drop_db = 10.0 * std::log10(floor_before / floor_after);
  CHECK(std::abs(tone_change_db) < 1.0);
  CHECK(floor_drop_db >= 10.0);
}

TEST_CASE("preprocess: normalization is idempotent") {
  const double rate = 34000.0;
  std::vector<double> x(8192);
  for (size_t i = 0; i < x.size(); ++i)
    x[i] = 0.3 * std::sin(2.0 * kPi * 250.0 * static_cast<double>(i) / rate);
  PreprocessConfig cfg;
  cfg.noise_reduction = false;
  cfg.liveness = false;
  cfg.trim = false;
  cfg.lowpass = false;
  const auto once = preprocess(one_channel_set(x, 1.0 / rate, 1024, 30.0), cfg);
  const auto twice = preprocess(one_channel_set(once.front().samples, 1.0 / rate, 1024, 30.0), cfg);
  REQUIRE(once.front().samples.size() == twice.front().samples.size());
  for (size_t i = 0; i < once.front().samples.size(); ++i)
    CHECK(twice.front().samples[i] == doctest::Approx(once.front().samples[i]).epsilon(1e-12));
}

TEST_CASE("preprocess: raising the liveness threshold never widens the region") {
  const double rate = 34000.0;
  SplitMix64 rng(17);
  std::vector<double> x(static_cast<size_t>(2.0 * rate));
  for (size_t i = 0; i < x.size(); ++i) {
    const double time = static_cast<double>(i) / rate;
    x[i] = 0.003 * rng.next_gaussian();
    if (time >= 0.6 && time < 1.2)
      x[i] += std::sin(2.0 * kPi * 300.0 * time) * (0.2 + 0.8 * std::abs(std::sin(kPi * time)));
  }
  size_t prev_len = x.size() + 1;
  for (double k : {2.0, 3.0, 5.0, 8.0}) {
    PreprocessConfig cfg;
    cfg.noise_reduction = false;
    cfg.lowpass = false;
    cfg.normalize = false;
    cfg.liveness_k = k;
    const auto out = preprocess(one_channel_set(x, 1.0 / rate, 1000, 30.0), cfg);
    REQUIRE(!out.front().empty_flag);
    const size_t len = out.front().samples.size();
    CHECK(len <= prev_len);
    prev_len = len;
  }
}

TEST_CASE("channels_to_audio: drop policy at the native rate passes through") {
  const double rate = 34000.0;
  RecoveredSignal sig;
  sig.sample_rate = rate;
  sig.samples = {0.1, -0.4, 0.9, 0.2, -0.7};
  sig.frame_starts = {0};
  const AudioSignal audio = channels_to_audio({sig}, GapPolicy::Drop, rate);
  CHECK(audio.samples == sig.samples);
  CHECK(audio.sample_rate == rate);
}

TEST_CASE("channels_to_audio: zero-fill inserts the timing gap per boundary") {
  const double rate = 34000.0;
  const int rows = 1080;
  RecoveredSignal sig;
  sig.sample_rate = rate;
  sig.samples.assign(static_cast<size_t>(3 * rows), 0.5);
  sig.frame_starts = {0, 1080, 2160};
  sig.gap_samples = 53; // round(34000/30) - 1080
  const AudioSignal audio = channels_to_audio({sig}, GapPolicy::ZeroFill, rate);
  CHECK(audio.samples.size() == 3 * 1080 + 2 * 53);
  CHECK(audio.samples[1080] == 0.0);
  CHECK(audio.samples[1080 + 53] == 0.5);
}

TEST_CASE("channels_to_audio: coherent glued tone keeps its frequency under drop") {
  // 40 fps, 250 rows at 20 us readout: gap = 20 ms, so any multiple of
  // 50 Hz glues coherently.
  const ShutterTiming t = make_timing(1e-3, 20e-6, 40.0, 4, 250);
  const auto glued = glued_tone(t, 250, 0.5, 200.0, 0.0, 10.0);
  RecoveredSignal sig;
  sig.sample_rate = 1.0 / t.row_readout_s;
  sig.samples = glued;
  sig.frame_starts = {0};
  const AudioSignal audio = channels_to_audio({sig}, GapPolicy::Drop, sig.sample_rate);
  const double f = dominant_frequency(audio.samples, audio.sample_rate);
  const double bin =
      audio.sample_rate / static_cast<double>(dsp::next_pow2(audio.samples.size()) * 2);
  CHECK(std::abs(f - 200.0) <= bin + 1e-9);
}

} // TEST_SUITE
