#include <doctest.h>

#include <cmath>

#include "rsac/camera.hpp"
#include "rsac/error.hpp"
#include "rsac/registration.hpp"
#include "rsac/rng.hpp"
#include "rsac/scene.hpp"

using namespace rsac;

namespace {

Grid textured(int rows, int cols, uint64_t seed) {
  const Scene scene = generate_scene({rows, cols, 8, seed, 2.5, 0.0, 0.05, 0.95});
  return scene.reference_frame();
}

// Crop of the same underlying texture with its content moved +shift_x px.
Grid shifted_crop(uint64_t seed, int rows, int cols, int shift_x) {
  const Scene scene = generate_scene({rows, cols, 8, seed, 2.5, 0.0, 0.05, 0.95});
  Grid out(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      out.at(r, c) = scene.intensity.at(r + scene.margin, c + scene.margin - shift_x);
  return out;
}

// Independent integer-shift oracle: SSD over candidate shifts.
int best_integer_shift(const Grid& ref, const Grid& mov, int max_shift) {
  double best = 1e300;
  int arg = 0;
  for (int s = -max_shift; s <= max_shift; ++s) {
    double ssd = 0.0;
    for (int r = 0; r < ref.rows(); ++r) {
      for (int c = max_shift; c < ref.cols() - max_shift; ++c) {
        const double d = mov.at(r, c) - ref.at(r, c - s);
        ssd += d * d;
      }
    }
    if (ssd < best) {
      best = ssd;
      arg = s;
    }
  }
  return arg;
}

} // namespace

TEST_SUITE("registration") {

TEST_CASE("identity registration returns a (near) zero field") {
  const Grid img = textured(96, 96, 31);
  const DisplacementField f = register_demons(img, img);
  double worst = 0.0;
  for (double v : f.dx.raw()) worst = std::max(worst, std::abs(v));
  for (double v : f.dy.raw()) worst = std::max(worst, std::abs(v));
  CHECK(worst < 0.05);
}

TEST_CASE("uniform +3 px shift is recovered") {
  const int rows = 96, cols = 96;
  const Scene scene = generate_scene({rows, cols, 8, 57, 2.5, 0.0, 0.05, 0.95});
  const Grid ref = scene.reference_frame();
  const Grid mov = shifted_crop(57, rows, cols, 3);
  CHECK(best_integer_shift(ref, mov, 8) == 3); // independent oracle agrees

  const DisplacementField f = register_demons(ref, mov);
  CHECK(f.dx.mean() > 2.7);
  CHECK(f.dx.mean() < 3.3);
  CHECK(std::abs(f.dy.mean()) < 0.3);
}

TEST_CASE("translation fidelity across seeds and shifts") {
  for (uint64_t seed : {101ULL, 102ULL, 103ULL, 104ULL, 105ULL, 106ULL}) {
    const Grid ref = textured(96, 96, seed);
    for (int shift : {1, 2, 5}) {
      const Grid mov = shifted_crop(seed, 96, 96, shift);
      const DisplacementField f = register_demons(ref, mov);
      CHECK(std::abs(f.dx.mean() - shift) < 0.3);
    }
  }
}

TEST_CASE("degenerate and mismatched inputs are rejected") {
  Grid flat(64, 64, 0.5);
  CHECK_THROWS_AS((void)register_demons(flat, flat), Error);
  const Grid a = textured(64, 64, 9);
  const Grid b = textured(64, 48, 9);
  CHECK_THROWS_AS((void)register_demons(a, b), Error);
}

TEST_CASE("channel group count rule") {
  CHECK(default_channel_groups(1080, 1920) == 4); // 2*1920/1080 rounds to 4
  CHECK(default_channel_groups(250, 250) == 2);
  CHECK(default_channel_groups(1080, 64) == 1);   // clamped up to 1
  CHECK(default_channel_groups(2, 1920) == 1920); // clamped down to N
}

TEST_CASE("channels_from_field: constants, direct means, partition") {
  Grid constant(16, 12, 0.7);
  const auto flat = channels_from_field(constant, 3);
  REQUIRE(flat.size() == 3);
  for (const auto& ch : flat)
    for (double v : ch) CHECK(v == doctest::Approx(0.7));

  // Column-index field against a brute-force group mean.
  Grid index_field(5, 10);
  for (int r = 0; r < 5; ++r)
    for (int c = 0; c < 10; ++c) index_field.at(r, c) = c;
  const auto channels = channels_from_field(index_field, 3);
  // Rounded bounds for N=10, g=3: [0,3), [3,7), [7,10).
  CHECK(channels[0][0] == doctest::Approx((0 + 1 + 2) / 3.0));
  CHECK(channels[1][0] == doctest::Approx((3 + 4 + 5 + 6) / 4.0));
  CHECK(channels[2][0] == doctest::Approx((7 + 8 + 9) / 3.0));

  // Size-weighted channel mean equals the global mean, exactly.
  const double weighted = (3 * channels[0][0] + 4 * channels[1][0] + 3 * channels[2][0]) / 10.0;
  CHECK(weighted == doctest::Approx(index_field.mean()).epsilon(1e-15));

  CHECK_THROWS_AS((void)channels_from_field(index_field, 0), Error);
  CHECK_THROWS_AS((void)channels_from_field(index_field, 11), Error);
}

TEST_CASE("channels_from_video: identical frames, lengths, boundaries") {
  const Scene scene = generate_scene({48, 48, 8, 77, 2.5, 0.0, 0.05, 0.95});
  const ShutterTiming t = make_timing(1e-3, 20e-6, 40.0, 4, 48);
  FrameSequence clip;
  clip.timing = t;
  clip.frames.assign(2, scene.reference_frame());
  const ChannelSet set = channels_from_video(clip, 2);

  CHECK(set.groups == 2);
  REQUIRE(set.x.size() == 2);
  REQUIRE(set.y.size() == 2);
  CHECK(set.length() == 2 * 48);
  CHECK(set.frame_starts == std::vector<size_t>{0, 48});
  CHECK(set.sample_step_s == doctest::Approx(20e-6));
  for (const auto& ch : set.x)
    for (double v : ch) CHECK(std::abs(v) < 0.05);
}

TEST_CASE("gap sample count for a 30 fps, 34 kHz readout, 1080-row clip") {
  ChannelSet set;
  set.sample_step_s = 1.0 / 34000.0;
  set.frame_rate_hz = 30.0;
  set.frame_rows = 1080;
  CHECK(set.gap_samples() == 53);
}

} // TEST_SUITE
