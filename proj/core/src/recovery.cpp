#include "rsac/recovery.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rsac/dsp.hpp"
#include "rsac/error.hpp"

namespace rsac {

RowViewBank make_row_view_bank(const std::vector<double>& row, int max_shift) {
  if (row.size() < 2) fail(ErrorKind::Input, "row view bank: row too short");
  if (max_shift < 0) fail(ErrorKind::Input, "row view bank: max_shift must be >= 0");
  RowViewBank bank;
  bank.reference_row = row;
  bank.max_shift = max_shift;
  const int n = static_cast<int>(row.size());
  bank.views = Grid(n, 2 * max_shift + 1);
  for (int j = -max_shift; j <= max_shift; ++j) {
    for (int c = 0; c < n; ++c) {
      const int src = std::clamp(c - j, 0, n - 1); // content shifted by +j
      bank.views.at(c, j + max_shift) = row[static_cast<size_t>(src)];
    }
  }
  return bank;
}

namespace {

// Dense solve of A x = b by Gaussian elimination with partial pivoting.
// Returns false when the system is numerically singular.
bool solve_dense(std::vector<std::vector<double>> a, std::vector<double> b,
                 std::vector<double>& x) {
  const size_t n = b.size();
  for (size_t col = 0; col < n; ++col) {
    size_t pivot = col;
    for (size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    if (std::abs(a[pivot][col]) < 1e-14) return false;
    std::swap(a[pivot], a[col]);
    std::swap(b[pivot], b[col]);
    for (size_t r = col + 1; r < n; ++r) {
      const double f = a[r][col] / a[col][col];
      if (f == 0.0) continue;
      for (size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  x.assign(n, 0.0);
  for (size_t r = n; r-- > 0;) {
    double acc = b[r];
    for (size_t c = r + 1; c < n; ++c) acc -= a[r][c] * x[c];
    x[r] = acc / a[r][r];
  }
  return true;
}

// Equality-constrained subproblem of the active-set QP: minimize
// 1/2 x'Qx - c'x over the free variables with sum = total, bound variables
// pinned at zero.
bool solve_equality_qp(const std::vector<std::vector<double>>& q,
                       const std::vector<double>& c, const std::vector<char>& free_var,
                       double total, std::vector<double>& x, double& lambda) {
  std::vector<size_t> idx;
  for (size_t i = 0; i < free_var.size(); ++i)
    if (free_var[i]) idx.push_back(i);
  const size_t m = idx.size();
  if (m == 0) return false;
  std::vector<std::vector<double>> kkt(m + 1, std::vector<double>(m + 1, 0.0));
  std::vector<double> rhs(m + 1, 0.0);
  for (size_t a = 0; a < m; ++a) {
    for (size_t b = 0; b < m; ++b) kkt[a][b] = q[idx[a]][idx[b]];
    kkt[a][m] = 1.0;
    kkt[m][a] = 1.0;
    rhs[a] = c[idx[a]];
  }
  rhs[m] = total;
  std::vector<double> sol;
  if (!solve_dense(kkt, rhs, sol)) return false;
  x.assign(free_var.size(), 0.0);
  for (size_t a = 0; a < m; ++a) x[idx[a]] = sol[a];
  lambda = sol[m];
  return true;
}

} // namespace

std::vector<double> solve_row_system(const RowViewBank& bank,
                                     const std::vector<double>& observed_row,
                                     int summands) {
  const int n = static_cast<int>(bank.reference_row.size());
  const int cols = 2 * bank.max_shift + 1;
  if (static_cast<int>(observed_row.size()) != n)
    fail(ErrorKind::Input, "solve_row_system: observed row length mismatch");
  if (summands < 1) fail(ErrorKind::Input, "solve_row_system: summands must be >= 1");

  double row_mean = 0.0;
  for (double v : bank.reference_row) row_mean += v;
  row_mean /= n;
  double row_var = 0.0;
  for (double v : bank.reference_row) row_var += (v - row_mean) * (v - row_mean);
  if (row_var / n < 1e-12)
    fail(ErrorKind::Underdetermined, "solve_row_system: constant reference row");

  const double L = static_cast<double>(summands);

  // Normal-equation matrices for min || views*x/L - observed ||^2.
  std::vector<std::vector<double>> q(static_cast<size_t>(cols),
                                     std::vector<double>(static_cast<size_t>(cols), 0.0));
  std::vector<double> c(static_cast<size_t>(cols), 0.0);
  for (int a = 0; a < cols; ++a) {
    for (int b = a; b < cols; ++b) {
      double dot = 0.0;
      for (int r = 0; r < n; ++r) dot += bank.views.at(r, a) * bank.views.at(r, b);
      q[static_cast<size_t>(a)][static_cast<size_t>(b)] = dot / (L * L);
      q[static_cast<size_t>(b)][static_cast<size_t>(a)] = dot / (L * L);
    }
    double dot = 0.0;
    for (int r = 0; r < n; ++r) dot += bank.views.at(r, a) * observed_row[static_cast<size_t>(r)];
    c[static_cast<size_t>(a)] = dot / L;
  }
  // Tiny ridge keeps the KKT system solvable when shifted views are
  // linearly dependent (e.g. locally affine rows).
  double qmax = 1.0;
  for (int a = 0; a < cols; ++a)
    qmax = std::max(qmax, q[static_cast<size_t>(a)][static_cast<size_t>(a)]);
  for (int a = 0; a < cols; ++a) q[static_cast<size_t>(a)][static_cast<size_t>(a)] += 1e-12 * qmax;

  std::vector<double> x(static_cast<size_t>(cols), L / cols);
  std::vector<char> free_var(static_cast<size_t>(cols), 1);
  double lambda = 0.0;

  const int max_pass = 20 * cols;
  for (int pass = 0; pass < max_pass; ++pass) {
    std::vector<double> target;
    if (!solve_equality_qp(q, c, free_var, L, target, lambda))
      fail(ErrorKind::Underdetermined, "solve_row_system: singular subproblem");

    double alpha = 1.0;
    int blocking = -1;
    for (int i = 0; i < cols; ++i) {
      if (!free_var[static_cast<size_t>(i)]) continue;
      if (target[static_cast<size_t>(i)] < -1e-12) {
        const double step = x[static_cast<size_t>(i)] /
                            (x[static_cast<size_t>(i)] - target[static_cast<size_t>(i)]);
        if (step < alpha) {
          alpha = step;
          blocking = i;
        }
      }
    }
    if (blocking >= 0) {
      for (int i = 0; i < cols; ++i)
        if (free_var[static_cast<size_t>(i)])
          x[static_cast<size_t>(i)] += alpha * (target[static_cast<size_t>(i)] -
                                                x[static_cast<size_t>(i)]);
      x[static_cast<size_t>(blocking)] = 0.0;
      free_var[static_cast<size_t>(blocking)] = 0;
      continue;
    }

    x = target;
    // KKT check on the bound set: multiplier must be nonnegative.
    std::vector<double> grad(static_cast<size_t>(cols), 0.0);
    for (int a = 0; a < cols; ++a) {
      double g = -c[static_cast<size_t>(a)];
      for (int b = 0; b < cols; ++b)
        g += q[static_cast<size_t>(a)][static_cast<size_t>(b)] * x[static_cast<size_t>(b)];
      grad[static_cast<size_t>(a)] = g;
    }
    int release = -1;
    double most_negative = -1e-9;
    for (int i = 0; i < cols; ++i) {
      if (free_var[static_cast<size_t>(i)]) continue;
      const double mu = grad[static_cast<size_t>(i)] + lambda;
      if (mu < most_negative) {
        most_negative = mu;
        release = i;
      }
    }
    if (release < 0) break;
    free_var[static_cast<size_t>(release)] = 1;
  }

  for (auto& v : x) v = std::max(v, 0.0);
  return x;
}

double synthetic_motion(const std::vector<double>& coefficients, int max_shift) {
  if (coefficients.size() != static_cast<size_t>(2 * max_shift + 1))
    fail(ErrorKind::Input, "synthetic_motion: coefficient length mismatch");
  double num = 0.0, den = 0.0;
  for (int j = -max_shift; j <= max_shift; ++j) {
    const double v = coefficients[static_cast<size_t>(j + max_shift)];
    num += static_cast<double>(j) * v;
    den += v;
  }
  if (den <= 0.0) fail(ErrorKind::Singular, "synthetic_motion: coefficients sum to zero");
  return num / den;
}

double exposure_mean_oracle(const std::vector<double>& motion_px, const ShutterTiming& timing,
                            const ShutterSchedule& schedule, int row, int frame) {
  if (row < 0 || row >= schedule.rows())
    fail(ErrorKind::Input, "exposure_mean_oracle: row out of range");
  const std::vector<int> slots = schedule.slots_by_row(frame);
  const long slot = slots[static_cast<size_t>(row)];
  const long n0 = timing.frame_start_step(frame) + slot * timing.delta_div;
  const long L = timing.exposure_steps();
  if (n0 < 0 || n0 + L >= static_cast<long>(motion_px.size()))
    fail(ErrorKind::Coverage, "exposure_mean_oracle: motion does not cover the window");
  double acc = 0.0;
  for (long n = n0; n <= n0 + L; ++n) acc += motion_px[static_cast<size_t>(n)];
  return acc / static_cast<double>(L + 1);
}

namespace {

std::vector<double> spectral_subtract(const std::vector<double>& x, double rate,
                                      const PreprocessConfig& cfg) {
  if (x.size() < cfg.stft_window) return x; // too short to process
  const dsp::Stft analysis = dsp::stft(x, cfg.stft_window, cfg.stft_hop);
  const size_t bins = cfg.stft_window / 2 + 1;

  // Mean magnitude per bin over frames fully inside the noise segment.
  const size_t noise_samples = static_cast<size_t>(cfg.noise_seconds * rate);
  std::vector<double> noise_mag(bins, 0.0);
  size_t noise_frames = 0;
  for (size_t f = 0; f < analysis.frames.size(); ++f) {
    if (f * cfg.stft_hop + cfg.stft_window > std::max(noise_samples, cfg.stft_window)) break;
    for (size_t k = 0; k < bins; ++k) noise_mag[k] += std::abs(analysis.frames[f][k]);
    ++noise_frames;
  }
  if (noise_frames == 0) {
    for (size_t k = 0; k < bins; ++k) noise_mag[k] = std::abs(analysis.frames[0][k]);
    noise_frames = 1;
  }
  for (auto& v : noise_mag) v /= static_cast<double>(noise_frames);

  dsp::Stft cleaned = analysis;
  for (auto& frame : cleaned.frames) {
    for (size_t k = 0; k < bins; ++k) {
      const double mag = std::abs(frame[k]);
      const double kept = std::max(mag - cfg.over_subtraction * noise_mag[k], 0.0);
      frame[k] *= mag > 1e-300 ? kept / mag : 0.0;
    }
  }
  return dsp::istft(cleaned);
}

// Short-time energy envelope, one value per hop.
std::vector<double> energy_envelope(const std::vector<double>& x, size_t window, size_t hop) {
  std::vector<double> env;
  if (x.size() < window) window = std::max<size_t>(1, x.size());
  for (size_t start = 0; start + window <= x.size(); start += hop) {
    double e = 0.0;
    for (size_t i = 0; i < window; ++i) e += x[start + i] * x[start + i];
    env.push_back(e / static_cast<double>(window));
  }
  return env;
}

struct ActiveRegion {
  bool found = false;
  size_t start = 0, end = 0; // sample indices, half-open
};

ActiveRegion detect_active(const std::vector<double>& x, double rate,
                           const PreprocessConfig& cfg) {
  const size_t window = std::max<size_t>(4, static_cast<size_t>(cfg.liveness_window_s * rate));
  const size_t hop = std::max<size_t>(1, window / 2);
  const std::vector<double> env = energy_envelope(x, window, hop);
  if (env.empty()) return {};

  const size_t noise_hops =
      std::min(env.size(), std::max<size_t>(1, static_cast<size_t>(cfg.noise_seconds * rate / hop)));
  std::vector<double> noise(env.begin(), env.begin() + static_cast<long>(noise_hops));
  std::nth_element(noise.begin(), noise.begin() + static_cast<long>(noise.size() / 2), noise.end());
  const double noise_median = noise[noise.size() / 2];

  double env_max = 0.0;
  for (double v : env) env_max = std::max(env_max, v);
  // Absolute floor keeps clean synthetic signals (zero noise) detectable.
  const double threshold = std::max(cfg.liveness_k * noise_median, 1e-6 * env_max);

  std::vector<char> active(env.size(), 0);
  for (size_t i = 0; i < env.size(); ++i) active[i] = env[i] > threshold;

  // Hysteresis as morphological closing: gaps up to twice the reach are
  // bridged without widening the outer boundaries. Closing is monotone in
  // the active set, so a larger threshold never widens the region.
  const int reach = static_cast<int>(cfg.hysteresis_s * rate / hop);
  std::vector<char> grown(active.size(), 0);
  for (size_t i = 0; i < active.size(); ++i) {
    if (!active[i]) continue;
    for (int d = -reach; d <= reach; ++d) {
      const long j = static_cast<long>(i) + d;
      if (j >= 0 && j < static_cast<long>(active.size())) grown[static_cast<size_t>(j)] = 1;
    }
  }
  std::vector<char> dilated(active.size(), 0);
  for (size_t i = 0; i < grown.size(); ++i) {
    bool all = true;
    for (int d = -reach; d <= reach && all; ++d) {
      const long j = static_cast<long>(i) + d;
      if (j >= 0 && j < static_cast<long>(grown.size())) all = grown[static_cast<size_t>(j)];
    }
    dilated[i] = all;
  }

  ActiveRegion region;
  for (size_t i = 0; i < dilated.size(); ++i) {
    if (dilated[i]) {
      if (!region.found) {
        region.found = true;
        region.start = i * hop;
      }
      region.end = std::min(i * hop + window, x.size());
    }
  }
  return region;
}

} // namespace

std::vector<RecoveredSignal> preprocess(const ChannelSet& channels,
                                        const PreprocessConfig& config) {
  if (channels.x.empty() && channels.y.empty())
    fail(ErrorKind::Input, "preprocess: no channels");
  const double rate = 1.0 / channels.sample_step_s;

  std::vector<const std::vector<double>*> sources;
  for (const auto& ch : channels.x) sources.push_back(&ch);
  for (const auto& ch : channels.y) sources.push_back(&ch);

  std::vector<RecoveredSignal> out(sources.size());
  std::vector<double> starts, ends;

  for (size_t i = 0; i < sources.size(); ++i) {
    RecoveredSignal& sig = out[i];
    sig.sample_rate = rate;
    sig.samples = *sources[i];
    sig.frame_starts = channels.frame_starts;
    sig.gap_samples = channels.gap_samples();
    if (config.noise_reduction) {
      sig.samples = spectral_subtract(sig.samples, rate, config);
      sig.stages.push_back("noise-reduction");
    }
  }

  if (config.liveness) {
    for (auto& sig : out) {
      const ActiveRegion region = detect_active(sig.samples, rate, config);
      if (region.found) {
        starts.push_back(static_cast<double>(region.start));
        ends.push_back(static_cast<double>(region.end));
      }
      sig.stages.push_back("liveness");
    }
  }

  size_t trim_start = 0;
  size_t trim_end = out.front().samples.size();
  bool all_silent = false;
  if (config.liveness) {
    if (starts.empty()) {
      all_silent = true;
    } else {
      // Average the detected start/end indices across channels.
      trim_start = static_cast<size_t>(
          std::accumulate(starts.begin(), starts.end(), 0.0) / starts.size());
      trim_end = static_cast<size_t>(
          std::accumulate(ends.begin(), ends.end(), 0.0) / ends.size());
    }
  }

  for (auto& sig : out) {
    if (all_silent) {
      sig.empty_flag = true;
      sig.samples.clear();
      sig.frame_starts.clear();
      continue;
    }
    if (config.trim && config.liveness) {
      const size_t end = std::min(trim_end, sig.samples.size());
      const size_t start = std::min(trim_start, end);
      sig.samples.assign(sig.samples.begin() + static_cast<long>(start),
                         sig.samples.begin() + static_cast<long>(end));
      sig.trim_start = start;
      sig.trim_end = end;
      std::vector<size_t> boundaries;
      for (size_t b : sig.frame_starts)
        if (b >= start && b < end) boundaries.push_back(b - start);
      sig.frame_starts = std::move(boundaries);
      sig.stages.push_back("trim");
    } else {
      sig.trim_end = sig.samples.size();
    }
    if (config.lowpass && rate > 2.0 * config.lowpass_hz) {
      sig.samples = dsp::fir_lowpass(sig.samples, rate, config.lowpass_hz);
      sig.stages.push_back("lowpass");
    }
    if (config.normalize) {
      double peak = 0.0;
      for (double v : sig.samples) peak = std::max(peak, std::abs(v));
      if (peak > 0.0)
        for (double& v : sig.samples) v /= peak;
      sig.stages.push_back("normalize");
    }
  }
  return out;
}

AudioSignal channels_to_audio(const std::vector<RecoveredSignal>& signals, GapPolicy policy,
                              double target_rate_hz, int mix_channel) {
  if (signals.empty()) fail(ErrorKind::Input, "channels_to_audio: no signals");
  if (target_rate_hz <= 0.0) fail(ErrorKind::Input, "channels_to_audio: bad target rate");

  const RecoveredSignal* pick = nullptr;
  if (mix_channel >= 0) {
    if (static_cast<size_t>(mix_channel) >= signals.size())
      fail(ErrorKind::Input, "channels_to_audio: channel index out of range");
    pick = &signals[static_cast<size_t>(mix_channel)];
  }

  const RecoveredSignal& shape = pick ? *pick : signals.front();
  std::vector<double> mixed;
  if (pick) {
    mixed = pick->samples;
  } else {
    mixed.assign(shape.samples.size(), 0.0);
    size_t used = 0;
    for (const auto& sig : signals) {
      if (sig.samples.size() != mixed.size()) continue;
      for (size_t i = 0; i < mixed.size(); ++i) mixed[i] += sig.samples[i];
      ++used;
    }
    if (used == 0) used = 1;
    for (auto& v : mixed) v /= static_cast<double>(used);
  }

  if (policy == GapPolicy::ZeroFill && shape.gap_samples > 0 && !shape.frame_starts.empty()) {
    std::vector<double> filled;
    filled.reserve(mixed.size() + shape.frame_starts.size() * static_cast<size_t>(shape.gap_samples));
    for (size_t b = 0; b < shape.frame_starts.size(); ++b) {
      const size_t begin = shape.frame_starts[b];
      const size_t end = b + 1 < shape.frame_starts.size() ? shape.frame_starts[b + 1]
                                                           : mixed.size();
      filled.insert(filled.end(), mixed.begin() + static_cast<long>(begin),
                    mixed.begin() + static_cast<long>(end));
      if (b + 1 < shape.frame_starts.size())
        filled.insert(filled.end(), static_cast<size_t>(shape.gap_samples), 0.0);
    }
    mixed = std::move(filled);
  }

  AudioSignal audio;
  audio.sample_rate = target_rate_hz;
  audio.samples = dsp::resample(mixed, shape.sample_rate, target_rate_hz);
  return audio;
}

} // namespace rsac
