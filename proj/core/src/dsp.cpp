#include "rsac/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include <fftw3.h>

#include "rsac/error.hpp"

namespace rsac::dsp {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

// FFTW plan creation is not thread safe; execution on distinct buffers is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

} // namespace

size_t next_pow2(size_t n) {
  size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

std::vector<double> hann(size_t n) {
  std::vector<double> w(n);
  for (size_t i = 0; i < n; ++i)
    w[i] = 0.5 - 0.5 * std::cos(2.0 * kPi * static_cast<double>(i) / static_cast<double>(n));
  return w;
}

std::vector<std::complex<double>> fft(const std::vector<std::complex<double>>& x) {
  std::vector<std::complex<double>> out(x.size());
  if (x.empty()) return out;
  std::vector<std::complex<double>> in(x);
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan = fftw_plan_dft_1d(static_cast<int>(x.size()),
                            reinterpret_cast<fftw_complex*>(in.data()),
                            reinterpret_cast<fftw_complex*>(out.data()),
                            FFTW_FORWARD, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  return out;
}

std::vector<std::complex<double>> ifft(const std::vector<std::complex<double>>& x) {
  std::vector<std::complex<double>> out(x.size());
  if (x.empty()) return out;
  std::vector<std::complex<double>> in(x);
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan = fftw_plan_dft_1d(static_cast<int>(x.size()),
                            reinterpret_cast<fftw_complex*>(in.data()),
                            reinterpret_cast<fftw_complex*>(out.data()),
                            FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  const double scale = 1.0 / static_cast<double>(x.size());
  for (auto& v : out) v *= scale;
  return out;
}

std::vector<std::complex<double>> rfft(const std::vector<double>& x, size_t nfft) {
  if (nfft == 0) fail(ErrorKind::Input, "rfft: nfft must be positive");
  std::vector<double> in(nfft, 0.0);
  const size_t n = std::min(nfft, x.size());
  std::copy(x.begin(), x.begin() + static_cast<long>(n), in.begin());
  std::vector<std::complex<double>> out(nfft / 2 + 1);
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(nfft), in.data(),
                                reinterpret_cast<fftw_complex*>(out.data()),
                                FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  return out;
}

std::vector<double> irfft(const std::vector<std::complex<double>>& spectrum, size_t nfft) {
  if (spectrum.size() != nfft / 2 + 1)
    fail(ErrorKind::Input, "irfft: spectrum size does not match nfft");
  std::vector<std::complex<double>> in(spectrum);
  std::vector<double> out(nfft);
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan = fftw_plan_dft_c2r_1d(static_cast<int>(nfft),
                                reinterpret_cast<fftw_complex*>(in.data()),
                                out.data(), FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  const double scale = 1.0 / static_cast<double>(nfft);
  for (auto& v : out) v *= scale;
  return out;
}

Stft stft(const std::vector<double>& x, size_t window, size_t hop) {
  if (window < 2 || hop < 1) fail(ErrorKind::Input, "stft: window/hop too small");
  if (x.size() < window) fail(ErrorKind::Input, "stft: signal shorter than one window");
  Stft result;
  result.window = window;
  result.hop = hop;
  result.signal_length = x.size();
  const std::vector<double> w = hann(window);
  std::vector<double> buf(window);
  for (size_t start = 0; start + window <= x.size(); start += hop) {
    for (size_t i = 0; i < window; ++i) buf[i] = x[start + i] * w[i];
    result.frames.push_back(rfft(buf, window));
  }
  return result;
}

std::vector<double> istft(const Stft& s) {
  std::vector<double> num(s.signal_length, 0.0);
  std::vector<double> den(s.signal_length, 0.0);
  const std::vector<double> w = hann(s.window);
  size_t start = 0;
  for (const auto& frame : s.frames) {
    const std::vector<double> block = irfft(frame, s.window);
    for (size_t i = 0; i < s.window && start + i < num.size(); ++i) {
      num[start + i] += block[i] * w[i];
      den[start + i] += w[i] * w[i];
    }
    start += s.hop;
  }
  for (size_t i = 0; i < num.size(); ++i)
    num[i] = den[i] > 1e-12 ? num[i] / den[i] : 0.0;
  return num;
}

namespace {

// Blackman-windowed sinc interpolation kernel. half_width is in input
// samples; cutoff in cycles/sample (<= 0.5).
double sinc_kernel(double t, double cutoff, double half_width) {
  const double a = std::abs(t);
  if (a >= half_width) return 0.0;
  double s;
  if (a < 1e-12) {
    s = 2.0 * cutoff;
  } else {
    s = std::sin(2.0 * kPi * cutoff * t) / (kPi * t);
  }
  const double u = (t / half_width + 1.0) * 0.5; // 0..1 across the support
  const double wnd = 0.42 - 0.5 * std::cos(2.0 * kPi * u) + 0.08 * std::cos(4.0 * kPi * u);
  return s * wnd;
}

} // namespace

std::vector<double> resample_at(const std::vector<double>& x,
                                const std::vector<double>& positions,
                                double cutoff_ratio) {
  if (cutoff_ratio <= 0.0 || cutoff_ratio > 1.0)
    fail(ErrorKind::Input, "resample_at: cutoff_ratio out of (0,1]");
  const double cutoff = 0.5 * cutoff_ratio;
  const double base_half = 24.0;
  const double half_width = base_half / cutoff_ratio;
  const long n = static_cast<long>(x.size());
  std::vector<double> out(positions.size(), 0.0);
  for (size_t i = 0; i < positions.size(); ++i) {
    const double p = positions[i];
    const double frac = p - std::round(p);
    if (cutoff_ratio == 1.0 && std::abs(frac) < 1e-12) {
      const long k = static_cast<long>(std::llround(p));
      out[i] = (k >= 0 && k < n) ? x[static_cast<size_t>(k)] : 0.0;
      continue;
    }
    const long lo = static_cast<long>(std::ceil(p - half_width));
    const long hi = static_cast<long>(std::floor(p + half_width));
    double acc = 0.0;
    // Signal is treated as zero outside its ends.
    for (long k = std::max<long>(lo, 0); k <= std::min<long>(hi, n - 1); ++k) {
      const double w = sinc_kernel(static_cast<double>(k) - p, cutoff, half_width);
      acc += w * x[static_cast<size_t>(k)];
    }
    out[i] = acc;
  }
  return out;
}

std::vector<double> resample(const std::vector<double>& x, double src_rate, double dst_rate) {
  if (src_rate <= 0.0 || dst_rate <= 0.0)
    fail(ErrorKind::Input, "resample: rates must be positive");
  if (x.empty()) return {};
  if (src_rate == dst_rate) return x;
  const double ratio = dst_rate / src_rate;
  const size_t out_len = static_cast<size_t>(std::llround(static_cast<double>(x.size()) * ratio));
  std::vector<double> positions(out_len);
  for (size_t i = 0; i < out_len; ++i)
    positions[i] = static_cast<double>(i) / ratio;
  const double cutoff_ratio = std::min(1.0, ratio);
  return resample_at(x, positions, cutoff_ratio);
}

std::vector<double> fir_lowpass(const std::vector<double>& x, double rate,
                                double cutoff_hz, size_t taps) {
  if (rate <= 0.0 || cutoff_hz <= 0.0) fail(ErrorKind::Input, "fir_lowpass: bad rates");
  if (cutoff_hz * 2.0 >= rate) return x; // already band-limited
  if (taps % 2 == 0) ++taps;
  const double fc = cutoff_hz / rate; // cycles per sample
  const long half = static_cast<long>(taps / 2);
  std::vector<double> h(taps);
  double sum = 0.0;
  for (long i = -half; i <= half; ++i) {
    double v;
    if (i == 0) {
      v = 2.0 * fc;
    } else {
      v = std::sin(2.0 * kPi * fc * static_cast<double>(i)) / (kPi * static_cast<double>(i));
    }
    const double u = (static_cast<double>(i + half)) / static_cast<double>(taps - 1);
    const double wnd = 0.42 - 0.5 * std::cos(2.0 * kPi * u) + 0.08 * std::cos(4.0 * kPi * u);
    h[static_cast<size_t>(i + half)] = v * wnd;
    sum += v * wnd;
  }
  for (auto& v : h) v /= sum; // unit DC gain
  const long n = static_cast<long>(x.size());
  std::vector<double> out(x.size(), 0.0);
  for (long i = 0; i < n; ++i) {
    double acc = 0.0;
    const long lo = std::max<long>(0, i - half);
    const long hi = std::min<long>(n - 1, i + half);
    for (long k = lo; k <= hi; ++k)
      acc += x[static_cast<size_t>(k)] * h[static_cast<size_t>(k - i + half)];
    out[static_cast<size_t>(i)] = acc;
  }
  return out;
}

double dominant_frequency(const std::vector<double>& x, double rate) {
  if (x.size() < 2 || rate <= 0.0) return 0.0;
  const size_t nfft = next_pow2(std::max<size_t>(x.size(), 16)) * 2;
  const auto spec = rfft(x, nfft);
  size_t best = 1;
  double best_mag = 0.0;
  for (size_t k = 1; k < spec.size(); ++k) {
    const double m = std::abs(spec[k]);
    if (m > best_mag) {
      best_mag = m;
      best = k;
    }
  }
  return static_cast<double>(best) * rate / static_cast<double>(nfft);
}

double sine_fit_amplitude(const std::vector<double>& x, double rate, double freq_hz) {
  if (x.size() < 4 || rate <= 0.0 || freq_hz <= 0.0) return 0.0;
  // Least squares on {sin, cos, 1}.
  double ss = 0, sc = 0, cc = 0, s1 = 0, c1 = 0, n = 0;
  double sy = 0, cy = 0, y1 = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double t = static_cast<double>(i) / rate;
    const double s = std::sin(2.0 * kPi * freq_hz * t);
    const double c = std::cos(2.0 * kPi * freq_hz * t);
    ss += s * s; sc += s * c; cc += c * c;
    s1 += s; c1 += c; n += 1.0;
    sy += s * x[i]; cy += c * x[i]; y1 += x[i];
  }
  // Solve the 3x3 normal equations by Cramer's rule.
  const double a[3][3] = {{ss, sc, s1}, {sc, cc, c1}, {s1, c1, n}};
  const double b[3] = {sy, cy, y1};
  const double det =
      a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
      a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
      a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
  if (std::abs(det) < 1e-12) return 0.0;
  const double det0 =
      b[0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
      a[0][1] * (b[1] * a[2][2] - a[1][2] * b[2]) +
      a[0][2] * (b[1] * a[2][1] - a[1][1] * b[2]);
  const double det1 =
      a[0][0] * (b[1] * a[2][2] - a[1][2] * b[2]) -
      b[0] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
      a[0][2] * (a[1][0] * b[2] - b[1] * a[2][0]);
  const double sa = det0 / det;
  const double ca = det1 / det;
  return std::sqrt(sa * sa + ca * ca);
}

} // namespace rsac::dsp
