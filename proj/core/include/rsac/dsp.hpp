#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace rsac::dsp {

size_t next_pow2(size_t n);

/// Periodic Hann window of length n.
std::vector<double> hann(size_t n);

/// Forward complex DFT (backed by FFTW, deterministic plans).
std::vector<std::complex<double>> fft(const std::vector<std::complex<double>>& x);
std::vector<std::complex<double>> ifft(const std::vector<std::complex<double>>& x);

/// Real-input DFT. Input is zero-padded / truncated to nfft; returns the
/// nfft/2+1 non-redundant bins.
std::vector<std::complex<double>> rfft(const std::vector<double>& x, size_t nfft);

/// Inverse of rfft, normalized; returns nfft real samples.
std::vector<double> irfft(const std::vector<std::complex<double>>& spectrum, size_t nfft);

struct Stft {
  size_t window = 0;
  size_t hop = 0;
  size_t signal_length = 0;
  std::vector<std::vector<std::complex<double>>> frames; // each window/2+1 bins
};

Stft stft(const std::vector<double>& x, size_t window, size_t hop);

/// Weighted overlap-add inverse of stft (Hann analysis & synthesis windows).
std::vector<double> istft(const Stft& s);

/// Band-limited resampling (windowed-sinc interpolation) with an anti-alias
/// low-pass at min(src, dst)/2. Equal rates return the input unchanged.
std::vector<double> resample(const std::vector<double>& x, double src_rate, double dst_rate);

/// Evaluates the band-limited interpolant of x at fractional sample
/// positions. cutoff_ratio in (0, 1] scales the kernel cutoff relative to
/// the input Nyquist (use < 1 when the evaluation grid is coarser).
std::vector<double> resample_at(const std::vector<double>& x,
                                const std::vector<double>& positions,
                                double cutoff_ratio = 1.0);

/// Linear-phase windowed-sinc FIR low-pass, applied with centered ("same")
/// convolution so there is no group delay in the output.
std::vector<double> fir_lowpass(const std::vector<double>& x, double rate,
                                double cutoff_hz, size_t taps = 257);

/// Frequency of the largest non-DC magnitude bin of the zero-padded
/// spectrum. Returns 0 for signals shorter than 2 samples.
double dominant_frequency(const std::vector<double>& x, double rate);

/// Least-squares sinusoid fit at a known frequency; returns the amplitude.
double sine_fit_amplitude(const std::vector<double>& x, double rate, double freq_hz);

} // namespace rsac::dsp
