#pragma once

// Real-input FFT helpers backed by FFTW. Plans are created once per length
// and shared; execution is thread-safe.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace owtt::dsp {

using Complex = std::complex<double>;

/// Smallest power of two >= n (n >= 1).
std::size_t next_pow2(std::size_t n);

/// Forward transform of `input` zero-padded (or truncated) to `n` points.
/// Returns the n/2 + 1 non-negative frequency bins, unnormalised
/// (X[k] = sum x[t] e^{-j 2 pi k t / n}).
std::vector<Complex> rfft(std::span<const double> input, std::size_t n);

/// Inverse of rfft: takes n/2 + 1 bins and returns n real samples,
/// normalised so that irfft(rfft(x, n), n) == x.
std::vector<double> irfft(std::span<const Complex> bins, std::size_t n);

}  // namespace owtt::dsp
