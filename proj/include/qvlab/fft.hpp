#pragma once

#include <complex>
#include <vector>

namespace qv {

// Thin FFTW wrappers. Plans use FFTW_ESTIMATE (same plan for a given size every
// run) and are cached per size behind a mutex; execution runs concurrently on
// per-call buffers.

// out[k] = sum_j in[j] e^{-2 pi i jk/n} for k = 0..n/2
std::vector<std::complex<double>> fft_r2c(const std::vector<double>& in);

// Inverse of fft_r2c including the 1/n scaling; n is the real output length.
std::vector<double> fft_c2r(const std::vector<std::complex<double>>& in, int n);

// Forward complex transform, unscaled.
std::vector<std::complex<double>> fft_c2c(const std::vector<std::complex<double>>& in);

}  // namespace qv
