#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "qvlab/mixing_law.hpp"
#include "qvlab/paths.hpp"

namespace qv {

enum class Route { direct_quadrature, kernel, fft };
const char* route_name(Route r);
Route route_from_name(const std::string& name);

struct EstimateResult {
  double value = 0.0;
  Route route = Route::fft;
  double L = 0.0;
  int n = 0;
  double wall_time = 0.0;
};

// Frequency scale of the randomization. L = 0 is admitted as the degenerate
// completion-of-square case; the resolution guard L*dt <= kappa is enforced as
// a warning at estimation time, not here.
struct FrequencyScale {
  double L;

  explicit FrequencyScale(double value) : L(value) {
    if (!(value >= 0.0) || !std::isfinite(value))
      throw std::invalid_argument("FrequencyScale: L must be finite and >= 0");
  }
};

constexpr double kResolutionKappa = 0.2;

// |sum_k exp(i lambda t_{k-1}) dX_k|^2, the left-endpoint discretization of
// the periodogram. Even in lambda and nonnegative.
double periodogram(const PathSample& path, double lambda);

// sum of squared increments
double realized_qv(const PathSample& path);

// E_xi I(X; L xi) by direct quadrature against the density of the law,
// 2 int_0^inf I(Lx) g(x) dx. Uses only the density side of the law (plus tail
// bounds), making it an independent oracle for the kernel routes.
EstimateResult rp_quadrature(const PathSample& path, const FrequencyScale& L,
                             const MixingLaw& law, double tol = 1e-8);

// Exact O(n^2) quadratic form w0 + 2 sum_{d>=1} phi(L dt d) w_d with lag sums
// w_d = sum_i dX_i dX_{i+d}.
EstimateResult rp_kernel(const PathSample& path, const FrequencyScale& L,
                         const MixingLaw& law);

// Same quadratic form through circulant embedding of the Toeplitz kernel and
// FFT convolution, O(n log n).
EstimateResult rp_fft(const PathSample& path, const FrequencyScale& L,
                      const MixingLaw& law);

}  // namespace qv
