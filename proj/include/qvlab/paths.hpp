#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "qvlab/grid.hpp"

namespace qv {

enum class PathMethod { cholesky, circulant };
const char* method_name(PathMethod m);
PathMethod method_from_name(const std::string& name);

// Covariance of fractional Brownian motion,
// R(s, t) = (|s|^2H + |t|^2H - |t - s|^2H) / 2.
double fbm_covariance(double s, double t, const HurstParam& h);

// Autocovariance of the stationary increment sequence on a uniform grid with
// step dt, gamma(d) = dt^2H (|d+1|^2H + |d-1|^2H - 2|d|^2H) / 2.
double fgn_autocovariance(const HurstParam& h, double dt, long lag);

struct CirculantEmbeddingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Exact-in-law fractional Gaussian increments. cholesky factors the n x n
// Toeplitz covariance; circulant embeds it into a 2*n' circulant (n' the next
// power of two) and samples by FFT. Both are deterministic in rng.
std::vector<double> simulate_fbm(const SampleGrid& grid, const HurstParam& h,
                                 PathMethod method, const RngSpec& rng);

struct PathSample {
  SampleGrid grid;
  std::vector<double> dW;
  std::vector<double> dBH;
  std::vector<double> dX;
  bool includes_fbm = true;
};

// One realization of the mixed path X = W + B^H as increments; W and B^H come
// from disjoint substreams of rng. includes_fbm = false degenerates to pure
// Brownian motion with dBH identically zero.
PathSample simulate_mixed(const SampleGrid& grid, const HurstParam& h, const RngSpec& rng,
                          bool includes_fbm, PathMethod method = PathMethod::circulant);

// CSV with header k,t,dW,dBH,dX, one row per step, 17 significant digits.
void write_path_csv(std::ostream& os, const PathSample& path);

}  // namespace qv
