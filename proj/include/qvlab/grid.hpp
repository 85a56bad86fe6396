#pragma once

#include <cstdint>
#include <stdexcept>

namespace qv {

// Uniform partition of [0, T]: t_k = k*T/n for k = 0..n.
struct SampleGrid {
  double horizon;
  int steps;

  SampleGrid(double T, int n) : horizon(T), steps(n) {
    if (!(T > 0.0))
      throw std::invalid_argument("SampleGrid: horizon must be positive");
    if (n < 2)
      throw std::invalid_argument("SampleGrid: need at least 2 steps");
  }

  double dt() const { return horizon / steps; }
  double time(int k) const { return k * horizon / steps; }
};

// Hurst parameter. h = 0.5 is admitted as the pure-Brownian degenerate case;
// the mixed model proper uses h > 0.5.
struct HurstParam {
  double h;

  explicit HurstParam(double value) : h(value) {
    if (!(value >= 0.5 && value < 1.0))
      throw std::invalid_argument("HurstParam: h must lie in [0.5, 1)");
  }

  double alpha() const { return h * (2.0 * h - 1.0); }
};

struct RngSpec {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_index = 0;
};

}  // namespace qv
