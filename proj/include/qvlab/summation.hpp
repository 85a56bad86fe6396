#pragma once

#include <cmath>
#include <cstddef>
#include <span>

namespace qv {

// Neumaier variant of compensated summation. Keeps the low-order bits that a
// plain accumulator drops when terms cancel.
struct NeumaierSum {
  double sum = 0.0;
  double comp = 0.0;

  void add(double x) {
    double t = sum + x;
    if (std::abs(sum) >= std::abs(x))
      comp += (sum - t) + x;
    else
      comp += (x - t) + sum;
    sum = t;
  }

  double value() const { return sum + comp; }
};

inline double compensated_dot(std::span<const double> a, std::span<const double> b) {
  NeumaierSum acc;
  std::size_t n = a.size() < b.size() ? a.size() : b.size();
  for (std::size_t i = 0; i < n; ++i) acc.add(a[i] * b[i]);
  return acc.value();
}

}  // namespace qv
