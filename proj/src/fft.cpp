#include "qvlab/fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <map>
#include <mutex>
#include <stdexcept>

namespace qv {

namespace {

// Planning is the only non-thread-safe part of FFTW; plans are made once per
// size on fftw_malloc-aligned scratch (kept alive so alignment stays valid for
// new-array execution) and reused concurrently.
std::mutex plan_mutex;

struct R2cEntry {
  fftw_plan plan;
  double* in;
  fftw_complex* out;
};
struct C2rEntry {
  fftw_plan plan;
  fftw_complex* in;
  double* out;
};
struct C2cEntry {
  fftw_plan plan;
  fftw_complex* in;
  fftw_complex* out;
};

R2cEntry& r2c_plan(int n) {
  static std::map<int, R2cEntry> cache;
  std::lock_guard<std::mutex> lock(plan_mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  R2cEntry e;
  e.in = fftw_alloc_real(n);
  e.out = fftw_alloc_complex(n / 2 + 1);
  e.plan = fftw_plan_dft_r2c_1d(n, e.in, e.out, FFTW_ESTIMATE);
  if (!e.plan) throw std::runtime_error("fftw r2c planning failed");
  return cache.emplace(n, e).first->second;
}

C2rEntry& c2r_plan(int n) {
  static std::map<int, C2rEntry> cache;
  std::lock_guard<std::mutex> lock(plan_mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  C2rEntry e;
  e.in = fftw_alloc_complex(n / 2 + 1);
  e.out = fftw_alloc_real(n);
  e.plan = fftw_plan_dft_c2r_1d(n, e.in, e.out, FFTW_ESTIMATE);
  if (!e.plan) throw std::runtime_error("fftw c2r planning failed");
  return cache.emplace(n, e).first->second;
}

C2cEntry& c2c_plan(int n) {
  static std::map<int, C2cEntry> cache;
  std::lock_guard<std::mutex> lock(plan_mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  C2cEntry e;
  e.in = fftw_alloc_complex(n);
  e.out = fftw_alloc_complex(n);
  e.plan = fftw_plan_dft_1d(n, e.in, e.out, FFTW_FORWARD, FFTW_ESTIMATE);
  if (!e.plan) throw std::runtime_error("fftw c2c planning failed");
  return cache.emplace(n, e).first->second;
}

}  // namespace

std::vector<std::complex<double>> fft_r2c(const std::vector<double>& in) {
  int n = static_cast<int>(in.size());
  if (n < 2) throw std::invalid_argument("fft_r2c: need at least 2 points");
  R2cEntry& e = r2c_plan(n);
  double* buf_in = fftw_alloc_real(n);
  fftw_complex* buf_out = fftw_alloc_complex(n / 2 + 1);
  std::memcpy(buf_in, in.data(), n * sizeof(double));
  fftw_execute_dft_r2c(e.plan, buf_in, buf_out);
  std::vector<std::complex<double>> out(n / 2 + 1);
  for (int i = 0; i <= n / 2; ++i)
    out[i] = {buf_out[i][0], buf_out[i][1]};
  fftw_free(buf_in);
  fftw_free(buf_out);
  return out;
}

std::vector<double> fft_c2r(const std::vector<std::complex<double>>& in, int n) {
  if (static_cast<int>(in.size()) != n / 2 + 1)
    throw std::invalid_argument("fft_c2r: spectrum length must be n/2+1");
  C2rEntry& e = c2r_plan(n);
  fftw_complex* buf_in = fftw_alloc_complex(n / 2 + 1);
  double* buf_out = fftw_alloc_real(n);
  std::memcpy(buf_in, in.data(), (n / 2 + 1) * sizeof(fftw_complex));
  fftw_execute_dft_c2r(e.plan, buf_in, buf_out);
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = buf_out[i] / n;
  fftw_free(buf_in);
  fftw_free(buf_out);
  return out;
}

std::vector<std::complex<double>> fft_c2c(const std::vector<std::complex<double>>& in) {
  int n = static_cast<int>(in.size());
  if (n < 2) throw std::invalid_argument("fft_c2c: need at least 2 points");
  C2cEntry& e = c2c_plan(n);
  fftw_complex* buf_in = fftw_alloc_complex(n);
  fftw_complex* buf_out = fftw_alloc_complex(n);
  std::memcpy(buf_in, in.data(), n * sizeof(fftw_complex));
  fftw_execute_dft(e.plan, buf_in, buf_out);
  std::vector<std::complex<double>> out(n);
  for (int i = 0; i < n; ++i)
    out[i] = {buf_out[i][0], buf_out[i][1]};
  fftw_free(buf_in);
  fftw_free(buf_out);
  return out;
}

}  // namespace qv
