#include "qvlab/estimators.hpp"

#include <chrono>
#include <cmath>
#include <complex>
#include <iostream>
#include <vector>

#include "qvlab/fft.hpp"
#include "qvlab/quadrature.hpp"
#include "qvlab/summation.hpp"

namespace qv {

namespace {

constexpr double kPi = 3.14159265358979323846;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void warn_resolution(const FrequencyScale& L, const SampleGrid& grid) {
  double prod = L.L * grid.dt();
  if (prod > kResolutionKappa)
    std::cerr << "resolution warning: L*dt = " << prod << " exceeds "
              << kResolutionKappa << "; the kernel is undersampled, increase n or lower L\n";
}

// lag sums w_d = sum_i dX_i dX_{i+d}
std::vector<double> lag_sums(const std::vector<double>& dx) {
  int n = int(dx.size());
  std::vector<double> w(n);
  for (int d = 0; d < n; ++d) {
    NeumaierSum acc;
    for (int i = 0; i + d < n; ++i) acc.add(dx[i] * dx[i + d]);
    w[d] = acc.value();
  }
  return w;
}

}  // namespace

const char* route_name(Route r) {
  switch (r) {
    case Route::direct_quadrature: return "direct-quadrature";
    case Route::kernel: return "kernel";
    case Route::fft: return "fft";
  }
  return "unknown";
}

Route route_from_name(const std::string& name) {
  if (name == "direct-quadrature") return Route::direct_quadrature;
  if (name == "kernel") return Route::kernel;
  if (name == "fft") return Route::fft;
  throw std::invalid_argument("unknown estimator route: '" + name +
                              "' (expected direct-quadrature, kernel, or fft)");
}

double periodogram(const PathSample& path, double lambda) {
  int n = path.grid.steps;
  double dt = path.grid.dt();
  const std::complex<double> step(std::cos(lambda * dt), std::sin(lambda * dt));
  std::complex<double> rot(1.0, 0.0);
  NeumaierSum re, im;
  for (int k = 0; k < n; ++k) {
    // refresh the rotation to stop error accumulation over long paths
    if ((k & 255) == 0) {
      double phase = lambda * path.grid.time(k);
      rot = {std::cos(phase), std::sin(phase)};
    }
    re.add(rot.real() * path.dX[k]);
    im.add(rot.imag() * path.dX[k]);
    rot *= step;
  }
  double a = re.value(), b = im.value();
  return a * a + b * b;
}

double realized_qv(const PathSample& path) {
  NeumaierSum acc;
  for (double dx : path.dX) acc.add(dx * dx);
  return acc.value();
}

EstimateResult rp_kernel(const PathSample& path, const FrequencyScale& L,
                         const MixingLaw& law) {
  auto start = Clock::now();
  warn_resolution(L, path.grid);
  int n = path.grid.steps;
  double beta = L.L * path.grid.dt();
  auto w = lag_sums(path.dX);
  NeumaierSum total;
  total.add(w[0]);
  for (int d = 1; d < n; ++d) total.add(2.0 * law.charfn(beta * d) * w[d]);
  EstimateResult res{total.value(), Route::kernel, L.L, n, 0.0};
  res.wall_time = seconds_since(start);
  return res;
}

EstimateResult rp_fft(const PathSample& path, const FrequencyScale& L,
                      const MixingLaw& law) {
  auto start = Clock::now();
  warn_resolution(L, path.grid);
  int n = path.grid.steps;
  double beta = L.L * path.grid.dt();
  int m = 2 * n;
  std::vector<double> row(m, 0.0), padded(m, 0.0);
  for (int j = 0; j < n; ++j) row[j] = law.charfn(beta * j);
  row[n] = law.charfn(beta * n);
  for (int j = n + 1; j < m; ++j) row[j] = row[m - j];
  for (int j = 0; j < n; ++j) padded[j] = path.dX[j];
  auto row_hat = fft_r2c(row);
  auto x_hat = fft_r2c(padded);
  for (std::size_t k = 0; k < x_hat.size(); ++k) x_hat[k] *= row_hat[k];
  auto y = fft_c2r(x_hat, m);
  y.resize(n);
  double value = compensated_dot(path.dX, y);
  EstimateResult res{value, Route::fft, L.L, n, 0.0};
  res.wall_time = seconds_since(start);
  return res;
}

namespace {

// oscillatory part of the periodogram at lambda = beta*d frequencies,
// I(L x) - w0 = 2 sum_d w_d cos(beta d x)
double periodogram_osc(const std::vector<double>& w, double beta, double x) {
  int n = int(w.size());
  const std::complex<double> step(std::cos(beta * x), std::sin(beta * x));
  std::complex<double> rot = step;
  NeumaierSum acc;
  for (int d = 1; d < n; ++d) {
    if ((d & 255) == 0) {
      double phase = beta * d * x;
      rot = {std::cos(phase), std::sin(phase)};
    }
    acc.add(w[d] * rot.real());
    rot *= step;
  }
  return 2.0 * acc.value();
}

EstimateResult rp_quadrature_cauchy(const PathSample& path, const FrequencyScale& L,
                                    const MixingLaw& law, double tol,
                                    Clock::time_point start) {
  int n = path.grid.steps;
  double beta = L.L * path.grid.dt();
  double s = law.scale;
  auto w = lag_sums(path.dX);

  // sum |w_d|/d^2 controls the integration by parts remainder
  NeumaierSum s2;
  for (int d = 1; d < n; ++d) s2.add(std::abs(w[d]) / (double(d) * double(d)));
  auto dens_deriv = [s](double x) {
    double q = s * s + x * x;
    return -2.0 * s * x / (kPi * q * q);
  };
  double X = std::max(4.0 * s, 1.0);
  for (int iter = 0; iter < 200; ++iter) {
    double rem = 4.0 / (beta * beta) * std::abs(dens_deriv(X)) * s2.value();
    if (rem <= 0.5 * tol) break;
    X *= 2.0;
  }

  PanelOptions opt;
  opt.rel_tol = 1e-10;
  opt.abs_tol = 0.1 * tol;
  opt.max_panel_width = kPi / std::max(1.0, L.L * path.grid.horizon);
  auto f = [&](double x) { return periodogram_osc(w, beta, x) * law.density(x); };
  double body = 2.0 * integrate_gk(f, 0.0, X, opt).value;

  // two integration by parts boundary terms at the truncation point
  const std::complex<double> step(std::cos(beta * X), std::sin(beta * X));
  std::complex<double> rot = step;
  NeumaierSum sin_sum, cos_sum;
  for (int d = 1; d < n; ++d) {
    if ((d & 255) == 0) {
      double phase = beta * d * X;
      rot = {std::cos(phase), std::sin(phase)};
    }
    sin_sum.add(w[d] * rot.imag() / d);
    cos_sum.add(w[d] * rot.real() / (double(d) * double(d)));
    rot *= step;
  }
  double tail = -4.0 * law.density(X) * sin_sum.value() / beta +
                4.0 * dens_deriv(X) * cos_sum.value() / (beta * beta);

  EstimateResult res{w[0] + body + tail, Route::direct_quadrature, L.L, n, 0.0};
  res.wall_time = seconds_since(start);
  return res;
}

}  // namespace

EstimateResult rp_quadrature(const PathSample& path, const FrequencyScale& L,
                             const MixingLaw& law, double tol) {
  auto start = Clock::now();
  if (!(tol > 0.0)) throw std::invalid_argument("rp_quadrature: tol must be > 0");
  warn_resolution(L, path.grid);
  int n = path.grid.steps;

  if (law.kind == LawKind::two_point) {
    // E I(L xi) with xi = +-s collapses to the periodogram at L*s since I is even
    EstimateResult res{periodogram(path, L.L * law.scale), Route::direct_quadrature,
                       L.L, n, 0.0};
    res.wall_time = seconds_since(start);
    return res;
  }
  if (L.L == 0.0) {
    EstimateResult res{periodogram(path, 0.0), Route::direct_quadrature, L.L, n, 0.0};
    res.wall_time = seconds_since(start);
    return res;
  }
  if (law.kind == LawKind::cauchy) return rp_quadrature_cauchy(path, L, law, tol, start);

  PanelOptions opt;
  opt.rel_tol = 1e-10;
  opt.abs_tol = 0.1 * tol;
  opt.max_panel_width = kPi / std::max(1.0, L.L * path.grid.horizon);
  auto f = [&](double x) { return periodogram(path, L.L * x) * law.density(x); };

  double X = law.support_radius();
  if (!std::isfinite(X)) {
    // truncate where the residual density mass times sup I drops below tol
    NeumaierSum abs_sum;
    for (double dx : path.dX) abs_sum.add(std::abs(dx));
    double sup_i = abs_sum.value() * abs_sum.value();
    X = law.scale;
    for (int iter = 0; iter < 400; ++iter) {
      if (law.density_tail_mass(X) * sup_i <= 0.5 * tol) break;
      X += law.scale;
    }
  }
  double value = 2.0 * integrate_gk(f, 0.0, X, opt).value;
  EstimateResult res{value, Route::direct_quadrature, L.L, n, 0.0};
  res.wall_time = seconds_since(start);
  return res;
}

}  // namespace qv
