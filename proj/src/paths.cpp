#include "qvlab/paths.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstdio>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>

#include "qvlab/fft.hpp"
#include "qvlab/rng.hpp"

namespace qv {

const char* method_name(PathMethod m) {
  return m == PathMethod::cholesky ? "cholesky" : "circulant";
}

PathMethod method_from_name(const std::string& name) {
  if (name == "cholesky") return PathMethod::cholesky;
  if (name == "circulant") return PathMethod::circulant;
  throw std::invalid_argument("unknown path method: '" + name +
                              "' (expected cholesky or circulant)");
}

double fbm_covariance(double s, double t, const HurstParam& h) {
  if (!(s >= 0.0) || !(t >= 0.0))
    throw std::invalid_argument("fbm_covariance: times must be >= 0");
  double hh = 2.0 * h.h;
  return 0.5 * (std::pow(s, hh) + std::pow(t, hh) - std::pow(std::abs(t - s), hh));
}

double fgn_autocovariance(const HurstParam& h, double dt, long lag) {
  if (!(dt > 0.0)) throw std::invalid_argument("fgn_autocovariance: dt must be > 0");
  double d = double(std::labs(lag));
  if (h.h == 0.5) return d == 0.0 ? dt : 0.0;
  double hh = 2.0 * h.h;
  return 0.5 * std::pow(dt, hh) *
         (std::pow(d + 1.0, hh) + std::pow(std::abs(d - 1.0), hh) - 2.0 * std::pow(d, hh));
}

namespace {

struct CovKey {
  int n;
  double h;
  double dt;
  bool operator<(const CovKey& o) const {
    if (n != o.n) return n < o.n;
    if (h != o.h) return h < o.h;
    return dt < o.dt;
  }
};

std::mutex cache_mutex;

// lower Cholesky factor of the fGn covariance, shared across replications
std::shared_ptr<const Eigen::MatrixXd> cholesky_factor(const SampleGrid& grid,
                                                       const HurstParam& h) {
  static std::map<CovKey, std::shared_ptr<const Eigen::MatrixXd>> cache;
  CovKey key{grid.steps, h.h, grid.dt()};
  {
    std::lock_guard<std::mutex> lock(cache_mutex);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  int n = grid.steps;
  Eigen::MatrixXd cov(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) {
      double g = fgn_autocovariance(h, grid.dt(), i - j);
      cov(i, j) = g;
      cov(j, i) = g;
    }
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("cholesky factorization of the fGn covariance failed");
  auto factor = std::make_shared<const Eigen::MatrixXd>(llt.matrixL());
  std::lock_guard<std::mutex> lock(cache_mutex);
  auto [it, inserted] = cache.emplace(key, factor);
  return it->second;
}

// eigenvalues of the circulant embedding of the fGn covariance, length 2*n'
std::shared_ptr<const std::vector<double>> circulant_eigenvalues(const SampleGrid& grid,
                                                                 const HurstParam& h) {
  static std::map<CovKey, std::shared_ptr<const std::vector<double>>> cache;
  int npad = 1;
  while (npad < grid.steps) npad *= 2;
  CovKey key{npad, h.h, grid.dt()};
  {
    std::lock_guard<std::mutex> lock(cache_mutex);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  int m = 2 * npad;
  std::vector<double> first_row(m);
  for (int j = 0; j <= npad; ++j) first_row[j] = fgn_autocovariance(h, grid.dt(), j);
  for (int j = npad + 1; j < m; ++j) first_row[j] = first_row[m - j];
  auto spectrum = fft_r2c(first_row);
  double lam_max = 0.0, lam_min = 0.0;
  auto lambda = std::make_shared<std::vector<double>>(m);
  // the first row is even, so the full spectrum is real and symmetric
  for (int k = 0; k < m; ++k) {
    double lam = spectrum[k <= m / 2 ? k : m - k].real();
    (*lambda)[k] = lam;
    lam_max = std::max(lam_max, lam);
    lam_min = std::min(lam_min, lam);
  }
  if (lam_min < -1e-12 * lam_max)
    throw CirculantEmbeddingError(
        "circulant embedding produced a significantly negative eigenvalue (min " +
        std::to_string(lam_min) + ", max " + std::to_string(lam_max) +
        "); rerun this grid with the cholesky method");
  for (double& lam : *lambda) lam = std::max(lam, 0.0);
  std::lock_guard<std::mutex> lock(cache_mutex);
  auto [it, inserted] = cache.emplace(
      key, std::shared_ptr<const std::vector<double>>(std::move(lambda)));
  return it->second;
}

std::vector<double> fgn_circulant(const SampleGrid& grid, const HurstParam& h,
                                  const Philox4x64::Key& key) {
  auto lambda = circulant_eigenvalues(grid, h);
  int m = int(lambda->size());
  std::vector<std::complex<double>> w(m);
  double inv_m = 1.0 / m;
  w[0] = std::sqrt((*lambda)[0] * inv_m) * normal_at(key, 0);
  w[m / 2] = std::sqrt((*lambda)[m / 2] * inv_m) * normal_at(key, 1);
  for (int k = 1; k < m / 2; ++k) {
    double sd = std::sqrt((*lambda)[k] * inv_m * 0.5);
    double re = sd * normal_at(key, 2 * k);
    double im = sd * normal_at(key, 2 * k + 1);
    w[k] = {re, im};
    w[m - k] = {re, -im};
  }
  auto transformed = fft_c2c(w);
  std::vector<double> out(grid.steps);
  for (int j = 0; j < grid.steps; ++j) out[j] = transformed[j].real();
  return out;
}

std::vector<double> fgn_cholesky(const SampleGrid& grid, const HurstParam& h,
                                 const Philox4x64::Key& key) {
  auto factor = cholesky_factor(grid, h);
  int n = grid.steps;
  Eigen::VectorXd z(n);
  for (int i = 0; i < n; ++i) z(i) = normal_at(key, i);
  Eigen::VectorXd x = (*factor) * z;
  return std::vector<double>(x.data(), x.data() + n);
}

constexpr std::uint64_t kSubstreamBrownian = 0;
constexpr std::uint64_t kSubstreamFractional = 1;

}  // namespace

std::vector<double> simulate_fbm(const SampleGrid& grid, const HurstParam& h,
                                 PathMethod method, const RngSpec& rng) {
  auto key = derive_key(rng.master_seed, rng.stream_index, kSubstreamFractional,
                        std::uint64_t(grid.steps));
  return method == PathMethod::cholesky ? fgn_cholesky(grid, h, key)
                                        : fgn_circulant(grid, h, key);
}

PathSample simulate_mixed(const SampleGrid& grid, const HurstParam& h, const RngSpec& rng,
                          bool includes_fbm, PathMethod method) {
  PathSample path{grid, {}, {}, {}, includes_fbm};
  int n = grid.steps;
  auto key_w = derive_key(rng.master_seed, rng.stream_index, kSubstreamBrownian,
                          std::uint64_t(n));
  double sd = std::sqrt(grid.dt());
  path.dW.resize(n);
  for (int k = 0; k < n; ++k) path.dW[k] = sd * normal_at(key_w, k);
  path.dBH = includes_fbm ? simulate_fbm(grid, h, method, rng)
                          : std::vector<double>(n, 0.0);
  path.dX.resize(n);
  for (int k = 0; k < n; ++k) path.dX[k] = path.dW[k] + path.dBH[k];
  return path;
}

void write_path_csv(std::ostream& os, const PathSample& path) {
  os << "k,t,dW,dBH,dX\n";
  char buf[512];
  for (int k = 0; k < path.grid.steps; ++k) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g\n", k + 1,
                  path.grid.time(k + 1), path.dW[k], path.dBH[k], path.dX[k]);
    os << buf;
  }
}

}  // namespace qv
