#include "qvlab/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "qvlab/paths.hpp"
#include "qvlab/rng.hpp"
#include "qvlab/summation.hpp"

namespace qv {

namespace {

std::string fmt17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

int env_worker_count() {
  const char* v = std::getenv("QVLAB_THREADS");
  if (v != nullptr) {
    char* end = nullptr;
    long parsed = std::strtol(v, &end, 10);
    if (end != v && *end == '\0' && parsed >= 1 && parsed <= 1024)
      return static_cast<int>(parsed);
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double median_of_sorted(const std::vector<double>& v) {
  std::size_t n = v.size();
  if (n % 2 == 1) return v[n / 2];
  return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Fills out[rep] for rep = 0..M-1; slots are written exactly once and the
// caller reduces them in index order, so the result is scheduling independent.
void run_pool(const ExperimentConfig& config, double L, std::vector<double>& out) {
  int workers = std::min<int>(env_worker_count(), static_cast<int>(out.size()));
  if (workers <= 1) {
    for (std::size_t rep = 0; rep < out.size(); ++rep)
      out[rep] = run_replication(config, L, rep);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex err_mutex;
  std::exception_ptr first_error;
  auto body = [&] {
    for (;;) {
      std::size_t rep = next.fetch_add(1);
      if (rep >= out.size()) return;
      try {
        out[rep] = run_replication(config, L, rep);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) pool.emplace_back(body);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace

void validate_config(const ExperimentConfig& config) {
  if (!(config.horizon > 0.0) || !std::isfinite(config.horizon))
    throw std::invalid_argument("T must be finite and > 0");
  config.law();
  if (config.includes_fbm) config.hurst();
  if (config.L_grid.empty())
    throw std::invalid_argument("L_grid must not be empty");
  for (double L : config.L_grid)
    if (!(L > 0.0) || !std::isfinite(L))
      throw std::invalid_argument("L_grid entries must be finite and > 0");
  for (std::size_t i = 1; i < config.L_grid.size(); ++i)
    if (!(config.L_grid[i] > config.L_grid[i - 1]))
      throw std::invalid_argument("L_grid must be strictly increasing");
  if (config.replications < 2)
    throw std::invalid_argument("M must be at least 2");
  if (config_normalization(config).limit == LimitKind::gaussian &&
      config.replications < 100)
    throw std::invalid_argument(
        "M must be at least 100 when the statistic has a distributional target");
  if (!(config.concentration_eps > 0.0 && config.concentration_eps <= 10.0))
    throw std::invalid_argument("concentration_eps must lie in (0, 10]");
  if (!(config.kappa > 0.0 && config.kappa <= 1.0))
    throw std::invalid_argument("kappa must lie in (0, 1]");
  if (config.fixed_steps != 0 && config.fixed_steps < 2)
    throw std::invalid_argument("fixed_steps must be 0 (resolution rule) or >= 2");
}

Normalization config_normalization(const ExperimentConfig& config) {
  return normalization(config.includes_fbm ? config.hurst() : HurstParam(0.5));
}

int grid_steps_for(double L, double horizon, double kappa) {
  if (!(L >= 0.0) || !std::isfinite(L))
    throw std::invalid_argument("grid_steps_for: L must be finite and >= 0");
  if (!(horizon > 0.0) || !std::isfinite(horizon))
    throw std::invalid_argument("grid_steps_for: horizon must be finite and > 0");
  if (!(kappa > 0.0))
    throw std::invalid_argument("grid_steps_for: kappa must be > 0");
  double need = L * horizon / kappa;
  int n = 2;
  while (static_cast<double>(n) < need) {
    if (n > (1 << 28))
      throw std::invalid_argument("grid_steps_for: resolution rule needs more than 2^28 steps");
    n *= 2;
  }
  return n;
}

std::uint64_t row_seed(std::uint64_t master_seed, double L) {
  return splitmix64(master_seed ^ splitmix64(std::bit_cast<std::uint64_t>(L)));
}

double replication_estimate(const ExperimentConfig& config, double L,
                            std::uint64_t replicate) {
  validate_config(config);
  try {
    int n = config.fixed_steps >= 2 ? config.fixed_steps
                                    : grid_steps_for(L, config.horizon, config.kappa);
    SampleGrid grid(config.horizon, n);
    HurstParam h = config.includes_fbm ? config.hurst() : HurstParam(0.5);
    RngSpec rng{row_seed(config.master_seed, L), replicate};
    PathSample path = simulate_mixed(grid, h, rng, config.includes_fbm);
    FrequencyScale scale(L);
    MixingLaw law = config.law();
    switch (config.route) {
      case Route::kernel:
        return rp_kernel(path, scale, law).value;
      case Route::direct_quadrature:
        return rp_quadrature(path, scale, law).value;
      case Route::fft:
        break;
    }
    return rp_fft(path, scale, law).value;
  } catch (const std::exception& e) {
    throw std::runtime_error("replicate " + std::to_string(replicate) + " at L = " +
                             fmt17(L) + ": " + e.what());
  }
}

double run_replication(const ExperimentConfig& config, double L,
                       std::uint64_t replicate) {
  double est = replication_estimate(config, L, replicate);
  Normalization norm = config_normalization(config);
  return std::pow(L, norm.gamma) * (est - config.horizon);
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
  auto t0 = std::chrono::steady_clock::now();
  validate_config(config);
  MixingLaw law = config.law();
  if (!law.integrable_charfn() && !config.allow_nonintegrable)
    throw std::invalid_argument("run_experiment: " + detail::nonintegrable_message(law));

  ExperimentReport rep;
  rep.config = config;
  rep.norm = config_normalization(config);
  rep.alpha_h = config.includes_fbm ? config.hurst().alpha() : 0.0;
  rep.sigma_sq = law.integrable_charfn()
                     ? sigma_sq(law, config.horizon)
                     : 2.0 * config.horizon * config.horizon *
                           detail::tail_sq_integral_unchecked(law, 0.0, config.horizon);
  if (!config.includes_fbm)
    rep.mu = 0.0;
  else if (law.integrable_charfn())
    rep.mu = mu_bias(law, config.hurst(), config.horizon);
  else if (rep.norm.center_at_mu)
    throw std::invalid_argument(
        "run_experiment: the regime centers at the bias constant, which needs an "
        "absolutely integrable characteristic function");

  int M = config.replications;
  for (double L : config.L_grid) {
    RowSummary row;
    row.L = L;
    row.n = config.fixed_steps >= 2 ? config.fixed_steps
                                    : grid_steps_for(L, config.horizon, config.kappa);
    row.count = M;
    row.seed = row_seed(config.master_seed, L);

    std::vector<double> stats(M);
    run_pool(config, L, stats);

    NeumaierSum sum;
    for (double x : stats) sum.add(x);
    row.mean = sum.value() / M;
    NeumaierSum sq;
    for (double x : stats) sq.add((x - row.mean) * (x - row.mean));
    row.variance = sq.value() / (M - 1);

    if (rep.norm.limit == LimitKind::gaussian) {
      double center = rep.norm.center_at_mu ? rep.mu : 0.0;
      row.ks = ks_statistic(stats, center, rep.sigma_sq);
      row.ks_half = ks_statistic(stats, center, 0.5 * rep.sigma_sq);
      row.ks_twice = ks_statistic(stats, center, 2.0 * rep.sigma_sq);
    } else {
      int inside = 0;
      double band = config.concentration_eps * std::abs(rep.mu);
      for (double x : stats)
        if (std::abs(x - rep.mu) <= band) ++inside;
      row.within_band = static_cast<double>(inside) / M;
      std::vector<double> abs_stats(stats.size());
      for (std::size_t i = 0; i < stats.size(); ++i) abs_stats[i] = std::abs(stats[i]);
      std::sort(abs_stats.begin(), abs_stats.end());
      double medabs = median_of_sorted(abs_stats);
      row.growth_median = medabs * std::pow(L, 0.5 - rep.norm.gamma);
      row.decay_median = medabs * std::pow(L, -0.1);
    }
    rep.rows.push_back(row);
  }

  if (rep.norm.limit == LimitKind::gaussian && rep.rows.size() >= 2) {
    std::vector<std::pair<double, double>> pts, pts2;
    for (const RowSummary& row : rep.rows) {
      pts.emplace_back(row.L, row.ks);
      pts2.emplace_back(row.L, row.ks_twice);
    }
    rep.ks_slope = loglog_slope(pts);
    rep.ks_twice_slope = loglog_slope(pts2);
  }
  if (rep.norm.limit == LimitKind::gaussian) {
    VarianceComparison& vc = rep.variance_comparison;
    vc.observed = rep.rows.back().variance;
    vc.ratio_full = vc.observed / rep.sigma_sq;
    vc.ratio_half = vc.observed / (0.5 * rep.sigma_sq);
    vc.ratio_twice = vc.observed / (2.0 * rep.sigma_sq);
    vc.nearest = "sigma_sq";
    double best = std::abs(std::log(vc.ratio_full));
    if (std::abs(std::log(vc.ratio_half)) < best) {
      best = std::abs(std::log(vc.ratio_half));
      vc.nearest = "sigma_sq/2";
    }
    if (std::abs(std::log(vc.ratio_twice)) < best) vc.nearest = "2*sigma_sq";
    if (std::abs(vc.ratio_full - 1.0) <= 0.2)
      vc.candidate_match = "sigma_sq";
    else if (std::abs(vc.ratio_half - 1.0) <= 0.2)
      vc.candidate_match = "sigma_sq/2";
    else
      vc.candidate_match = "neither";
  }

  rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

double ks_statistic(std::vector<double> samples, double mean, double variance) {
  if (samples.size() < 2)
    throw std::invalid_argument("ks_statistic: need at least 2 samples");
  if (!std::isfinite(mean))
    throw std::invalid_argument("ks_statistic: mean must be finite");
  if (!(variance > 0.0) || !std::isfinite(variance))
    throw std::invalid_argument("ks_statistic: variance must be finite and > 0");
  std::sort(samples.begin(), samples.end());
  double sd = std::sqrt(variance);
  double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    double cdf = normal_cdf((samples[i] - mean) / sd);
    d = std::max(d, (i + 1) / n - cdf);
    d = std::max(d, cdf - i / n);
  }
  return d;
}

double loglog_slope(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 2)
    throw std::invalid_argument("loglog_slope: need at least 2 points");
  for (const auto& [L, v] : points)
    if (!(L > 0.0) || !(v > 0.0) || !std::isfinite(L) || !std::isfinite(v))
      throw std::invalid_argument("loglog_slope: points must be finite and positive");
  double n = static_cast<double>(points.size());
  double mx = 0.0, my = 0.0;
  for (const auto& [L, v] : points) {
    mx += std::log(L);
    my += std::log(v);
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (const auto& [L, v] : points) {
    double dx = std::log(L) - mx;
    sxy += dx * (std::log(v) - my);
    sxx += dx * dx;
  }
  if (!(sxx > 0.0))
    throw std::invalid_argument("loglog_slope: needs at least two distinct L values");
  return sxy / sxx;
}

void write_report_csv(std::ostream& os, const ExperimentReport& report) {
  os << "L,n,mean,variance,ks,M\n";
  for (const RowSummary& row : report.rows) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%.17g,%d,%.17g,%.17g,%.17g,%d\n", row.L, row.n,
                  row.mean, row.variance, row.ks, row.count);
    os << buf;
  }
}

void write_report_json(std::ostream& os, const ExperimentReport& report) {
  nlohmann::json j;
  const ExperimentConfig& c = report.config;
  j["config"] = {{"h", c.h},
                 {"T", c.horizon},
                 {"law", c.law_name},
                 {"law_scale", c.law_scale},
                 {"L_grid", c.L_grid},
                 {"M", c.replications},
                 {"route", route_name(c.route)},
                 {"master_seed", c.master_seed},
                 {"includes_fbm", c.includes_fbm},
                 {"allow_nonintegrable", c.allow_nonintegrable},
                 {"concentration_eps", c.concentration_eps},
                 {"kappa", c.kappa},
                 {"fixed_steps", c.fixed_steps}};
  j["normalization"] = {{"gamma", report.norm.gamma},
                        {"center_at_mu", report.norm.center_at_mu},
                        {"limit", report.norm.limit == LimitKind::gaussian
                                      ? "gaussian"
                                      : "degenerate"},
                        {"regime", regime_name(report.norm.regime)}};
  j["constants"] = {{"sigma_sq", report.sigma_sq},
                    {"mu", report.mu},
                    {"alpha_h", report.alpha_h}};
  j["rows"] = nlohmann::json::array();
  for (const RowSummary& row : report.rows)
    j["rows"].push_back({{"L", row.L},
                         {"n", row.n},
                         {"mean", row.mean},
                         {"variance", row.variance},
                         {"ks", row.ks},
                         {"ks_half", row.ks_half},
                         {"ks_twice", row.ks_twice},
                         {"within_band", row.within_band},
                         {"growth_median", row.growth_median},
                         {"decay_median", row.decay_median},
                         {"M", row.count},
                         {"seed", row.seed}});
  j["slopes"] = {{"ks", report.ks_slope}, {"ks_twice", report.ks_twice_slope}};
  j["variance_comparison"] = {{"observed", report.variance_comparison.observed},
                              {"ratio_full", report.variance_comparison.ratio_full},
                              {"ratio_half", report.variance_comparison.ratio_half},
                              {"ratio_twice", report.variance_comparison.ratio_twice},
                              {"nearest", report.variance_comparison.nearest},
                              {"candidate_match", report.variance_comparison.candidate_match}};
  j["wall_time"] = report.wall_time;
  os << j.dump(2) << "\n";
}

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    double x = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("");
    return x;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: key '" + key + "': cannot parse '" + value +
                                "' as a number");
  }
}

long parse_long(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    long x = std::stol(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("");
    return x;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: key '" + key + "': cannot parse '" + value +
                                "' as an integer");
  }
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    unsigned long long x = std::stoull(value, &pos);
    if (pos != value.size() || value.find('-') != std::string::npos)
      throw std::invalid_argument("");
    return x;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: key '" + key + "': cannot parse '" + value +
                                "' as an unsigned integer");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw std::invalid_argument("config: key '" + key + "': expected true or false, got '" +
                              value + "'");
}

}  // namespace

std::vector<double> parse_grid_list(const std::string& text, const std::string& field) {
  std::vector<double> grid;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t comma = text.find(',', start);
    std::string token =
        trim(comma == std::string::npos ? text.substr(start)
                                        : text.substr(start, comma - start));
    if (token.empty())
      throw std::invalid_argument(field + ": empty entry in list");
    try {
      std::size_t pos = 0;
      double x = std::stod(token, &pos);
      if (pos != token.size()) throw std::invalid_argument("");
      grid.push_back(x);
    } catch (const std::exception&) {
      throw std::invalid_argument(field + ": cannot parse '" + token + "' as a number");
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return grid;
}

ExperimentConfig parse_config(std::istream& is) {
  ExperimentConfig config;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::string body = trim(line);
    if (body.empty()) continue;
    std::size_t eq = body.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: line " + std::to_string(lineno) +
                                  ": expected 'key = value'");
    std::string key = trim(body.substr(0, eq));
    std::string value = trim(body.substr(eq + 1));
    if (key.empty() || value.empty())
      throw std::invalid_argument("config: line " + std::to_string(lineno) +
                                  ": expected 'key = value'");
    if (key == "h")
      config.h = parse_double(key, value);
    else if (key == "T")
      config.horizon = parse_double(key, value);
    else if (key == "law")
      config.law_name = value;
    else if (key == "law_scale")
      config.law_scale = parse_double(key, value);
    else if (key == "L_grid")
      config.L_grid = parse_grid_list(value, "config: key 'L_grid'");
    else if (key == "M")
      config.replications = static_cast<int>(parse_long(key, value));
    else if (key == "route")
      config.route = route_from_name(value);
    else if (key == "master_seed")
      config.master_seed = parse_u64(key, value);
    else if (key == "includes_fbm")
      config.includes_fbm = parse_bool(key, value);
    else if (key == "allow_nonintegrable")
      config.allow_nonintegrable = parse_bool(key, value);
    else if (key == "concentration_eps")
      config.concentration_eps = parse_double(key, value);
    else if (key == "kappa")
      config.kappa = parse_double(key, value);
    else if (key == "fixed_steps")
      config.fixed_steps = static_cast<int>(parse_long(key, value));
    else
      throw std::invalid_argument("config: unknown key '" + key + "'");
  }
  validate_config(config);
  return config;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::invalid_argument("config: cannot open '" + path + "'");
  return parse_config(is);
}

void write_config(std::ostream& os, const ExperimentConfig& config) {
  os << "h = " << fmt17(config.h) << "\n";
  os << "T = " << fmt17(config.horizon) << "\n";
  os << "law = " << config.law_name << "\n";
  os << "law_scale = " << fmt17(config.law_scale) << "\n";
  os << "L_grid = ";
  for (std::size_t i = 0; i < config.L_grid.size(); ++i)
    os << (i ? ", " : "") << fmt17(config.L_grid[i]);
  os << "\n";
  os << "M = " << config.replications << "\n";
  os << "route = " << route_name(config.route) << "\n";
  os << "master_seed = " << config.master_seed << "\n";
  os << "includes_fbm = " << (config.includes_fbm ? "true" : "false") << "\n";
  os << "allow_nonintegrable = " << (config.allow_nonintegrable ? "true" : "false") << "\n";
  os << "concentration_eps = " << fmt17(config.concentration_eps) << "\n";
  os << "kappa = " << fmt17(config.kappa) << "\n";
  os << "fixed_steps = " << config.fixed_steps << "\n";
}

}  // namespace qv
