#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "qvlab/estimators.hpp"
#include "qvlab/grid.hpp"
#include "qvlab/limit_theory.hpp"
#include "qvlab/mixing_law.hpp"

namespace qv {

// One experiment: for each L in L_grid run M replications of the normalized
// statistic L^gamma (est - T) and summarize against the regime target.
// includes_fbm = false runs the pure Brownian corollary; h is ignored there.
struct ExperimentConfig {
  double h = 0.9;
  double horizon = 1.0;
  std::string law_name = "gaussian";
  double law_scale = 1.0;
  std::vector<double> L_grid = {25.0, 50.0, 100.0, 200.0};
  int replications = 2000;
  Route route = Route::fft;
  std::uint64_t master_seed = 1;
  bool includes_fbm = true;
  // Negative-control switch: admit laws whose characteristic function is not
  // absolutely integrable. The variance constant then comes from the (finite)
  // phi^2 integral and no bias constant is available.
  bool allow_nonintegrable = false;
  // Concentration band half-width for the subcritical summary, as a multiple
  // of |mu|.
  double concentration_eps = 0.25;
  // Resolution rule L * T / n <= kappa used to pick the step count.
  double kappa = kResolutionKappa;
  // Overrides the resolution rule when >= 2; 0 keeps the rule.
  int fixed_steps = 0;

  MixingLaw law() const { return law_from_name(law_name, law_scale); }
  HurstParam hurst() const { return HurstParam(h); }
};

void validate_config(const ExperimentConfig& config);

// Normalization actually applied: the pure-Brownian one when includes_fbm is
// false, otherwise the regime of h.
Normalization config_normalization(const ExperimentConfig& config);

// Smallest power of two n with L * T / n <= kappa, at least 2.
int grid_steps_for(double L, double horizon, double kappa = kResolutionKappa);

// Stream seed for the row at frequency scale L; replicate indices then select
// substreams of it, so rows are independent and reproducible from (seed, L).
std::uint64_t row_seed(std::uint64_t master_seed, double L);

// Unnormalized estimate for one replicate, a pure function of
// (master_seed, L, replicate, config). At L = 0 it degenerates to the squared
// terminal increment sum.
double replication_estimate(const ExperimentConfig& config, double L,
                            std::uint64_t replicate);

// One sample of L^gamma (est - T) with gamma from config_normalization.
double run_replication(const ExperimentConfig& config, double L,
                       std::uint64_t replicate);

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

struct RowSummary {
  double L = 0.0;
  int n = 0;
  double mean = 0.0;
  double variance = 0.0;
  // KS distances against the regime target, NaN when the regime has no
  // distributional limit. ks uses the variance constant sigma_sq; ks_half and
  // ks_twice use sigma_sq/2 and 2 sigma_sq, the bookkeeping alternatives.
  double ks = kNan;
  double ks_half = kNan;
  double ks_twice = kNan;
  // Subcritical concentration summary: fraction of samples within
  // +- eps |mu| of mu, and medians of |L^{1/2} (est - T)| (diverging) and of
  // |L^{1/2 - eps'} (est - T)| with eps' = (3/2 - 2h) + 0.1 (vanishing).
  double within_band = kNan;
  double growth_median = kNan;
  double decay_median = kNan;
  int count = 0;
  std::uint64_t seed = 0;
};

struct VarianceComparison {
  double observed = kNan;
  double ratio_full = kNan;
  double ratio_half = kNan;
  double ratio_twice = kNan;
  // Nearest of sigma_sq, sigma_sq/2, 2*sigma_sq on log scale.
  std::string nearest;
  // Which of the two bookkeeping candidates sigma_sq, sigma_sq/2 the observed
  // variance matches within 20 percent; "neither" when none does.
  std::string candidate_match;
};

struct ExperimentReport {
  ExperimentConfig config;
  Normalization norm;
  double sigma_sq = kNan;
  double mu = kNan;
  double alpha_h = 0.0;
  std::vector<RowSummary> rows;
  double ks_slope = kNan;
  double ks_twice_slope = kNan;
  VarianceComparison variance_comparison;
  // Seconds; the one field that is not reproducible run to run.
  double wall_time = 0.0;
};

// Runs M replications per L on a worker pool (QVLAB_THREADS caps the size,
// default hardware parallelism). Per-replicate seeds are fixed up front and
// the reduction runs in replicate order, so the numeric fields of the report
// do not depend on the worker count.
ExperimentReport run_experiment(const ExperimentConfig& config);

// One-sample Kolmogorov-Smirnov sup-distance between the samples and
// N(mean, variance).
double ks_statistic(std::vector<double> samples, double mean, double variance);

// Least-squares slope of log(value) against log(L).
double loglog_slope(const std::vector<std::pair<double, double>>& points);

// Header L,n,mean,variance,ks,M then one row per L, 17 significant digits,
// '.' decimal, LF line endings.
void write_report_csv(std::ostream& os, const ExperimentReport& report);

// Sidecar with config echo, normalization, constants, full rows with seeds,
// slopes, variance comparison, wall time. NaN fields serialize as null.
void write_report_json(std::ostream& os, const ExperimentReport& report);

// Flat key = value config file, '#' comments. Keys: h, T, law, law_scale,
// L_grid (comma separated), M, route, master_seed, includes_fbm,
// allow_nonintegrable, concentration_eps, kappa, fixed_steps. Omitted keys
// keep their defaults; unknown keys are errors.
ExperimentConfig parse_config(std::istream& is);
ExperimentConfig load_config(const std::string& path);
void write_config(std::ostream& os, const ExperimentConfig& config);

// Comma separated list of reals, the L_grid syntax shared by config files and
// command line flags. field names the input in error messages.
std::vector<double> parse_grid_list(const std::string& text, const std::string& field);

}  // namespace qv
