#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qvlab/estimators.hpp"
#include "qvlab/grid.hpp"
#include "qvlab/limit_theory.hpp"
#include "qvlab/mixing_law.hpp"
#include "qvlab/montecarlo.hpp"
#include "qvlab/paths.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Bad inputs exit 2, failures while computing exit 1.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PathsArgs {
  double H = 0.8;
  double T = 1.0;
  int n = 256;
  std::uint64_t seed = 1;
  std::uint64_t stream = 0;
  std::string method = "circulant";
  std::string out = "-";
  bool pure_bm = false;
};

int run_paths(const PathsArgs& a) {
  qv::SampleGrid grid(a.T, a.n);
  qv::HurstParam h(a.pure_bm ? 0.5 : a.H);
  qv::PathSample path = qv::simulate_mixed(grid, h, qv::RngSpec{a.seed, a.stream},
                                           !a.pure_bm, qv::method_from_name(a.method));
  if (a.out == "-") {
    qv::write_path_csv(std::cout, path);
  } else {
    std::ofstream os(a.out);
    if (!os) throw std::runtime_error("cannot open output file '" + a.out + "'");
    qv::write_path_csv(os, path);
  }
  return 0;
}

struct EstimateArgs {
  double H = 0.8;
  double T = 1.0;
  double L = 50.0;
  double law_scale = 1.0;
  int n = 0;
  std::uint64_t seed = 1;
  std::uint64_t stream = 0;
  std::string route = "fft";
  std::string law = "gaussian";
  std::string method = "circulant";
  bool pure_bm = false;
};

int run_estimate(const EstimateArgs& a) {
  if (!(a.L > 0.0)) throw UsageError("estimate: L must be > 0");
  qv::Route route = qv::route_from_name(a.route);
  qv::MixingLaw law = qv::law_from_name(a.law, a.law_scale);
  int n = a.n > 0 ? a.n : qv::grid_steps_for(a.L, a.T);
  qv::SampleGrid grid(a.T, n);
  qv::HurstParam h(a.pure_bm ? 0.5 : a.H);
  qv::PathSample path = qv::simulate_mixed(grid, h, qv::RngSpec{a.seed, a.stream},
                                           !a.pure_bm, qv::method_from_name(a.method));
  qv::FrequencyScale scale(a.L);
  qv::EstimateResult est;
  switch (route) {
    case qv::Route::kernel:
      est = qv::rp_kernel(path, scale, law);
      break;
    case qv::Route::direct_quadrature:
      est = qv::rp_quadrature(path, scale, law);
      break;
    case qv::Route::fft:
      est = qv::rp_fft(path, scale, law);
      break;
  }
  json j;
  j["value"] = est.value;
  j["route"] = qv::route_name(est.route);
  j["L"] = est.L;
  j["n"] = est.n;
  j["wall_time"] = est.wall_time;
  std::cout << j.dump(2) << "\n";
  return 0;
}

struct TheoryArgs {
  double H = 0.8;
  double T = 1.0;
  double L = 0.0;
  double law_scale = 1.0;
  double chaos_tol = 1e-5;
  std::string law = "gaussian";
  bool chaos = false;
  bool l_given = false;
};

int run_theory(const TheoryArgs& a) {
  qv::MixingLaw law = qv::law_from_name(a.law, a.law_scale);
  qv::HurstParam h(a.H);
  qv::LimitConstants c = qv::limit_constants(law, h, a.T);
  qv::Normalization norm = qv::normalization(h);
  json j;
  j["law"] = law.name();
  j["law_scale"] = law.scale;
  j["H"] = a.H;
  j["T"] = a.T;
  j["sigma_sq"] = c.sigma_sq;
  j["mu"] = c.mu;
  j["alpha_h"] = c.alpha_h;
  j["regime"] = qv::regime_name(c.regime);
  j["normalization"] = {
      {"gamma", norm.gamma},
      {"center_at_mu", norm.center_at_mu},
      {"limit", norm.limit == qv::LimitKind::gaussian ? "gaussian" : "degenerate"}};
  if (a.l_given) {
    if (!(a.L > 0.0)) throw UsageError("theory: L must be > 0");
    j["L"] = a.L;
    j["rho"] = qv::rho_bound(law, h, a.T, a.L);
  }
  if (a.chaos) {
    if (!a.l_given) throw UsageError("theory: --chaos-terms needs --L");
    qv::ChaosVarianceTerms ct = qv::chaos_variance_terms(law, h, a.T, a.L, a.chaos_tol);
    j["chaos_terms"] = {{"a1", ct.a1},
                       {"a2", ct.a2},
                       {"a3", ct.a3},
                       {"L_times_sum", a.L * (ct.a1 + ct.a2 + ct.a3)},
                       {"tol", ct.quadrature_tol}};
  }
  std::cout << j.dump(2) << "\n";
  return 0;
}

struct RunArgs {
  std::string config_path;
  std::string out_dir = ".";
  std::string prefix = "report";
  bool emit_plot = false;
  double H = 0.0, T = 0.0, law_scale = 0.0, kappa = 0.0, eps = 0.0;
  std::string law, route, L_grid;
  int M = 0, fixed_steps = 0;
  std::uint64_t seed = 0;
  bool no_fbm = false;
  bool allow = false;
  CLI::Option *opt_H = nullptr, *opt_T = nullptr, *opt_scale = nullptr,
              *opt_kappa = nullptr, *opt_eps = nullptr, *opt_law = nullptr,
              *opt_route = nullptr, *opt_grid = nullptr, *opt_M = nullptr,
              *opt_fixed = nullptr, *opt_seed = nullptr;
};

void add_override_flags(CLI::App* cmd, RunArgs& a) {
  cmd->add_option("--config", a.config_path, "experiment config file")->required();
  cmd->add_option("--out-dir", a.out_dir, "directory for report files");
  cmd->add_option("--prefix", a.prefix, "basename for report files");
  cmd->add_flag("--emit-plot-data", a.emit_plot, "also write gnuplot two-column files");
  a.opt_H = cmd->add_option("--H", a.H, "Hurst parameter override");
  a.opt_T = cmd->add_option("--T", a.T, "horizon override");
  a.opt_law = cmd->add_option("--law", a.law, "mixing law override");
  a.opt_scale = cmd->add_option("--law-scale", a.law_scale, "law scale override");
  a.opt_grid = cmd->add_option("--L-grid", a.L_grid, "comma separated L grid override");
  a.opt_M = cmd->add_option("--M", a.M, "replication count override");
  a.opt_route = cmd->add_option("--route", a.route, "estimator route override");
  a.opt_seed = cmd->add_option("--seed", a.seed, "master seed override");
  a.opt_kappa = cmd->add_option("--kappa", a.kappa, "resolution bound override");
  a.opt_eps = cmd->add_option("--concentration-eps", a.eps, "concentration band override");
  a.opt_fixed = cmd->add_option("--fixed-steps", a.fixed_steps, "fixed step count override");
  cmd->add_flag("--no-fbm", a.no_fbm, "drop the fractional component");
  cmd->add_flag("--allow-nonintegrable", a.allow, "admit nonintegrable laws (negative tests)");
}

qv::ExperimentConfig build_config(const RunArgs& a) {
  if (!fs::exists(a.config_path))
    throw UsageError("config file '" + a.config_path + "' not found");
  qv::ExperimentConfig config = qv::load_config(a.config_path);
  try {
    if (a.opt_H->count()) config.h = a.H;
    if (a.opt_T->count()) config.horizon = a.T;
    if (a.opt_law->count()) config.law_name = a.law;
    if (a.opt_scale->count()) config.law_scale = a.law_scale;
    if (a.opt_grid->count()) config.L_grid = qv::parse_grid_list(a.L_grid, "--L-grid");
    if (a.opt_M->count()) config.replications = a.M;
    if (a.opt_route->count()) config.route = qv::route_from_name(a.route);
    if (a.opt_seed->count()) config.master_seed = a.seed;
    if (a.opt_kappa->count()) config.kappa = a.kappa;
    if (a.opt_eps->count()) config.concentration_eps = a.eps;
    if (a.opt_fixed->count()) config.fixed_steps = a.fixed_steps;
    if (a.no_fbm) config.includes_fbm = false;
    if (a.allow) config.allow_nonintegrable = true;
    qv::validate_config(config);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return config;
}

void write_report_files(const RunArgs& a, const qv::ExperimentReport& report,
                        json& stdout_json) {
  fs::create_directories(a.out_dir);
  fs::path csv_path = fs::path(a.out_dir) / (a.prefix + ".csv");
  fs::path json_path = fs::path(a.out_dir) / (a.prefix + ".json");
  std::ofstream csv(csv_path);
  if (!csv) throw std::runtime_error("cannot open output file '" + csv_path.string() + "'");
  qv::write_report_csv(csv, report);
  std::ofstream js(json_path);
  if (!js) throw std::runtime_error("cannot open output file '" + json_path.string() + "'");
  qv::write_report_json(js, report);
  stdout_json["csv"] = csv_path.string();
  stdout_json["json"] = json_path.string();
  if (a.emit_plot) {
    bool gaussian = report.norm.limit == qv::LimitKind::gaussian;
    fs::path dat_path =
        fs::path(a.out_dir) / (a.prefix + (gaussian ? "_ks.dat" : "_concentration.dat"));
    std::ofstream dat(dat_path);
    if (!dat) throw std::runtime_error("cannot open output file '" + dat_path.string() + "'");
    char buf[128];
    for (const qv::RowSummary& row : report.rows) {
      std::snprintf(buf, sizeof buf, "%.17g %.17g\n", row.L,
                    gaussian ? row.ks : row.within_band);
      dat << buf;
    }
    stdout_json["plot_data"] = dat_path.string();
  }
}

int run_clt(const RunArgs& a) {
  qv::ExperimentConfig config = build_config(a);
  qv::ExperimentReport report = qv::run_experiment(config);
  json out;
  write_report_files(a, report, out);
  out["rows"] = report.rows.size();
  std::cout << out.dump(2) << "\n";
  return 0;
}

int run_berry_esseen(const RunArgs& a) {
  qv::ExperimentConfig config = build_config(a);
  if (!config.includes_fbm)
    throw std::domain_error("berry-esseen needs the mixed model (includes_fbm = true)");
  qv::MixingLaw law = config.law();
  std::vector<double> rhos;
  for (double L : config.L_grid)
    rhos.push_back(qv::rho_bound(law, config.hurst(), config.horizon, L));
  qv::ExperimentReport report = qv::run_experiment(config);

  json out;
  write_report_files(a, report, out);
  out["triples"] = json::array();
  std::vector<std::pair<double, double>> rho_pts;
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    out["triples"].push_back({report.rows[i].L, report.rows[i].ks, rhos[i]});
    rho_pts.emplace_back(report.rows[i].L, rhos[i]);
  }
  out["ks_slope"] = report.ks_slope;
  out["ks_twice_slope"] = report.ks_twice_slope;
  out["rho_slope"] = report.rows.size() >= 2 ? qv::loglog_slope(rho_pts) : qv::kNan;
  if (a.emit_plot) {
    fs::path dat_path = fs::path(a.out_dir) / (a.prefix + "_rate.dat");
    std::ofstream dat(dat_path);
    if (!dat) throw std::runtime_error("cannot open output file '" + dat_path.string() + "'");
    char buf[192];
    for (std::size_t i = 0; i < report.rows.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g\n", report.rows[i].L,
                    report.rows[i].ks, rhos[i]);
      dat << buf;
    }
    out["rate_data"] = dat_path.string();
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"randomized periodogram estimator of quadratic variation"};
  app.require_subcommand(1);

  PathsArgs pa;
  CLI::App* cmd_paths = app.add_subcommand("paths", "simulate one mixed path as CSV");
  cmd_paths->add_option("--H", pa.H, "Hurst parameter");
  cmd_paths->add_option("--T", pa.T, "horizon");
  cmd_paths->add_option("--n", pa.n, "number of steps");
  cmd_paths->add_option("--seed", pa.seed, "master seed");
  cmd_paths->add_option("--stream", pa.stream, "stream index");
  cmd_paths->add_option("--method", pa.method, "cholesky or circulant");
  cmd_paths->add_option("--out", pa.out, "output file, '-' for stdout");
  cmd_paths->add_flag("--pure-bm", pa.pure_bm, "drop the fractional component");

  EstimateArgs ea;
  CLI::App* cmd_est = app.add_subcommand("estimate", "estimate quadratic variation on one simulated path");
  cmd_est->add_option("--route", ea.route, "direct-quadrature, kernel, or fft");
  cmd_est->add_option("--L", ea.L, "frequency scale");
  cmd_est->add_option("--law", ea.law, "mixing law");
  cmd_est->add_option("--law-scale", ea.law_scale, "law scale");
  cmd_est->add_option("--H", ea.H, "Hurst parameter");
  cmd_est->add_option("--T", ea.T, "horizon");
  cmd_est->add_option("--n", ea.n, "number of steps, 0 applies the resolution rule");
  cmd_est->add_option("--seed", ea.seed, "master seed");
  cmd_est->add_option("--stream", ea.stream, "stream index");
  cmd_est->add_option("--method", ea.method, "cholesky or circulant");
  cmd_est->add_flag("--pure-bm", ea.pure_bm, "drop the fractional component");

  TheoryArgs ta;
  CLI::App* cmd_theory = app.add_subcommand("theory", "print limit constants as JSON");
  cmd_theory->add_option("--law", ta.law, "mixing law");
  cmd_theory->add_option("--law-scale", ta.law_scale, "law scale");
  cmd_theory->add_option("--H", ta.H, "Hurst parameter");
  cmd_theory->add_option("--T", ta.T, "horizon");
  CLI::Option* opt_L = cmd_theory->add_option("--L", ta.L, "frequency scale for the rate bound");
  cmd_theory->add_flag("--chaos-terms", ta.chaos, "also compute the variance split a1, a2, a3");
  cmd_theory->add_option("--chaos-tol", ta.chaos_tol, "relative tolerance for the variance split");

  RunArgs ca;
  CLI::App* cmd_clt = app.add_subcommand("clt", "run a replication experiment from a config file");
  add_override_flags(cmd_clt, ca);

  RunArgs ba;
  CLI::App* cmd_be = app.add_subcommand("berry-esseen",
                                        "rate experiment: empirical KS against the theoretical bound");
  add_override_flags(cmd_be, ba);
  ba.prefix = "berry_esseen";

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    ta.l_given = opt_L->count() > 0;
    if (cmd_paths->parsed()) return run_paths(pa);
    if (cmd_est->parsed()) return run_estimate(ea);
    if (cmd_theory->parsed()) return run_theory(ta);
    if (cmd_clt->parsed()) return run_clt(ca);
    if (cmd_be->parsed()) return run_berry_esseen(ba);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
