#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <json.hpp>

#include "qvlab/limit_theory.hpp"
#include "qvlab/mixing_law.hpp"

namespace {

struct CmdResult {
  int status = -1;
  std::string output;
};

// Runs the binary named by QVLAB_BIN with stderr folded into stdout.
CmdResult run_cmd(const std::string& args) {
  const char* bin = std::getenv("QVLAB_BIN");
  if (bin == nullptr) return {-1, "QVLAB_BIN not set"};
  std::string cmd = std::string(bin) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return {-1, "popen failed"};
  std::string out;
  char buf[4096];
  std::size_t got;
  while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, got);
  int rc = pclose(pipe);
  return {WIFEXITED(rc) ? WEXITSTATUS(rc) : -1, out};
}

std::string slurp(const std::string& path) {
  std::ifstream is(path);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream os(path);
  os << content;
}

const char* kSmokeConfig =
    "h = 0.9\n"
    "law = gaussian\n"
    "L_grid = 4, 8\n"
    "M = 120\n"
    "master_seed = 777\n";

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("theory prints the limit constants") {
  CmdResult r = run_cmd("theory --law gaussian --T 1 --H 0.8");
  REQUIRE(r.status == 0);
  nlohmann::json j = nlohmann::json::parse(r.output);
  CHECK(j["sigma_sq"].get<double>() == doctest::Approx(1.7724539).epsilon(1e-6));
  CHECK(j["regime"] == "supercritical");
  CHECK(j["mu"].get<double>() > 0.0);
  CHECK(j["normalization"]["gamma"] == 0.5);

  r = run_cmd("theory --law gaussian --H 0.9 --T 1 --L 100");
  REQUIRE(r.status == 0);
  j = nlohmann::json::parse(r.output);
  CHECK(j["rho"].get<double>() == doctest::Approx(0.25118864315095796).epsilon(1e-12));

  r = run_cmd("theory --law cauchy --H 0.8 --T 1 --L 5 --chaos-terms --chaos-tol 1e-4");
  REQUIRE(r.status == 0);
  j = nlohmann::json::parse(r.output);
  CHECK(j["chaos_terms"]["a1"].get<double>() > 0.0);
  CHECK(j["chaos_terms"]["a2"].get<double>() > 0.0);
  CHECK(j["chaos_terms"]["a3"].get<double>() > 0.0);

  // The rate bound only exists above the critical exponent.
  r = run_cmd("theory --law gaussian --H 0.75 --T 1 --L 100");
  CHECK(r.status == 1);
  CHECK(r.output.find("(3/4, 1)") != std::string::npos);
}

TEST_CASE("theory refuses a nonintegrable law") {
  CmdResult r = run_cmd("theory --law uniform --T 1 --H 0.8");
  CHECK(r.status == 1);
  CHECK(r.output.find("not absolutely integrable") != std::string::npos);
}

TEST_CASE("usage errors exit with status two") {
  CHECK(run_cmd("theory --law gaussian --foo 3").status == 2);
  CHECK(run_cmd("").status == 2);
  CmdResult r = run_cmd("estimate --L 0 --route fft");
  CHECK(r.status == 2);
  CHECK(r.output.find("L must be > 0") != std::string::npos);
  CHECK(run_cmd("estimate --L -3").status == 2);
  CHECK(run_cmd("clt").status == 2);
  r = run_cmd("clt --config /nonexistent/qv.conf");
  CHECK(r.status == 2);
  CHECK(r.output.find("not found") != std::string::npos);
  r = run_cmd("--help");
  CHECK(r.status == 0);
  CHECK(r.output.find("estimate") != std::string::npos);
}

TEST_CASE("estimate prints one result") {
  const std::string flags = "--route fft --L 8 --law gaussian --H 0.8 --T 1 --n 64 --seed 5";
  CmdResult r = run_cmd("estimate " + flags);
  REQUIRE(r.status == 0);
  nlohmann::json j = nlohmann::json::parse(r.output);
  CHECK(j["n"] == 64);
  CHECK(j["route"] == "fft");
  CHECK(j["L"] == 8.0);
  double value = j["value"].get<double>();
  CHECK(std::isfinite(value));
  CHECK(value > 0.0);

  CmdResult again = run_cmd("estimate " + flags);
  REQUIRE(again.status == 0);
  CHECK(nlohmann::json::parse(again.output)["value"].get<double>() == value);

  CmdResult kernel = run_cmd(
      "estimate --route kernel --L 8 --law gaussian --H 0.8 --T 1 --n 64 --seed 5");
  REQUIRE(kernel.status == 0);
  CHECK(nlohmann::json::parse(kernel.output)["value"].get<double>() ==
        doctest::Approx(value).epsilon(1e-9));

  CmdResult twopt = run_cmd("estimate --law two-point --L 4 --T 1 --n 32 --seed 9");
  REQUIRE(twopt.status == 0);
  CHECK(std::isfinite(nlohmann::json::parse(twopt.output)["value"].get<double>()));
}

TEST_CASE("paths writes the same csv on rerun") {
  CmdResult r = run_cmd("paths --n 16 --seed 3 --H 0.7 --out /tmp/qvcli_paths_a.csv");
  REQUIRE(r.status == 0);
  CmdResult r2 = run_cmd("paths --n 16 --seed 3 --H 0.7 --out /tmp/qvcli_paths_b.csv");
  REQUIRE(r2.status == 0);
  std::string a = slurp("/tmp/qvcli_paths_a.csv");
  CHECK(a == slurp("/tmp/qvcli_paths_b.csv"));
  CHECK(a.substr(0, 15) == "k,t,dW,dBH,dX\n1");

  CmdResult stdout_mode = run_cmd("paths --n 8 --seed 2");
  REQUIRE(stdout_mode.status == 0);
  CHECK(stdout_mode.output.find("k,t,dW,dBH,dX") != std::string::npos);
}

TEST_CASE("clt runs a config file experiment") {
  write_file("/tmp/qvcli_smoke.conf", kSmokeConfig);
  CmdResult r = run_cmd(
      "clt --config /tmp/qvcli_smoke.conf --out-dir /tmp/qvcli_out --prefix smoke "
      "--emit-plot-data");
  REQUIRE(r.status == 0);

  std::string csv = slurp("/tmp/qvcli_out/smoke.csv");
  CHECK(csv.substr(0, 23) == "L,n,mean,variance,ks,M\n");
  nlohmann::json j = nlohmann::json::parse(slurp("/tmp/qvcli_out/smoke.json"));
  CHECK(j["config"]["law"] == "gaussian");
  CHECK(j["config"]["M"] == 120);
  CHECK(j["rows"].size() == 2);

  std::string dat = slurp("/tmp/qvcli_out/smoke_ks.dat");
  int lines = 0;
  for (char c : dat)
    if (c == '\n') ++lines;
  CHECK(lines == 2);

  // Identical primary output on a rerun.
  CmdResult again = run_cmd(
      "clt --config /tmp/qvcli_smoke.conf --out-dir /tmp/qvcli_out2 --prefix smoke");
  REQUIRE(again.status == 0);
  CHECK(slurp("/tmp/qvcli_out2/smoke.csv") == csv);

  // Flags override the file.
  CmdResult more = run_cmd(
      "clt --config /tmp/qvcli_smoke.conf --out-dir /tmp/qvcli_out3 --prefix smoke "
      "--M 150");
  REQUIRE(more.status == 0);
  nlohmann::json j3 = nlohmann::json::parse(slurp("/tmp/qvcli_out3/smoke.json"));
  CHECK(j3["config"]["M"] == 150);
  CHECK(j3["rows"][0]["M"] == 150);
}

TEST_CASE("berry esseen emits rate triples") {
  write_file("/tmp/qvcli_smoke.conf", kSmokeConfig);
  CmdResult r = run_cmd(
      "berry-esseen --config /tmp/qvcli_smoke.conf --out-dir /tmp/qvcli_be");
  REQUIRE(r.status == 0);
  nlohmann::json j = nlohmann::json::parse(r.output);
  REQUIRE(j["triples"].size() == 2);
  CHECK(j["triples"][0][0] == 4.0);
  double rho0 = qv::rho_bound(qv::make_law(qv::LawKind::gaussian), qv::HurstParam(0.9),
                              1.0, 4.0);
  CHECK(j["triples"][0][2].get<double>() == doctest::Approx(rho0).epsilon(1e-14));
  CHECK(j["triples"][0][1].get<double>() > 0.0);
  CHECK(j["rho_slope"].get<double>() == doctest::Approx(-0.3).epsilon(1e-2));
  CHECK(std::isfinite(j["ks_slope"].get<double>()));

  CmdResult wrong = run_cmd(
      "berry-esseen --config /tmp/qvcli_smoke.conf --out-dir /tmp/qvcli_be --H 0.6");
  CHECK(wrong.status == 1);
  CHECK(wrong.output.find("(3/4, 1)") != std::string::npos);
}

}  // TEST_SUITE
