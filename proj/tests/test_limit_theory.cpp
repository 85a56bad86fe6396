#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "qvlab/grid.hpp"
#include "qvlab/limit_theory.hpp"
#include "qvlab/paths.hpp"

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kSqrtPi = 1.7724538509055160273;

// Discrete counterpart of the chaos variance split: with kernel
// A_ij = phi(L|t_i - t_j|) on left endpoints and the exact increment
// covariances of W and B^H, the three trace terms tr((A S_W)^2),
// 2 tr(A S_W A S_B), tr((A S_B)^2) converge to a1, a2, a3 as n grows.
struct TraceTerms {
  double a1, a2, a3;
};

TraceTerms trace_oracle(const qv::MixingLaw& law, const qv::HurstParam& h,
                        double T, double L, int n) {
  double dt = T / n;
  Eigen::MatrixXd A(n, n);
  Eigen::MatrixXd SB(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      A(i, j) = law.charfn(L * dt * std::abs(i - j));
      SB(i, j) = qv::fgn_autocovariance(h, dt, i - j);
    }
  }
  TraceTerms out;
  out.a1 = dt * dt * A.array().square().sum();
  Eigen::MatrixXd M = A * SB;
  out.a2 = 2.0 * dt * A.cwiseProduct(M.transpose()).sum();
  out.a3 = M.cwiseProduct(M.transpose()).sum();
  return out;
}

}  // namespace

TEST_SUITE("limit_theory") {

TEST_CASE("regime classification and normalization table") {
  using qv::Regime;
  CHECK(qv::classify_regime(qv::HurstParam(0.9)) == Regime::supercritical);
  CHECK(qv::classify_regime(qv::HurstParam(0.75)) == Regime::critical);
  CHECK(qv::classify_regime(qv::HurstParam(0.6)) == Regime::subcritical);
  CHECK(qv::classify_regime(qv::HurstParam(0.5)) == Regime::pure_bm);
  CHECK(std::string(qv::regime_name(Regime::supercritical)) == "supercritical");
  CHECK(std::string(qv::regime_name(Regime::pure_bm)) == "pure-bm");

  qv::Normalization sup = qv::normalization(qv::HurstParam(0.9));
  CHECK(sup.gamma == 0.5);
  CHECK_FALSE(sup.center_at_mu);
  CHECK(sup.limit == qv::LimitKind::gaussian);
  CHECK(sup.regime == Regime::supercritical);

  qv::Normalization crit = qv::normalization(qv::HurstParam(0.75));
  CHECK(crit.gamma == 0.5);
  CHECK(crit.center_at_mu);
  CHECK(crit.limit == qv::LimitKind::gaussian);

  qv::Normalization sub = qv::normalization(qv::HurstParam(0.6));
  CHECK(sub.gamma == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(sub.center_at_mu);
  CHECK(sub.limit == qv::LimitKind::degenerate);

  qv::Normalization bm = qv::normalization(qv::HurstParam(0.5));
  CHECK(bm.gamma == 0.5);
  CHECK_FALSE(bm.center_at_mu);
  CHECK(bm.limit == qv::LimitKind::gaussian);
  CHECK(bm.regime == Regime::pure_bm);
}

TEST_CASE("variance constant closed forms") {
  qv::MixingLaw gauss = qv::make_law(qv::LawKind::gaussian);
  qv::MixingLaw cauchy = qv::make_law(qv::LawKind::cauchy);
  qv::MixingLaw tri = qv::make_law(qv::LawKind::triangular);

  CHECK(qv::sigma_sq(gauss, 1.0) == doctest::Approx(kSqrtPi).epsilon(1e-14));
  CHECK(qv::sigma_sq(cauchy, 1.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(qv::sigma_sq(tri, 1.0) ==
        doctest::Approx(4.1887902047863905).epsilon(1e-14));

  // linear in T, inverse in scale
  CHECK(qv::sigma_sq(gauss, 2.0) ==
        doctest::Approx(2.0 * qv::sigma_sq(gauss, 1.0)).epsilon(1e-14));
  qv::MixingLaw wide = qv::make_law(qv::LawKind::gaussian, 2.0);
  CHECK(qv::sigma_sq(wide, 1.0) == doctest::Approx(kSqrtPi / 2.0).epsilon(1e-14));

  CHECK_THROWS_WITH_AS(qv::sigma_sq(qv::make_law(qv::LawKind::uniform), 1.0),
                       doctest::Contains("not absolutely integrable"),
                       std::domain_error);
  CHECK_THROWS_AS(qv::sigma_sq(qv::make_law(qv::LawKind::two_point), 1.0),
                  std::domain_error);
  CHECK_THROWS_AS(qv::sigma_sq(gauss, 0.0), std::invalid_argument);
}

TEST_CASE("variance constant quadrature matches closed forms") {
  for (qv::LawKind kind : {qv::LawKind::gaussian, qv::LawKind::cauchy,
                           qv::LawKind::triangular}) {
    for (double scale : {1.0, 1.7}) {
      for (double T : {1.0, 2.3}) {
        qv::MixingLaw law = qv::make_law(kind, scale);
        double closed = qv::sigma_sq(law, T, qv::EvalMode::closed_form);
        double quad = qv::sigma_sq(law, T, qv::EvalMode::quadrature);
        CHECK(quad == doctest::Approx(closed).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("bias constant closed forms") {
  qv::MixingLaw gauss = qv::make_law(qv::LawKind::gaussian);
  qv::MixingLaw cauchy = qv::make_law(qv::LawKind::cauchy);
  qv::MixingLaw tri = qv::make_law(qv::LawKind::triangular);

  CHECK(qv::mu_bias(cauchy, qv::HurstParam(0.75), 1.0) ==
        doctest::Approx(1.3293403881791370).epsilon(1e-13));
  CHECK(qv::mu_bias(cauchy, qv::HurstParam(0.6), 1.0) ==
        doctest::Approx(1.1018024908797126).epsilon(1e-13));
  CHECK(qv::mu_bias(gauss, qv::HurstParam(0.75), 1.0) ==
        doctest::Approx(1.6168504121556961).epsilon(1e-13));
  CHECK(qv::mu_bias(gauss, qv::HurstParam(0.9), 1.0) ==
        doctest::Approx(2.1073529270481575).epsilon(1e-13));
  // triangular at the critical point collapses to sqrt(2 pi)
  CHECK(qv::mu_bias(tri, qv::HurstParam(0.75), 1.0) ==
        doctest::Approx(2.5066282746310002).epsilon(1e-13));
  CHECK(qv::mu_bias(tri, qv::HurstParam(0.6), 1.0) ==
        doctest::Approx(1.4553839425296971).epsilon(1e-13));

  // scale and horizon factors
  qv::MixingLaw cauchy2 = qv::make_law(qv::LawKind::cauchy, 2.0);
  CHECK(qv::mu_bias(cauchy2, qv::HurstParam(0.75), 1.0) ==
        doctest::Approx(0.93998560298662526).epsilon(1e-13));
  CHECK(qv::mu_bias(cauchy, qv::HurstParam(0.75), 2.0) ==
        doctest::Approx(2.0 * 1.3293403881791370).epsilon(1e-13));

  // alpha vanishes in the pure Brownian case, no quadrature involved
  CHECK(qv::mu_bias(gauss, qv::HurstParam(0.5), 1.0) == 0.0);

  CHECK_THROWS_WITH_AS(
      qv::mu_bias(qv::make_law(qv::LawKind::uniform), qv::HurstParam(0.75), 1.0),
      doctest::Contains("not absolutely integrable"), std::domain_error);
  CHECK_THROWS_AS(
      qv::mu_bias(qv::make_law(qv::LawKind::two_point), qv::HurstParam(0.75), 1.0),
      std::domain_error);
}

TEST_CASE("bias constant quadrature matches closed forms") {
  for (qv::LawKind kind : {qv::LawKind::gaussian, qv::LawKind::cauchy,
                           qv::LawKind::triangular}) {
    qv::MixingLaw law = qv::make_law(kind);
    for (double hv : {0.6, 0.75, 0.9}) {
      qv::HurstParam h(hv);
      double closed = qv::mu_bias(law, h, 1.0, qv::EvalMode::closed_form);
      double quad = qv::mu_bias(law, h, 1.0, qv::EvalMode::quadrature);
      CHECK(quad == doctest::Approx(closed).epsilon(1e-8));
    }
  }
  qv::MixingLaw scaled = qv::make_law(qv::LawKind::gaussian, 1.6);
  qv::HurstParam h(0.8);
  CHECK(qv::mu_bias(scaled, h, 1.4, qv::EvalMode::quadrature) ==
        doctest::Approx(qv::mu_bias(scaled, h, 1.4, qv::EvalMode::closed_form))
            .epsilon(1e-8));
}

TEST_CASE("berry esseen bound branches") {
  qv::MixingLaw gauss = qv::make_law(qv::LawKind::gaussian);

  // polynomial branch: the gaussian tail integral is astronomically smaller
  CHECK(qv::rho_bound(gauss, qv::HurstParam(0.9), 1.0, 100.0) ==
        doctest::Approx(0.25118864315095796).epsilon(1e-13));

  // tail branch: a very flat triangular law keeps phi^2 mass far out
  qv::MixingLaw flat = qv::make_law(qv::LawKind::triangular, 0.01);
  double tail = qv::tail_sq_integral(flat, 1.0, 1.0);
  CHECK(tail > 1.0);
  CHECK(qv::rho_bound(flat, qv::HurstParam(0.8), 1.0, 1.0) ==
        doctest::Approx(tail).epsilon(1e-12));

  // nonincreasing along a growing L grid
  double prev = qv::rho_bound(gauss, qv::HurstParam(0.85), 1.0, 10.0);
  for (double L : {100.0, 1000.0}) {
    double cur = qv::rho_bound(gauss, qv::HurstParam(0.85), 1.0, L);
    CHECK(cur < prev);
    prev = cur;
  }

  // h -> 3/4 from above sends the polynomial branch to L^0 = 1
  CHECK(qv::rho_bound(gauss, qv::HurstParam(0.7500001), 1.0, 50.0) ==
        doctest::Approx(1.0).epsilon(1e-5));

  CHECK_THROWS_WITH_AS(qv::rho_bound(gauss, qv::HurstParam(0.75), 1.0, 10.0),
                       doctest::Contains("(3/4, 1)"), std::domain_error);
  CHECK_THROWS_AS(qv::rho_bound(gauss, qv::HurstParam(0.6), 1.0, 10.0),
                  std::domain_error);
  CHECK_THROWS_AS(qv::rho_bound(gauss, qv::HurstParam(0.9), 1.0, 0.0),
                  std::invalid_argument);
  CHECK_THROWS_WITH_AS(
      qv::rho_bound(qv::make_law(qv::LawKind::uniform), qv::HurstParam(0.9), 1.0, 10.0),
      doctest::Contains("not absolutely integrable"), std::domain_error);
}

TEST_CASE("brownian variance term reproduces the truncated square integral") {
  qv::MixingLaw gauss = qv::make_law(qv::LawKind::gaussian);
  qv::HurstParam h(0.8);
  // gaussian T=1: L*a1 = 2 int_0^L e^{-z^2} dz -> sqrt(pi), already saturated
  // at L = 10
  for (double L : {10.0, 100.0, 1000.0}) {
    qv::ChaosVarianceTerms terms = qv::chaos_variance_terms(gauss, h, 1.0, L);
    CHECK(L * terms.a1 == doctest::Approx(kSqrtPi).epsilon(1e-10));
    CHECK(terms.L == L);
    CHECK(terms.quadrature_tol == 1e-5);
  }
  // cauchy T=1: L*a1 = 1 - e^{-2L}; at L=10 the deficit is e^{-20}
  qv::MixingLaw cauchy = qv::make_law(qv::LawKind::cauchy);
  double a1 = qv::chaos_variance_terms(cauchy, h, 1.0, 10.0).a1;
  CHECK(std::abs(10.0 * a1 - 1.0) > 1.5e-9);
  CHECK(std::abs(10.0 * a1 - 1.0) < 2.5e-9);
}

TEST_CASE("chaos variance terms match the discrete trace oracle") {
  struct Cell {
    qv::LawKind kind;
    double hv;
    double L;
  };
  const Cell cells[] = {
      {qv::LawKind::gaussian, 0.75, 2.0},
      {qv::LawKind::gaussian, 0.6, 2.0},
      {qv::LawKind::cauchy, 0.75, 3.0},
  };
  for (const Cell& cell : cells) {
    CAPTURE(static_cast<int>(cell.kind));
    CAPTURE(cell.hv);
    qv::MixingLaw law = qv::make_law(cell.kind);
    qv::HurstParam h(cell.hv);
    TraceTerms fine = trace_oracle(law, h, 1.0, cell.L, 1024);
    TraceTerms coarse = trace_oracle(law, h, 1.0, cell.L, 512);
    qv::ChaosVarianceTerms quad =
        qv::chaos_variance_terms(law, h, 1.0, cell.L, 1e-6);

    double d2 = std::abs(fine.a2 - coarse.a2);
    double d3 = std::abs(fine.a3 - coarse.a3);
    CHECK(std::abs(quad.a2 - fine.a2) <= 3.0 * d2 + 1e-4 * std::abs(fine.a2));
    CHECK(std::abs(quad.a3 - fine.a3) <= 3.0 * d3 + 1e-4 * std::abs(fine.a3));
  }
  // the gaussian discrete a1 has a closed windowed value at L=2
  qv::MixingLaw gauss = qv::make_law(qv::LawKind::gaussian);
  TraceTerms fine = trace_oracle(gauss, qv::HurstParam(0.75), 1.0, 2.0, 1024);
  CHECK(fine.a1 == doctest::Approx(0.63666030048460509).epsilon(5e-3));
}

TEST_CASE("scaled variance terms approach the variance constant") {
  struct Pick {
    qv::LawKind kind;
    double hv;
  };
  const Pick picks[] = {
      {qv::LawKind::gaussian, 0.8},
      {qv::LawKind::cauchy, 0.6},
  };
  for (const Pick& pick : picks) {
    qv::MixingLaw law = qv::make_law(pick.kind);
    qv::HurstParam h(pick.hv);
    double s2 = qv::sigma_sq(law, 1.0);
    double prev_gap = -1.0;
    std::vector<double> cross;
    for (double L : {10.0, 100.0, 1000.0}) {
      qv::ChaosVarianceTerms t = qv::chaos_variance_terms(law, h, 1.0, L);
      CHECK(t.a1 >= 0.0);
      CHECK(t.a2 >= 0.0);
      CHECK(t.a3 >= 0.0);
      double gap = std::abs(L * (t.a1 + t.a2 + t.a3) - s2);
      cross.push_back(L * (t.a2 + t.a3));
      if (prev_gap >= 0.0) CHECK(gap < prev_gap);
      if (cross.size() > 1) CHECK(cross.back() < cross[cross.size() - 2]);
      prev_gap = gap;
    }
    // the cross terms contract by about 10^{1-2H} per decade in L once the
    // faster a3 component has faded
    double ratio = cross[2] / cross[1];
    double expected = std::pow(10.0, 1.0 - 2.0 * pick.hv);
    CHECK(ratio > 0.6 * expected);
    CHECK(ratio < 1.15 * expected);
  }
}

TEST_CASE("variance terms degenerate for pure brownian input") {
  qv::MixingLaw gauss = qv::make_law(qv::LawKind::gaussian);
  qv::ChaosVarianceTerms t =
      qv::chaos_variance_terms(gauss, qv::HurstParam(0.5), 1.0, 50.0);
  CHECK(t.a2 == 0.0);
  CHECK(t.a3 == 0.0);
  CHECK(t.a1 > 0.0);
  CHECK(50.0 * t.a1 == doctest::Approx(kSqrtPi).epsilon(1e-12));
}

TEST_CASE("variance terms input validation") {
  qv::MixingLaw gauss = qv::make_law(qv::LawKind::gaussian);
  qv::HurstParam h(0.75);
  CHECK_THROWS_WITH_AS(
      qv::chaos_variance_terms(qv::make_law(qv::LawKind::uniform), h, 1.0, 10.0),
      doctest::Contains("not absolutely integrable"), std::domain_error);
  CHECK_THROWS_AS(
      qv::chaos_variance_terms(qv::make_law(qv::LawKind::two_point), h, 1.0, 10.0),
      std::domain_error);
  CHECK_THROWS_AS(qv::chaos_variance_terms(gauss, h, 1.0, 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(qv::chaos_variance_terms(gauss, h, 1.0, -3.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(qv::chaos_variance_terms(gauss, h, 1.0, 10.0, 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(qv::chaos_variance_terms(gauss, h, 0.0, 10.0),
                  std::invalid_argument);
}

TEST_CASE("limit constants bundle") {
  qv::MixingLaw cauchy = qv::make_law(qv::LawKind::cauchy);
  qv::LimitConstants lc = qv::limit_constants(cauchy, qv::HurstParam(0.75), 2.0);
  CHECK(lc.sigma_sq == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(lc.mu == doctest::Approx(2.0 * 1.3293403881791370).epsilon(1e-13));
  CHECK(lc.alpha_h == doctest::Approx(0.375).epsilon(1e-14));
  CHECK(lc.regime == qv::Regime::critical);

  // sigma_sq carries no H dependence
  qv::LimitConstants other = qv::limit_constants(cauchy, qv::HurstParam(0.9), 2.0);
  CHECK(other.sigma_sq == lc.sigma_sq);
  CHECK(other.regime == qv::Regime::supercritical);
}

}
