#include <doctest.h>

#include <cmath>

#include "qvlab/quadrature.hpp"

using namespace qv;

TEST_SUITE("quadrature") {

TEST_CASE("gk15 panel is exact on low-degree polynomials") {
  auto [v4, e4] = gk15_panel([](double x) { return x * x * x * x; }, 0.0, 1.0);
  CHECK(v4 == doctest::Approx(0.2).epsilon(1e-14));
  auto [vs, es] = gk15_panel([](double x) { return std::sin(x); }, 0.0, M_PI);
  CHECK(vs == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(es < 1e-10);
}

TEST_CASE("adaptive integration of a gaussian bump") {
  PanelOptions opt;
  opt.rel_tol = 1e-12;
  auto r = integrate_gk([](double x) { return std::exp(-x * x); }, 0.0, 10.0, opt);
  CHECK(r.value == doctest::Approx(std::sqrt(M_PI) / 2.0).epsilon(1e-12));
}

TEST_CASE("adaptive integration of a sharp peak") {
  PanelOptions opt;
  opt.rel_tol = 1e-10;
  double eps = 1e-6;
  auto r = integrate_gk([eps](double x) { return 1.0 / (eps + x * x); }, -1.0,
                        1.0, opt);
  double expected = 2.0 / std::sqrt(eps) * std::atan(1.0 / std::sqrt(eps));
  CHECK(r.value == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("panel width cap resolves oscillations") {
  PanelOptions opt;
  opt.rel_tol = 1e-11;
  opt.max_panel_width = M_PI / 2.0;
  auto r = integrate_gk([](double x) { double s = std::sin(x); return s * s; },
                        0.0, 100.0 * M_PI, opt);
  CHECK(r.value == doctest::Approx(50.0 * M_PI).epsilon(1e-11));
}

TEST_CASE("split points become panel boundaries") {
  PanelOptions opt;
  opt.rel_tol = 1e-12;
  opt.split_points = {0.5};
  auto r = integrate_gk([](double x) { return std::abs(x - 0.5); }, 0.0, 1.0, opt);
  CHECK(r.value == doctest::Approx(0.25).epsilon(1e-13));
}

TEST_CASE("left-endpoint power singularity") {
  PanelOptions opt;
  opt.rel_tol = 1e-11;
  auto r = integrate_singular_left([](double x) { return std::pow(x, -0.4); },
                                   0.0, 1.0, -0.4, opt);
  CHECK(r.value == doctest::Approx(1.0 / 0.6).epsilon(1e-11));

  auto r2 = integrate_singular_left(
      [](double x) { return std::pow(x, -0.4) * (1.0 + x); }, 0.0, 1.0, -0.4, opt);
  CHECK(r2.value == doctest::Approx(1.0 / 0.6 + 1.0 / 1.6).epsilon(1e-11));
}

TEST_CASE("right-endpoint power singularity") {
  PanelOptions opt;
  opt.rel_tol = 1e-11;
  auto r = integrate_singular_right(
      [](double x) { return std::pow(1.0 - x, -0.5); }, 0.0, 1.0, -0.5, opt);
  CHECK(r.value == doctest::Approx(2.0).epsilon(1e-11));
}

TEST_CASE("budget exhaustion reports brackets") {
  PanelOptions opt;
  opt.rel_tol = 1e-14;
  opt.max_evaluations = 200;
  bool threw = false;
  try {
    integrate_gk([](double x) { return std::sin(1.0 / (x + 1e-8)); }, 0.0, 1.0,
                 opt);
  } catch (const QuadratureError& e) {
    threw = true;
    CHECK(e.lower <= e.upper);
  }
  CHECK(threw);
}

}  // TEST_SUITE
