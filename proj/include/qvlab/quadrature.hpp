#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace qv {

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  long evaluations = 0;
};

// Thrown when the panel budget runs out before the tolerance is met; carries
// the last bracketing estimates.
struct QuadratureError : std::runtime_error {
  double lower;
  double upper;
  QuadratureError(const std::string& msg, double lo, double hi)
      : std::runtime_error(msg), lower(lo), upper(hi) {}
};

struct PanelOptions {
  double rel_tol = 1e-10;
  double abs_tol = 0.0;
  // 0 means unlimited; otherwise the initial panels are no wider than this
  // (used to keep oscillatory integrands resolved)
  double max_panel_width = 0.0;
  long max_evaluations = 20'000'000;
  std::vector<double> split_points;
};

// One Gauss-Kronrod 7-15 panel: returns the Kronrod value and |Kronrod - Gauss|.
std::pair<double, double> gk15_panel(const std::function<double(double)>& f,
                                     double a, double b);

// Adaptive bisection on [a, b], worst panel first, deterministic left-to-right
// compensated accumulation of the final panel set.
QuadratureResult integrate_gk(const std::function<double(double)>& f, double a,
                              double b, const PanelOptions& opt);

// Integral of f over [a, b] where f carries an algebraic factor |x - a|^p
// (p > -1) at the left endpoint. The substitution x = a + u^{1/(p+1)} absorbs
// the singularity exactly; f is evaluated as given, never at x = a.
QuadratureResult integrate_singular_left(const std::function<double(double)>& f,
                                         double a, double b, double p,
                                         const PanelOptions& opt);

// Mirror image: singular factor |b - x|^p at the right endpoint.
QuadratureResult integrate_singular_right(const std::function<double(double)>& f,
                                          double a, double b, double p,
                                          const PanelOptions& opt);

}  // namespace qv
