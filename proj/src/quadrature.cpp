#include "qvlab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "qvlab/summation.hpp"

namespace qv {

namespace {

struct Gk15Rule {
  // nonnegative abscissas with Kronrod weights; gauss weight is zero for the
  // Kronrod-only points
  std::vector<double> x, wk, wg;

  Gk15Rule() {
    using K = boost::math::quadrature::gauss_kronrod<double, 15>;
    using G = boost::math::quadrature::gauss<double, 7>;
    const auto& xk = K::abscissa();
    const auto& wkk = K::weights();
    const auto& xg = G::abscissa();
    const auto& wgg = G::weights();
    for (std::size_t i = 0; i < xk.size(); ++i) {
      x.push_back(xk[i]);
      wk.push_back(wkk[i]);
      double gw = 0.0;
      for (std::size_t j = 0; j < xg.size(); ++j)
        if (std::abs(xg[j] - xk[i]) < 1e-12) gw = wgg[j];
      wg.push_back(gw);
    }
  }
};

const Gk15Rule& rule() {
  static const Gk15Rule r;
  return r;
}

struct Panel {
  double a, b;
  double value;
  double error;
};

}  // namespace

std::pair<double, double> gk15_panel(const std::function<double(double)>& f,
                                     double a, double b) {
  const Gk15Rule& r = rule();
  double c = 0.5 * (a + b);
  double h = 0.5 * (b - a);
  double kron = 0.0, gauss = 0.0;
  for (std::size_t i = 0; i < r.x.size(); ++i) {
    double fi;
    if (r.x[i] == 0.0) {
      fi = f(c);
    } else {
      fi = f(c + h * r.x[i]) + f(c - h * r.x[i]);
    }
    kron += r.wk[i] * fi;
    gauss += r.wg[i] * fi;
  }
  kron *= h;
  gauss *= h;
  return {kron, std::abs(kron - gauss)};
}

QuadratureResult integrate_gk(const std::function<double(double)>& f, double a,
                              double b, const PanelOptions& opt) {
  if (!(b > a)) return {0.0, 0.0, 0};

  std::vector<double> bounds{a};
  for (double s : opt.split_points)
    if (s > a && s < b) bounds.push_back(s);
  bounds.push_back(b);
  std::sort(bounds.begin(), bounds.end());
  bounds.erase(std::unique(bounds.begin(), bounds.end()), bounds.end());

  std::vector<Panel> panels;
  long evals = 0;
  auto add_panel = [&](double lo, double hi) {
    if (evals + 15 > opt.max_evaluations)
      throw QuadratureError("quadrature budget exhausted while seeding panels",
                            -HUGE_VAL, HUGE_VAL);
    auto [v, e] = gk15_panel(f, lo, hi);
    evals += 15;
    panels.push_back({lo, hi, v, e});
  };

  for (std::size_t i = 0; i + 1 < bounds.size(); ++i) {
    double lo = bounds[i], hi = bounds[i + 1];
    if (opt.max_panel_width > 0.0 && hi - lo > opt.max_panel_width) {
      long pieces = static_cast<long>(std::ceil((hi - lo) / opt.max_panel_width));
      double w = (hi - lo) / pieces;
      for (long k = 0; k < pieces; ++k)
        add_panel(lo + k * w, k + 1 == pieces ? hi : lo + (k + 1) * w);
    } else {
      add_panel(lo, hi);
    }
  }

  // max-heap of (error at push time, panel index); entries whose stored error
  // no longer matches the panel are stale and skipped
  std::priority_queue<std::pair<double, std::size_t>> heap;
  for (std::size_t i = 0; i < panels.size(); ++i)
    heap.push({panels[i].error, i});

  double total = 0.0, toterr = 0.0;
  for (const Panel& p : panels) {
    total += p.value;
    toterr += p.error;
  }

  double min_width = (b - a) * 1e-15;
  auto tolerance = [&] {
    return std::max(opt.abs_tol, opt.rel_tol * std::abs(total));
  };

  while (toterr > tolerance() && !heap.empty()) {
    if (evals + 30 > opt.max_evaluations)
      throw QuadratureError(
          "quadrature budget exhausted before tolerance; bracketing [" +
              std::to_string(total - toterr) + ", " +
              std::to_string(total + toterr) + "]",
          total - toterr, total + toterr);
    auto [err, idx] = heap.top();
    heap.pop();
    Panel p = panels[idx];
    if (err != p.error) continue;
    if (p.error <= 0.0 || p.b - p.a <= min_width) continue;
    double mid = 0.5 * (p.a + p.b);
    auto [lv, le] = gk15_panel(f, p.a, mid);
    auto [rv, re] = gk15_panel(f, mid, p.b);
    evals += 30;
    total += (lv + rv) - p.value;
    toterr += (le + re) - p.error;
    panels[idx] = {p.a, mid, lv, le};
    panels.push_back({mid, p.b, rv, re});
    heap.push({le, idx});
    heap.push({re, panels.size() - 1});
  }

  // final pass in spatial order so the result does not depend on the
  // refinement history
  std::sort(panels.begin(), panels.end(),
            [](const Panel& l, const Panel& r) { return l.a < r.a; });
  NeumaierSum acc;
  NeumaierSum err;
  for (const Panel& p : panels) {
    acc.add(p.value);
    err.add(p.error);
  }
  return {acc.value(), err.value(), evals};
}

QuadratureResult integrate_singular_left(const std::function<double(double)>& f,
                                         double a, double b, double p,
                                         const PanelOptions& opt) {
  if (!(p > -1.0))
    throw std::invalid_argument("integrate_singular_left: exponent must be > -1");
  if (!(b > a)) return {0.0, 0.0, 0};
  double q = p + 1.0;
  double inv = 1.0 / q;
  double upper = std::pow(b - a, q);
  auto g = [&, a](double u) {
    double step = std::pow(u, inv);
    return f(a + step) * inv * std::pow(u, inv - 1.0);
  };
  return integrate_gk(g, 0.0, upper, opt);
}

QuadratureResult integrate_singular_right(const std::function<double(double)>& f,
                                          double a, double b, double p,
                                          const PanelOptions& opt) {
  auto flipped = [&, a, b](double x) { return f(a + b - x); };
  return integrate_singular_left(flipped, a, b, p, opt);
}

}  // namespace qv
