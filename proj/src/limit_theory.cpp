#include "qvlab/limit_theory.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <boost/math/special_functions/gamma.hpp>

#include "qvlab/quadrature.hpp"

namespace qv {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

void require_integrable(const MixingLaw& law) {
  if (!law.integrable_charfn())
    throw std::domain_error(detail::nonintegrable_message(law));
}

void require_horizon(double T) {
  if (!(T > 0.0) || !std::isfinite(T))
    throw std::invalid_argument("horizon T must be finite and positive");
}

// Length of {s in [0, T] : s + a_i in [0, T] for every offset a_i}; the
// offsets enter through their running max and min against 0.
double overlap2(double a, double b, double T) {
  double hi = std::max(std::max(a, b), 0.0);
  double lo = std::min(std::min(a, b), 0.0);
  double v = T - hi + lo;
  return v > 0.0 ? v : 0.0;
}

double overlap3(double z, double w, double x, double T) {
  double hi = std::max(std::max(z, w), std::max(x, 0.0));
  double lo = std::min(std::min(z, w), std::min(x, 0.0));
  double v = T - hi + lo;
  return v > 0.0 ? v : 0.0;
}

double sigma_sq_closed(const MixingLaw& law, double T) {
  switch (law.kind) {
    case LawKind::gaussian:
      return T * std::sqrt(kPi) / law.scale;
    case LawKind::cauchy:
      return T / law.scale;
    case LawKind::triangular:
      return 4.0 * kPi * T / (3.0 * law.scale);
    default:
      break;
  }
  throw std::invalid_argument(std::string("sigma_sq: no closed form for the ") +
                              law.name() + " law");
}

double sigma_sq_quadrature(const MixingLaw& law, double T) {
  if (law.kind == LawKind::triangular)
    return 2.0 * T * detail::tail_sq_integral_unchecked(law, 0.0, 1.0);
  double cut = law.charfn_cutoff(1e-13);
  PanelOptions opt;
  opt.rel_tol = 1e-12;
  opt.max_panel_width = cut / 8.0;
  auto f = [&law](double x) {
    double c = law.charfn(x);
    return c * c;
  };
  // truncation error is below 1e-13 times the absolute integral of phi
  return 2.0 * T * integrate_gk(f, 0.0, cut, opt).value;
}

double mu_closed(const MixingLaw& law, const HurstParam& h, double T) {
  double a = h.alpha();
  double hh = h.h;
  double sfac = std::pow(law.scale, 1.0 - 2.0 * hh);
  switch (law.kind) {
    case LawKind::gaussian:
      // int_0^inf e^{-x^2/2} x^{2H-2} dx = 2^{H-3/2} Gamma(H-1/2)
      return 2.0 * a * T * std::pow(2.0, hh - 1.5) *
             boost::math::tgamma(hh - 0.5) * sfac;
    case LawKind::cauchy:
      // int_0^inf e^{-x} x^{2H-2} dx = Gamma(2H-1)
      return 2.0 * a * T * boost::math::tgamma(2.0 * hh - 1.0) * sfac;
    case LawKind::triangular: {
      // int_0^inf x^{b-1}(1-cos x) dx = -Gamma(b) cos(pi b/2) for -2 < b < 0
      double b = 2.0 * hh - 3.0;
      return 4.0 * a * T * (-boost::math::tgamma(b) * std::cos(0.5 * kPi * b)) *
             sfac;
    }
    default:
      break;
  }
  throw std::invalid_argument(std::string("mu_bias: no closed form for the ") +
                              law.name() + " law");
}

double mu_quadrature(const MixingLaw& law, const HurstParam& h, double T) {
  double p = 2.0 * h.h - 2.0;
  auto f = [&law, p](double x) { return law.charfn(x) * std::pow(x, p); };

  PanelOptions head;
  head.rel_tol = 1e-10;
  double total = integrate_singular_left(f, 0.0, 1.0, p, head).value;

  double x_lo = 1.0;
  double osc_cap = 0.5 * kPi / law.scale;
  for (int k = 0; k < 64; ++k) {
    double bound = std::pow(x_lo, p) * detail::charfn_abs_tail_bound(law, x_lo);
    if (bound <= 1e-9 * std::abs(total)) {
      return 2.0 * h.alpha() * T * total;
    }
    double x_hi = 2.0 * x_lo;
    PanelOptions opt;
    opt.rel_tol = 1e-9;
    opt.abs_tol = 2e-11 * std::abs(total);
    opt.max_panel_width = std::max(osc_cap, (x_hi - x_lo) / 64.0);
    total += integrate_gk(f, x_lo, x_hi, opt).value;
    x_lo = x_hi;
  }
  throw std::runtime_error("mu_bias: tail integration did not converge");
}

}  // namespace

const char* regime_name(Regime r) {
  switch (r) {
    case Regime::supercritical:
      return "supercritical";
    case Regime::critical:
      return "critical";
    case Regime::subcritical:
      return "subcritical";
    case Regime::pure_bm:
      return "pure-bm";
  }
  return "unknown";
}

Regime classify_regime(const HurstParam& h) {
  if (h.h == 0.5) return Regime::pure_bm;
  if (h.h > 0.75) return Regime::supercritical;
  if (h.h == 0.75) return Regime::critical;
  return Regime::subcritical;
}

double sigma_sq(const MixingLaw& law, double T, EvalMode mode) {
  require_integrable(law);
  require_horizon(T);
  if (mode == EvalMode::quadrature) return sigma_sq_quadrature(law, T);
  return sigma_sq_closed(law, T);
}

double mu_bias(const MixingLaw& law, const HurstParam& h, double T, EvalMode mode) {
  require_integrable(law);
  require_horizon(T);
  if (h.h == 0.5) return 0.0;
  if (mode == EvalMode::quadrature) return mu_quadrature(law, h, T);
  return mu_closed(law, h, T);
}

double rho_bound(const MixingLaw& law, const HurstParam& h, double T, double L) {
  require_integrable(law);
  require_horizon(T);
  if (!(h.h > 0.75 && h.h < 1.0))
    throw std::domain_error(
        "rho_bound requires H in (3/4, 1); the Berry-Esseen bound holds only "
        "under that hypothesis");
  if (!(L > 0.0) || !std::isfinite(L))
    throw std::invalid_argument("rho_bound: L must be finite and positive");
  double poly = std::pow(L, 1.5 - 2.0 * h.h);
  double tail = tail_sq_integral(law, L, T);
  return std::max(poly, tail);
}

ChaosVarianceTerms chaos_variance_terms(const MixingLaw& law, const HurstParam& h,
                                        double T, double L, double tol) {
  require_integrable(law);
  require_horizon(T);
  if (!(L > 0.0) || !std::isfinite(L))
    throw std::invalid_argument("chaos_variance_terms: L must be finite and positive");
  if (!(tol > 0.0) || !std::isfinite(tol))
    throw std::invalid_argument("chaos_variance_terms: tol must be positive");

  ChaosVarianceTerms out;
  out.L = L;
  out.quadrature_tol = tol;
  double s2 = sigma_sq(law, T);
  out.a1 = (s2 - 2.0 * T * T * tail_sq_integral(law, L, T)) / L;
  if (h.h == 0.5) return out;

  double alpha = h.alpha();
  double p = 2.0 * h.h - 2.0;
  double q = p + 1.0;
  double cut = law.charfn_cutoff(1e-12);
  double ycap = std::min(1.0, 1.0 / law.scale);

  PanelOptions inner_base;
  inner_base.rel_tol = std::max(1e-9, 1e-3 * tol);
  inner_base.abs_tol = 1e-10 * T / L;
  inner_base.max_panel_width = ycap;
  inner_base.max_evaluations = 2'000'000;

  try {
    // cross term: 4 alpha int_0^{2T} d^{2H-2} G(d) dd with G the windowed
    // phi * phi convolution at lag d, written in y = L z units
    auto big_g = [&](double d) {
      double ylo = std::max(-L * T, -cut);
      double yhi = std::min(L * (T - d), cut);
      if (!(yhi > ylo)) return 0.0;
      PanelOptions opt = inner_base;
      opt.split_points = {0.0, -L * d};
      auto f = [&](double y) {
        return law.charfn(y) * law.charfn(y + L * d) *
               overlap2(y / L, y / L + d, T);
      };
      return integrate_gk(f, ylo, yhi, opt).value / L;
    };
    {
      PanelOptions opt;
      opt.rel_tol = 0.25 * tol;
      opt.abs_tol = 1e-6 * tol * s2 / (L * alpha);
      opt.max_evaluations = 200'000;
      double bump = std::min(2.0 * T, 3.0 * cut / L);
      opt.split_points = {std::pow(0.125 * bump, q), std::pow(bump, q)};
      auto f = [&](double d) { return std::pow(d, p) * big_g(d); };
      out.a2 =
          4.0 * alpha * integrate_singular_left(f, 0.0, 2.0 * T, p, opt).value;
    }

    // fractional-fractional term: outer pair (w, r) carries both singular
    // weights, the inner convolution J folds the remaining time variable
    auto inner_j = [&](double wv, double rho) {
      double shift = L * (rho - wv);
      double ylo = std::max(-L * T, -cut);
      double yhi = std::min(L * T, cut);
      if (!(yhi > ylo)) return 0.0;
      PanelOptions opt = inner_base;
      opt.split_points = {0.0, -shift, L * wv, -L * rho};
      auto f = [&](double y) {
        return law.charfn(y) * law.charfn(y + shift) *
               overlap3(y / L, wv, rho + y / L, T);
      };
      return integrate_gk(f, ylo, yhi, opt).value / L;
    };

    // the phi product dies once |rho - w| outruns the charfn support
    double strip = 3.0 * cut / L;
    double floor3 = 1e-6 * tol * s2 / (L * alpha * alpha);
    double mid_abs = 0.1 * floor3;

    auto rho_same_sign = [&](double wv) {
      auto f = [&](double rho) { return std::pow(rho, p) * inner_j(wv, rho); };
      PanelOptions opt;
      opt.rel_tol = 0.125 * tol;
      opt.abs_tol = mid_abs;
      opt.max_evaluations = 500'000;
      double lo = wv - strip;
      double hi = std::min(T, wv + strip);
      if (lo > 0.0) {
        opt.split_points = {wv};
        return integrate_gk(f, lo, hi, opt).value;
      }
      if (wv > 0.0 && wv < hi) opt.split_points = {std::pow(wv, q)};
      return integrate_singular_left(f, 0.0, hi, p, opt).value;
    };
    double qpp;
    {
      PanelOptions opt;
      opt.rel_tol = 0.25 * tol;
      opt.abs_tol = 0.25 * floor3;
      opt.max_evaluations = 100'000;
      opt.split_points = {std::pow(std::min(T, strip), q)};
      auto f = [&](double wv) { return std::pow(wv, p) * rho_same_sign(wv); };
      qpp = integrate_singular_left(f, 0.0, T, p, opt).value;
    }

    // opposite signs: both phi factors overlap only near the origin corner
    double bm = std::min(T, strip);
    auto rho_opp_sign = [&](double wv) {
      auto f = [&](double rho) { return std::pow(rho, p) * inner_j(wv, -rho); };
      PanelOptions opt;
      opt.rel_tol = 0.125 * tol;
      opt.abs_tol = mid_abs;
      opt.max_evaluations = 500'000;
      return integrate_singular_left(f, 0.0, bm, p, opt).value;
    };
    double qpm;
    {
      PanelOptions opt;
      opt.rel_tol = 0.25 * tol;
      opt.abs_tol = 0.25 * floor3;
      opt.max_evaluations = 100'000;
      auto f = [&](double wv) { return std::pow(wv, p) * rho_opp_sign(wv); };
      qpm = integrate_singular_left(f, 0.0, bm, p, opt).value;
    }
    out.a3 = 2.0 * alpha * alpha * (qpp + qpm);
  } catch (const QuadratureError& e) {
    throw std::runtime_error(std::string("chaos_variance_terms: ") + e.what());
  }
  return out;
}

Normalization normalization(const HurstParam& h) {
  Normalization out;
  out.regime = classify_regime(h);
  switch (out.regime) {
    case Regime::pure_bm:
    case Regime::supercritical:
      out.gamma = 0.5;
      out.center_at_mu = false;
      out.limit = LimitKind::gaussian;
      break;
    case Regime::critical:
      out.gamma = 0.5;
      out.center_at_mu = true;
      out.limit = LimitKind::gaussian;
      break;
    case Regime::subcritical:
      out.gamma = 2.0 * h.h - 1.0;
      out.center_at_mu = true;
      out.limit = LimitKind::degenerate;
      break;
  }
  return out;
}

LimitConstants limit_constants(const MixingLaw& law, const HurstParam& h, double T) {
  LimitConstants out;
  out.sigma_sq = sigma_sq(law, T);
  out.mu = mu_bias(law, h, T);
  out.alpha_h = h.alpha();
  out.regime = classify_regime(h);
  return out;
}

}  // namespace qv
